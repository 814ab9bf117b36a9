//! Skew-symmetric bilinear brackets on `Rⁿ` and the `Glₙ` action on them.
//!
//! Indices are 0-based throughout the library; file formats use 1-based indices.
//! A coefficient `(i, j, k)` with `i < j` is `⟨μ(e_i, e_j), e_k⟩`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{null_space, rank, rref, LinearMap};
use crate::scalar::{Rational, Scalar, ScalarMode};

/// Default tolerance for float predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BracketTensor<S> {
    dim: usize,
    coeffs: BTreeMap<(usize, usize, usize), S>,
}

impl<S: Scalar> BracketTensor<S> {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(Self {
            dim,
            coeffs: BTreeMap::new(),
        })
    }

    /// Builds a bracket from `(i, j, k, c)` meaning `μ(e_i, e_j) ∋ c·e_k`.
    ///
    /// `(j, i, k, c)` is stored as `(i, j, k, −c)`. Repeated entries accumulate.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize, S)>,
    ) -> Result<Self> {
        let mut t = Self::zero(dim)?;
        for (i, j, k, c) in entries {
            for (name, idx) in [("i", i), ("j", j), ("k", k)] {
                if idx >= dim {
                    return Err(Error::IndexOutOfRange(format!(
                        "{name}={} outside 1..={dim}",
                        idx + 1
                    )));
                }
            }
            if i == j {
                if c.is_zero() {
                    continue;
                }
                return Err(Error::IndexOutOfRange(format!(
                    "μ(e{0}, e{0}) must vanish",
                    i + 1
                )));
            }
            let (key, val) = if i < j { ((i, j, k), c) } else { ((j, i, k), -c) };
            t.add_coeff(key, val);
        }
        Ok(t)
    }

    fn add_coeff(&mut self, key: (usize, usize, usize), val: S) {
        let entry = self.coeffs.entry(key).or_insert_with(S::zero);
        *entry = entry.clone() + val;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scalar_mode(&self) -> ScalarMode {
        S::MODE
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored coefficients `(i, j, k) ↦ c` with `i < j`.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize, usize), &S)> {
        self.coeffs.iter()
    }

    /// `⟨μ(e_i, e_j), e_k⟩` for any ordered pair.
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> S {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => S::zero(),
            Ordering::Less => self.coeffs.get(&(i, j, k)).cloned().unwrap_or_else(S::zero),
            Ordering::Greater => -self.coeffs.get(&(j, i, k)).cloned().unwrap_or_else(S::zero),
        }
    }

    /// `μ(e_i, e_j)` as a dense vector.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        if i == j {
            return out;
        }
        let (a, b, sign) = if i < j { (i, j, false) } else { (j, i, true) };
        for (&(_, _, k), c) in self.coeffs.range((a, b, 0)..=(a, b, self.dim)) {
            out[k] = if sign { -c.clone() } else { c.clone() };
        }
        out
    }

    fn check_len(&self, v: &[S]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: n,
            });
        }
        Ok(())
    }

    /// `μ(x, y)`.
    pub fn eval(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    fn eval_unchecked(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for (&(i, j, k), c) in &self.coeffs {
            let w = x[i].clone() * y[j].clone() - x[j].clone() * y[i].clone();
            if !w.is_zero() {
                out[k] = out[k].clone() + c.clone() * w;
            }
        }
        out
    }

    /// Builds a tensor from a dense evaluation `(i, j) ↦ μ(e_i, e_j)` over `i < j`.
    fn from_pairs(dim: usize, mut f: impl FnMut(usize, usize) -> Vec<S>) -> Self {
        let mut coeffs = BTreeMap::new();
        for i in 0..dim {
            for j in i + 1..dim {
                for (k, c) in f(i, j).into_iter().enumerate() {
                    if !c.is_zero() {
                        coeffs.insert((i, j, k), c);
                    }
                }
            }
        }
        Self { dim, coeffs }
    }

    /// `(g.μ)(x, y) = g μ(g⁻¹x, g⁻¹y)`.
    pub fn act(&self, g: &LinearMap<S>) -> Result<Self> {
        self.check_dim(g.dim())?;
        self.act_with_inverse(g, &g.inverse()?)
    }

    /// [`BracketTensor::act`] with a caller-supplied `g⁻¹`.
    pub fn act_with_inverse(&self, g: &LinearMap<S>, h: &LinearMap<S>) -> Result<Self> {
        self.check_dim(g.dim())?;
        self.check_dim(h.dim())?;
        let cols: Vec<Vec<S>> = (0..self.dim)
            .map(|a| (0..self.dim).map(|r| h.get(r, a).clone()).collect())
            .collect();
        Ok(Self::from_pairs(self.dim, |a, b| {
            g.apply(&self.eval_unchecked(&cols[a], &cols[b]))
        }))
    }

    /// `π(α)μ = αμ(·,·) − μ(α·,·) − μ(·,α·)`.
    pub fn rep(&self, alpha: &LinearMap<S>) -> Result<Self> {
        self.check_dim(alpha.dim())?;
        let cols: Vec<Vec<S>> = (0..self.dim)
            .map(|a| (0..self.dim).map(|r| alpha.get(r, a).clone()).collect())
            .collect();
        let mut basis = vec![vec![S::zero(); self.dim]; self.dim];
        for (i, e) in basis.iter_mut().enumerate() {
            e[i] = S::one();
        }
        Ok(Self::from_pairs(self.dim, |a, b| {
            let first = alpha.apply(&self.basis_bracket(a, b));
            let second = self.eval_unchecked(&cols[a], &basis[b]);
            let third = self.eval_unchecked(&basis[a], &cols[b]);
            first
                .into_iter()
                .zip(second)
                .zip(third)
                .map(|((f, s), t)| f - s - t)
                .collect()
        }))
    }

    /// `⟨μ, λ⟩ = Σ_{ijk} ⟨μ(e_i,e_j),e_k⟩⟨λ(e_i,e_j),e_k⟩` over all ordered pairs.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_dim(other.dim)?;
        let half = self
            .coeffs
            .iter()
            .filter_map(|(key, c)| other.coeffs.get(key).map(|d| c.clone() * d.clone()))
            .fold(S::zero(), |acc, v| acc + v);
        Ok(half.clone() + half)
    }

    pub fn norm_sq(&self) -> S {
        let half = self
            .coeffs
            .values()
            .fold(S::zero(), |acc, c| acc + c.clone() * c.clone());
        half.clone() + half
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self {
            dim: self.dim,
            coeffs: BTreeMap::new(),
        };
        if c.is_zero() {
            return out;
        }
        out.coeffs = self
            .coeffs
            .iter()
            .map(|(k, v)| (*k, v.clone() * c.clone()))
            .collect();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_coeff(*k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .values()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Drops coefficients with `|c| ≤ tol·max|c|` (float mode); exact mode is unchanged.
    pub fn pruned(&self, tol: f64) -> Self {
        let thresh = tol * self.max_abs();
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, v)| !v.is_negligible(thresh))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> BracketTensor<f64> {
        BracketTensor {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (*k, v.to_f64()))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    /// `g_σ.μ` where `g_σ e_i = e_{σ(i)}`; `sigma[i]` is the image of `i`.
    pub fn permutation_act(&self, sigma: &[usize]) -> Result<Self> {
        validate_permutation(sigma, self.dim)?;
        let entries = self
            .coeffs
            .iter()
            .map(|(&(i, j, k), c)| (sigma[i], sigma[j], sigma[k], c.clone()));
        Self::from_entries(self.dim, entries)
    }

    /// Jacobiator `μ(μ(x,y),z) + μ(μ(y,z),x) + μ(μ(z,x),y)` on basis vectors.
    pub fn jacobiator(&self, i: usize, j: usize, k: usize) -> Vec<S> {
        let e = |t: usize| {
            let mut v = vec![S::zero(); self.dim];
            v[t] = S::one();
            v
        };
        let a = self.eval_unchecked(&self.basis_bracket(i, j), &e(k));
        let b = self.eval_unchecked(&self.basis_bracket(j, k), &e(i));
        let c = self.eval_unchecked(&self.basis_bracket(k, i), &e(j));
        a.into_iter()
            .zip(b)
            .zip(c)
            .map(|((x, y), z)| x + y + z)
            .collect()
    }

    /// Largest squared norm of the Jacobiator over basis triples, in `S`.
    pub fn jacobi_residual_sq(&self) -> S {
        let mut worst = S::zero();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in j + 1..self.dim {
                    let sq = self
                        .jacobiator(i, j, k)
                        .into_iter()
                        .fold(S::zero(), |acc, v| acc + v.clone() * v);
                    if sq > worst {
                        worst = sq;
                    }
                }
            }
        }
        worst
    }

    /// `max_{i<j<k} ‖J(e_i, e_j, e_k)‖`; exactly `0.0` for an exact Lie bracket.
    pub fn jacobi_residual(&self) -> f64 {
        self.jacobi_residual_sq().to_f64().sqrt()
    }

    pub fn satisfies_jacobi(&self, tol: f64) -> bool {
        match S::MODE {
            ScalarMode::Exact => self.jacobi_residual_sq().is_zero(),
            ScalarMode::Float => self.jacobi_residual() <= tol * self.max_abs().powi(2).max(1.0),
        }
    }

    /// Dimensions of `n ⊇ [n,n] ⊇ [n,[n,n]] ⊇ …` until the dimension stabilizes.
    pub fn lower_central_series(&self, tol: f64) -> Result<CentralSeries> {
        if !self.satisfies_jacobi(tol) {
            return Err(Error::NotJacobi(self.jacobi_residual()));
        }
        Ok(self.descending_series(tol, true))
    }

    /// Dimensions of the derived series `s ⊇ [s,s] ⊇ [[s,s],[s,s]] ⊇ …`.
    pub fn derived_series(&self, tol: f64) -> Vec<usize> {
        self.descending_series(tol, false).dims
    }

    /// Shared driver: `central = true` brackets against the whole space,
    /// otherwise against the current term.
    fn descending_series(&self, tol: f64, central: bool) -> CentralSeries {
        let n = self.dim;
        let identity: Vec<Vec<S>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        let mut current = identity.clone();
        let mut dims = vec![n];
        loop {
            let partner = if central {
                &identity
            } else {
                &current
            };
            let mut gens: Vec<Vec<S>> = Vec::new();
            for x in partner {
                for y in &current {
                    let v = self.eval_unchecked(x, y);
                    if v.iter().any(|c| !c.is_zero()) {
                        gens.push(v);
                    }
                }
            }
            let next = span_basis(gens, n, tol);
            let d = next.len();
            let stalled = d == *dims.last().unwrap_or(&0);
            dims.push(d);
            if d == 0 || stalled {
                break;
            }
            current = next;
        }
        let nilpotent = *dims.last().unwrap_or(&0) == 0;
        CentralSeries { dims, nilpotent }
    }

    pub fn is_nilpotent(&self, tol: f64) -> bool {
        self.lower_central_series(tol)
            .map(|s| s.nilpotent)
            .unwrap_or(false)
    }

    /// Linear system `α ↦ π(α)μ` as rows over the `n²` entries of `α` (row-major).
    fn derivation_system(&self) -> Vec<Vec<S>> {
        let n = self.dim;
        let var = |r: usize, s: usize| r * n + s;
        let mut rows = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let ab = self.basis_bracket(a, b);
                for k in 0..n {
                    let mut row = vec![S::zero(); n * n];
                    // α μ(e_a, e_b)
                    for (s, c) in ab.iter().enumerate() {
                        if !c.is_zero() {
                            row[var(k, s)] = row[var(k, s)].clone() + c.clone();
                        }
                    }
                    // − μ(α e_a, e_b) − μ(e_a, α e_b)
                    for r in 0..n {
                        let c1 = self.coeff(r, b, k);
                        if !c1.is_zero() {
                            row[var(r, a)] = row[var(r, a)].clone() - c1;
                        }
                        let c2 = self.coeff(a, r, k);
                        if !c2.is_zero() {
                            row[var(r, b)] = row[var(r, b)].clone() - c2;
                        }
                    }
                    if row.iter().any(|v| !v.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
        rows
    }

    /// A basis of `Der(μ) = {α : π(α)μ = 0}`.
    pub fn derivations(&self, tol: f64) -> Vec<LinearMap<S>> {
        let n = self.dim;
        null_space(self.derivation_system(), n * n, tol)
            .into_iter()
            .map(|v| {
                LinearMap::from_rows(v.chunks(n).map(|r| r.to_vec()).collect())
                    .expect("square by construction")
            })
            .collect()
    }

    /// Support `(i, j, k)` with `|c| > tol·max|c|`.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize, usize)> {
        let thresh = tol * self.max_abs();
        self.coeffs
            .iter()
            .filter(|(_, v)| !v.is_negligible(thresh))
            .map(|(k, _)| *k)
            .collect()
    }
}

impl BracketTensor<Rational> {
    pub fn from_integer_entries(
        dim: usize,
        entries: &[(usize, usize, usize, i64)],
    ) -> Result<Self> {
        Self::from_entries(
            dim,
            entries
                .iter()
                .map(|&(i, j, k, c)| (i, j, k, Rational::from_i64(c))),
        )
    }
}

impl BracketTensor<f64> {
    pub fn normalized(&self) -> Self {
        let n = self.norm_sq().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(&(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.values().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralSeries {
    pub dims: Vec<usize>,
    pub nilpotent: bool,
}

fn span_basis<S: Scalar>(gens: Vec<Vec<S>>, n: usize, tol: f64) -> Vec<Vec<S>> {
    if gens.is_empty() {
        return Vec::new();
    }
    let mut rows = gens;
    let r = rref(&mut rows, n, tol);
    rows.truncate(r.len());
    rows
}

pub fn validate_permutation(sigma: &[usize], dim: usize) -> Result<()> {
    if sigma.len() != dim {
        return Err(Error::InvalidPermutation(format!(
            "length {} for dimension {dim}",
            sigma.len()
        )));
    }
    let mut seen = vec![false; dim];
    for &s in sigma {
        if s >= dim || seen[s] {
            return Err(Error::InvalidPermutation(format!("{sigma:?}")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Matrix `g_σ` with `g_σ e_i = e_{σ(i)}`.
pub fn permutation_matrix<S: Scalar>(sigma: &[usize]) -> Result<LinearMap<S>> {
    validate_permutation(sigma, sigma.len())?;
    Ok(LinearMap::from_fn(sigma.len(), |r, c| {
        if sigma[c] == r {
            S::one()
        } else {
            S::zero()
        }
    }))
}

/// Rank of the span of vectors; convenience re-export for callers.
pub fn span_rank<S: Scalar>(vectors: Vec<Vec<S>>, n: usize, tol: f64) -> usize {
    rank(vectors, n, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::int;

    fn e(n: usize, i: usize) -> Vec<Rational> {
        let mut v = vec![int(0); n];
        v[i] = int(1);
        v
    }

    #[test]
    fn heisenberg_evaluation() {
        let h3 = catalog::heisenberg3();
        assert_eq!(h3.eval(&e(3, 0), &e(3, 1)).unwrap(), e(3, 2));
        assert_eq!(
            h3.eval(&e(3, 1), &e(3, 0)).unwrap(),
            vec![int(0), int(0), int(-1)]
        );
        let x = vec![int(2), int(-1), int(5)];
        assert_eq!(h3.eval(&x, &x).unwrap(), vec![int(0); 3]);
        assert!(matches!(
            h3.eval(&e(2, 0), &e(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diagonal_and_permutation_actions() {
        let h3 = catalog::heisenberg3();
        assert_eq!(h3.act(&LinearMap::identity(3)).unwrap(), h3);
        let g = LinearMap::diagonal(&[int(1), int(1), int(2)]);
        let expected = BracketTensor::from_integer_entries(3, &[(0, 1, 2, 2)]).unwrap();
        assert_eq!(h3.act(&g).unwrap(), expected);

        let swap13 = permutation_matrix::<Rational>(&[2, 1, 0]).unwrap();
        let expected = BracketTensor::from_integer_entries(3, &[(2, 1, 0, 1)]).unwrap();
        assert_eq!(h3.act(&swap13).unwrap(), expected);
        assert_eq!(h3.permutation_act(&[2, 1, 0]).unwrap(), expected);

        let swapped = h3.permutation_act(&[1, 0, 2]).unwrap();
        assert_eq!(swapped.coeff(0, 1, 2), int(-1));
        assert!(h3.permutation_act(&[0, 0, 1]).is_err());
        assert!(h3.act(&LinearMap::zeros(3)).is_err());
    }

    #[test]
    fn rep_on_weight_vectors() {
        let h3 = catalog::heisenberg3();
        assert_eq!(
            h3.rep(&LinearMap::identity(3)).unwrap(),
            h3.scale(&int(-1))
        );
        let alpha = LinearMap::diagonal(&[int(2), int(-3), int(7)]);
        // a3 − a1 − a2 = 8
        assert_eq!(h3.rep(&alpha).unwrap(), h3.scale(&int(8)));
    }

    #[test]
    fn inner_product_convention() {
        let h3 = catalog::heisenberg3();
        assert_eq!(h3.inner(&h3).unwrap(), int(2));
        let other = BracketTensor::from_integer_entries(3, &[(0, 2, 1, 1)]).unwrap();
        assert_eq!(h3.inner(&other).unwrap(), int(0));
        let n4 = catalog::filiform4();
        assert_eq!(n4.norm_sq(), int(4));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(catalog::heisenberg3().jacobi_residual(), 0.0);
        assert_eq!(catalog::so3().jacobi_residual(), 0.0);
        // μ(e1,e2)=e3, μ(e2,e3)=e1+e3: the only Jacobiator is [e3,e1] = 0.
        let lie = BracketTensor::from_integer_entries(
            3,
            &[(0, 1, 2, 1), (1, 2, 0, 1), (1, 2, 2, 1)],
        )
        .unwrap();
        assert_eq!(lie.jacobi_residual(), 0.0);
        // Adding μ(e1,e3)=e2 breaks it: J(e1,e2,e3) = −e2.
        let bad = BracketTensor::from_integer_entries(
            3,
            &[(0, 1, 2, 1), (1, 2, 0, 1), (1, 2, 2, 1), (0, 2, 1, 1)],
        )
        .unwrap();
        assert_eq!(bad.jacobiator(0, 1, 2), vec![int(0), int(-1), int(0)]);
        assert_eq!(bad.jacobi_residual(), 1.0);
        assert!(!bad.satisfies_jacobi(DEFAULT_TOL));
        assert!(matches!(
            bad.lower_central_series(DEFAULT_TOL),
            Err(Error::NotJacobi(_))
        ));
    }

    #[test]
    fn central_series_examples() {
        let s = catalog::heisenberg3().lower_central_series(0.0).unwrap();
        assert_eq!(s.dims, vec![3, 1, 0]);
        assert!(s.nilpotent);
        let s = catalog::abelian(3).lower_central_series(0.0).unwrap();
        assert_eq!(s.dims, vec![3, 0]);
        let s = catalog::so3().lower_central_series(0.0).unwrap();
        assert_eq!(s.dims, vec![3, 3]);
        assert!(!s.nilpotent);
        let s = catalog::filiform4().lower_central_series(0.0).unwrap();
        assert_eq!(s.dims, vec![4, 2, 1, 0]);
    }

    #[test]
    fn derivation_algebras() {
        assert_eq!(catalog::abelian(2).derivations(0.0).len(), 4);
        let h3 = catalog::heisenberg3();
        let der = h3.derivations(0.0);
        assert_eq!(der.len(), 6);
        for d in &der {
            assert!(h3.rep(d).unwrap().is_zero());
        }
        // diag(1,1,2) lies in the span: adding it does not raise the rank.
        let n = 3;
        let mut vecs: Vec<Vec<Rational>> = der.iter().map(|d| d.entries().to_vec()).collect();
        let r0 = span_rank(vecs.clone(), n * n, 0.0);
        vecs.push(LinearMap::diagonal(&[int(1), int(1), int(2)]).entries().to_vec());
        assert_eq!(span_rank(vecs, n * n, 0.0), r0);
        assert!(h3
            .rep(&LinearMap::diagonal(&[int(1), int(1), int(2)]))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn float_derivations_match_exact_count() {
        let n4 = catalog::filiform4();
        let exact = n4.derivations(0.0).len();
        let float = n4.to_f64().derivations(DEFAULT_TOL).len();
        assert_eq!(exact, float);
    }

    #[test]
    fn bad_indices() {
        assert!(matches!(
            BracketTensor::from_integer_entries(3, &[(0, 3, 1, 1)]),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(BracketTensor::from_integer_entries(3, &[(1, 1, 0, 1)]).is_err());
        assert!(matches!(
            BracketTensor::<Rational>::zero(0),
            Err(Error::EmptyDimension)
        ));
    }
}
