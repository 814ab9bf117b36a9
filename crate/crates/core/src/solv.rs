//! Metric solvable Lie algebras `s = a ⊕ n` with orthonormal basis (a-block first):
//! Ricci curvature, the Einstein and standardness conditions, rank-one extensions of
//! nilsolitons and the term-by-term audit behind "Einstein ⇒ standard".

use nalgebra::Cholesky;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bracket::{span_rank, BracketTensor};
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::moment::{ricci_moment, MomentValue};
use crate::scalar::{Rational, Scalar};
use crate::strata::{beta_of, in_w, positivity_check, DiagonalWeight};

/// Default relative tolerance of the Einstein test.
pub const EINSTEIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSolvableAlgebra<S> {
    dim_a: usize,
    dim_n: usize,
    bracket: BracketTensor<S>,
    provenance: Option<String>,
    /// `dim [s,s]`; smaller than `dim_n` when the declared `n` strictly contains it.
    derived_dim: usize,
}

impl<S: Scalar> MetricSolvableAlgebra<S> {
    /// Validates `[s,s] ⊆ n`, the Jacobi identity and solvability.
    pub fn new(dim_a: usize, dim_n: usize, bracket: BracketTensor<S>, tol: f64) -> Result<Self> {
        let dim = dim_a + dim_n;
        if bracket.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bracket.dim(),
            });
        }
        let thresh = tol * bracket.max_abs();
        for (&(i, j, k), c) in bracket.iter() {
            if k < dim_a && !c.is_negligible(thresh) {
                return Err(Error::BracketLeavesN(format!(
                    "[e{}, e{}] has component {} along e{} in a",
                    i + 1,
                    j + 1,
                    c,
                    k + 1
                )));
            }
        }
        if !bracket.satisfies_jacobi(tol) {
            return Err(Error::NotJacobi(bracket.jacobi_residual()));
        }
        let series = bracket.derived_series(tol);
        if series.last() != Some(&0) {
            return Err(Error::NotSolvable(format!("derived series {series:?}")));
        }
        let values: Vec<Vec<S>> = (0..dim)
            .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
            .map(|(i, j)| bracket.basis_bracket(i, j))
            .collect();
        let derived_dim = span_rank(values, dim, tol);
        Ok(Self {
            dim_a,
            dim_n,
            bracket,
            provenance: None,
            derived_dim,
        })
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = Some(note.into());
        self
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn dim(&self) -> usize {
        self.dim_a + self.dim_n
    }

    pub fn bracket(&self) -> &BracketTensor<S> {
        &self.bracket
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// True when the declared `n` is strictly larger than `[s,s]`.
    pub fn n_strictly_contains_derived(&self) -> bool {
        self.derived_dim < self.dim_n
    }

    /// `μ = bracket|_{n×n}` as a bracket on `n`.
    pub fn nil_bracket(&self) -> BracketTensor<S> {
        let m = self.dim_a;
        let entries = self
            .bracket
            .iter()
            .filter(|(&(i, _, _), _)| i >= m)
            .map(|(&(i, j, k), c)| (i - m, j - m, k - m, c.clone()));
        BracketTensor::from_entries(self.dim_n.max(1), entries)
            .expect("restriction of a valid bracket")
    }

    /// `ad e_x` on `s`.
    pub fn ad(&self, x: usize) -> LinearMap<S> {
        let dim = self.dim();
        let mut out = LinearMap::zeros(dim);
        for i in 0..dim {
            for (k, v) in self.bracket.basis_bracket(x, i).into_iter().enumerate() {
                out.set(k, i, v);
            }
        }
        out
    }

    /// `ad A_r` restricted to `n`.
    pub fn ad_on_n(&self, r: usize) -> LinearMap<S> {
        let m = self.dim_a;
        let ad = self.ad(r);
        LinearMap::from_fn(self.dim_n, |i, j| ad.get(m + i, m + j).clone())
    }

    /// Coordinates of `H` in the orthonormal a-basis: `H_r = tr ad A_r`.
    pub fn mean_curvature(&self) -> Vec<S> {
        (0..self.dim_a).map(|r| self.ad(r).trace()).collect()
    }

    pub fn ad_h(&self) -> LinearMap<S> {
        let mut out = LinearMap::zeros(self.dim());
        for (r, h) in self.mean_curvature().iter().enumerate() {
            if !h.is_zero() {
                out = &out + &self.ad(r).scale(h);
            }
        }
        out
    }

    /// `B(x, y) = tr(ad x ∘ ad y)`.
    pub fn killing_form(&self) -> LinearMap<S> {
        let ads: Vec<LinearMap<S>> = (0..self.dim()).map(|x| self.ad(x)).collect();
        let dim = self.dim();
        let mut b = LinearMap::zeros(dim);
        for x in 0..dim {
            for y in x..dim {
                let v = (&ads[x] * &ads[y]).trace();
                b.set(x, y, v.clone());
                b.set(y, x, v);
            }
        }
        b
    }

    /// `⟨Rx,y⟩ = −½Σ⟨[x,x_i],x_j⟩⟨[y,x_i],x_j⟩ + ¼Σ⟨[x_i,x_j],x⟩⟨[x_i,x_j],y⟩`, which is
    /// the moment map of the full bracket.
    pub fn r_operator(&self) -> LinearMap<S> {
        ricci_moment(&self.bracket).ric
    }

    /// `Ricci = R − ½B − S(ad H)`.
    pub fn ricci_operator(&self) -> LinearMap<S> {
        let half = S::one() / S::from_i64(2);
        let r = self.r_operator();
        let b = self.killing_form().scale(&half);
        &(&r - &b) - &self.ad_h().symmetric_part()
    }

    /// `Ricci = cI` with `c = tr Ricci / dim`, up to `tol · max(1, ‖Ricci‖∞)`; exact in
    /// exact mode.
    pub fn einstein_check(&self, tol: f64) -> EinsteinVerdict {
        let ricci = self.ricci_operator();
        let dim = self.dim();
        let c = ricci.trace() / S::from_i64(dim as i64);
        let defect = &ricci - &LinearMap::identity(dim).scale(&c);
        let max_residual = defect.max_abs();
        let scale = tol * ricci.max_abs().max(1.0);
        let verdict = defect.entries().iter().all(|v| v.is_negligible(scale));
        let c = c.to_f64();
        let sym = self.ad_h().symmetric_part();
        let tr_s = sym.trace().to_f64();
        let eq_c = (verdict && tr_s.abs() > tol).then(|| -(&sym * &sym).trace().to_f64() / tr_s);
        let eq_c_consistent = eq_c.map(|e| (e - c).abs() <= tol * c.abs().max(1.0));
        EinsteinVerdict {
            verdict,
            c,
            max_residual,
            eq_c,
            eq_c_consistent,
        }
    }

    /// `[A_r, A_s] = 0` for all pairs in the a-block, up to `tol`.
    pub fn is_standard(&self, tol: f64) -> StandardVerdict {
        let mut max_norm = 0.0f64;
        for r in 0..self.dim_a {
            for s in r + 1..self.dim_a {
                let v = self.bracket.basis_bracket(r, s);
                let n2: f64 = v.iter().map(|x| x.to_f64().powi(2)).sum();
                max_norm = max_norm.max(n2.sqrt());
            }
        }
        StandardVerdict {
            verdict: max_norm <= tol,
            max_bracket_norm_on_a: max_norm,
        }
    }

    /// `tr(R E) − ¼⟨π(E)[·,·], [·,·]⟩`: the entrywise curvature formula against the
    /// representation route.
    pub fn trace_identity_check(&self, e: &LinearMap<S>) -> Result<S> {
        if e.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: e.dim(),
            });
        }
        let lhs = (&self.r_operator() * e).trace();
        let rhs = self.bracket.rep(e)?.inner(&self.bracket)? / S::from_i64(4);
        Ok(lhs - rhs)
    }

    pub fn to_f64(&self) -> MetricSolvableAlgebra<f64> {
        MetricSolvableAlgebra {
            dim_a: self.dim_a,
            dim_n: self.dim_n,
            bracket: self.bracket.to_f64(),
            provenance: self.provenance.clone(),
            derived_dim: self.derived_dim,
        }
    }

    /// The full curvature report at Einstein tolerance `tol`.
    pub fn curvature_report(&self, tol: f64) -> CurvatureReport {
        let to_rows = |m: LinearMap<S>| -> Vec<Vec<f64>> { m.to_f64().rows() };
        let b = self.killing_form();
        let m = self.dim_a;
        let killing_on_n_max = (m..self.dim())
            .flat_map(|x| (0..self.dim()).map(move |y| (x, y)))
            .map(|(x, y)| b.get(x, y).to_f64().abs())
            .fold(0.0, f64::max);
        CurvatureReport {
            mean_curvature: self.mean_curvature().iter().map(Scalar::to_f64).collect(),
            killing: to_rows(b),
            killing_on_n_max,
            r_op: to_rows(self.r_operator()),
            ricci: to_rows(self.ricci_operator()),
            einstein: self.einstein_check(tol),
            standard: self.is_standard(tol),
        }
    }
}

impl MetricSolvableAlgebra<f64> {
    /// Orthonormalizes a bracket given in a basis with Gram matrix `gram`. `n` keeps its
    /// span; `a` becomes its orthogonal complement.
    pub fn with_gram(
        dim_a: usize,
        dim_n: usize,
        bracket: BracketTensor<f64>,
        gram: &LinearMap<f64>,
        tol: f64,
    ) -> Result<Self> {
        let dim = dim_a + dim_n;
        if gram.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: gram.dim(),
            });
        }
        if !gram.is_symmetric(tol * gram.max_abs().max(1.0)) {
            return Err(Error::Parse("gram matrix is not symmetric".into()));
        }
        // Reorder to (n, a) so that triangular Gram–Schmidt keeps span(n).
        let order: Vec<usize> = (dim_a..dim).chain(0..dim_a).collect();
        let reordered = LinearMap::from_fn(dim, |i, j| *gram.get(order[i], order[j]));
        let chol = Cholesky::new(reordered.to_nalgebra())
            .ok_or_else(|| Error::Parse("gram matrix is not positive definite".into()))?;
        // P = L⁻ᵀ: columns are the new orthonormal vectors in reordered coordinates.
        let l_inv = chol
            .l()
            .try_inverse()
            .ok_or(Error::Singular)?;
        let p_re = LinearMap::from_nalgebra(&l_inv.transpose());
        // Back to original coordinates and a-first ordering of the new basis.
        let mut pos = vec![0; dim];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let p = LinearMap::from_fn(dim, |i, j| *p_re.get(pos[i], pos[j]));
        let g = p.inverse()?;
        let ortho = bracket.act(&g)?.pruned(1e-14);
        Self::new(dim_a, dim_n, ortho, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinVerdict {
    pub verdict: bool,
    pub c: f64,
    /// `max |Ricci − cI|`.
    pub max_residual: f64,
    /// `−tr S(ad H)² / tr S(ad H)` on Einstein non-unimodular algebras.
    pub eq_c: Option<f64>,
    pub eq_c_consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardVerdict {
    pub verdict: bool,
    pub max_bracket_norm_on_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub mean_curvature: Vec<f64>,
    pub killing: Vec<Vec<f64>>,
    /// `max |B(x, ·)|` over `x ∈ n`; zero up to roundoff.
    pub killing_on_n_max: f64,
    pub r_op: Vec<Vec<f64>>,
    pub ricci: Vec<Vec<f64>>,
    pub einstein: EinsteinVerdict,
    pub standard: StandardVerdict,
}

/// Splits `Ric_λ = cI + D` with `c = tr Ric² / tr Ric` (forced by `tr(Ric D) = 0` for
/// derivations `D`). For `λ = 0` the split is `c·I + (−c)I` with `c` defaulting to
/// `−dim`.
pub fn nilsoliton_split<S: Scalar>(
    lambda: &BracketTensor<S>,
    moment: &MomentValue<S>,
    c_for_abelian: Option<f64>,
) -> Result<(f64, LinearMap<f64>)> {
    let n = lambda.dim();
    let ric = moment.ric.to_f64();
    let c = if lambda.is_zero() {
        c_for_abelian.unwrap_or(-(n as f64))
    } else {
        let tr = ric.trace();
        if tr == 0.0 {
            return Err(Error::NonNegativeConstant(0.0));
        }
        (&ric * &ric).trace() / tr
    };
    if c >= 0.0 || !c.is_finite() {
        return Err(Error::NonNegativeConstant(c));
    }
    let d = &ric - &LinearMap::identity(n).scale(&c);
    Ok((c, d))
}

/// Rank-one extension `s = RA ⊕ n` of a nilsoliton `λ` with `ad A|_n = D/√(tr D)`;
/// it is Einstein with constant `c = −tr D²/tr D`.
pub fn rank_one_extension<S: Scalar>(
    lambda: &BracketTensor<S>,
    moment: &MomentValue<S>,
    c_for_abelian: Option<f64>,
    tol: f64,
) -> Result<MetricSolvableAlgebra<f64>> {
    let (_, d) = nilsoliton_split(lambda, moment, c_for_abelian)?;
    let lam = lambda.to_f64();
    let residual = lam.rep(&d)?.norm_sq().max(0.0).sqrt();
    let scale = d.norm_sq().sqrt() * lam.norm_sq().sqrt();
    if residual > tol * scale.max(1.0) {
        return Err(Error::NotDerivation(residual));
    }
    let ad_a = d.scale(&(1.0 / d.trace().sqrt()));
    let n = lam.dim();
    let entries = lam
        .iter()
        .map(|(&(i, j, k), c)| (i + 1, j + 1, k + 1, *c))
        .chain((0..n).flat_map(|i| {
            let ad_a = &ad_a;
            (0..n).map(move |k| (0, i + 1, k + 1, *ad_a.get(k, i)))
        }))
        .filter(|e| e.3 != 0.0);
    let bracket = BracketTensor::from_entries(n + 1, entries)?;
    Ok(MetricSolvableAlgebra::new(1, n, bracket, tol)?.with_provenance("rank-one extension"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    /// `E|_n = I` because `μ = 0`.
    pub zero_branch: bool,
    /// `‖β‖²`, or 1 on the zero branch.
    pub beta_norm_sq: f64,
    pub mu_in_w: bool,
    pub positivity: bool,
    pub einstein: bool,
    pub c: f64,
    /// `tr((cI + ½B + S(ad H)) E)`.
    pub lhs: f64,
    /// `¼⟨π(E|_n)μ, μ⟩`.
    pub term1: f64,
    /// `¼Σ_rs ⟨E[A_r,A_s], [A_r,A_s]⟩`.
    pub term2: f64,
    /// `½Σ_r ⟨[β, ad A_r|_n], ad A_r|_n⟩`.
    pub term3: f64,
    /// `lhs − (term1 + term2 + term3)`; zero exactly when `tr(Ricci E) = c tr E`.
    pub identity_residual: f64,
    /// `tr E² − ‖β‖² tr E`.
    pub trace_e_residual: f64,
    /// `tr(S(ad H) E) − ‖β‖² tr S(ad H)`.
    pub trace_s_residual: f64,
    /// `‖β‖² tr S(ad H) · tr S(ad H) − tr S(ad H)² · tr E`: nonpositive by Cauchy–Schwarz,
    /// and `lhs · tr S(ad H)` on Einstein algebras.
    pub cauchy_schwarz_gap: f64,
    pub all_nonneg: bool,
    pub standard: bool,
    /// Einstein, `β + ‖β‖²I ≥ 0`, every term nonnegative and `term2 ≈ 0`.
    pub forces_standard: bool,
}

/// Evaluates the three nonnegative terms whose sum is `tr(R E)` for
/// `E|_a = 0`, `E|_n = β + ‖β‖²I`, alongside the Einstein-side value of the same trace.
/// When `beta` is `None` it is taken to be `β_μ`.
pub fn standardness_audit<S: Scalar>(
    s: &MetricSolvableAlgebra<S>,
    beta: Option<&DiagonalWeight>,
    tol: f64,
) -> Result<AuditReport> {
    let s = s.to_f64();
    let (m, n, dim) = (s.dim_a(), s.dim_n(), s.dim());
    let mu = s.nil_bracket();
    let zero_branch = n == 0 || mu.support(tol).is_empty();
    let (beta_diag, e_n, beta_norm_sq, mu_in_w, positivity) = if zero_branch {
        (vec![0.0; n], vec![1.0; n], 1.0, true, true)
    } else {
        let beta = match beta {
            Some(b) => b.clone(),
            None => beta_of(&mu, tol)?,
        };
        if beta.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: beta.dim(),
            });
        }
        let shifted = beta.shifted();
        (
            beta.to_f64(),
            shifted.to_f64(),
            Scalar::to_f64(&beta.norm_sq()),
            in_w(&mu, &beta, tol)?.holds,
            positivity_check(&beta),
        )
    };
    let mut e_diag = vec![0.0; dim];
    e_diag[m..].copy_from_slice(&e_n);
    let e = LinearMap::diagonal(&e_diag);

    let term1 = if zero_branch {
        0.0
    } else {
        mu.rep(&LinearMap::diagonal(&e_n))?.inner(&mu)? / 4.0
    };
    let mut term2 = 0.0;
    for r in 0..m {
        for t in 0..m {
            let v = s.bracket().basis_bracket(r, t);
            term2 += v.iter().zip(&e_diag).map(|(x, w)| w * x * x).sum::<f64>();
        }
    }
    term2 /= 4.0;
    let b = LinearMap::diagonal(&beta_diag);
    let term3 = (0..m)
        .map(|r| {
            let ad = s.ad_on_n(r);
            b.commutator(&ad).frobenius(&ad)
        })
        .sum::<f64>()
        / 2.0;

    let einstein = s.einstein_check(EINSTEIN_TOL);
    let c = einstein.c;
    let sym = s.ad_h().symmetric_part();
    let operator = &(&LinearMap::identity(dim).scale(&c) + &s.killing_form().scale(&0.5)) + &sym;
    let lhs = (&operator * &e).trace();
    let tr_e = e.trace();
    let tr_s = sym.trace();
    let all_nonneg = term1 >= -tol && term2 >= -tol && term3 >= -tol;
    let standard = s.is_standard(tol).verdict;
    Ok(AuditReport {
        zero_branch,
        beta_norm_sq,
        mu_in_w,
        positivity,
        einstein: einstein.verdict,
        c,
        lhs,
        term1,
        term2,
        term3,
        identity_residual: lhs - (term1 + term2 + term3),
        trace_e_residual: (&e * &e).trace() - beta_norm_sq * tr_e,
        trace_s_residual: (&sym * &e).trace() - beta_norm_sq * tr_s,
        cauchy_schwarz_gap: beta_norm_sq * tr_s * tr_s - (&sym * &sym).trace() * tr_e,
        all_nonneg,
        standard,
        forces_standard: einstein.verdict && positivity && all_nonneg && term2 <= tol,
    })
}

/// `RH^{n+1}`: `[A, e_i] = e_i`.
pub fn real_hyperbolic(n: usize) -> MetricSolvableAlgebra<Rational> {
    let entries = (1..=n).map(|i| (0, i, i, Rational::one()));
    let bracket = BracketTensor::from_entries(n + 1, entries).expect("valid indices");
    MetricSolvableAlgebra::new(1, n, bracket, 0.0)
        .expect("solvable")
        .with_provenance(format!("RH^{}", n + 1))
}

/// Rank-one algebra over `μ` with `ad A|_n = diag(d)`.
pub fn diagonal_extension(
    mu: &BracketTensor<Rational>,
    d: &[Rational],
) -> Result<MetricSolvableAlgebra<Rational>> {
    let n = mu.dim();
    if d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.len(),
        });
    }
    let entries = mu
        .iter()
        .map(|(&(i, j, k), c)| (i + 1, j + 1, k + 1, c.clone()))
        .chain(
            d.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (0, i + 1, i + 1, v.clone())),
        );
    let bracket = BracketTensor::from_entries(n + 1, entries)?;
    MetricSolvableAlgebra::new(1, n, bracket, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::{int, rat};

    fn ch2() -> MetricSolvableAlgebra<Rational> {
        diagonal_extension(&catalog::heisenberg3(), &[rat(1, 2), rat(1, 2), int(1)]).unwrap()
    }

    #[test]
    fn rejects_invalid_algebras() {
        // [e2, e3] = e1 leaves n when a = span{e1}.
        let b = BracketTensor::from_integer_entries(3, &[(1, 2, 0, 1)]).unwrap();
        assert!(matches!(
            MetricSolvableAlgebra::new(1, 2, b, 0.0),
            Err(Error::BracketLeavesN(_))
        ));
        assert!(matches!(
            MetricSolvableAlgebra::new(0, 3, catalog::so3(), 0.0),
            Err(Error::NotSolvable(_))
        ));
        let b = BracketTensor::from_integer_entries(3, &[(0, 1, 2, 1)]).unwrap();
        assert!(matches!(
            MetricSolvableAlgebra::new(1, 1, b, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hyperbolic_models() {
        let rh3 = real_hyperbolic(2);
        assert_eq!(rh3.mean_curvature(), vec![int(2)]);
        assert_eq!(rh3.killing_form(), LinearMap::diagonal(&[int(2), int(0), int(0)]));
        assert_eq!(rh3.r_operator(), LinearMap::diagonal(&[int(-1), int(0), int(0)]));
        assert_eq!(rh3.ricci_operator(), LinearMap::identity(3).scale(&int(-2)));
        for n in 2..=5 {
            let e = real_hyperbolic(n).einstein_check(EINSTEIN_TOL);
            assert!(e.verdict);
            assert_eq!(e.c, -(n as f64));
            assert_eq!(e.eq_c_consistent, Some(true));
        }
        let skewed = diagonal_extension(
            &BracketTensor::zero(2).unwrap(),
            &[int(1), int(2)],
        )
        .unwrap();
        assert!(!skewed.einstein_check(EINSTEIN_TOL).verdict);
    }

    #[test]
    fn complex_hyperbolic_plane() {
        let s = ch2();
        assert_eq!(s.mean_curvature(), vec![int(2)]);
        assert_eq!(*s.killing_form().get(0, 0), rat(3, 2));
        assert_eq!(s.ricci_operator(), LinearMap::identity(4).scale(&rat(-3, 2)));
        let e = s.einstein_check(EINSTEIN_TOL);
        assert!(e.verdict && e.c == -1.5 && e.eq_c == Some(-1.5));
        assert!(s.is_standard(0.0).verdict);
        assert_eq!(
            s.nil_bracket().to_f64(),
            catalog::heisenberg3().to_f64()
        );
    }

    #[test]
    fn r_operator_matches_moment_on_nilpotent() {
        let s = MetricSolvableAlgebra::new(0, 3, catalog::heisenberg3(), 0.0).unwrap();
        assert_eq!(s.r_operator(), ricci_moment(&catalog::heisenberg3()).ric);
        assert_eq!(s.killing_form(), LinearMap::zeros(3));
        let i = LinearMap::identity(3);
        assert!(s.trace_identity_check(&i).unwrap().is_zero());
        assert_eq!((&s.r_operator() * &i).trace(), rat(-1, 2));
    }

    #[test]
    fn nonstandard_detected() {
        // [A1, A2] = e1, [A1, e1] = e1 on a 3-dim algebra.
        let b = BracketTensor::from_integer_entries(3, &[(0, 1, 2, 1), (0, 2, 2, 1)]).unwrap();
        let s = MetricSolvableAlgebra::new(2, 1, b, 0.0).unwrap();
        let st = s.is_standard(1e-12);
        assert!(!st.verdict);
        assert_eq!(st.max_bracket_norm_on_a, 1.0);
        assert!(!s.einstein_check(EINSTEIN_TOL).verdict);
    }

    #[test]
    fn extensions_are_einstein_and_pass_audit() {
        let h3 = catalog::heisenberg3();
        let s = rank_one_extension(&h3, &ricci_moment(&h3), None, 1e-10).unwrap();
        let e = s.einstein_check(EINSTEIN_TOL);
        assert!(e.verdict && (e.c + 1.5).abs() < 1e-12);
        let beta = DiagonalWeight::new(vec![int(-1), int(-1), int(1)]);
        let a = standardness_audit(&s, Some(&beta), 1e-9).unwrap();
        for v in [a.lhs, a.term1, a.term2, a.term3, a.trace_e_residual, a.trace_s_residual] {
            assert!(v.abs() < 1e-9, "{a:?}");
        }
        assert!(a.forces_standard && a.standard);

        let n4 = catalog::filiform4();
        let s = rank_one_extension(&n4, &ricci_moment(&n4), None, 1e-10).unwrap();
        let e = s.einstein_check(EINSTEIN_TOL);
        assert!(e.verdict && (e.c + 1.5).abs() < 1e-12, "{e:?}");
        let a = standardness_audit(&s, None, 1e-9).unwrap();
        assert!(a.forces_standard && a.lhs.abs() < 1e-9, "{a:?}");

        let zero = BracketTensor::<Rational>::zero(2).unwrap();
        let s = rank_one_extension(&zero, &ricci_moment(&zero), Some(-2.0), 1e-10).unwrap();
        let e = s.einstein_check(EINSTEIN_TOL);
        assert!(e.verdict && (e.c + 2.0).abs() < 1e-12);
        let a = standardness_audit(&s, None, 1e-9).unwrap();
        assert!(a.zero_branch && a.forces_standard);
    }

    #[test]
    fn extension_requires_derivation() {
        let mu = BracketTensor::from_integer_entries(4, &[(0, 1, 2, 1), (0, 2, 3, 1), (0, 1, 3, 1)])
            .unwrap();
        assert!(matches!(
            rank_one_extension(&mu, &ricci_moment(&mu), None, 1e-10),
            Err(Error::NotDerivation(_))
        ));
    }

    #[test]
    fn perturbed_ch2_is_flagged() {
        let s = diagonal_extension(
            &catalog::heisenberg3(),
            &[rat(11, 20), rat(11, 20), rat(11, 10)],
        )
        .unwrap();
        let beta = DiagonalWeight::new(vec![int(-1), int(-1), int(1)]);
        let a = standardness_audit(&s, Some(&beta), 1e-9).unwrap();
        assert!(!a.einstein && !a.forces_standard);
        assert!(a.identity_residual.abs() > 1e-3);
    }

    #[test]
    fn gram_orthonormalization() {
        // RH³ written in the basis (A, e1, e1 + e2): Gram [[1,0,0],[0,1,1],[0,1,2]].
        let b = BracketTensor::from_entries(3, [(0, 1, 1, 1.0), (0, 2, 2, 1.0)]).unwrap();
        let gram = LinearMap::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let s = MetricSolvableAlgebra::with_gram(1, 2, b, &gram, 1e-12).unwrap();
        let e = s.einstein_check(EINSTEIN_TOL);
        assert!(e.verdict && (e.c + 2.0).abs() < 1e-12);
    }
}
