//! Minimal-norm point of the convex hull of finitely many rational vectors.
//!
//! [`min_norm_point`] runs Wolfe's active-set method in exact arithmetic;
//! [`brute_force_min_norm`] enumerates faces and is kept as an independent oracle.

pub mod brute;

pub use brute::{brute_force_min_norm, DEFAULT_BRUTE_FORCE_CAP};

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::scalar::Rational;

pub type Point = Vec<Rational>;

/// Upper bound on candidate subsets examined when canonicalizing a support.
const SUPPORT_SEARCH_BUDGET: u64 = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
    labels: Option<Vec<String>>,
}

impl PointSet {
    /// Nonempty, equal-length, pairwise distinct points.
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::DuplicatePoint(i));
            }
        }
        Ok(Self {
            dim,
            points,
            labels: None,
        })
    }

    /// Like [`PointSet::new`] but silently keeps only the first copy of repeated points.
    pub fn deduplicated(dim: usize, points: Vec<Point>) -> Result<Self> {
        let mut unique: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        Self::new(dim, unique)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies a coordinate permutation (`sigma[i]` is the image of coordinate `i`).
    pub fn permute_coordinates(&self, sigma: &[usize]) -> Result<Self> {
        crate::bracket::validate_permutation(sigma, self.dim)?;
        let points = self
            .points
            .iter()
            .map(|p| permute(p, sigma))
            .collect();
        Ok(Self {
            dim: self.dim,
            points,
            labels: self.labels.clone(),
        })
    }
}

pub(crate) fn permute(p: &[Rational], sigma: &[usize]) -> Point {
    let mut out = vec![Rational::zero(); p.len()];
    for (i, v) in p.iter().enumerate() {
        out[sigma[i]] = v.clone();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormResult {
    pub point: Point,
    /// One weight per input point; zero off the support.
    pub weights: Vec<Rational>,
    /// Indices of the input points with nonzero weight, ascending.
    pub support: Vec<usize>,
}

impl MinNormResult {
    pub fn norm_sq(&self) -> Rational {
        dot(&self.point, &self.point)
    }

    /// Exact check of every result invariant against `ps`.
    pub fn verify(&self, ps: &PointSet) -> bool {
        if self.weights.len() != ps.len() || self.point.len() != ps.dim() {
            return false;
        }
        if self.weights.iter().any(|w| *w < Rational::zero()) {
            return false;
        }
        let total: Rational = self.weights.iter().cloned().sum();
        if !total.is_one() {
            return false;
        }
        let support: Vec<usize> = (0..ps.len())
            .filter(|&i| !self.weights[i].is_zero())
            .collect();
        if support != self.support {
            return false;
        }
        let combo = combination(ps.points(), &self.weights);
        if combo != self.point {
            return false;
        }
        let n2 = self.norm_sq();
        ps.points().iter().enumerate().all(|(i, p)| {
            let d = dot(&self.point, p);
            d >= n2 && (!self.support.contains(&i) || d == n2)
        })
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn combination(points: &[Point], weights: &[Rational]) -> Point {
    let dim = points.first().map_or(0, Vec::len);
    let mut out = vec![Rational::zero(); dim];
    for (p, w) in points.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        for (o, v) in out.iter_mut().zip(p) {
            *o += w * v;
        }
    }
    out
}

/// Minimizer of `‖Σ w_i p_i‖²` subject to `Σ w_i = 1` over the given points.
///
/// Returns the (possibly negative) weights, or `None` if the points are affinely dependent.
fn affine_minimizer(points: &[&Point]) -> Option<Vec<Rational>> {
    let k = points.len();
    // [G 1; 1ᵗ 0] [w; t] = [0; 1]
    let mut a = vec![vec![Rational::zero(); k + 1]; k + 1];
    for i in 0..k {
        for j in 0..=i {
            let g = dot(points[i], points[j]);
            a[i][j] = g.clone();
            a[j][i] = g;
        }
        a[i][k] = Rational::one();
        a[k][i] = Rational::one();
    }
    let mut b = vec![Rational::zero(); k + 1];
    b[k] = Rational::one();
    let mut sol = solve(&a, &b, 0.0)?;
    sol.truncate(k);
    Some(sol)
}

/// Barycentric coordinates of `x` in the affine hull of `points`, if it lies there
/// and the points are affinely independent. `approx` holds float copies of the points
/// and of `x` for the screen.
fn barycentric(
    points: &[&Point],
    x: &[Rational],
    approx: (&[&[f64]], &[f64]),
) -> Option<Vec<Rational>> {
    let k = points.len();
    let d = x.len();
    let (fpoints, fx) = approx;
    let a = DMatrix::from_fn(d + 1, k, |r, i| if r < d { fpoints[i][r] } else { 1.0 });
    let b = DVector::from_fn(d + 1, |r, _| if r < d { fx[r] } else { 1.0 });
    if clearly_infeasible(a, &b, k) {
        return None;
    }
    // Normal equations of [P; 1ᵗ] w = [x; 1].
    let col = |i: usize, r: usize| -> Rational {
        if r < d {
            points[i][r].clone()
        } else {
            Rational::one()
        }
    };
    let rhs = |r: usize| -> Rational {
        if r < d {
            x[r].clone()
        } else {
            Rational::one()
        }
    };
    let ata: Vec<Vec<Rational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..=d).fold(Rational::zero(), |acc, r| acc + col(i, r) * col(j, r)))
                .collect()
        })
        .collect();
    let atb: Vec<Rational> = (0..k)
        .map(|i| (0..=d).fold(Rational::zero(), |acc, r| acc + col(i, r) * rhs(r)))
        .collect();
    let w = solve(&ata, &atb, 0.0)?;
    let exact = (0..=d).all(|r| {
        (0..k).fold(Rational::zero(), |acc, i| acc + col(i, r) * &w[i]) == rhs(r)
    });
    exact.then_some(w)
}

pub(crate) fn float_points(pts: &[Point]) -> Vec<Vec<f64>> {
    use crate::scalar::Scalar;
    pts.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect()
}

/// Float screen for a (possibly overdetermined) system `A w = b` whose exact solution must
/// exist and have positive leading `weights` entries. `true` only when `A` is well
/// conditioned and the float solution is clearly infeasible, so the exact solve can be
/// skipped; anything borderline is left to exact arithmetic.
pub(crate) fn clearly_infeasible(a: DMatrix<f64>, b: &DVector<f64>, weights: usize) -> bool {
    let svd = a.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if smin.is_nan() || smin <= 1e-6 * smax {
        return false;
    }
    let Ok(w) = svd.solve(b, 0.0) else {
        return false;
    };
    let scale = 1.0 + b.amax() + w.amax() * a.amax();
    (&a * &w - b).amax() > 1e-7 * scale || w.iter().take(weights).any(|v| *v < -1e-7)
}

/// Minimal-norm point of the convex hull of `ps`, exactly.
pub fn min_norm_point(ps: &PointSet) -> Result<MinNormResult> {
    let pts = ps.points();
    if pts.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let norms: Vec<Rational> = pts.iter().map(|p| dot(p, p)).collect();
    let start = (0..pts.len())
        .min_by(|&a, &b| norms[a].cmp(&norms[b]).then(a.cmp(&b)))
        .expect("nonempty");
    let mut active: Vec<usize> = vec![start];
    let mut lambda: Vec<Rational> = vec![Rational::one()];
    let mut x = pts[start].clone();

    loop {
        let xx = dot(&x, &x);
        // Most violating point, smallest index on ties.
        let (j, xj) = (0..pts.len())
            .map(|i| (i, dot(&x, &pts[i])))
            .min_by(|(a, da), (b, db)| da.cmp(db).then(a.cmp(b)))
            .expect("nonempty");
        if xj >= xx || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(Rational::zero());

        loop {
            let refs: Vec<&Point> = active.iter().map(|&i| &pts[i]).collect();
            let w = affine_minimizer(&refs).ok_or_else(|| {
                Error::Precondition("active set became affinely dependent".into())
            })?;
            if w.iter().all(|v| *v > Rational::zero()) {
                lambda = w;
                x = combination_idx(pts, &active, &lambda);
                break;
            }
            // Step toward the affine minimizer until a weight hits zero.
            let theta = lambda
                .iter()
                .zip(&w)
                .filter(|(_, wi)| **wi <= Rational::zero())
                .map(|(li, wi)| li / (li - wi))
                .min()
                .expect("some weight is nonpositive");
            lambda = lambda
                .iter()
                .zip(&w)
                .map(|(li, wi)| li + &theta * (wi - li))
                .collect();
            let keep: Vec<bool> = lambda.iter().map(|l| !l.is_zero()).collect();
            active = active
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(a, _)| *a)
                .collect();
            lambda.retain(|l| !l.is_zero());
        }
    }

    let (support, weights) = canonical_support(pts, &x, &active, &lambda);
    let mut full = vec![Rational::zero(); pts.len()];
    for (i, w) in support.iter().zip(weights) {
        full[*i] = w;
    }
    Ok(MinNormResult {
        point: x,
        weights: full,
        support,
    })
}

fn combination_idx(pts: &[Point], idx: &[usize], w: &[Rational]) -> Point {
    let mut out = vec![Rational::zero(); pts[0].len()];
    for (&i, wi) in idx.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(&pts[i]) {
            *o += wi * v;
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Smallest support (then lexicographically smallest) among points on the optimal face
/// whose convex hull contains `x`. Falls back to the solver's own support when the
/// search would exceed [`SUPPORT_SEARCH_BUDGET`] subsets.
fn canonical_support(
    pts: &[Point],
    x: &[Rational],
    active: &[usize],
    lambda: &[Rational],
) -> (Vec<usize>, Vec<Rational>) {
    let xx = dot(x, x);
    let face: Vec<usize> = (0..pts.len()).filter(|&i| dot(x, &pts[i]) == xx).collect();
    let fpts = float_points(pts);
    let fx: Vec<f64> = x.iter().map(crate::scalar::Scalar::to_f64).collect();
    let max_k = active.len();
    let budget: u64 = (1..=max_k as u64)
        .map(|k| binomial(face.len() as u64, k))
        .fold(0u64, u64::saturating_add);
    if budget <= SUPPORT_SEARCH_BUDGET {
        for k in 1..=max_k {
            if let Some(found) = first_containing_subset(pts, &fpts, &face, k, x, &fx) {
                return found;
            }
        }
    }
    let mut pairs: Vec<(usize, Rational)> =
        active.iter().copied().zip(lambda.iter().cloned()).collect();
    pairs.sort_by_key(|(i, _)| *i);
    pairs.into_iter().unzip()
}

fn first_containing_subset(
    pts: &[Point],
    fpts: &[Vec<f64>],
    face: &[usize],
    k: usize,
    x: &[Rational],
    fx: &[f64],
) -> Option<(Vec<usize>, Vec<Rational>)> {
    let mut combo: Vec<usize> = (0..k).collect();
    if k > face.len() {
        return None;
    }
    loop {
        let idx: Vec<usize> = combo.iter().map(|&c| face[c]).collect();
        let refs: Vec<&Point> = idx.iter().map(|&i| &pts[i]).collect();
        let frefs: Vec<&[f64]> = idx.iter().map(|&i| fpts[i].as_slice()).collect();
        if let Some(w) = barycentric(&refs, x, (&frefs, fx)) {
            if w.iter().all(|v| *v > Rational::zero()) {
                return Some((idx, w));
            }
        }
        if !next_combination(&mut combo, face.len()) {
            return None;
        }
    }
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
