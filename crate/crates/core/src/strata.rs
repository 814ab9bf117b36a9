//! Torus weights of a bracket, the minimal convex combination `β_μ`, and certificate
//! checks for a candidate stratum label `β`.
//!
//! For diagonal `β`, `π(β)v_ijk = ⟨β, α_ij^k⟩ v_ijk` with `α_ij^k = E_kk − E_ii − E_jj`,
//! so every membership question below reduces to the signs of
//! `⟨β, α_ij^k⟩ − ‖β‖²` over the support of `μ`.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bracket::BracketTensor;
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::minnorm::{min_norm_point, PointSet};
use crate::scalar::{format_rational, Rational, Scalar};

/// A diagonal `n×n` matrix stored by its diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagonalWeight {
    entries: Vec<Rational>,
}

impl DiagonalWeight {
    pub fn new(entries: Vec<Rational>) -> Self {
        Self { entries }
    }

    /// `α_ij^k = E_kk − E_ii − E_jj`.
    pub fn weight(dim: usize, i: usize, j: usize, k: usize) -> Self {
        let mut entries = vec![Rational::zero(); dim];
        entries[i] -= Rational::one();
        entries[j] -= Rational::one();
        entries[k] += Rational::one();
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn trace(&self) -> Rational {
        self.entries.iter().cloned().sum()
    }

    /// `⟨α, β⟩ = tr(αβᵗ)`.
    pub fn dot(&self, other: &Self) -> Rational {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> Rational {
        self.dot(self)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.entries.iter().map(|v| v * c).collect())
    }

    /// `β + ‖β‖² I`.
    pub fn shifted(&self) -> Self {
        let n2 = self.norm_sq();
        Self::new(self.entries.iter().map(|v| v + &n2).collect())
    }

    pub fn to_linear_map<S: Scalar>(&self) -> LinearMap<S> {
        let diag: Vec<S> = self.entries.iter().map(S::from_rational).collect();
        LinearMap::diagonal(&diag)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Scalar::to_f64).collect()
    }

    pub fn is_sorted(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] <= w[1])
    }

    /// `g_σ β g_σ⁻¹`: entry `i` moves to position `σ(i)`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self> {
        crate::bracket::validate_permutation(sigma, self.dim())?;
        Ok(Self::new(crate::minnorm::permute(&self.entries, sigma)))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.entries.iter().map(format_rational).collect()
    }
}

impl fmt::Display for DiagonalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "diag({})", self.to_strings().join(", "))
    }
}

fn nonzero<S: Scalar>(mu: &BracketTensor<S>, tol: f64) -> Result<Vec<(usize, usize, usize)>> {
    let support = mu.support(tol);
    if support.is_empty() {
        return Err(Error::ZeroBracket);
    }
    Ok(support)
}

/// `{α_ij^k : μ_ij^k ≠ 0}`, deduplicated, in coefficient order.
pub fn weights<S: Scalar>(mu: &BracketTensor<S>, tol: f64) -> Result<PointSet> {
    let n = mu.dim();
    let pts = nonzero(mu, tol)?
        .into_iter()
        .map(|(i, j, k)| DiagonalWeight::weight(n, i, j, k).entries)
        .collect();
    PointSet::deduplicated(n, pts)
}

/// `m(μ, α) = min{⟨α, α_ij^k⟩ : μ_ij^k ≠ 0}` for diagonal `α`.
pub fn m_degree<S: Scalar>(
    mu: &BracketTensor<S>,
    alpha: &DiagonalWeight,
    tol: f64,
) -> Result<Rational> {
    check_weight_dim(mu, alpha)?;
    let n = mu.dim();
    Ok(nonzero(mu, tol)?
        .into_iter()
        .map(|(i, j, k)| alpha.dot(&DiagonalWeight::weight(n, i, j, k)))
        .min()
        .expect("nonempty support"))
}

/// `β_μ`, the minimal-norm point of the convex hull of the weights of `μ`.
pub fn beta_of<S: Scalar>(mu: &BracketTensor<S>, tol: f64) -> Result<DiagonalWeight> {
    let ps = weights(mu, tol)?;
    Ok(DiagonalWeight::new(min_norm_point(&ps)?.point))
}

/// Stable ascending sort. `sigma[i]` is the new position of entry `i`, so the
/// sorted weight labels `permutation_act(sigma, μ)`.
pub fn sort_to_weyl_chamber(beta: &DiagonalWeight) -> (DiagonalWeight, Vec<usize>) {
    let mut order: Vec<usize> = (0..beta.dim()).collect();
    order.sort_by(|&a, &b| beta.entries[a].cmp(&beta.entries[b]));
    let mut sigma = vec![0; beta.dim()];
    for (pos, &old) in order.iter().enumerate() {
        sigma[old] = pos;
    }
    let sorted = DiagonalWeight::new(order.iter().map(|&i| beta.entries[i].clone()).collect());
    (sorted, sigma)
}

fn check_weight_dim<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight) -> Result<()> {
    if mu.dim() != beta.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: beta.dim(),
        });
    }
    Ok(())
}

/// `⟨β, α_ij^k⟩ − ‖β‖²` for every supported coefficient.
fn gaps<S: Scalar>(
    mu: &BracketTensor<S>,
    beta: &DiagonalWeight,
    tol: f64,
) -> Result<Vec<Rational>> {
    check_weight_dim(mu, beta)?;
    let n = mu.dim();
    let n2 = beta.norm_sq();
    Ok(nonzero(mu, tol)?
        .into_iter()
        .map(|(i, j, k)| beta.dot(&DiagonalWeight::weight(n, i, j, k)) - &n2)
        .collect())
}

/// Outcome of a membership test with its exact residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub holds: bool,
    pub residual: Rational,
}

/// `μ ∈ W_β`: every weight has `⟨β, α⟩ ≥ ‖β‖²`. Residual: the smallest gap.
pub fn in_w<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight, tol: f64) -> Result<Membership> {
    let g = gaps(mu, beta, tol)?;
    let min = g.into_iter().min().expect("nonempty");
    Ok(Membership {
        holds: !min.is_negative(),
        residual: min,
    })
}

/// `μ ∈ Z_β`: every weight has `⟨β, α⟩ = ‖β‖²`. Residual: the largest `|gap|`.
pub fn in_z<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight, tol: f64) -> Result<Membership> {
    let g = gaps(mu, beta, tol)?;
    let max = g.into_iter().map(|v| v.abs()).max().expect("nonempty");
    Ok(Membership {
        holds: max.is_zero(),
        residual: max,
    })
}

/// `μ ∈ Y_β`: in `W_β` with at least one weight on the boundary. Residual: the smallest gap.
pub fn in_y<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight, tol: f64) -> Result<Membership> {
    let g = gaps(mu, beta, tol)?;
    let min = g.iter().min().cloned().expect("nonempty");
    let touches = g.iter().any(Zero::is_zero);
    Ok(Membership {
        holds: !min.is_negative() && touches,
        residual: min,
    })
}

/// `‖π(β)μ − ‖β‖²μ‖²`, the representation-side test for `Z_β`.
pub fn z_rep_residual<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight) -> Result<S> {
    check_weight_dim(mu, beta)?;
    let lhs = mu.rep(&beta.to_linear_map())?;
    let rhs = mu.scale(&S::from_rational(&beta.norm_sq()));
    Ok(lhs.sub(&rhs)?.norm_sq())
}

/// Orthogonal projection onto `Z_β`: keeps exactly the coefficients on the `‖β‖²` eigenspace.
pub fn project_z<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight) -> Result<BracketTensor<S>> {
    check_weight_dim(mu, beta)?;
    let n = mu.dim();
    let n2 = beta.norm_sq();
    BracketTensor::from_entries(
        n,
        mu.iter()
            .filter(|(&(i, j, k), _)| beta.dot(&DiagonalWeight::weight(n, i, j, k)) == n2)
            .map(|(&(i, j, k), c)| (i, j, k, c.clone())),
    )
}

/// `min(β + ‖β‖²I) > 0`.
pub fn positivity_check(beta: &DiagonalWeight) -> bool {
    beta.shifted()
        .entries
        .iter()
        .all(|v| v.is_positive())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenvalueType {
    /// Coprime positive integers, nondecreasing.
    pub integers: Vec<u64>,
    /// `sorted(β + ‖β‖²I) = scale · integers`.
    pub scale: Rational,
}

impl fmt::Display for EigenvalueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.integers.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Primitive positive-integer vector proportional to the sorted entries of `β + ‖β‖²I`.
pub fn eigenvalue_type(beta: &DiagonalWeight) -> Result<EigenvalueType> {
    let (shift, _) = sort_to_weyl_chamber(&beta.shifted());
    let min = shift.entries.first().cloned().unwrap_or_else(Rational::zero);
    if !min.is_positive() {
        return Err(Error::NonPositiveShift(format_rational(&min)));
    }
    let lcm = shift
        .entries
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled: Vec<num_bigint::BigInt> = shift
        .entries
        .iter()
        .map(|v| (v * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = scaled
        .iter()
        .fold(num_bigint::BigInt::zero(), |acc, v| acc.gcd(v));
    let integers = scaled
        .iter()
        .map(|v| {
            use num_traits::ToPrimitive;
            (v / &gcd).to_u64().unwrap_or(u64::MAX)
        })
        .collect();
    let scale = Rational::new(gcd, lcm);
    Ok(EigenvalueType { integers, scale })
}

/// `D` is block-lower-triangular for the level blocks of sorted `β`:
/// `D_ij = 0` whenever `β_i < β_j`.
pub fn parabolic_membership<S: Scalar>(
    d: &LinearMap<S>,
    beta: &DiagonalWeight,
    tol: f64,
) -> Result<bool> {
    if !beta.is_sorted() {
        return Err(Error::UnsortedWeight);
    }
    if d.dim() != beta.dim() {
        return Err(Error::DimensionMismatch {
            expected: beta.dim(),
            got: d.dim(),
        });
    }
    let thresh = tol * d.max_abs().max(1.0);
    let n = d.dim();
    Ok((0..n).all(|i| {
        (0..n).all(|j| beta.entries[i] >= beta.entries[j] || d.get(i, j).is_negligible(thresh))
    }))
}

/// `⟨[β, D], D⟩ = Σ (β_i − β_j) D_ij²`.
pub fn adbeta_pairing<S: Scalar>(beta: &DiagonalWeight, d: &LinearMap<S>) -> S {
    let b: Vec<S> = beta.entries.iter().map(S::from_rational).collect();
    let n = d.dim();
    let mut acc = S::zero();
    for i in 0..n {
        for j in 0..n {
            let dij = d.get(i, j).clone();
            if !dij.is_zero() {
                acc = acc + (b[i].clone() - b[j].clone()) * dij.clone() * dij;
            }
        }
    }
    acc
}

/// `tr(βD)`.
pub fn beta_trace_pairing<S: Scalar>(beta: &DiagonalWeight, d: &LinearMap<S>) -> S {
    beta.entries
        .iter()
        .enumerate()
        .fold(S::zero(), |acc, (i, b)| acc + S::from_rational(b) * d.get(i, i).clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivationCertificate<S> {
    pub der_dim: usize,
    /// Smallest `⟨[β,D],D⟩` over the basis and the random combinations.
    pub min_adbeta: S,
    /// Largest `|tr βD|` over the same set.
    pub max_betaort: S,
    pub adbeta_nonneg: bool,
    pub betaort_zero: bool,
    pub parabolic_all: bool,
}

/// Number of random integer combinations of the basis checked besides the basis itself.
pub const RANDOM_DERIVATION_SAMPLES: usize = 16;

/// Evaluates `⟨[β,D],D⟩ ≥ 0`, `tr βD = 0` and `D ∈ p_β` on `Der(μ)`.
pub fn derivation_certificates<S: Scalar>(
    mu: &BracketTensor<S>,
    beta: &DiagonalWeight,
    tol: f64,
    seed: u64,
) -> Result<DerivationCertificate<S>> {
    check_weight_dim(mu, beta)?;
    let basis = mu.derivations(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = basis.clone();
    if !basis.is_empty() {
        for _ in 0..RANDOM_DERIVATION_SAMPLES {
            let mut acc = LinearMap::zeros(mu.dim());
            for d in &basis {
                let c = S::from_i64(rng.gen_range(-3..=3));
                acc = &acc + &d.scale(&c);
            }
            samples.push(acc);
        }
    }
    let mut min_adbeta: Option<S> = None;
    let mut max_betaort = S::zero();
    let mut scale = 1.0f64;
    for d in &samples {
        let a = adbeta_pairing(beta, d);
        if min_adbeta.as_ref().is_none_or(|m| a < *m) {
            min_adbeta = Some(a);
        }
        let t = beta_trace_pairing(beta, d).abs();
        if t > max_betaort {
            max_betaort = t;
        }
        scale = scale.max(d.norm_sq().to_f64());
    }
    let min_adbeta = min_adbeta.unwrap_or_else(S::zero);
    let parabolic_all = if beta.is_sorted() {
        let mut ok = true;
        for d in &basis {
            ok &= parabolic_membership(d, beta, tol)?;
        }
        ok
    } else {
        false
    };
    let thresh = tol * scale;
    Ok(DerivationCertificate {
        der_dim: basis.len(),
        adbeta_nonneg: !min_adbeta.is_negative() || min_adbeta.is_negligible(thresh),
        betaort_zero: max_betaort.is_negligible(thresh),
        min_adbeta,
        max_betaort,
        parabolic_all,
    })
}

/// `⟨π(β+‖β‖²I)μ, μ⟩ = Σ 2(μ_ij^k)²(⟨β,α_ij^k⟩ − ‖β‖²)`, defined on `W_β`.
pub fn delta_check<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight, tol: f64) -> Result<S> {
    if !in_w(mu, beta, tol)?.holds {
        return Err(Error::Precondition("μ is not in W_β".into()));
    }
    Ok(delta_value(mu, beta))
}

fn delta_value<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight) -> S {
    let n = mu.dim();
    let n2 = beta.norm_sq();
    let two = S::from_i64(2);
    mu.iter().fold(S::zero(), |acc, (&(i, j, k), c)| {
        let gap = beta.dot(&DiagonalWeight::weight(n, i, j, k)) - &n2;
        acc + two.clone() * c.clone() * c.clone() * S::from_rational(&gap)
    })
}

/// Same quantity through the representation: `⟨π(β+‖β‖²I)μ, μ⟩`.
pub fn delta_via_rep<S: Scalar>(mu: &BracketTensor<S>, beta: &DiagonalWeight) -> Result<S> {
    check_weight_dim(mu, beta)?;
    let n2 = beta.norm_sq();
    let shift: LinearMap<S> = DiagonalWeight::new(beta.entries.iter().map(|v| v + &n2).collect())
        .to_linear_map();
    mu.rep(&shift)?.inner(mu)
}

/// A certificate residual: exact when computed over rationals.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    Exact(Rational),
    Float(f64),
}

impl Residual {
    pub fn of<S: Scalar>(v: &S) -> Self {
        match v.as_rational() {
            Some(r) => Residual::Exact(r),
            None => Residual::Float(v.to_f64()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Residual::Exact(r) => Scalar::to_f64(r),
            Residual::Float(v) => *v,
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Exact(r) => f.write_str(&format_rational(r)),
            Residual::Float(v) => write!(f, "{v:e}"),
        }
    }
}

impl Serialize for Residual {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        match self {
            Residual::Exact(r) => s.serialize_str(&format_rational(r)),
            Residual::Float(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub residual: Residual,
}

/// Names of the checks a certificate carries, in report order.
pub const CHECK_NAMES: [&str; 9] = [
    "trace_minus_one",
    "in_W",
    "in_Z",
    "m_equals_one",
    "delta_nonneg",
    "beta_positive_shift",
    "derivations_in_parabolic",
    "adbeta_nonneg",
    "betaort_zero",
];

#[derive(Debug, Clone, PartialEq)]
pub struct StratumCertificate {
    /// Weyl-chamber representative (sorted nondecreasing).
    pub beta: DiagonalWeight,
    /// Permutation taking the input basis to the one in which `beta` is sorted.
    pub sigma: Vec<usize>,
    /// `1/‖β‖²`.
    pub q_value: Rational,
    pub eigenvalue_type: Option<EigenvalueType>,
    pub checks: Vec<Check>,
}

impl StratumCertificate {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Evaluates every certificate check for the candidate `beta` at `mu`.
///
/// `beta` is first sorted into the Weyl chamber and `mu` relabeled to match.
pub fn certify<S: Scalar>(
    mu: &BracketTensor<S>,
    beta: &DiagonalWeight,
    tol: f64,
    seed: u64,
) -> Result<StratumCertificate> {
    check_weight_dim(mu, beta)?;
    if beta.norm_sq().is_zero() {
        return Err(Error::Precondition("β = 0".into()));
    }
    let (sorted, sigma) = sort_to_weyl_chamber(beta);
    let mu = mu.permutation_act(&sigma)?;
    let beta = sorted;
    let n2 = beta.norm_sq();

    let mut checks = Vec::with_capacity(CHECK_NAMES.len());
    let trace_gap = beta.trace() + Rational::one();
    checks.push(Check {
        name: "trace_minus_one",
        passed: trace_gap.is_zero(),
        residual: Residual::Exact(trace_gap),
    });
    let w = in_w(&mu, &beta, tol)?;
    checks.push(Check {
        name: "in_W",
        passed: w.holds,
        residual: Residual::Exact(w.residual),
    });
    let z = in_z(&mu, &beta, tol)?;
    checks.push(Check {
        name: "in_Z",
        passed: z.holds,
        residual: Residual::Exact(z.residual),
    });
    let m = m_degree(&mu, &beta.scale(&n2.recip()), tol)?;
    let m_gap = m - Rational::one();
    checks.push(Check {
        name: "m_equals_one",
        passed: m_gap.is_zero(),
        residual: Residual::Exact(m_gap),
    });
    let mu_scale = mu.norm_sq().to_f64().max(1.0);
    let delta = delta_value(&mu.pruned(tol), &beta);
    checks.push(Check {
        name: "delta_nonneg",
        passed: w.holds && (!delta.is_negative() || delta.is_negligible(tol * mu_scale)),
        residual: Residual::of(&delta),
    });
    let shift_min = beta
        .shifted()
        .entries
        .first()
        .cloned()
        .unwrap_or_else(Rational::zero);
    checks.push(Check {
        name: "beta_positive_shift",
        passed: positivity_check(&beta),
        residual: Residual::Exact(shift_min),
    });
    let der = derivation_certificates(&mu, &beta, tol, seed)?;
    checks.push(Check {
        name: "derivations_in_parabolic",
        passed: der.parabolic_all,
        residual: Residual::Exact(Rational::from_integer(der.der_dim.into())),
    });
    checks.push(Check {
        name: "adbeta_nonneg",
        passed: der.adbeta_nonneg,
        residual: Residual::of(&der.min_adbeta),
    });
    checks.push(Check {
        name: "betaort_zero",
        passed: der.betaort_zero,
        residual: Residual::of(&der.max_betaort),
    });

    Ok(StratumCertificate {
        eigenvalue_type: eigenvalue_type(&beta).ok(),
        q_value: n2.recip(),
        beta,
        sigma,
        checks,
    })
}
