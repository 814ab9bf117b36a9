//! The moment map `μ ↦ Ric_μ`, the negative gradient flow of `‖M_μ‖²` on the unit
//! sphere (`M_μ = 4 Ric_μ / ‖μ‖²`), stratum detection from its limit, and a heuristic
//! `H_β`-semistability probe.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bracket::{BracketTensor, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::scalar::{best_rational, Rational, Scalar};
use crate::strata::{certify, in_w, project_z, DiagonalWeight, StratumCertificate};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue<S> {
    /// `Ric_μ`, symmetric.
    pub ric: LinearMap<S>,
    /// `4 Ric_μ / ‖μ‖²` (zero for `μ = 0`).
    pub m_normalized: LinearMap<S>,
    pub norm_mu_sq: S,
}

/// `⟨Ric X, Y⟩ = −½ Σ ⟨μ(X,e_i),e_j⟩⟨μ(Y,e_i),e_j⟩ + ¼ Σ ⟨μ(e_i,e_j),X⟩⟨μ(e_i,e_j),Y⟩`.
pub fn ricci_moment<S: Scalar>(mu: &BracketTensor<S>) -> MomentValue<S> {
    let n = mu.dim();
    let half = S::one() / S::from_i64(2);
    // ad[p][i] = μ(e_p, e_i)
    let ad: Vec<Vec<Vec<S>>> = (0..n)
        .map(|p| (0..n).map(|i| mu.basis_bracket(p, i)).collect())
        .collect();
    let mut ric = LinearMap::zeros(n);
    for p in 0..n {
        for q in p..n {
            let mut first = S::zero();
            for (row_p, row_q) in ad[p].iter().zip(&ad[q]) {
                for (a, b) in row_p.iter().zip(row_q) {
                    if !a.is_zero() && !b.is_zero() {
                        first = first + a.clone() * b.clone();
                    }
                }
            }
            // Over ordered pairs the second sum is twice the sum over i < j.
            let mut second = S::zero();
            for i in 0..n {
                for j in i + 1..n {
                    let a = mu.coeff(i, j, p);
                    let b = mu.coeff(i, j, q);
                    if !a.is_zero() && !b.is_zero() {
                        second = second + a * b;
                    }
                }
            }
            let v = half.clone() * (second - first);
            ric.set(p, q, v.clone());
            ric.set(q, p, v);
        }
    }
    finish_moment(mu, ric)
}

/// Same matrix through the defining duality `⟨Ric_μ, α⟩ = ¼⟨π(α)μ, μ⟩`.
pub fn ricci_moment_dual<S: Scalar>(mu: &BracketTensor<S>) -> Result<MomentValue<S>> {
    let n = mu.dim();
    let eighth = S::one() / S::from_i64(8);
    let mut ric = LinearMap::zeros(n);
    for p in 0..n {
        for q in p..n {
            // α = E_pq + E_qp pairs to 2 Ric_pq; α = E_pp pairs to Ric_pp.
            let mut alpha = LinearMap::zeros(n);
            alpha.set(p, q, S::one());
            alpha.set(q, p, S::one());
            let pairing = mu.rep(&alpha)?.inner(mu)?;
            let v = if p == q {
                eighth.clone() * (pairing.clone() + pairing)
            } else {
                eighth.clone() * pairing
            };
            ric.set(p, q, v.clone());
            ric.set(q, p, v);
        }
    }
    Ok(finish_moment(mu, ric))
}

fn finish_moment<S: Scalar>(mu: &BracketTensor<S>, ric: LinearMap<S>) -> MomentValue<S> {
    let norm_mu_sq = mu.norm_sq();
    let m_normalized = if norm_mu_sq.is_zero() {
        LinearMap::zeros(mu.dim())
    } else {
        ric.scale(&(S::from_i64(4) / norm_mu_sq.clone()))
    };
    MomentValue {
        ric,
        m_normalized,
        norm_mu_sq,
    }
}

/// How a step of length `h` along `−π(M_μ)μ` is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// `μ − h π(M_μ)μ`: leaves the variety of Lie brackets at second order in `h`.
    Euler,
    /// `exp(−h M_μ).μ`: same first-order step, stays in the `Glₙ`-orbit of `μ0`.
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowParams {
    pub step: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub adaptive: bool,
    pub integrator: Integrator,
    pub record_trace: bool,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iter: 200_000,
            tol: 1e-10,
            adaptive: true,
            integrator: Integrator::Exponential,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub tangency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResiduals {
    /// `‖π(M)λ − ⟨π(M)λ,λ⟩λ‖`.
    pub tangency: f64,
    /// `‖π(M)λ − ‖M‖²λ‖`.
    pub z_membership: f64,
    /// `m(λ', M'/‖M‖²) − 1` in the frame diagonalizing `M`.
    pub m_equals_one: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    /// Unit-norm limit bracket, in the input basis.
    pub limit: BracketTensor<f64>,
    pub moment: MomentValue<f64>,
    /// Ascending spectrum of `M` at the limit.
    pub candidate_beta: Vec<f64>,
    pub residuals: FlowResiduals,
    pub iterations: usize,
    pub converged: bool,
    /// `‖M‖²` at the limit.
    pub objective: f64,
    pub step_trace: Option<Vec<TraceRow>>,
}

fn objective(m: &MomentValue<f64>) -> f64 {
    m.m_normalized.norm_sq()
}

fn tangency(lambda: &BracketTensor<f64>, v: &BracketTensor<f64>) -> f64 {
    let along = v.inner(lambda).unwrap_or(0.0);
    v.sub(&lambda.scale(&along))
        .map(|r| r.norm_sq().max(0.0).sqrt())
        .unwrap_or(f64::INFINITY)
}

/// `M` minus its orthogonal projection onto `Der(λ) ⊕ RI`.
///
/// The removed part only rescales `λ` to first order, so the flow of `λ` is unchanged, but
/// the generator now tends to 0 at a critical point. Without this the accumulated `g`
/// keeps growing like `exp(−tβ)` (`β + ‖β‖²I` is a derivation of the limit) and
/// recomputing `g.μ0` loses precision as fast as `g` loses conditioning.
fn off_stabilizer(lambda: &BracketTensor<f64>, m: &LinearMap<f64>) -> LinearMap<f64> {
    let n = lambda.dim();
    let keys: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
        .collect();
    // Columns: π(E_ab)λ. Zero rows pad the system so the SVD returns a full V.
    let rows = keys.len().max(n * n);
    let mut a = DMatrix::<f64>::zeros(rows, n * n);
    for col in 0..n * n {
        let mut e = LinearMap::zeros(n);
        e.set(col / n, col % n, 1.0);
        let Ok(image) = lambda.rep(&e) else {
            return m.clone();
        };
        for (r, &(i, j, k)) in keys.iter().enumerate() {
            a[(r, col)] = image.coeff(i, j, k);
        }
    }
    let svd = a.svd(false, true);
    let Some(v_t) = svd.v_t else {
        return m.clone();
    };
    let cutoff = 1e-10 * svd.singular_values.max().max(1e-300);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let identity = DVector::from_fn(n * n, |c, _| if c / n == c % n { 1.0 } else { 0.0 });
    let null = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, sv)| **sv <= cutoff)
        .map(|(r, _)| v_t.row(r).transpose());
    for mut v in null.chain(std::iter::once(identity)) {
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    let mut x = DVector::from_fn(n * n, |c, _| *m.get(c / n, c % n));
    for b in &basis {
        x -= b * b.dot(&x);
    }
    LinearMap::from_fn(n, |i, j| x[i * n + j])
}

/// Iterates `μ ← normalize(exp(−h M_μ).μ)` (or the Euler step `μ − h π(M_μ)μ`),
/// halving `h` whenever `‖M‖²` would increase.
///
/// Critical points on the variety of Lie brackets are typically saddles of `‖M‖²` on the
/// whole sphere, so roundoff off the variety grows along the iteration. The exponential
/// integrator therefore accumulates the group element `g` and recomputes `g.μ0` from the
/// input at every step instead of updating the iterate in place; its generator is `M`
/// with the `Der(λ) ⊕ RI` component removed so that `g` converges.
pub fn flow_to_critical(mu0: &BracketTensor<f64>, params: &FlowParams) -> Result<FlowResult> {
    if mu0.is_zero() {
        return Err(Error::ZeroBracket);
    }
    let base = mu0.normalized();
    let n = base.dim();
    let mut g = LinearMap::identity(n);
    let mut g_inv = LinearMap::identity(n);
    let mut lambda = base.clone();
    let mut moment = ricci_moment(&lambda);
    let mut f = objective(&moment);
    let mut h = params.step;
    let mut trace = params.record_trace.then(Vec::new);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let v = lambda.rep(&moment.m_normalized)?;
        let tan = tangency(&lambda, &v);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                iter: iterations,
                objective: f,
                tangency: tan,
            });
        }
        if tan < params.tol {
            converged = true;
            break;
        }
        if iterations >= params.max_iter {
            break;
        }
        iterations += 1;
        let generator = match params.integrator {
            Integrator::Euler => None,
            Integrator::Exponential => Some(off_stabilizer(&lambda, &moment.m_normalized)),
        };
        let mut accepted = false;
        while h > 1e-14 {
            let (candidate, next_g) = match params.integrator {
                Integrator::Euler => (lambda.sub(&v.scale(&h))?, None),
                Integrator::Exponential => {
                    let step = generator.as_ref().expect("exponential step").scale(&-h);
                    let mut ng = &step.exp() * &g;
                    let mut ng_inv = &g_inv * &step.scale(&-1.0).exp();
                    // g and c·g act identically up to scale; keep entries bounded.
                    let c = ng.max_abs();
                    ng = ng.scale(&(1.0 / c));
                    ng_inv = ng_inv.scale(&c);
                    (base.act_with_inverse(&ng, &ng_inv)?, Some((ng, ng_inv)))
                }
            };
            let candidate = candidate.normalized();
            let cm = ricci_moment(&candidate);
            let cf = objective(&cm);
            // Near the limit the decrease (~h·tangency²) sinks below the roundoff of
            // recomputing g.μ0; there a flat objective with smaller tangency still counts.
            if !params.adaptive || cf <= f + 1e-14 * f.max(1.0) {
                lambda = candidate;
                moment = cm;
                f = cf;
                if let Some((ng, ng_inv)) = next_g {
                    g = ng;
                    g_inv = ng_inv;
                }
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if !accepted {
            break;
        }
        if params.adaptive {
            h = (h * 1.25).min(params.step);
        }
    }
    let frame = diagonal_frame(&lambda, &moment)?;
    let v = lambda.rep(&moment.m_normalized)?;
    let z = v
        .sub(&lambda.scale(&f))
        .map(|r| r.norm_sq().max(0.0).sqrt())?;
    let residuals = FlowResiduals {
        tangency: tangency(&lambda, &v),
        z_membership: z,
        m_equals_one: frame.m_value - 1.0,
    };
    Ok(FlowResult {
        limit: lambda,
        candidate_beta: frame.spectrum,
        moment,
        residuals,
        iterations,
        converged,
        objective: f,
        step_trace: trace,
    })
}

/// Orthonormal eigenframe of `M` with ascending eigenvalues, and `λ` expressed in it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalFrame {
    /// Columns are eigenvectors (in input coordinates).
    pub basis: LinearMap<f64>,
    pub spectrum: Vec<f64>,
    /// `qᵗ.λ`, for which `M` is `diag(spectrum)`.
    pub bracket: BracketTensor<f64>,
    /// `m(λ', M'/‖M‖²)`.
    pub m_value: f64,
}

pub fn diagonal_frame(lambda: &BracketTensor<f64>, moment: &MomentValue<f64>) -> Result<DiagonalFrame> {
    let n = lambda.dim();
    let eig = SymmetricEigen::new(moment.m_normalized.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut q = DMatrix::<f64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        // Sign convention: largest-magnitude component positive.
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 + 1e-12 { (i, x.abs()) } else { acc });
        if v[imax] < 0.0 {
            v = -v;
        }
        q.set_column(col, &v);
    }
    let basis = LinearMap::from_nalgebra(&q);
    let bracket = lambda.act(&basis.transpose())?;
    let spectrum: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let m2: f64 = spectrum.iter().map(|x| x * x).sum();
    let m_value = if m2 > 0.0 {
        bracket
            .support(DEFAULT_TOL)
            .into_iter()
            .map(|(i, j, k)| (spectrum[k] - spectrum[i] - spectrum[j]) / m2)
            .fold(f64::INFINITY, f64::min)
    } else {
        f64::NAN
    };
    Ok(DiagonalFrame {
        basis,
        spectrum,
        bracket,
        m_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectParams {
    pub flow: FlowParams,
    /// Largest denominator accepted when rationalizing the spectrum.
    pub denom_bound: u64,
    /// Largest admissible `|rational − eigenvalue|`.
    pub rounding_tol: f64,
    /// Tolerance for float certificate predicates.
    pub cert_tol: f64,
    pub seed: u64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            flow: FlowParams::default(),
            denom_bound: 64,
            rounding_tol: 1e-6,
            cert_tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

/// Float-only grades when the spectrum cannot be rationalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloatGrades {
    pub trace_plus_one: f64,
    pub z_gap: f64,
    pub m_minus_one: f64,
    pub min_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub flow: FlowResult,
    pub frame: DiagonalFrame,
    /// Exact certificate, when the spectrum rounds to a trace −1 rational vector.
    pub certificate: Option<StratumCertificate>,
    pub float_grades: Option<FloatGrades>,
    pub warnings: Vec<String>,
}

impl Detection {
    pub fn beta(&self) -> Option<&DiagonalWeight> {
        self.certificate.as_ref().map(|c| &c.beta)
    }

    pub fn certified(&self) -> bool {
        self.flow.converged && self.certificate.as_ref().is_some_and(|c| c.all_passed())
    }
}

/// Rounds an ascending spectrum to rationals with bounded denominators.
pub fn rationalize_spectrum(spectrum: &[f64], denom_bound: u64, tol: f64) -> Option<DiagonalWeight> {
    let mut out = Vec::with_capacity(spectrum.len());
    for &v in spectrum {
        let r = best_rational(v, denom_bound)?;
        if (Scalar::to_f64(&r) - v).abs() > tol {
            return None;
        }
        out.push(r);
    }
    let beta = DiagonalWeight::new(out);
    (beta.trace() == -Rational::one()).then_some(beta)
}

/// Flows `μ` to a critical point, diagonalizes `M` there and certifies the rounded spectrum.
pub fn stratum_detect<S: Scalar>(mu: &BracketTensor<S>, params: &DetectParams) -> Result<Detection> {
    if mu.is_zero() {
        return Err(Error::ZeroBracket);
    }
    let mut warnings = Vec::new();
    let tol = params.cert_tol;
    match mu.lower_central_series(tol) {
        Ok(s) if s.nilpotent => {}
        Ok(_) => warnings.push("bracket is not nilpotent".to_string()),
        Err(e) => warnings.push(format!("{e}")),
    }
    let flow = flow_to_critical(&mu.to_f64(), &params.flow)?;
    if !flow.converged {
        warnings.push(format!(
            "flow did not converge in {} iterations (tangency {:e})",
            flow.iterations, flow.residuals.tangency
        ));
    }
    let frame = diagonal_frame(&flow.limit, &flow.moment)?;
    let lambda = frame.bracket.pruned(tol);
    let (certificate, float_grades) =
        match rationalize_spectrum(&frame.spectrum, params.denom_bound, params.rounding_tol) {
            Some(beta) => (Some(certify(&lambda, &beta, tol, params.seed)?), None),
            None => {
                warnings.push("spectrum has no nearby rational vector; float grades only".into());
                (None, Some(float_grades(&lambda, &frame.spectrum, tol)))
            }
        };
    Ok(Detection {
        flow,
        frame,
        certificate,
        float_grades,
        warnings,
    })
}

fn float_grades(lambda: &BracketTensor<f64>, beta: &[f64], tol: f64) -> FloatGrades {
    let n2: f64 = beta.iter().map(|x| x * x).sum();
    let gaps: Vec<f64> = lambda
        .support(tol)
        .into_iter()
        .map(|(i, j, k)| beta[k] - beta[i] - beta[j] - n2)
        .collect();
    FloatGrades {
        trace_plus_one: beta.iter().sum::<f64>() + 1.0,
        z_gap: gaps.iter().fold(0.0, |m, g| m.max(g.abs())),
        m_minus_one: gaps.iter().fold(f64::INFINITY, |m, g| m.min(*g)) / n2,
        min_shift: beta.iter().fold(f64::INFINITY, |m, b| m.min(b + n2)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeParams {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub step: f64,
    /// Relative norm below which a run counts as collapsing to 0.
    pub floor: f64,
    /// Gradient norm at which a run counts as stabilized.
    pub grad_tol: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            max_iter: 20_000,
            step: 0.1,
            floor: 1e-6,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Semistable,
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    /// Smallest `‖g.μ‖ / ‖μ‖` reached over all restarts.
    pub inf_norm_estimate: f64,
    pub verdict: Verdict,
    pub per_restart: Vec<(f64, Verdict)>,
    /// Verdict of a single run started at `p_β(μ)`.
    pub projection_verdict: Verdict,
    pub heuristic: bool,
}

/// Level blocks of `β` (indices with equal entries).
fn level_blocks(beta: &DiagonalWeight) -> Vec<usize> {
    let e = beta.entries();
    let mut label = vec![usize::MAX; e.len()];
    let mut next = 0;
    for i in 0..e.len() {
        if label[i] != usize::MAX {
            continue;
        }
        for j in i..e.len() {
            if e[j] == e[i] {
                label[j] = next;
            }
        }
        next += 1;
    }
    label
}

/// Orthogonal projection of a symmetric `m` onto `sym(n) ∩ h_β`.
fn project_h_beta(m: &LinearMap<f64>, blocks: &[usize], beta: &[f64]) -> LinearMap<f64> {
    let n = m.dim();
    let mut p = LinearMap::from_fn(n, |i, j| {
        if blocks[i] == blocks[j] {
            0.5 * (m.get(i, j) + m.get(j, i))
        } else {
            0.0
        }
    });
    let b2: f64 = beta.iter().map(|x| x * x).sum();
    let along: f64 = (0..n).map(|i| p.get(i, i) * beta[i]).sum::<f64>() / b2;
    for (i, bi) in beta.iter().enumerate() {
        let v = *p.get(i, i) - along * bi;
        p.set(i, i, v);
    }
    p
}

fn random_h_beta(rng: &mut ChaCha8Rng, blocks: &[usize], beta: &[f64], scale: f64) -> LinearMap<f64> {
    let n = blocks.len();
    let raw = LinearMap::from_fn(n, |i, j| {
        if blocks[i] == blocks[j] {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        }
    });
    // Symmetric part projected off β plus the skew part (which commutes with β already).
    let sym = project_h_beta(&raw.symmetric_part(), blocks, beta);
    let skew = &raw - &raw.symmetric_part();
    (&sym + &skew).scale(&scale)
}

fn probe_run(
    start: &BracketTensor<f64>,
    blocks: &[usize],
    beta: &[f64],
    params: &ProbeParams,
) -> Result<(f64, Verdict)> {
    let base = start.norm_sq().sqrt();
    if base == 0.0 {
        return Ok((0.0, Verdict::Unstable));
    }
    let mut mu = start.clone();
    let mut norm = base;
    let mut h = params.step;
    for _ in 0..params.max_iter {
        let ratio = norm / base;
        if ratio < params.floor {
            return Ok((ratio, Verdict::Unstable));
        }
        let moment = ricci_moment(&mu);
        let grad = project_h_beta(&moment.m_normalized, blocks, beta);
        if grad.norm_sq().sqrt() < params.grad_tol {
            return Ok((ratio, Verdict::Semistable));
        }
        let mut accepted = false;
        while h > 1e-14 {
            let g = grad.scale(&-h).exp();
            let next = mu.act(&g)?;
            let nn = next.norm_sq().sqrt();
            if nn <= norm {
                mu = next;
                norm = nn;
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if !accepted {
            return Ok((norm / base, Verdict::Semistable));
        }
        h = (h * 1.5).min(1.0);
    }
    Ok((norm / base, Verdict::Inconclusive))
}

/// Heuristic test of `0 ∉ closure(H_β.μ)` by descending `‖g.μ‖²` along `sym(n) ∩ h_β`
/// from several seeded starting points in `H_β.μ`. The verdict requires unanimity.
pub fn semistability_probe<S: Scalar>(
    mu: &BracketTensor<S>,
    beta: &DiagonalWeight,
    params: &ProbeParams,
) -> Result<ProbeResult> {
    if !in_w(mu, beta, DEFAULT_TOL)?.holds {
        return Err(Error::Precondition("μ is not in W_β".into()));
    }
    let blocks = level_blocks(beta);
    let b = beta.to_f64();
    let mu0 = mu.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut per_restart = Vec::with_capacity(params.restarts.max(1));
    for r in 0..params.restarts.max(1) {
        let start = if r == 0 {
            mu0.clone()
        } else {
            let g = random_h_beta(&mut rng, &blocks, &b, 0.5).exp();
            mu0.act(&g)?
        };
        let (ratio, v) = probe_run(&start, &blocks, &b, params)?;
        // Report relative to the unperturbed input.
        let base = mu0.norm_sq().sqrt();
        let scaled = ratio * start.norm_sq().sqrt() / base;
        per_restart.push((scaled, v));
    }
    let first = per_restart[0].1;
    let verdict = if per_restart.iter().all(|(_, v)| *v == first) {
        first
    } else {
        Verdict::Inconclusive
    };
    let inf_norm_estimate = per_restart
        .iter()
        .map(|(r, _)| *r)
        .fold(f64::INFINITY, f64::min);
    let projected = project_z(&mu0, beta)?;
    let projection_verdict = if projected.is_zero() {
        Verdict::Unstable
    } else {
        probe_run(&projected, &blocks, &b, params)?.1
    };
    Ok(ProbeResult {
        inf_norm_estimate,
        verdict,
        per_restart,
        projection_verdict,
        heuristic: true,
    })
}

/// `trace(Ric_μ) + ‖μ‖²/4`, exactly zero in exact mode.
pub fn trace_defect<S: Scalar>(m: &MomentValue<S>) -> S {
    m.ric.trace() + m.norm_mu_sq.clone() / S::from_i64(4)
}
