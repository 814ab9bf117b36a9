use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nilstrat::bracket::BracketTensor;
use nilstrat::io::{
    algebra_file, detection_json, minnorm_json, parse_algebra, parse_points,
    write_algebra, write_trace_csv, AlgebraSpec,
};
use nilstrat::minnorm::brute::{brute_force_min_norm, DEFAULT_BRUTE_FORCE_CAP};
use nilstrat::minnorm::min_norm_point;
use nilstrat::moment::{
    rationalize_spectrum, ricci_moment, semistability_probe, stratum_detect, DetectParams,
    FlowParams, ProbeParams,
};
use nilstrat::scalar::format_rational;
use nilstrat::solv::{rank_one_extension, standardness_audit, MetricSolvableAlgebra};
use nilstrat::strata::{beta_of, eigenvalue_type, DiagonalWeight};
use nilstrat::{Error, LinearMap, Rational, Result, Scalar};
use serde_json::{json, Value};

use crate::{EinsteinOpts, ExtendOpts, StratumOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    InputError,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::InputError => 3,
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub status: Status,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<AlgebraSpec> {
    parse_algebra(&read(path)?).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn input_json(path: &Path, spec: &AlgebraSpec) -> Value {
    json!({
        "file": path.display().to_string(),
        "dim": spec.dim(),
        "dim_a": spec.dim_a,
        "dim_n": spec.dim_n,
        "nnz": spec.bracket.nnz(),
        "provenance": spec.provenance,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.6}", x + 0.0)).collect();
    format!("({})", parts.join(", "))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn validate(path: &Path, tol: f64) -> Result<Outcome> {
    let spec = load_algebra(path)?;
    let mu = &spec.bracket;
    let jacobi = mu.satisfies_jacobi(tol);
    let series = mu.lower_central_series(tol).ok();
    let derived = mu.derived_series(tol);
    let solvable = derived.last() == Some(&0);
    let der_dim = jacobi.then(|| mu.derivations(tol).len());
    let metric = (spec.dim_a > 0).then(|| spec.exact_algebra(tol).map(|_| ()));
    let metric_ok = metric.as_ref().is_none_or(|r| r.is_ok());
    let report = json!({
        "command": "validate",
        "input": input_json(path, &spec),
        "parameters": { "tol": tol },
        "antisymmetric": true,
        "jacobi": { "ok": jacobi, "residual": mu.jacobi_residual() },
        "nilpotent": series.as_ref().map(|s| s.nilpotent),
        "lower_central_series": series.as_ref().map(|s| s.dims.clone()),
        "derived_series": derived,
        "solvable": solvable,
        "derivation_dim": der_dim,
        "metric_solvable": metric.as_ref().map(|r| match r {
            Ok(()) => json!({ "ok": true }),
            Err(e) => json!({ "ok": false, "error": e.to_string() }),
        }),
    });
    let mut text = String::new();
    let _ = writeln!(text, "file: {} (dim {}, {} structure constants)", path.display(), spec.dim(), mu.nnz());
    let _ = writeln!(text, "antisymmetric: yes");
    let _ = writeln!(text, "jacobi: {} (residual {:e})", if jacobi { "ok" } else { "FAILED" }, mu.jacobi_residual());
    if let Some(s) = &series {
        let _ = writeln!(text, "nilpotent: {}", yes(s.nilpotent));
        let _ = writeln!(text, "lower central series: {:?}", s.dims);
    }
    let _ = writeln!(text, "derived series: {derived:?} (solvable: {})", yes(solvable));
    if let Some(d) = der_dim {
        let _ = writeln!(text, "dim Der: {d}");
    }
    if let Some(Err(e)) = &metric {
        let _ = writeln!(text, "metric solvable algebra: rejected ({e})");
    }
    Ok(Outcome {
        report,
        text,
        status: Status::from_bool(jacobi && metric_ok),
    })
}

fn detect_params(opts: &StratumOpts) -> DetectParams {
    DetectParams {
        flow: FlowParams {
            step: opts.step,
            max_iter: opts.max_iter,
            tol: opts.flow_tol,
            record_trace: opts.trace.is_some(),
            ..FlowParams::default()
        },
        denom_bound: opts.denom_bound,
        cert_tol: opts.tol,
        seed: opts.seed,
        ..DetectParams::default()
    }
}

pub fn stratum(path: &Path, opts: &StratumOpts) -> Result<Outcome> {
    let spec = load_algebra(path)?;
    stratum_of(path, &spec, opts)
}

fn stratum_of(path: &Path, spec: &AlgebraSpec, opts: &StratumOpts) -> Result<Outcome> {
    let mu = &spec.bracket;
    if mu.is_zero() {
        return Err(Error::ZeroBracket);
    }
    let params = detect_params(opts);
    let d = stratum_detect(mu, &params)?;
    if let (Some(p), Some(rows)) = (&opts.trace, &d.flow.step_trace) {
        let f = fs::File::create(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
        write_trace_csv(rows, std::io::BufWriter::new(f))
            .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
    }
    let input_beta = beta_of(mu, opts.tol).ok();
    let probe = match (&d.certificate, opts.probe) {
        (Some(c), true) => {
            let lambda = d.frame.bracket.pruned(opts.tol);
            let params = ProbeParams {
                seed: opts.seed,
                ..ProbeParams::default()
            };
            Some(semistability_probe(&lambda, &c.beta, &params)?)
        }
        _ => None,
    };
    let report = json!({
        "command": "stratum",
        "input": input_json(path, spec),
        "parameters": params,
        "detection": detection_json(&d),
        "beta_mu_input_basis": input_beta.as_ref().map(DiagonalWeight::to_strings),
        "semistability_probe": probe,
    });
    let mut text = String::new();
    let _ = writeln!(text, "file: {} (dim {}, {} structure constants)", path.display(), spec.dim(), mu.nnz());
    for w in &d.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let _ = writeln!(
        text,
        "flow: {} after {} iterations, ‖M‖² = {:.9}, tangency {:.2e}",
        if d.flow.converged { "converged" } else { "NOT converged" },
        d.flow.iterations,
        d.flow.objective,
        d.flow.residuals.tangency
    );
    let _ = writeln!(text, "spectrum of M: {}", fmt_vec(&d.flow.candidate_beta));
    match &d.certificate {
        Some(c) => {
            let _ = writeln!(text, "β = {}", c.beta);
            match &c.eigenvalue_type {
                Some(t) => {
                    let _ = writeln!(text, "eigenvalue type: {t}");
                }
                None => {
                    let _ = writeln!(text, "eigenvalue type: none (β + ‖β‖²I is not positive)");
                }
            }
            let _ = writeln!(text, "Q(μ) = 1/‖β‖² = {}", format_rational(&c.q_value));
            let _ = writeln!(text, "checks:");
            for ch in &c.checks {
                let _ = writeln!(
                    text,
                    "  {:<26} {}  {}",
                    ch.name,
                    if ch.passed { "pass" } else { "FAIL" },
                    ch.residual
                );
            }
        }
        None => {
            if let Some(g) = &d.float_grades {
                let _ = writeln!(text, "float grades: {}", serde_json::to_string(g).unwrap_or_default());
            }
        }
    }
    if let Some(p) = &probe {
        let _ = writeln!(
            text,
            "H_β-semistability probe (heuristic): {:?}, inf ‖h.λ‖/‖λ‖ ≈ {:.3e}",
            p.verdict, p.inf_norm_estimate
        );
    }
    let _ = writeln!(text, "certified: {}", yes(d.certified()));
    Ok(Outcome {
        report,
        text,
        status: Status::from_bool(d.certified()),
    })
}

/// `β` of the flow limit expressed in the input basis; requires the limit frame to be a
/// signed permutation of the input basis.
fn beta_from_flow<S: Scalar>(mu: &BracketTensor<S>, seed: u64) -> Result<DiagonalWeight> {
    let d = stratum_detect(
        mu,
        &DetectParams {
            seed,
            ..DetectParams::default()
        },
    )?;
    let cert = d
        .certificate
        .ok_or_else(|| Error::Precondition("flow spectrum is not rational".into()))?;
    let q = &d.frame.basis;
    let n = q.dim();
    let mut beta = vec![Rational::from_i64(0); n];
    for c in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| q.get(r, c).abs() > 1e-8).collect();
        if rows.len() != 1 || (q.get(rows[0], c).abs() - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(
                "flow limit is not diagonal in the given basis; β has no diagonal form there"
                    .into(),
            ));
        }
        beta[rows[0]] = cert.beta.entries()[c].clone();
    }
    Ok(DiagonalWeight::new(beta))
}

pub fn einstein(path: &Path, opts: &EinsteinOpts) -> Result<Outcome> {
    let spec = load_algebra(path)?;
    einstein_of(path, &spec, opts)
}

fn einstein_of(path: &Path, spec: &AlgebraSpec, opts: &EinsteinOpts) -> Result<Outcome> {
    match spec.gram {
        Some(_) => einstein_report(path, spec, &spec.float_algebra(1e-12)?, opts),
        None => einstein_report(path, spec, &spec.exact_algebra(0.0)?, opts),
    }
}

fn einstein_report<S: Scalar>(
    path: &Path,
    spec: &AlgebraSpec,
    s: &MetricSolvableAlgebra<S>,
    opts: &EinsteinOpts,
) -> Result<Outcome> {
    let tol = opts.tol;
    let report = s.curvature_report(tol);
    let ricci = LinearMap::from_rows(report.ricci.clone())?;
    let spectrum = ricci.symmetric_eigenvalues();
    let id_residual = s
        .trace_identity_check(&LinearMap::identity(s.dim()))?
        .to_f64();
    let adh_residual = s.trace_identity_check(&s.ad_h())?.to_f64();
    let einstein = &report.einstein;
    let standard = &report.standard;
    let consistent = !einstein.verdict || standard.verdict;
    let mut checks = vec![
        ("trace_identity", id_residual.abs().max(adh_residual.abs()) <= 1e-10),
        ("killing_vanishes_on_n", report.killing_on_n_max <= 1e-10),
        ("eq_c_consistent", einstein.eq_c_consistent != Some(false)),
        ("einstein_implies_standard", consistent),
    ];

    let mut text = String::new();
    let _ = writeln!(
        text,
        "file: {} (dim a = {}, dim n = {})",
        path.display(),
        s.dim_a(),
        s.dim_n()
    );
    if s.n_strictly_contains_derived() {
        let _ = writeln!(text, "note: declared n strictly contains [s,s]");
    }
    let h: Vec<f64> = report.mean_curvature.clone();
    let _ = writeln!(text, "mean curvature H: {}", fmt_vec(&h));
    let _ = writeln!(text, "Ricci spectrum: {}", fmt_vec(&spectrum));
    let _ = writeln!(
        text,
        "Einstein: {} (c = {:.9}, max |Ricci − cI| = {:.2e})",
        yes(einstein.verdict),
        einstein.c,
        einstein.max_residual
    );
    if let Some(ec) = einstein.eq_c {
        let _ = writeln!(text, "  −tr S(ad H)²/tr S(ad H) = {ec:.9}");
    }
    let _ = writeln!(
        text,
        "standard: {} (max ‖[A_r, A_s]‖ = {:.2e})",
        yes(standard.verdict),
        standard.max_bracket_norm_on_a
    );

    let mut out = json!({
        "command": "einstein",
        "input": input_json(path, spec),
        "parameters": { "tol": tol, "audit": opts.audit, "beta_from_flow": opts.beta_from_flow, "seed": opts.seed },
        "n_strictly_contains_derived": s.n_strictly_contains_derived(),
        "curvature": report,
        "ricci_spectrum": spectrum,
        "trace_identity_residual": { "identity": id_residual, "ad_h": adh_residual },
    });

    if opts.audit {
        let mu = s.nil_bracket();
        let beta = if mu.is_zero() {
            None
        } else if opts.beta_from_flow {
            Some(beta_from_flow(&mu, opts.seed)?)
        } else {
            Some(beta_of(&mu, nilstrat::DEFAULT_TOL)?)
        };
        let a = standardness_audit(s, beta.as_ref(), 1e-9)?;
        let scale = 1.0 + a.lhs.abs() + a.term1.abs() + a.term2.abs() + a.term3.abs();
        if a.einstein {
            checks.push(("audit_identity", a.identity_residual.abs() <= 1e-8 * scale));
            checks.push(("audit_trace_e", a.trace_e_residual.abs() <= 1e-9 * scale));
            checks.push(("audit_trace_s", a.trace_s_residual.abs() <= 1e-9 * scale));
            checks.push(("audit_forces_standard", a.forces_standard));
        }
        let _ = writeln!(
            text,
            "audit (E|_n = {}):",
            match &beta {
                Some(b) => format!("β + ‖β‖²I, β = {b}"),
                None => "I, μ = 0".to_string(),
            }
        );
        let _ = writeln!(text, "  lhs   = {:+.3e}", a.lhs);
        let _ = writeln!(text, "  term1 = {:+.3e}", a.term1);
        let _ = writeln!(text, "  term2 = {:+.3e}", a.term2);
        let _ = writeln!(text, "  term3 = {:+.3e}", a.term3);
        let _ = writeln!(text, "  lhs − Σ terms = {:+.3e}", a.identity_residual);
        let _ = writeln!(text, "  tr E² − ‖β‖² tr E = {:+.3e}", a.trace_e_residual);
        let _ = writeln!(text, "  tr S(ad H)E − ‖β‖² tr S(ad H) = {:+.3e}", a.trace_s_residual);
        let _ = writeln!(text, "  forces standard: {}", yes(a.forces_standard));
        out["audit"] = json!(a);
        out["audit_beta"] = json!(beta.as_ref().map(DiagonalWeight::to_strings));
    }
    let ok = checks.iter().all(|(_, p)| *p);
    out["checks"] = Value::Object(
        checks
            .iter()
            .map(|(n, p)| (n.to_string(), json!(p)))
            .collect(),
    );
    let _ = writeln!(text, "checks:");
    for (n, p) in &checks {
        let _ = writeln!(text, "  {:<26} {}", n, if *p { "pass" } else { "FAIL" });
    }
    Ok(Outcome {
        report: out,
        text,
        status: Status::from_bool(ok),
    })
}

pub fn extend(path: &Path, opts: &ExtendOpts) -> Result<Outcome> {
    let spec = load_algebra(path)?;
    if spec.dim_a != 0 {
        return Err(Error::Precondition(
            "extend expects a nilpotent bracket (dim_a = 0)".into(),
        ));
    }
    if opts.flow_first && !spec.bracket.is_zero() {
        let d = stratum_detect(
            &spec.bracket,
            &DetectParams {
                seed: opts.seed,
                ..DetectParams::default()
            },
        )?;
        let lambda = d.frame.bracket.pruned(nilstrat::DEFAULT_TOL);
        extend_bracket(path, &spec, &lambda, opts)
    } else {
        extend_bracket(path, &spec, &spec.bracket, opts)
    }
}

fn extend_bracket<S: Scalar>(
    path: &Path,
    spec: &AlgebraSpec,
    lambda: &BracketTensor<S>,
    opts: &ExtendOpts,
) -> Result<Outcome> {
    let moment = ricci_moment(lambda);
    let mut text = String::new();
    let _ = writeln!(text, "file: {} (dim {})", path.display(), lambda.dim());
    let mut out = json!({
        "command": "extend",
        "input": input_json(path, spec),
        "parameters": { "flow_first": opts.flow_first, "c": opts.c, "tol": opts.tol, "seed": opts.seed },
    });
    let s = match rank_one_extension(lambda, &moment, opts.c, opts.tol) {
        Ok(s) => s,
        Err(e @ (Error::NotDerivation(_) | Error::NonNegativeConstant(_))) => {
            let msg = match &e {
                Error::NotDerivation(r) => format!(
                    "Ric − cI is not a derivation of the bracket (residual {r:.3e}); \
                     the bracket is not a nilsoliton in this basis (try --flow-first)"
                ),
                _ => e.to_string(),
            };
            let _ = writeln!(text, "extension failed: {msg}");
            out["error"] = json!(msg);
            return Ok(Outcome {
                report: out,
                text,
                status: Status::Fail,
            });
        }
        Err(e) => return Err(e),
    };
    let e = s.einstein_check(nilstrat::solv::EINSTEIN_TOL);
    let standard = s.is_standard(1e-12);
    let m_spec = moment.m_normalized.to_f64().symmetric_eigenvalues();
    let kind = rationalize_spectrum(&m_spec, 64, 1e-6).and_then(|b| eigenvalue_type(&b).ok());
    if let Some(p) = &opts.out {
        fs::write(p, write_algebra(&s)).map_err(|err| Error::Parse(format!("{}: {err}", p.display())))?;
        let _ = writeln!(text, "wrote {}", p.display());
    }
    let ad_a = s.ad_on_n(0).symmetric_eigenvalues();
    let _ = writeln!(text, "ad A|n spectrum: {}", fmt_vec(&ad_a));
    if let Some(t) = &kind {
        let _ = writeln!(text, "eigenvalue type: {t}");
    }
    let _ = writeln!(
        text,
        "Einstein: {} (c = {:.9}, max |Ricci − cI| = {:.2e})",
        yes(e.verdict),
        e.c,
        e.max_residual
    );
    let _ = writeln!(text, "standard: {}", yes(standard.verdict));
    out["einstein"] = json!(e);
    out["standard"] = json!(standard);
    out["eigenvalue_type"] = json!(kind.map(|t| t.integers));
    out["extension"] = json!(algebra_file(s.dim_a(), s.dim_n(), s.bracket(), s.provenance()));
    Ok(Outcome {
        report: out,
        text,
        status: Status::from_bool(e.verdict),
    })
}

pub fn minnorm(path: &Path, check: bool) -> Result<Outcome> {
    let ps = parse_points(&read(path)?)?;
    minnorm_of(path, &ps, check)
}

fn minnorm_of(path: &Path, ps: &nilstrat::minnorm::PointSet, check: bool) -> Result<Outcome> {
    let r = min_norm_point(ps)?;
    let mut out = minnorm_json(ps, &r);
    out["command"] = json!("minnorm");
    out["file"] = json!(path.display().to_string());
    let verified = r.verify(ps);
    let mut ok = verified;
    let mut text = String::new();
    let pt: Vec<String> = r.point.iter().map(format_rational).collect();
    let _ = writeln!(text, "file: {} ({} points in dimension {})", path.display(), ps.len(), ps.dim());
    let _ = writeln!(text, "point: ({})", pt.join(", "));
    let _ = writeln!(text, "norm²: {}", format_rational(&r.norm_sq()));
    let sup: Vec<String> = r.support.iter().map(|i| (i + 1).to_string()).collect();
    let _ = writeln!(text, "support: {{{}}}", sup.join(", "));
    let _ = writeln!(text, "verified: {}", yes(verified));
    if check {
        let agrees = match brute_force_min_norm(ps, DEFAULT_BRUTE_FORCE_CAP) {
            Ok(b) => Some(b == r),
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        out["brute_force_agrees"] = json!(agrees);
        let _ = writeln!(
            text,
            "brute force: {}",
            match agrees {
                Some(true) => "agrees",
                Some(false) => "DISAGREES",
                None => "skipped (too many points)",
            }
        );
        ok &= agrees != Some(false);
    }
    Ok(Outcome {
        report: out,
        text,
        status: Status::from_bool(ok),
    })
}

fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries =
                fs::read_dir(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

/// Picks the analysis from the file contents: points → minnorm, `dim_a > 0` → einstein
/// with audit, zero bracket → validate, otherwise stratum.
fn analyze(path: &Path, opts: &StratumOpts) -> Result<Outcome> {
    let text = read(path)?;
    let is_points = serde_json::from_str::<Value>(&text)
        .map(|v| v.get("points").is_some())
        .unwrap_or(false);
    if is_points {
        let ps = parse_points(&text)?;
        return minnorm_of(path, &ps, false);
    }
    let spec = parse_algebra(&text)?;
    if spec.dim_a > 0 {
        let e = EinsteinOpts {
            tol: nilstrat::solv::EINSTEIN_TOL,
            audit: true,
            beta_from_flow: false,
            seed: opts.seed,
        };
        einstein_of(path, &spec, &e)
    } else if spec.bracket.is_zero() {
        validate(path, opts.tol)
    } else {
        let mut o = opts.clone();
        o.trace = None;
        stratum_of(path, &spec, &o)
    }
}

pub fn batch(paths: &[PathBuf], jobs: usize, opts: &StratumOpts) -> Result<Outcome> {
    let files = collect_files(paths)?;
    let results: Mutex<Vec<Option<Result<Outcome>>>> =
        Mutex::new((0..files.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, files.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let r = analyze(&files[i], opts);
                results.lock().expect("no poisoning")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("no poisoning");
    let mut worst = Status::Pass;
    let mut entries = Vec::with_capacity(files.len());
    let mut text = String::new();
    for (f, r) in files.iter().zip(results) {
        let (status, report) = match r.expect("every file processed") {
            Ok(o) => (o.status, o.report),
            Err(e) => (Status::InputError, json!({ "error": e.to_string() })),
        };
        worst = worst.max(status);
        let command = report.get("command").cloned().unwrap_or(Value::Null);
        let _ = writeln!(
            text,
            "{:<40} {:<9} exit {}",
            f.display(),
            command.as_str().unwrap_or("-"),
            status.exit_code()
        );
        entries.push(json!({
            "file": f.display().to_string(),
            "exit": status.exit_code(),
            "report": report,
        }));
    }
    Ok(Outcome {
        report: json!({ "command": "batch", "results": entries }),
        text,
        status: worst,
    })
}
