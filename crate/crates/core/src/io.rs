//! JSON file formats and report encodings.
//!
//! Rationals are written as `"p/q"` strings. Indices in files are 1-based.
//!
//! Algebra files: `{"dim_a": m, "dim_n": n, "brackets": [{"i","j","k","c"}], "gram"?}`,
//! where `c` is a rational string or a JSON number; a bare nilpotent bracket may give
//! `"dim"` instead of `dim_a`/`dim_n`.
//! Point files: `{"dim": d, "points": [["-1", "1/2", …], …], "labels"?}`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bracket::BracketTensor;
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::minnorm::{MinNormResult, PointSet};
use crate::moment::{Detection, FlowResult, TraceRow};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::solv::MetricSolvableAlgebra;
use crate::strata::{DiagonalWeight, StratumCertificate};

/// A rational given either as a string or as a JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Json(serde_json::Number),
}

impl Number {
    /// Decimal numbers are read from their shortest text form, so `0.1` is `1/10`.
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Number::Text(s) => parse_rational(s),
            Number::Json(n) => parse_rational(&n.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_n: Option<usize>,
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// A parsed algebra file with 0-based exact structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraSpec {
    pub dim_a: usize,
    pub dim_n: usize,
    pub bracket: BracketTensor<Rational>,
    pub gram: Option<LinearMap<Rational>>,
    pub provenance: Option<String>,
}

impl AlgebraSpec {
    pub fn dim(&self) -> usize {
        self.dim_a + self.dim_n
    }

    pub fn exact_algebra(&self, tol: f64) -> Result<MetricSolvableAlgebra<Rational>> {
        let s = MetricSolvableAlgebra::new(self.dim_a, self.dim_n, self.bracket.clone(), tol)?;
        Ok(match &self.provenance {
            Some(p) => s.with_provenance(p.clone()),
            None => s,
        })
    }

    /// Orthonormalizes against the Gram matrix (if any) in floating point.
    pub fn float_algebra(&self, tol: f64) -> Result<MetricSolvableAlgebra<f64>> {
        let s = match &self.gram {
            Some(g) => MetricSolvableAlgebra::with_gram(
                self.dim_a,
                self.dim_n,
                self.bracket.to_f64(),
                &g.to_f64(),
                tol,
            )?,
            None => MetricSolvableAlgebra::new(self.dim_a, self.dim_n, self.bracket.to_f64(), tol)?,
        };
        Ok(match &self.provenance {
            Some(p) => s.with_provenance(p.clone()),
            None => s,
        })
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

pub fn parse_algebra(text: &str) -> Result<AlgebraSpec> {
    let file: AlgebraFile = serde_json::from_str(text).map_err(json_error)?;
    let (dim_a, dim_n) = match (file.dim, file.dim_a, file.dim_n) {
        (Some(d), None, None) => (0, d),
        (None, a, Some(n)) => (a.unwrap_or(0), n),
        (Some(d), a, n) if a.unwrap_or(0) + n.unwrap_or(d) == d => {
            let a = a.unwrap_or(0);
            (a, d - a)
        }
        (None, _, None) => {
            return Err(Error::Parse("missing field: dim or dim_n".into()));
        }
        _ => return Err(Error::Parse("dim disagrees with dim_a + dim_n".into())),
    };
    let dim = dim_a + dim_n;
    if dim == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut entries = Vec::with_capacity(file.brackets.len());
    for (pos, e) in file.brackets.iter().enumerate() {
        for (name, v) in [("i", e.i), ("j", e.j), ("k", e.k)] {
            if v == 0 || v > dim {
                return Err(Error::Parse(format!(
                    "brackets[{pos}].{name}: index out of range ({v}; expected 1..={dim})"
                )));
            }
        }
        if e.i == e.j {
            return Err(Error::Parse(format!(
                "brackets[{pos}]: [e{0}, e{0}] must vanish",
                e.i
            )));
        }
        let c = e
            .c
            .to_rational()
            .map_err(|err| Error::Parse(format!("brackets[{pos}].c: {err}")))?;
        entries.push((e.i - 1, e.j - 1, e.k - 1, c));
    }
    let bracket = BracketTensor::from_entries(dim, entries)?;
    let gram = match &file.gram {
        None => None,
        Some(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::Parse(format!("gram: expected a {dim}×{dim} matrix")));
            }
            let mut parsed = Vec::with_capacity(dim);
            for (r, row) in rows.iter().enumerate() {
                let mut out = Vec::with_capacity(dim);
                for (c, v) in row.iter().enumerate() {
                    out.push(
                        v.to_rational()
                            .map_err(|err| Error::Parse(format!("gram[{r}][{c}]: {err}")))?,
                    );
                }
                parsed.push(out);
            }
            Some(LinearMap::from_rows(parsed)?)
        }
    };
    Ok(AlgebraSpec {
        dim_a,
        dim_n,
        bracket,
        gram,
        provenance: file.provenance,
    })
}

fn number_of<S: Scalar>(v: &S) -> Number {
    match v.as_rational() {
        Some(r) => Number::Text(format_rational(&r)),
        None => match serde_json::Number::from_f64(v.to_f64()) {
            Some(n) => Number::Json(n),
            None => Number::Text(format!("{}", v.to_f64())),
        },
    }
}

/// File representation of a bracket on `dim_a + dim_n` (orthonormal basis).
pub fn algebra_file<S: Scalar>(
    dim_a: usize,
    dim_n: usize,
    bracket: &BracketTensor<S>,
    provenance: Option<&str>,
) -> AlgebraFile {
    let brackets = bracket
        .iter()
        .map(|(&(i, j, k), c)| BracketEntry {
            i: i + 1,
            j: j + 1,
            k: k + 1,
            c: number_of(c),
        })
        .collect();
    AlgebraFile {
        dim: None,
        dim_a: Some(dim_a),
        dim_n: Some(dim_n),
        brackets,
        gram: None,
        provenance: provenance.map(str::to_string),
    }
}

pub fn write_algebra<S: Scalar>(s: &MetricSolvableAlgebra<S>) -> String {
    let file = algebra_file(s.dim_a(), s.dim_n(), s.bracket(), s.provenance());
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    pub dim: usize,
    pub points: Vec<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

pub fn parse_points(text: &str) -> Result<PointSet> {
    let file: PointsFile = serde_json::from_str(text).map_err(json_error)?;
    let mut points = Vec::with_capacity(file.points.len());
    for (p, row) in file.points.iter().enumerate() {
        if row.len() != file.dim {
            return Err(Error::Parse(format!(
                "points[{p}]: expected {} coordinates, got {}",
                file.dim,
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(row.len());
        for (c, v) in row.iter().enumerate() {
            out.push(
                v.to_rational()
                    .map_err(|err| Error::Parse(format!("points[{p}][{c}]: {err}")))?,
            );
        }
        points.push(out);
    }
    let ps = PointSet::new(file.dim, points)?;
    match file.labels {
        Some(l) => ps.with_labels(l),
        None => Ok(ps),
    }
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn minnorm_json(ps: &PointSet, r: &MinNormResult) -> Value {
    let mut out = json!({
        "point": rationals(&r.point),
        "norm_sq": format_rational(&r.norm_sq()),
        "weights": rationals(&r.weights),
        "support": r.support.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "verified": r.verify(ps),
    });
    if let Some(labels) = ps.labels() {
        out["support_labels"] = json!(r.support.iter().map(|&i| &labels[i]).collect::<Vec<_>>());
    }
    out
}

pub fn weight_json(beta: &DiagonalWeight) -> Value {
    json!(beta.to_strings())
}

pub fn certificate_json(c: &StratumCertificate) -> Value {
    json!({
        "beta": weight_json(&c.beta),
        "norm_sq": format_rational(&c.beta.norm_sq()),
        "sigma": c.sigma.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "q_value": format_rational(&c.q_value),
        "eigenvalue_type": c.eigenvalue_type.as_ref().map(|t| t.integers.clone()),
        "eigenvalue_scale": c.eigenvalue_type.as_ref().map(|t| format_rational(&t.scale)),
        "checks": c.checks,
        "all_passed": c.all_passed(),
    })
}

pub fn flow_json(f: &FlowResult) -> Value {
    json!({
        "converged": f.converged,
        "iterations": f.iterations,
        "objective": f.objective,
        "candidate_beta": f.candidate_beta,
        "residuals": f.residuals,
    })
}

pub fn detection_json(d: &Detection) -> Value {
    json!({
        "flow": flow_json(&d.flow),
        "certificate": d.certificate.as_ref().map(certificate_json),
        "float_grades": d.float_grades,
        "certified": d.certified(),
        "warnings": d.warnings,
    })
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "iter,objective,tangency")?;
    for r in rows {
        writeln!(w, "{},{:e},{:e}", r.iter, r.objective, r.tangency)?;
    }
    Ok(())
}
