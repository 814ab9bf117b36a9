use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use super::{clearly_infeasible, dot, next_combination, MinNormResult, PointSet};
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 12;

/// Face enumeration: for every affinely independent subset, solve the KKT system of
/// `min ‖·‖²` over its affine hull (float-screened, decided exactly) and keep those whose minimizer has strictly positive
/// barycentric weights. The smallest norm wins; among subsets reaching it, the first in
/// (size, lexicographic) order is reported.
pub fn brute_force_min_norm(ps: &PointSet, cap: usize) -> Result<MinNormResult> {
    let pts = ps.points();
    if pts.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if pts.len() > cap {
        return Err(Error::CapExceeded {
            len: pts.len(),
            cap,
        });
    }
    let max_k = pts.len().min(ps.dim() + 1);
    let gram: Vec<Vec<Rational>> = pts
        .iter()
        .map(|p| pts.iter().map(|q| dot(p, q)).collect())
        .collect();
    let fgram = DMatrix::from_fn(pts.len(), pts.len(), |i, j| gram[i][j].to_f64());
    let mut best: Option<(Rational, Vec<usize>, Vec<Rational>)> = None;
    for k in 1..=max_k {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if let Some(w) = face_minimizer(&gram, &fgram, &combo) {
                if w.iter().all(|v| *v > Rational::zero()) {
                    // ‖Σ wᵢpᵢ‖² = wᵗGw
                    let n2 = quadratic_form(&gram, &combo, &w);
                    if best.as_ref().is_none_or(|(b, ..)| n2 < *b) {
                        best = Some((n2, combo.clone(), w));
                    }
                }
            }
            if !next_combination(&mut combo, pts.len()) {
                break;
            }
        }
    }
    let (_, support, w) = best.expect("every singleton is a feasible face");
    let mut weights = vec![Rational::zero(); pts.len()];
    let mut point = vec![Rational::zero(); ps.dim()];
    for (&i, wi) in support.iter().zip(w) {
        for (o, v) in point.iter_mut().zip(&pts[i]) {
            *o += &wi * v;
        }
        weights[i] = wi;
    }
    Ok(MinNormResult {
        point,
        weights,
        support,
    })
}

fn quadratic_form(gram: &[Vec<Rational>], idx: &[usize], w: &[Rational]) -> Rational {
    let mut total = Rational::zero();
    for (a, wa) in idx.iter().zip(w) {
        for (b, wb) in idx.iter().zip(w) {
            total += wa * wb * &gram[*a][*b];
        }
    }
    total
}

/// Barycentric weights of the minimizer of `‖·‖²` over the affine hull of the points `idx`,
/// from the KKT system `[G 1; 1ᵗ 0][w; t] = [0; 1]`; `None` when affinely dependent.
fn face_minimizer(gram: &[Vec<Rational>], fgram: &DMatrix<f64>, idx: &[usize]) -> Option<Vec<Rational>> {
    let k = idx.len();
    if k == 1 {
        return Some(vec![Rational::one()]);
    }
    let entry = |i: usize, j: usize, g: &dyn Fn(usize, usize) -> f64| match (i < k, j < k) {
        (true, true) => g(idx[i], idx[j]),
        (false, false) => 0.0,
        _ => 1.0,
    };
    let fa = DMatrix::from_fn(k + 1, k + 1, |i, j| entry(i, j, &|a, b| fgram[(a, b)]));
    let mut fb = DVector::zeros(k + 1);
    fb[k] = 1.0;
    if clearly_infeasible(fa, &fb, k) {
        return None;
    }
    let a: Vec<Vec<Rational>> = (0..=k)
        .map(|i| {
            (0..=k)
                .map(|j| match (i < k, j < k) {
                    (true, true) => gram[idx[i]][idx[j]].clone(),
                    (false, false) => Rational::zero(),
                    _ => Rational::one(),
                })
                .collect()
        })
        .collect();
    let mut b = vec![Rational::zero(); k + 1];
    b[k] = Rational::one();
    let mut sol = solve(&a, &b, 0.0)?;
    sol.truncate(k);
    Some(sol)
}
