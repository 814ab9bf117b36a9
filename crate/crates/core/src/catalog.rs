//! Named brackets used by tests, examples and the CLI.

use crate::bracket::BracketTensor;
use crate::scalar::Rational;

/// `μ(e1,e2) = e3`.
pub fn heisenberg3() -> BracketTensor<Rational> {
    BracketTensor::from_integer_entries(3, &[(0, 1, 2, 1)]).expect("valid")
}

/// `μ(e1,e2) = e3, μ(e1,e3) = e4`.
pub fn filiform4() -> BracketTensor<Rational> {
    BracketTensor::from_integer_entries(4, &[(0, 1, 2, 1), (0, 2, 3, 1)]).expect("valid")
}

/// Standard graded filiform `μ(e1,e_i) = e_{i+1}`, `2 ≤ i < n`.
pub fn filiform(n: usize) -> BracketTensor<Rational> {
    let entries: Vec<_> = (1..n.saturating_sub(1)).map(|i| (0, i, i + 1, 1)).collect();
    BracketTensor::from_integer_entries(n, &entries).expect("valid")
}

/// `μ(e1,e2) = e3, μ(e2,e3) = e1, μ(e3,e1) = e2`.
pub fn so3() -> BracketTensor<Rational> {
    BracketTensor::from_integer_entries(3, &[(0, 1, 2, 1), (1, 2, 0, 1), (0, 2, 1, -1)])
        .expect("valid")
}

/// Heisenberg algebra of dimension `2k+1`: `μ(e_i, e_{k+i}) = e_{2k+1}`.
pub fn heisenberg(k: usize) -> BracketTensor<Rational> {
    let entries: Vec<_> = (0..k).map(|i| (i, k + i, 2 * k, 1)).collect();
    BracketTensor::from_integer_entries(2 * k + 1, &entries).expect("valid")
}

pub fn abelian(n: usize) -> BracketTensor<Rational> {
    BracketTensor::zero(n).expect("positive dimension")
}

/// Looks up a catalog entry by name (`h3`, `n4`, `so3`, `h5`, `filiform5`, `abelian3`, …).
pub fn by_name(name: &str) -> Option<BracketTensor<Rational>> {
    match name {
        "h3" => Some(heisenberg3()),
        "n4" => Some(filiform4()),
        "so3" => Some(so3()),
        _ => {
            if let Some(k) = name.strip_prefix("filiform").and_then(|s| s.parse().ok()) {
                (k >= 3).then(|| filiform(k))
            } else if let Some(k) = name.strip_prefix("abelian").and_then(|s| s.parse().ok()) {
                (k >= 1).then(|| abelian(k))
            } else if let Some(d) = name.strip_prefix('h').and_then(|s| s.parse::<usize>().ok()) {
                (d >= 3 && d % 2 == 1).then(|| heisenberg((d - 1) / 2))
            } else {
                None
            }
        }
    }
}
