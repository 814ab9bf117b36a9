#![allow(dead_code)]

use nilstrat::bracket::{permutation_matrix, BracketTensor};
use nilstrat::catalog;
use nilstrat::scalar::{int, rat};
use nilstrat::solv::MetricSolvableAlgebra;
use nilstrat::{LinearMap, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

/// Arbitrary (not necessarily Lie) bracket with a few small rational coefficients.
pub fn random_bracket<R: Rng>(rng: &mut R, n: usize) -> BracketTensor<Rational> {
    let count = rng.gen_range(1..=2 * n);
    let entries: Vec<_> = (0..count)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            (i, j, rng.gen_range(0..n), small_rational(rng))
        })
        .collect();
    BracketTensor::from_entries(n, entries).unwrap()
}

/// 2-step nilpotent: brackets of the first `n − c` vectors land in the last `c`.
pub fn random_two_step<R: Rng>(rng: &mut R, n: usize) -> BracketTensor<Rational> {
    loop {
        let c = rng.gen_range(1..=(n - 2).max(1));
        let m = n - c;
        let mut entries = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in m..n {
                    if rng.gen_bool(0.4) {
                        entries.push((i, j, k, int(rng.gen_range(-2..=2))));
                    }
                }
            }
        }
        let mu = BracketTensor::from_entries(n, entries).unwrap();
        if !mu.is_zero() {
            return mu;
        }
    }
}

/// `mu` on the first coordinates of an `n`-dimensional space (direct sum with an abelian factor).
pub fn pad(mu: &BracketTensor<Rational>, n: usize) -> BracketTensor<Rational> {
    let entries: Vec<_> = mu.iter().map(|(&(i, j, k), c)| (i, j, k, c.clone())).collect();
    BracketTensor::from_entries(n, entries).unwrap()
}

/// Catalog algebras of dimension ≤ `n`, padded to `n`.
pub fn catalog_algebra<R: Rng>(rng: &mut R, n: usize) -> BracketTensor<Rational> {
    let mut options = vec![catalog::heisenberg3()];
    if n >= 4 {
        options.push(catalog::filiform4());
    }
    for d in 5..=n {
        options.push(catalog::filiform(d));
    }
    if n >= 5 {
        options.push(catalog::heisenberg(2));
    }
    pad(options.choose(rng).unwrap(), n)
}

/// Random unitriangular rational matrix (upper or lower).
pub fn unitriangular<R: Rng>(rng: &mut R, n: usize) -> LinearMap<Rational> {
    let upper = rng.gen_bool(0.5);
    LinearMap::from_fn(n, |i, j| {
        if i == j {
            int(1)
        } else if (i < j) == upper && rng.gen_bool(0.5) {
            int(rng.gen_range(-1..=1))
        } else {
            int(0)
        }
    })
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    sigma
}

/// Random nilpotent Lie bracket in dimension `n ≥ 3`: a random 2-step algebra or a catalog
/// algebra, moved by a random unitriangular change of basis and a permutation.
pub fn random_nilpotent<R: Rng>(rng: &mut R, n: usize) -> BracketTensor<Rational> {
    let mu = if rng.gen_bool(0.5) {
        random_two_step(rng, n)
    } else {
        catalog_algebra(rng, n)
    };
    let g = unitriangular(rng, n);
    let p: LinearMap<Rational> = permutation_matrix(&random_permutation(rng, n)).unwrap();
    mu.act(&(&p * &g)).unwrap()
}

/// Random orthogonal matrix `exp(X)` with `X` skew.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> LinearMap<f64> {
    let a = LinearMap::from_fn(n, |_, _| rng.gen_range(-1.5..1.5));
    (&a - &a.transpose()).exp()
}

/// Random metric solvable algebra `a ⊕ n` of dimension ≤ 7: `n` random nilpotent, `a`
/// acting by diagonal derivations of a weight-basis model, then a random change of basis
/// preserving `n` (which mixes `n` into `a` and generally makes `[a,a] ≠ 0`).
pub fn random_solvable<R: Rng>(rng: &mut R) -> MetricSolvableAlgebra<f64> {
    loop {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(1..=(7 - n).min(2));
        let mu = if rng.gen_bool(0.5) {
            random_two_step(rng, n)
        } else {
            catalog_algebra(rng, n)
        };
        // Diagonal derivations: d_k = d_i + d_j on the support.
        let support = mu.support(0.0);
        let rows: Vec<Vec<Rational>> = support
            .iter()
            .map(|&(i, j, k)| {
                let mut r = vec![int(0); n];
                r[k] += int(1);
                r[i] -= int(1);
                r[j] -= int(1);
                r
            })
            .collect();
        let basis = nilstrat::linalg::null_space(rows, n, 0.0);
        if basis.is_empty() {
            continue;
        }
        let dim = m + n;
        let mut entries = Vec::new();
        for (&(i, j, k), c) in mu.iter() {
            entries.push((m + i, m + j, m + k, c.clone()));
        }
        for r in 0..m {
            let mut d = vec![int(0); n];
            for v in &basis {
                let t = int(rng.gen_range(-2..=2));
                for (o, x) in d.iter_mut().zip(v) {
                    *o += &t * x;
                }
            }
            for (i, di) in d.into_iter().enumerate() {
                if di != int(0) {
                    entries.push((r, m + i, m + i, di));
                }
            }
        }
        let bracket = BracketTensor::from_entries(dim, entries).unwrap().to_f64();
        // g maps n into n: lower block-triangular with invertible diagonal blocks.
        let g = LinearMap::from_fn(dim, |i, j| {
            let same_block = (i < m) == (j < m);
            if i == j {
                rng.gen_range(0.5..2.0)
            } else if same_block || (i >= m && j < m) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let moved = bracket.act(&g).unwrap();
        let moved = moved.scale(&(1.0 / moved.max_abs()));
        if let Ok(s) = MetricSolvableAlgebra::new(m, n, moved, 1e-9) {
            return s;
        }
    }
}
