//! Dense square matrices over a [`Scalar`] and exact/pivoted elimination.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// An `n×n` matrix, row-major. Column `j` is the image of `e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap<S> {
    dim: usize,
    entries: Vec<S>,
}

impl<S: Scalar> LinearMap<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = S::one();
        }
        m
    }

    pub fn diagonal(values: &[S]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    /// Builds from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.entries.chunks(self.dim.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> S {
        (0..self.dim).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v.clone() * c.clone()).collect(),
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(S::zero(), |acc, j| {
                    acc + self.get(i, j).clone() * x[j].clone()
                })
            })
            .collect()
    }

    /// Trace inner product `tr(A Bᵗ)`.
    pub fn frobenius(&self, other: &Self) -> S {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn norm_sq(&self) -> S {
        self.frobenius(self)
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `½(A + Aᵗ)`.
    pub fn symmetric_part(&self) -> Self {
        let two = S::from_i64(2);
        Self::from_fn(self.dim, |i, j| {
            (self.get(i, j).clone() + self.get(j, i).clone()) / two.clone()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            (0..i).all(|j| (self.get(i, j).clone() - self.get(j, i).clone()).is_negligible(tol))
        })
    }

    /// Gauss-Jordan inverse on `[A | I]`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut aug: Vec<Vec<S>> = self
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
                row
            })
            .collect();
        let pivots = rref(&mut aug, n, 1e-13);
        if pivots.len() < n {
            return Err(Error::Singular);
        }
        Self::from_rows(aug.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    pub fn to_f64(&self) -> LinearMap<f64> {
        LinearMap {
            dim: self.dim,
            entries: self.entries.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl LinearMap<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn exp(&self) -> Self {
        Self::from_nalgebra(&self.to_nalgebra().exp())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Ascending eigenvalues of the symmetric part.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .symmetric_part()
            .to_nalgebra()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl LinearMap<Rational> {
    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_i64(v)).collect())
                .collect(),
        )
    }
}

impl<S: Scalar> Mul for &LinearMap<S> {
    type Output = LinearMap<S>;

    fn mul(self, rhs: &LinearMap<S>) -> LinearMap<S> {
        let n = self.dim;
        LinearMap::from_fn(n, |i, j| {
            (0..n).fold(S::zero(), |acc, k| {
                acc + self.get(i, k).clone() * rhs.get(k, j).clone()
            })
        })
    }
}

impl<S: Scalar> Add for &LinearMap<S> {
    type Output = LinearMap<S>;

    fn add(self, rhs: &LinearMap<S>) -> LinearMap<S> {
        LinearMap {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Sub for &LinearMap<S> {
    type Output = LinearMap<S>;

    fn sub(self, rhs: &LinearMap<S>) -> LinearMap<S> {
        LinearMap {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

/// Reduced row echelon form in place; returns pivot columns.
///
/// Pivots are searched in the first `ncols` columns; extra columns ride along.
/// Entries with magnitude `≤ tol·scale` are treated as zero (float mode only).
pub fn rref<S: Scalar>(rows: &mut [Vec<S>], ncols: usize, tol: f64) -> Vec<usize> {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let thresh = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let best = match S::MODE {
            crate::ScalarMode::Exact => (r..rows.len()).find(|&i| !rows[i][c].is_zero()),
            crate::ScalarMode::Float => (r..rows.len())
                .max_by(|&a, &b| {
                    rows[a][c]
                        .to_f64()
                        .abs()
                        .partial_cmp(&rows[b][c].to_f64().abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&i| !rows[i][c].is_negligible(thresh)),
        };
        let Some(p) = best else { continue };
        rows.swap(r, p);
        let pv = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() / pv.clone();
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for j in 0..rows[i].len() {
                let t = f.clone() * rows[r][j].clone();
                rows[i][j] = rows[i][j].clone() - t;
            }
            if S::MODE == crate::ScalarMode::Float {
                rows[i][c] = S::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : A x = 0}` for an `m×ncols` system given by rows.
pub fn null_space<S: Scalar>(mut rows: Vec<Vec<S>>, ncols: usize, tol: f64) -> Vec<Vec<S>> {
    let pivots = rref(&mut rows, ncols, tol);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); ncols];
            v[f] = S::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -rows[r][f].clone();
            }
            v
        })
        .collect()
}

/// Rank of a list of vectors of length `ncols`.
pub fn rank<S: Scalar>(mut rows: Vec<Vec<S>>, ncols: usize, tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rref(&mut rows, ncols, tol).len()
}

/// Solves the square system `A x = b`; `None` if singular.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S], tol: f64) -> Option<Vec<S>> {
    let n = b.len();
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, n, tol);
    if pivots.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}
