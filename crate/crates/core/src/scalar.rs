//! Scalar tower: exact rationals for combinatorial paths, `f64` for flows.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Exact rational scalar.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

/// Field operations shared by the exact and floating towers.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const MODE: ScalarMode;

    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test. Exact mode ignores `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// The exact value, when this scalar carries one.
    fn as_rational(&self) -> Option<Rational>;
}

impl Scalar for Rational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn as_rational(&self) -> Option<Rational> {
        None
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-1.25"` / `"3e-2"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if t.contains('/') {
        let r = Rational::from_str(t).map_err(|_| bad())?;
        return Ok(r);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{whole}{frac}");
    let numer = BigInt::from_str_radix(if joined.is_empty() { "0" } else { &joined }, 10)
        .map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(numer);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Canonical string form: `"p"` or `"p/q"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact conversion of a finite float.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_f64(v)
}

/// Best rational approximation with denominator at most `max_den` (continued fractions).
pub fn best_rational(v: f64, max_den: u64) -> Option<Rational> {
    if !v.is_finite() || max_den == 0 {
        return None;
    }
    let neg = v < 0.0;
    let x = v.abs();
    // Convergents h/k.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut frac = x;
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = frac.floor();
        if a > 1e18 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            // Semiconvergent with the largest admissible multiplier.
            let m = (max_den as i128 - k0) / k1.max(1);
            if m > 0 && k1 > 0 {
                let hs = m * h1 + h0;
                let ks = m * k1 + k0;
                if let Some((bh, bk)) = best {
                    let e_best = (x - bh as f64 / bk as f64).abs();
                    let e_semi = (x - hs as f64 / ks as f64).abs();
                    if e_semi < e_best {
                        best = Some((hs, ks));
                    }
                }
            }
            break;
        }
        best = Some((h2, k2));
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let rem = frac - a as f64;
        if rem.abs() < 1e-15 {
            break;
        }
        frac = 1.0 / rem;
    }
    let (h, k) = best?;
    let r = Rational::new(BigInt::from(h), BigInt::from(k));
    Some(if neg { -r } else { r })
}
