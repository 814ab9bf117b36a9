//! Stratification of nilpotent Lie brackets and curvature of metric solvable Lie algebras.
//!
//! * [`bracket`]: skew brackets, the `Glₙ` action and its derivative, structural predicates.
//! * [`minnorm`]: exact minimal-norm point of a convex hull.
//! * [`strata`]: weights, `β_μ`, degree function, `W/Y/Z` membership and certificates.
//! * [`moment`]: the Ricci moment map, its norm-square flow and stratum detection.
//! * [`solv`]: curvature of metric solvable Lie algebras, Einstein and standardness checks.
//! * [`io`]: JSON file formats and report encodings.
//!
//! ```
//! use nilstrat::catalog;
//! use nilstrat::moment::{ricci_moment, stratum_detect, DetectParams};
//! use nilstrat::solv::{rank_one_extension, EINSTEIN_TOL};
//!
//! let n4 = catalog::filiform4();
//! let detection = stratum_detect(&n4, &DetectParams::default())?;
//! assert!(detection.certified());
//! assert_eq!(detection.beta().unwrap().to_string(), "diag(-1, -1/2, 0, 1/2)");
//!
//! let s = rank_one_extension(&n4, &ricci_moment(&n4), None, 1e-12)?;
//! let verdict = s.einstein_check(EINSTEIN_TOL);
//! assert!(verdict.verdict && (verdict.c + 1.5).abs() < 1e-9);
//! # Ok::<(), nilstrat::Error>(())
//! ```

pub mod bracket;
pub mod catalog;
pub mod error;
pub mod io;
pub mod linalg;
pub mod minnorm;
pub mod moment;
pub mod scalar;
pub mod solv;
pub mod strata;

pub use bracket::{BracketTensor, DEFAULT_TOL};
pub use error::{Error, Result};
pub use linalg::LinearMap;
pub use scalar::{Rational, Scalar, ScalarMode};
