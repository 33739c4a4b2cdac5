//! All roots of a complex polynomial, with multiplicities, from limits of
//! ratios of Hankel determinants built on the Taylor and Laurent coefficients
//! of the logarithmic derivative `P'/P`.
//!
//! The pipeline is:
//!
//! 1. [`series`] produces `c_k` (Taylor, at 0) and `b_k` (Laurent, at infinity).
//! 2. [`hankel`] evaluates `H_{k,r}` with a cancellation diagnostic.
//! 3. [`engine`] counts distinct roots from the rank collapse of the Hankel
//!    matrices, turns the ratio sequences `H_{k,r}/H_{k+1,r}` into products of
//!    the `r` smallest (or largest) roots, and peels off the roots as
//!    quotients of consecutive products. Modulus ties are broken by random
//!    complex shifts of the variable.
//! 4. [`oracle`] holds the independent machinery the tests check against,
//!    mostly closed forms through Vandermonde determinants plus a
//!    Durand-Kerner root finder.

pub mod engine;
pub mod error;
pub mod hankel;
pub mod mp;
pub mod oracle;
pub mod poly;
pub mod series;

pub use engine::{solve, SolverConfig};
pub use error::{Error, Result};
pub use mp::{MpComplex, DEFAULT_PRECISION};
pub use poly::{Polynomial, RootSet};
pub use series::SeriesKind;
