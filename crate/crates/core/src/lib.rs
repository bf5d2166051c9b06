//! Ramanujan sums, Ramanujan–Fourier power series under Abel summation, and
//! numerical checks of the Hardy–Littlewood mean values they lead to.
//!
//! The crate is organised bottom-up:
//!
//! - [`sieve`]: one linear-sieve pass producing μ, φ, Λ and
//!   Λ₁(n) = φ(n)Λ(n)/n, plus a segmented Λ₁ stream.
//! - [`ramanujan`]: exact c_q(n) through Hölder's identity, the real-argument
//!   c_q(x), the exponential-sum oracle and an executable property catalog.
//! - [`rf_series`]: the power series Σ μ(q)/φ(q)·c_q(x)·z^q with its tail
//!   bound, Abel ladders in z, and the σ, d and lattice-count expansions.
//! - [`singular`]: C₂, pair, Conjecture D and k-tuple constants as truncated
//!   Euler products with tail estimates.
//! - [`mean_values`]: empirical means next to their predicted limits, and
//!   exact period means for periodic summands.
//! - [`report`]: CSV/JSON encodings.
//!
//! ```
//! use ramanujan_abel::{build_sieve, CqEvaluator};
//!
//! let tables = build_sieve(1000)?;
//! let cq = CqEvaluator::new(&tables);
//! assert_eq!(cq.cq_int(4, 2)?, -2);
//! assert_eq!(cq.cq_int(5, 0)?, 4);
//! # Ok::<(), ramanujan_abel::Error>(())
//! ```
//!
//! A narrative guide with runnable examples lives in the `book/` directory of
//! the repository.

pub mod error;
pub mod mean_values;
pub mod ramanujan;
pub mod report;
pub mod rf_series;
pub mod sieve;
pub mod singular;
pub mod sum;

pub use error::{Error, Result};
pub use mean_values::{MeanValueReport, TracePoint, Weights};
pub use ramanujan::{cq_real, CqEvaluator};
pub use rf_series::{AbelTrace, SeriesParams};
pub use sieve::{build_sieve, SegmentedLambdaStream, SieveTables};
pub use singular::{SingularConstant, TupleSpec};

// The guide's code blocks compile and run as doctests of these modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sieve.md")]
    mod sieve {}
    #[doc = include_str!("../../../book/src/ramanujan-sums.md")]
    mod ramanujan_sums {}
    #[doc = include_str!("../../../book/src/power-series.md")]
    mod power_series {}
    #[doc = include_str!("../../../book/src/singular-series.md")]
    mod singular_series {}
    #[doc = include_str!("../../../book/src/mean-values.md")]
    mod mean_values {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
