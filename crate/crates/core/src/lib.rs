//! Rational points near p-adic integers, computed exactly.
//!
//! The crate is organised bottom-up:
//!
//! * [`padic`]: finite-precision p-adic integers, valuations and the
//!   discretisation of approximation thresholds;
//! * [`count`]: the counting set of simultaneous approximations, its
//!   brute-force and closed-form counters, the counting bounds, pigeonhole
//!   witnesses and the Diophantine exponent estimator;
//! * [`lattice`]: the approximation lattice, exact point enumeration,
//!   successive minima and the geometry-of-numbers inequalities;
//! * [`dim`]: the Hausdorff-dimension formulas on coordinate hyperplanes
//!   and the finite-stage cover-cost estimator;
//! * [`ubiquity`]: exact Haar measure of unions of p-adic balls and the
//!   local ubiquity density check.
//!
//! The guide in `book/` walks through each of these with runnable
//! snippets; those snippets are compiled and run as doctests of this crate.

pub mod count;
pub mod dim;
pub mod error;
pub mod lattice;
pub mod num;
pub mod padic;
pub mod ubiquity;

pub use error::{Error, Result};
pub use padic::{PadicInt, Prime, Psi, ThresholdMode, Valuation};

/// Upper bound on the work a single enumeration may do.
///
/// Operations estimate their cost up front and fail with
/// [`Error::InfeasibleSize`] instead of running away.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_ops: u128,
}

impl Budget {
    pub const fn new(max_ops: u128) -> Self {
        Budget { max_ops }
    }

    pub fn check(self, ops: u128) -> Result<()> {
        if ops > self.max_ops {
            Err(Error::InfeasibleSize {
                ops,
                budget: self.max_ops,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(400_000_000)
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/padic.md")]
    mod padic {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/dimension.md")]
    mod dimension {}
    #[doc = include_str!("../../../book/src/ubiquity.md")]
    mod ubiquity {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
