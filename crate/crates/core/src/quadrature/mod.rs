//! Weighted integrals of radial symbols, returned in log scale.
//!
//! Every routine reports its error relative to the integral of `|V|` against
//! the same weight. For sign-definite symbols that is the ordinary relative
//! error; for sign-changing ones it is the honest scale of the cancellation.

pub mod kronrod;
mod moments;
mod oscillatory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::LogReal;

pub use moments::{bessel_weighted, moment_compact, moment_gaussian, Weight};
pub use oscillatory::{
    oscillatory_abs_moment, oscillatory_moment, oscillatory_moment_by_zeros, rotation_bound,
    OscillatorySymbol,
};

/// Result of a weighted integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: LogReal,
    /// Estimated error divided by the integral of `|V|` against the weight.
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// The integral of `|V|` against the same weight, as estimated alongside
    /// `value`.
    pub abs_integral: LogReal,
}

/// Smallest and largest accepted tolerances.
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > TOL_RANGE.0 && tol < TOL_RANGE.1 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "tolerance must lie in ({:e}, {:e}), got {tol:e}",
            TOL_RANGE.0, TOL_RANGE.1
        )))
    }
}
