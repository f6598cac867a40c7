//! Special functions evaluated in log scale where magnitudes demand it:
//! log-Gamma, Bessel `J` of large order on bounded arguments, modified Bessel
//! `I`, the ball-integral identity for `J_nu^2 r`, and Neumann's expansion of
//! even powers in squares of Bessel functions.

mod bessel;
mod gamma;
mod logreal;

pub use bessel::{
    bessel_i, bessel_i_log, bessel_j, bessel_j_log, bessel_l2_ball, power_from_bessel, R_MAX,
};
pub(crate) use bessel::bessel_j_unchecked;
pub use gamma::{log_factorial, log_gamma};
pub(crate) use gamma::log_gamma_unchecked;
pub use logreal::LogReal;
