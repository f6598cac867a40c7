pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod ordering;
pub mod quadrature;
pub mod specialfn;
pub mod spectra;
pub mod symbolics;

pub use error::{Error, Result};
