use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

// B_{2n} / (2n (2n - 1)) for n = 1..7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

const SHIFT_TO: f64 = 15.0;

/// Natural logarithm of the Gamma function for `x > 0`.
///
/// Arguments below 15 are shifted up with the recurrence and the Stirling
/// series is summed there; seven correction terms leave a truncation error
/// below 1e-17 at the shift point.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 20.0 {
        // (x-1)! is exact in f64 up to 19!, so only the final log rounds.
        let fact: f64 = (1..x as u32).map(f64::from).product();
        return fact.ln();
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < SHIFT_TO {
        prod *= y;
        y += 1.0;
    }
    let shift = if prod == 1.0 { 0.0 } else { prod.ln() };
    stirling(y) - shift
}

fn stirling(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + series
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    log_gamma_unchecked(n as f64 + 1.0)
}
