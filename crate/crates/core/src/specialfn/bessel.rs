use crate::error::{Error, Result};
use crate::quadrature::kronrod::{adaptive, AdaptiveOptions};

use super::gamma::log_gamma_unchecked;
use super::LogReal;

/// Largest argument accepted by the log-domain series path.
pub const R_MAX: f64 = 50.0;

/// Cancellation budget for the series: ratio of the largest term to the sum.
/// 1e3 leaves about 13 correct digits.
const SERIES_CANCELLATION_BUDGET: f64 = 1e3;

#[derive(Clone, Copy, Debug)]
pub(crate) struct SeriesParts {
    /// `sum_m (-1)^m (r^2/4)^m / (m! (nu+1)_m)`, normalized so the first term is 1.
    pub sum: f64,
    pub max_term: f64,
}

impl SeriesParts {
    pub fn cancellation(&self) -> f64 {
        if self.sum == 0.0 {
            f64::INFINITY
        } else {
            self.max_term / self.sum.abs()
        }
    }
}

/// Normalized tail of the power series of `J_nu(r)` (`modified = false`) or
/// `I_nu(r)` (`modified = true`).
pub(crate) fn series_parts(nu: f64, r: f64, modified: bool) -> SeriesParts {
    let x = 0.25 * r * r;
    let step = if modified { x } else { -x };
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut max_term = 1.0f64;
    let mut m = 0.0f64;
    loop {
        term *= step / ((m + 1.0) * (nu + m + 1.0));
        sum += term;
        max_term = max_term.max(term.abs());
        m += 1.0;
        let decreasing = (m + 1.0) * (nu + m + 1.0) > x;
        if decreasing && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        if m > 10_000.0 {
            break;
        }
    }
    SeriesParts { sum, max_term }
}

fn prefactor_ln(nu: f64, r: f64) -> f64 {
    nu * (0.5 * r).ln() - log_gamma_unchecked(nu + 1.0)
}

fn check_order(nu: f64) -> Result<()> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("Bessel order must be >= 0, got {nu}")));
    }
    Ok(())
}

fn check_arg(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be >= 0, got {r}")));
    }
    Ok(())
}

/// `J_nu(r)` by the factored power series
/// `(r/2)^nu / Gamma(nu+1) * sum_m (-1)^m (r^2/4)^m Gamma(nu+1) / (m! Gamma(nu+m+1))`,
/// with the prefactor carried in log scale.
///
/// Accurate to about 1e-13 relative whenever it succeeds. Fails with
/// [`Error::AccuracyLoss`] when the alternating series cancels by more than a
/// factor 1e3, which happens only for orders small compared to `r`; use
/// [`bessel_j`] there.
pub fn bessel_j_log(nu: f64, r: f64) -> Result<LogReal> {
    check_order(nu)?;
    check_arg(r)?;
    if r > R_MAX {
        return Err(Error::Domain(format!("argument {r} exceeds r_max = {R_MAX}")));
    }
    if r == 0.0 {
        return Ok(if nu == 0.0 { LogReal::ONE } else { LogReal::ZERO });
    }
    let parts = series_parts(nu, r, false);
    let factor = parts.cancellation();
    if factor > SERIES_CANCELLATION_BUDGET {
        return Err(Error::AccuracyLoss {
            what: format!("J_{nu}({r}) series"),
            factor,
        });
    }
    Ok(LogReal::from_f64(parts.sum).mul_exp(prefactor_ln(nu, r)))
}

/// `J_nu(r)` for any order `nu >= 0` and argument `r >= 0`.
///
/// Uses the log-domain series when it is numerically benign and Miller's
/// backward recurrence otherwise.
pub fn bessel_j(nu: f64, r: f64) -> Result<LogReal> {
    check_order(nu)?;
    check_arg(r)?;
    Ok(bessel_j_unchecked(nu, r))
}

pub(crate) fn bessel_j_unchecked(nu: f64, r: f64) -> LogReal {
    if r == 0.0 {
        return if nu == 0.0 { LogReal::ONE } else { LogReal::ZERO };
    }
    let parts = series_parts(nu, r, false);
    if parts.cancellation() <= SERIES_CANCELLATION_BUDGET {
        LogReal::from_f64(parts.sum).mul_exp(prefactor_ln(nu, r))
    } else {
        LogReal::from_f64(miller(nu, r))
    }
}

/// Miller's backward recurrence normalized with
/// `(r/2)^mu = Gamma(mu+1) J_mu(r) + sum_{k>=1} (mu+2k) Gamma(mu+k)/k! J_{mu+2k}(r)`,
/// where `mu` is the fractional part of `nu`.
fn miller(nu: f64, r: f64) -> f64 {
    let mu = nu.fract();
    let n = nu.trunc() as usize;
    let start = n.max(r.ceil() as usize) + 30 + (40.0 * r).sqrt().ceil() as usize;
    let start = start + (start % 2);

    // Normalization weights at even offsets j = 2k.
    let half = start / 2;
    let mut weights = vec![0.0; half + 1];
    weights[0] = log_gamma_unchecked(mu + 1.0).exp();
    let mut g = weights[0]; // Gamma(mu + k) / k! at k = 1 equals Gamma(mu + 1)
    for k in 1..=half {
        if k > 1 {
            g *= (mu + k as f64 - 1.0) / k as f64;
        }
        weights[k] = (mu + 2.0 * k as f64) * g;
    }

    let mut above = 0.0f64; // f_{j+1}
    let mut current = 1e-280f64; // f_j
    let mut norm = 0.0f64;
    let mut target = 0.0f64;
    let mut j = start;
    loop {
        if j == n {
            target = current;
        }
        if j % 2 == 0 {
            norm += weights[j / 2] * current;
        }
        if j == 0 {
            break;
        }
        let order = mu + j as f64;
        let below = 2.0 * order / r * current - above;
        above = current;
        current = below;
        j -= 1;
        if current.abs() > 1e250 {
            let s = 1e-250;
            current *= s;
            above *= s;
            norm *= s;
            target *= s;
        }
    }
    let scale = if mu == 0.0 { 1.0 } else { (0.5 * r).powf(mu) };
    target * scale / norm
}

/// Modified Bessel function `I_nu(x)` for `x` in `[0, 10]` by its all-positive
/// power series. Underflows to zero for very large orders; see
/// [`bessel_i_log`].
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_i_log(nu, x)?.to_f64())
}

pub fn bessel_i_log(nu: f64, x: f64) -> Result<LogReal> {
    check_order(nu)?;
    if !(0.0..=10.0).contains(&x) {
        return Err(Error::Domain(format!("bessel_i argument must lie in [0, 10], got {x}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { LogReal::ONE } else { LogReal::ZERO });
    }
    let parts = series_parts(nu, x, true);
    Ok(LogReal::from_f64(parts.sum).mul_exp(prefactor_ln(nu, x)))
}

/// `int_0^R J_nu(r)^2 r dr`.
///
/// For `nu >= 1` this uses `(R^2/2) [J_nu(R)^2 - J_{nu-1}(R) J_{nu+1}(R)]`. In the
/// series regime the bracket is rewritten as
/// `J_nu^2 [1 - nu/(nu+1) * S_{nu-1} S_{nu+1} / S_nu^2]` with the normalized series
/// sums `S`, so no Gamma-function rounding enters the cancellation. Orders
/// below 1 are integrated directly.
pub fn bessel_l2_ball(nu: f64, radius: f64) -> Result<LogReal> {
    check_order(nu)?;
    if !(radius >= 0.0) || radius > R_MAX {
        return Err(Error::Domain(format!("ball radius must lie in [0, {R_MAX}], got {radius}")));
    }
    if radius == 0.0 {
        return Ok(LogReal::ZERO);
    }
    if nu < 1.0 {
        return l2_ball_quadrature(nu, radius);
    }
    let lower = series_parts(nu - 1.0, radius, false);
    let mid = series_parts(nu, radius, false);
    let upper = series_parts(nu + 1.0, radius, false);
    let benign = [lower, mid, upper]
        .iter()
        .all(|p| p.cancellation() <= SERIES_CANCELLATION_BUDGET);
    let half_r2 = (0.5 * radius * radius).ln();
    if benign {
        let rho_minus_one = (lower.sum * upper.sum - mid.sum * mid.sum) / (mid.sum * mid.sum);
        let bracket = (1.0 - nu * rho_minus_one) / (nu + 1.0);
        if bracket > 0.0 {
            let j_nu = LogReal::from_f64(mid.sum).mul_exp(prefactor_ln(nu, radius));
            return Ok((j_nu * j_nu).mul_exp(half_r2 + bracket.ln()));
        }
    }
    let j = |order: f64| bessel_j_unchecked(order, radius).to_f64();
    let (jm, j0, jp) = (j(nu - 1.0), j(nu), j(nu + 1.0));
    let value = j0 * j0 - jm * jp;
    Ok(LogReal::from_f64(value).mul_exp(half_r2))
}

fn l2_ball_quadrature(nu: f64, radius: f64) -> Result<LogReal> {
    let f = |r: f64| {
        let j = bessel_j_unchecked(nu, r).to_f64();
        j * j * r
    };
    let opts = AdaptiveOptions {
        rel_tol: 1e-13,
        ..AdaptiveOptions::default()
    };
    let out = adaptive(&f, 0.0, radius, &opts)?;
    Ok(LogReal::from_f64(out.value))
}

/// Partial sum of Neumann's expansion of `r^{2m}` in squares of integer-order
/// Bessel functions:
///
/// `r^{2m} = 2^{2m+1} (m!)^2/(2m)! * sum_{j>=m} j Gamma(j+m)/Gamma(j-m+1) J_j(r)^2`
/// for `m >= 1`, and `1 = J_0^2 + 2 sum_{j>=1} J_j^2` for `m = 0`.
///
/// Sums `terms` consecutive terms starting at `j = m`. All terms are positive.
pub fn power_from_bessel(m: u32, r: f64, terms: usize) -> Result<f64> {
    check_arg(r)?;
    if terms == 0 {
        return Err(Error::Domain("power_from_bessel needs at least one term".into()));
    }
    let jsq = |j: u32| {
        let v = bessel_j_unchecked(f64::from(j), r);
        v * v
    };
    if m == 0 {
        let total: LogReal = (0..terms as u32)
            .map(|j| if j == 0 { jsq(0) } else { jsq(j).mul_exp(std::f64::consts::LN_2) })
            .sum();
        return Ok(total.to_f64());
    }
    let mf = f64::from(m);
    let lead = (2.0 * mf + 1.0) * std::f64::consts::LN_2 + 2.0 * log_gamma_unchecked(mf + 1.0)
        - log_gamma_unchecked(2.0 * mf + 1.0);
    let total: LogReal = (m..m + terms as u32)
        .map(|j| {
            let jf = f64::from(j);
            let coeff = jf.ln() + log_gamma_unchecked(jf + mf) - log_gamma_unchecked(jf - mf + 1.0);
            jsq(j).mul_exp(coeff)
        })
        .sum();
    Ok(total.mul_exp(lead).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Spherical-Bessel closed forms: J_{n+1/2}(x) = sqrt(2x/pi) j_n(x).
    fn half_integer_closed(n: u32, x: f64) -> f64 {
        let s = x.sin();
        let c = x.cos();
        let j = match n {
            0 => s / x,
            1 => s / (x * x) - c / x,
            2 => (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
            _ => unreachable!(),
        };
        (2.0 * x / PI).sqrt() * j
    }

    // Bessel's integral J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt, by the
    // trapezoid rule, which is spectrally accurate for periodic integrands.
    fn bessel_integral(n: u32, x: f64) -> f64 {
        let steps = 2000;
        let h = PI / steps as f64;
        let mut s = 0.0;
        for i in 0..=steps {
            let t = i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            s += w * (f64::from(n) * t - x * t.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn half_integer_closed_forms() {
        let v = bessel_j_log(0.5, 1.0).unwrap().to_f64();
        assert!(rel(v, (2.0 / PI).sqrt() * 1f64.sin()) < 1e-12);
        assert!(rel(v, 0.671_396_7) < 1e-7);
        for &x in &[0.3, 2.0, 7.5, 19.0, 33.0] {
            for n in 0..3 {
                let exact = half_integer_closed(n, x);
                let got = bessel_j(f64::from(n) + 0.5, x).unwrap().to_f64();
                assert!((got - exact).abs() < 1e-12, "n={n} x={x}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn integer_orders_match_bessel_integral() {
        for &x in &[0.5, 3.0, 10.0, 20.0, 45.0] {
            for n in [0u32, 1, 2, 5, 17, 40] {
                let oracle = bessel_integral(n, x);
                let got = bessel_j(f64::from(n), x).unwrap().to_f64();
                assert!((got - oracle).abs() < 1e-12, "n={n} x={x}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn j0_near_origin() {
        let v = bessel_j_log(0.0, 1e-9).unwrap();
        assert_eq!(v.sign(), 1);
        assert!(v.log_abs().abs() < 1e-15);
        assert_eq!(bessel_j_log(0.0, 0.0).unwrap(), LogReal::ONE);
        assert!(bessel_j_log(2.0, 0.0).unwrap().is_zero());
    }

    #[test]
    fn large_order_matches_leading_term() {
        // The normalized series tail for nu = 100, r = 1 is 1 - 1/404 + ...,
        // so the leading term (r/2)^nu / Gamma(nu+1) is within 3e-3.
        let v = bessel_j_log(100.0, 1.0).unwrap();
        let lead = 100.0 * 0.5f64.ln() - log_gamma_unchecked(101.0);
        let ratio = (v.log_abs() - lead).exp();
        assert!((ratio - 1.0).abs() < 3e-3);
        assert!((ratio - (1.0 - 1.0 / 404.0)).abs() < 1e-5);
    }

    #[test]
    fn series_refuses_heavy_cancellation() {
        assert!(matches!(bessel_j_log(0.0, 40.0), Err(Error::AccuracyLoss { .. })));
        assert!(matches!(bessel_j_log(1.0, 60.0), Err(Error::Domain(_))));
        assert!(bessel_j(0.0, 40.0).is_ok());
    }

    #[test]
    fn modified_bessel() {
        assert!((bessel_i(0.0, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        let v = bessel_i(0.5, 1.0).unwrap();
        assert!(rel(v, (2.0 / PI).sqrt() * 1f64.sinh()) < 1e-12);
        assert!(rel(v, 0.937_674_8) < 1e-6);
        assert!(bessel_i(1.0, 11.0).is_err());
    }

    #[test]
    fn l2_ball_small_order_uses_quadrature() {
        // int_0^pi J_{1/2}(r)^2 r dr = (2/pi) int_0^pi sin^2 = 1
        let v = bessel_l2_ball(0.5, PI).unwrap().to_f64();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(bessel_l2_ball(3.0, 0.0).unwrap().is_zero());
    }

    #[test]
    fn neumann_m0_normalization() {
        let v = power_from_bessel(0, 3.0, 40).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }
}
