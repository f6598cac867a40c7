use serde::{Deserialize, Serialize};

use super::kronrod::{adaptive, AdaptiveOptions, AdaptiveOutput};
use super::{check_tol, QuadratureResult};
use crate::error::{Error, Result};
use crate::specialfn::{bessel_j_unchecked, LogReal, R_MAX};
use crate::symbolics::{DecayClass, RadialSymbol};

/// Weight for [`bessel_weighted`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    /// `1` on `[0, R]`.
    Ball(f64),
    /// `exp(-r^2)` on `[0, inf)`.
    Gaussian,
    /// `1` on `[0, b]` with `b` the exact support radius of the symbol.
    Plain,
}

const SAMPLES_PER_PIECE: usize = 512;
const MAX_PANELS: usize = 20_000;

/// Depth, in units of the log-integrand, below the peak that is discarded.
fn window_depth(tol: f64) -> f64 {
    40.0 + (1.0 / tol).ln()
}

fn options(tol: f64, abs_tol: f64) -> AdaptiveOptions {
    AdaptiveOptions {
        rel_tol: 0.5 * tol,
        abs_tol,
        max_panels: MAX_PANELS,
    }
}

/// Piece results combined in log scale.
#[derive(Default)]
struct Accumulator {
    value: LogReal,
    l1: LogReal,
    error: LogReal,
    evaluations: usize,
}

impl Accumulator {
    fn add(&mut self, out: &AdaptiveOutput, log_scale: f64) {
        self.value = self.value + LogReal::from_f64(out.value).mul_exp(log_scale);
        self.l1 = self.l1 + LogReal::from_f64(out.l1).mul_exp(log_scale);
        self.error = self.error + LogReal::from_f64(out.error).mul_exp(log_scale);
        self.evaluations += out.evaluations;
    }

    /// Absolute error that is negligible against what has been accumulated,
    /// expressed in the units of a piece carrying `log_scale`.
    fn floor(&self, tol: f64, log_scale: f64) -> f64 {
        if self.l1.is_zero() {
            return 0.0;
        }
        ((0.1 * tol).ln() + self.l1.log_abs() - log_scale)
            .exp()
            .min(f64::MAX)
    }

    fn finish(self, tol: f64) -> Result<QuadratureResult> {
        let rel = if self.l1.is_zero() {
            0.0
        } else {
            (self.error.log_abs() - self.l1.log_abs()).exp()
        };
        let evaluations = self.evaluations.max(1);
        if rel > tol {
            return Err(Error::ToleranceNotMet {
                best: self.value,
                achieved: rel,
                requested: tol,
                evaluations,
            });
        }
        Ok(QuadratureResult {
            value: self.value,
            abs_error_estimate: rel,
            evaluations,
            abs_integral: self.l1,
        })
    }
}

fn cut_points(v: &RadialSymbol, lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts = vec![lo];
    cuts.extend(v.breakpoints().into_iter().filter(|x| *x > lo && *x < hi));
    cuts.push(hi);
    cuts
}

/// `int_0^R V(r) r^s dr`.
///
/// Each piece `[a, c]` between indicator endpoints is mapped by
/// `r = c exp(-y/(s+1))`, which turns `r^s dr` into `c^{s+1}/(s+1) exp(-y) dy`
/// and concentrates nodes near `c` however large `s` is.
pub fn moment_compact(v: &RadialSymbol, s: f64, radius: f64, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Precondition(format!("moment order must be >= 0, got {s}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Precondition(format!("radius must be positive and finite, got {radius}")));
    }
    let s1 = s + 1.0;
    let depth = window_depth(tol);
    let cuts = cut_points(v, 0.0, radius);
    let mut acc = Accumulator::default();
    for w in cuts.windows(2).rev() {
        let (a, c) = (w[0], w[1]);
        let y_max = if a == 0.0 {
            depth
        } else {
            (s1 * (c / a).ln()).min(depth)
        };
        let log_scale = s1 * c.ln() - s1.ln();
        let g = |y: f64| {
            let x = v.evaluate(c * (-y / s1).exp());
            if x == 0.0 {
                0.0
            } else {
                x * (-y).exp()
            }
        };
        let out = adaptive(&g, 0.0, y_max, &options(tol, acc.floor(tol, log_scale)))
            .map_err(|e| rescale_failure(e, log_scale))?;
        acc.add(&out, log_scale);
    }
    acc.finish(tol)
}

/// `int_0^inf V(r) r^s exp(-r^2) dr`.
pub fn moment_gaussian(v: &RadialSymbol, s: f64, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Precondition(format!("moment order must be >= 0, got {s}")));
    }
    let phi = move |r: f64| {
        if r == 0.0 {
            if s == 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            s * r.ln() - r * r
        }
    };
    let natural = R_MAX.max((0.5 * s).sqrt() + 30.0);
    let (hi, truncated) = support_limited(v, natural);
    windowed(v, &phi, hi, truncated, tol)
}

/// `int V(r) J_nu(r)^2 r w(r) dr` for the three weights of [`Weight`].
pub fn bessel_weighted(v: &RadialSymbol, nu: f64, weight: Weight, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("Bessel order must be >= 0, got {nu}")));
    }
    let log_j2r = move |r: f64| {
        if r == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * bessel_j_unchecked(nu, r).log_abs() + r.ln()
        }
    };
    match weight {
        Weight::Ball(radius) => {
            if !(radius > 0.0) || radius > R_MAX {
                return Err(Error::Precondition(format!(
                    "ball radius must lie in (0, {R_MAX}], got {radius}"
                )));
            }
            windowed(v, &log_j2r, radius, false, tol)
        }
        Weight::Gaussian => {
            let phi = move |r: f64| log_j2r(r) - r * r;
            let natural = R_MAX.max(nu.sqrt() + 30.0);
            let (hi, truncated) = support_limited(v, natural);
            windowed(v, &phi, hi, truncated, tol)
        }
        Weight::Plain => {
            let esr = v.exact_support_radius()?;
            if esr.is_finite() {
                if esr > R_MAX {
                    return Err(Error::Precondition(format!(
                        "support radius {esr} exceeds the largest Bessel argument {R_MAX}"
                    )));
                }
                return windowed(v, &log_j2r, esr.max(f64::MIN_POSITIVE), false, tol);
            }
            match v.classify_decay() {
                DecayClass::RapidDecay | DecayClass::StretchedExp(_) => {
                    windowed(v, &log_j2r, R_MAX, true, tol)
                }
                other => Err(Error::Precondition(format!(
                    "the undamped Bessel weight needs a compactly supported or decaying symbol, \
                     '{v}' is {other:?}"
                ))),
            }
        }
    }
}

/// Upper integration limit: the exact support radius when it is smaller than
/// `natural`, otherwise `natural` with the tail marked as truncated.
fn support_limited(v: &RadialSymbol, natural: f64) -> (f64, bool) {
    match v.exact_support_radius() {
        Ok(b) if b <= natural => (b.max(f64::MIN_POSITIVE), false),
        _ => (natural, true),
    }
}

/// `int_0^hi V(r) exp(phi(r)) dr`.
///
/// `ln|V| + phi` is sampled on every piece to find its peak and the window
/// where it lies within [`window_depth`] of the peak; only that window is
/// integrated, after shifting by the peak so the integrand is `O(1)`.
fn windowed(
    v: &RadialSymbol,
    phi: &(dyn Fn(f64) -> f64 + Sync),
    hi: f64,
    truncated: bool,
    tol: f64,
) -> Result<QuadratureResult> {
    let depth = window_depth(tol);
    let cuts = cut_points(v, 0.0, hi);
    let mut evaluations = 0;
    let mut pieces: Vec<(f64, f64, f64, Vec<f64>)> = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let psi: Vec<f64> = (0..SAMPLES_PER_PIECE)
            .map(|i| {
                let r = a + (b - a) * (i as f64 + 0.5) / SAMPLES_PER_PIECE as f64;
                let (sign, ln_v) = v.evaluate_log(r);
                if sign == 0.0 {
                    f64::NEG_INFINITY
                } else if sign.is_nan() {
                    f64::NAN
                } else {
                    ln_v + phi(r)
                }
            })
            .collect();
        evaluations += SAMPLES_PER_PIECE;
        if let Some(bad) = psi.iter().position(|p| p.is_nan() || *p == f64::INFINITY) {
            let r = a + (b - a) * (bad as f64 + 0.5) / SAMPLES_PER_PIECE as f64;
            return Err(Error::NonIntegrable(format!(
                "weighted symbol '{v}' is not finite at r = {r}"
            )));
        }
        let m = psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        peak = peak.max(m);
        pieces.push((a, b, m, psi));
    }
    if peak == f64::NEG_INFINITY {
        return Ok(QuadratureResult {
            value: LogReal::ZERO,
            abs_error_estimate: 0.0,
            evaluations: evaluations.max(1),
            abs_integral: LogReal::ZERO,
        });
    }
    if truncated {
        let (_, _, _, psi) = pieces.last().expect("at least one piece");
        let tail = psi[psi.len() - 1];
        if tail > peak - depth {
            return Err(Error::NonIntegrable(format!(
                "weighted symbol '{v}' is not negligible at the truncation radius {hi}"
            )));
        }
    }
    // Largest pieces first, so the absolute floor for the rest is meaningful.
    pieces.sort_by(|x, y| y.2.total_cmp(&x.2));
    let mut acc = Accumulator {
        evaluations,
        ..Accumulator::default()
    };
    for (a, b, m, psi) in &pieces {
        if *m <= peak - depth {
            continue;
        }
        let n = psi.len();
        let h = (b - a) / n as f64;
        let first = psi.iter().position(|p| *p > peak - depth).expect("piece above depth");
        let last = psi.iter().rposition(|p| *p > peak - depth).expect("piece above depth");
        // One sample spacing of margin on either side of the window.
        let lo = (a + h * (first as f64 - 1.0)).max(*a);
        let up = (a + h * (last as f64 + 2.0)).min(*b);
        let f = |r: f64| {
            let (sign, ln_v) = v.evaluate_log(r);
            if sign == 0.0 {
                0.0
            } else {
                let e = ln_v + phi(r) - peak;
                if e == f64::NEG_INFINITY {
                    0.0
                } else {
                    sign * e.exp()
                }
            }
        };
        let out = adaptive(&f, lo, up, &options(tol, acc.floor(tol, peak)))
            .map_err(|e| rescale_failure(e, peak))?;
        acc.add(&out, peak);
    }
    acc.finish(tol)
}

/// Restores the true magnitude of the best estimate carried by a failure.
fn rescale_failure(e: Error, log_scale: f64) -> Error {
    match e {
        Error::ToleranceNotMet {
            best,
            achieved,
            requested,
            evaluations,
        } => Error::ToleranceNotMet {
            best: best.mul_exp(log_scale),
            achieved,
            requested,
            evaluations,
        },
        other => other,
    }
}
