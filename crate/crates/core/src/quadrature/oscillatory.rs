//! Moments of `V(r) = exp(-r^{2p} + r^2) sin(r^{2q})` against `r^{2k+1} exp(-r^2)`.
//!
//! After `t = r^{2q}` the moment becomes
//! `I(k) = 1/(2q) int_0^inf t^{a-1} exp(-t^b) sin t dt` with `a = (k+1)/q` and
//! `b = p/q < 1`. Turning the path onto the imaginary axis, `t = i tau`, gives
//!
//! `I(k) = 1/(2q) int_0^inf tau^{a-1} exp(-tau - c tau^b) sin(pi a/2 - s tau^b) dtau`
//!
//! with `c = cos(pi b/2)`, `s = sin(pi b/2)`. This integrand has no
//! oscillation left to cancel and is bounded by the Gamma density, so
//! `|I(k)| <= Gamma(a)/(2q)`. On the real axis the same number is the residue
//! of hundreds of orders of magnitude of cancellation once `k` is large; the
//! between-zeros summation is kept as an independent check for small `k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kronrod::{adaptive, AdaptiveOptions};
use super::{check_tol, QuadratureResult};
use crate::error::{Error, Result};
use crate::specialfn::{log_gamma_unchecked, LogReal};
use crate::symbolics::{parse_symbol, RadialSymbol};

/// `amplitude * exp(-r^{2p} + r^2) * sin(r^{2q})` with `1 < p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorySymbol {
    pub p: f64,
    pub q: f64,
    pub amplitude: f64,
}

impl OscillatorySymbol {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_pq(p, q)?;
        Ok(OscillatorySymbol {
            p,
            q,
            amplitude: 1.0,
        })
    }

    /// The same function as a general symbol, for evaluation and display.
    pub fn to_symbol(&self) -> RadialSymbol {
        let fmt = crate::symbolics::format_number;
        let body = format!(
            "exp(-r^{} + r^2)*sin(r^{})",
            fmt(2.0 * self.p),
            fmt(2.0 * self.q)
        );
        let text = if self.amplitude == 1.0 {
            body
        } else {
            format!("{}*{body}", fmt(self.amplitude))
        };
        parse_symbol(&text).expect("generated symbol text parses")
    }

    /// `int_0^inf V(r) r^{2k+1} exp(-r^2) dr`.
    pub fn moment(&self, k: u32, tol: f64) -> Result<QuadratureResult> {
        let mut out = oscillatory_moment(self.p, self.q, k, tol)?;
        scale(&mut out, self.amplitude);
        Ok(out)
    }

    /// `int_0^inf |V(r)| r^{2k+1} exp(-r^2) dr`.
    pub fn abs_moment(&self, k: u32, tol: f64) -> Result<QuadratureResult> {
        let mut out = oscillatory_abs_moment(self.p, self.q, k, tol)?;
        scale(&mut out, self.amplitude.abs());
        Ok(out)
    }
}

fn scale(out: &mut QuadratureResult, c: f64) {
    let c = LogReal::from_f64(c);
    out.value = out.value * c;
    out.abs_integral = out.abs_integral * c.abs();
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if p > 1.0 && q > p && q.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "oscillatory symbol needs 1 < p < q, got p = {p}, q = {q}"
        )))
    }
}

/// `Gamma((k+1)/q) / (2q)`, the bound from the rotated path.
pub fn rotation_bound(q: f64, k: u32) -> LogReal {
    LogReal::from_ln(log_gamma_unchecked((f64::from(k) + 1.0) / q) - (2.0 * q).ln())
}

fn depth(tol: f64) -> f64 {
    40.0 + (1.0 / tol).ln()
}

fn opts(tol: f64) -> AdaptiveOptions {
    AdaptiveOptions {
        rel_tol: 0.5 * tol,
        abs_tol: 0.0,
        max_panels: 20_000,
    }
}

/// `I(k)` along the imaginary axis.
pub fn oscillatory_moment(p: f64, q: f64, k: u32, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    check_pq(p, q)?;
    let a = (f64::from(k) + 1.0) / q;
    let b = p / q;
    let (c, s) = ((0.5 * PI * b).cos(), (0.5 * PI * b).sin());
    let phase = 0.5 * PI * a;
    let tau_hi = a + 15.0 * a.sqrt() + 80.0;

    // For a < 1 the substitution tau = u^{1/a} removes the endpoint
    // singularity: tau^{a-1} dtau = du / a.
    let (log_env, angle, hi, log_factor): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>, f64, f64) =
        if a < 1.0 {
            (
                Box::new(move |u: f64| {
                    let tau = u.powf(1.0 / a);
                    -tau - c * tau.powf(b)
                }),
                Box::new(move |u: f64| phase - s * u.powf(b / a)),
                tau_hi.powf(a),
                -a.ln(),
            )
        } else {
            (
                Box::new(move |tau: f64| {
                    if tau == 0.0 {
                        if a == 1.0 {
                            0.0
                        } else {
                            f64::NEG_INFINITY
                        }
                    } else {
                        (a - 1.0) * tau.ln() - tau - c * tau.powf(b)
                    }
                }),
                Box::new(move |tau: f64| phase - s * tau.powf(b)),
                tau_hi,
                0.0,
            )
        };

    const N: usize = 2048;
    let grid: Vec<(f64, f64)> = (0..N)
        .map(|i| {
            let x = hi * (i as f64 + 0.5) / N as f64;
            (x, log_env(x))
        })
        .collect();
    let peak = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    let cut = peak - depth(tol);
    let first = grid.iter().position(|g| g.1 > cut).unwrap_or(0);
    let last = grid.iter().rposition(|g| g.1 > cut).unwrap_or(N - 1);
    let h = hi / N as f64;
    let lo = (h * (first as f64 - 1.0)).max(0.0);
    let up = (h * (last as f64 + 2.0)).min(hi);

    let f = |x: f64| {
        let e = log_env(x) - peak;
        if e == f64::NEG_INFINITY {
            0.0
        } else {
            e.exp() * angle(x).sin()
        }
    };
    let out = adaptive(&f, lo, up, &opts(tol))?;
    let log_scale = peak + log_factor - (2.0 * q).ln();
    Ok(QuadratureResult {
        value: LogReal::from_f64(out.value).mul_exp(log_scale),
        abs_error_estimate: if out.l1 == 0.0 { 0.0 } else { out.error / out.l1 },
        evaluations: out.evaluations + N,
        abs_integral: LogReal::from_f64(out.l1).mul_exp(log_scale),
    })
}

/// `ln(t^{a-1} exp(-t^b))` and where it peaks.
struct Envelope {
    a: f64,
    b: f64,
}

impl Envelope {
    fn log(&self, t: f64) -> f64 {
        (self.a - 1.0) * t.ln() - t.powf(self.b)
    }

    fn peak(&self) -> f64 {
        if self.a > 1.0 {
            ((self.a - 1.0) / self.b).powf(1.0 / self.b)
        } else {
            0.0
        }
    }

    /// Scale used to keep interval integrals `O(1)`.
    fn shift(&self) -> f64 {
        let t = self.peak();
        if t > 0.0 {
            self.log(t)
        } else {
            0.0
        }
    }

    /// Largest `t` past the peak where the envelope is still above `level`.
    fn right_edge(&self, level: f64) -> f64 {
        let mut lo = self.peak().max(1.0);
        let mut hi = 2.0 * lo;
        while self.log(hi) > level {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if self.log(m) > level {
                lo = m;
            } else {
                hi = m;
            }
        }
        hi
    }

    /// Smallest `t` before the peak where the envelope is above `level`.
    fn left_edge(&self, level: f64) -> f64 {
        let t = self.peak();
        if t <= 0.0 || self.log(f64::MIN_POSITIVE) > level {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, t);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if m > 0.0 && self.log(m) > level {
                hi = m;
            } else {
                lo = m;
            }
        }
        lo
    }

    /// `int_{j pi}^{(j+1) pi} t^{a-1} exp(-t^b) g(sin t) dt * exp(-shift)`.
    fn interval(
        &self,
        j: u64,
        shift: f64,
        absolute: bool,
        tol: f64,
    ) -> Result<super::kronrod::AdaptiveOutput> {
        let (t0, t1) = (j as f64 * PI, (j + 1) as f64 * PI);
        let trig = move |t: f64| if absolute { t.sin().abs() } else { t.sin() };
        if j == 0 && self.a < 1.0 {
            let a = self.a;
            let b = self.b;
            let g = move |u: f64| {
                let t = u.powf(1.0 / a);
                (-t.powf(b) - shift).exp() * trig(t) / a
            };
            return adaptive(&g, 0.0, t1.powf(a), &opts(tol));
        }
        let g = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            (self.log(t) - shift).exp() * trig(t)
        };
        adaptive(&g, t0, t1, &opts(tol))
    }
}

/// `I(k)` by summing the contributions between consecutive zeros `t = j pi`
/// of `sin t`, with repeated averaging of the alternating partial sums.
///
/// Independent of [`oscillatory_moment`]; only useful while the sum does not
/// cancel catastrophically, i.e. for small `k`.
pub fn oscillatory_moment_by_zeros(p: f64, q: f64, k: u32, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    check_pq(p, q)?;
    let env = Envelope {
        a: (f64::from(k) + 1.0) / q,
        b: p / q,
    };
    let shift = env.shift();
    let j_peak = (env.peak() / PI) as u64;
    let end = env.right_edge(shift - depth(tol));
    let j_end = (end / PI) as u64 + 1;
    const MAX_INTERVALS: u64 = 2_000_000;
    if j_end > MAX_INTERVALS {
        return Err(Error::ToleranceNotMet {
            best: LogReal::ZERO,
            achieved: f64::INFINITY,
            requested: tol,
            evaluations: 0,
        });
    }

    let mut partial = Vec::with_capacity(j_end as usize + 1);
    let (mut sum, mut l1, mut err, mut evaluations) = (0.0, 0.0, 0.0, 0);
    for j in 0..=j_end.max(j_peak + 1) {
        let out = env.interval(j, shift, false, tol)?;
        sum += out.value;
        l1 += out.l1;
        err += out.error;
        evaluations += out.evaluations;
        partial.push(sum);
    }

    // Repeated pairwise averaging of the final partial sums (Euler transform
    // of the alternating tail).
    let mut level: Vec<f64> = partial[partial.len().saturating_sub(16)..].to_vec();
    let mut change = f64::INFINITY;
    while level.len() > 1 {
        let next: Vec<f64> = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        change = (next[next.len() - 1] - level[level.len() - 1]).abs();
        level = next;
    }
    let value = level[0];
    let total_err = err + if change.is_finite() { change } else { 0.0 };
    let rel = if l1 == 0.0 { 0.0 } else { total_err / l1 };
    let log_scale = shift - (2.0 * q).ln();
    if rel > tol {
        return Err(Error::ToleranceNotMet {
            best: LogReal::from_f64(value).mul_exp(log_scale),
            achieved: rel,
            requested: tol,
            evaluations,
        });
    }
    Ok(QuadratureResult {
        value: LogReal::from_f64(value).mul_exp(log_scale),
        abs_error_estimate: rel,
        evaluations,
        abs_integral: LogReal::from_f64(l1).mul_exp(log_scale),
    })
}

/// `int_0^inf exp(-r^{2p}) |sin r^{2q}| r^{2k+1} dr` as a sum of positive
/// terms over the half-periods of `sin t`, restricted to the window where the
/// envelope is within the working depth of its peak.
pub fn oscillatory_abs_moment(p: f64, q: f64, k: u32, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    check_pq(p, q)?;
    let env = Envelope {
        a: (f64::from(k) + 1.0) / q,
        b: p / q,
    };
    let shift = env.shift();
    let level = shift - depth(tol);
    let j_lo = (env.left_edge(level) / PI) as u64;
    let j_hi = (env.right_edge(level) / PI) as u64 + 1;
    let (mut sum, mut err, mut evaluations) = (0.0, 0.0, 0);
    for j in j_lo..=j_hi {
        let out = env.interval(j, shift, true, tol)?;
        sum += out.value;
        err += out.error;
        evaluations += out.evaluations;
    }
    let log_scale = shift - (2.0 * q).ln();
    let value = LogReal::from_f64(sum).mul_exp(log_scale);
    Ok(QuadratureResult {
        value,
        abs_error_estimate: if sum == 0.0 { 0.0 } else { err / sum },
        evaluations: evaluations.max(1),
        abs_integral: value,
    })
}
