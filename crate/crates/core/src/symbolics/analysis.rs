//! Structural analysis of symbols: exact support radius and decay class.

use serde::{Deserialize, Serialize};

use super::ast::{Expr, Func};
use crate::error::{Error, Result};

/// How a symbol behaves as `r -> inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "param")]
pub enum DecayClass {
    /// Vanishes beyond the exact support radius `b`.
    CompactSupport(f64),
    /// `log|V(r)| < -C r^t` for every `t > 0`.
    RapidDecay,
    /// Dominant tail factor `exp(-c r^(2p))`.
    StretchedExp(f64),
    Unknown,
}

/// Asymptotic form of an expression as `r -> inf`, used for the arguments
/// of `exp` and trigonometric functions.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Lead {
    /// Eventually identically zero.
    Zero,
    /// `~ c r^alpha` with `c != 0`.
    Power { c: f64, alpha: f64 },
    /// `~ sign * exp(positive power)`.
    Huge { sign: f64 },
    /// Bounded and oscillating.
    Osc,
    Unknown,
}

fn lead(e: &Expr) -> Lead {
    use Lead::*;
    match e {
        Expr::Num(c) => {
            if *c == 0.0 {
                Zero
            } else {
                Power { c: *c, alpha: 0.0 }
            }
        }
        Expr::R => Power { c: 1.0, alpha: 1.0 },
        Expr::Chi(..) => Zero,
        Expr::Neg(a) => negate(lead(a)),
        Expr::Add(a, b) => lead_sum(lead(a), lead(b)),
        Expr::Sub(a, b) => lead_sum(lead(a), negate(lead(b))),
        Expr::Mul(a, b) => match (lead(a), lead(b)) {
            (Zero, _) | (_, Zero) => Zero,
            (Power { c: c1, alpha: a1 }, Power { c: c2, alpha: a2 }) => Power {
                c: c1 * c2,
                alpha: a1 + a2,
            },
            (Power { c, .. }, Huge { sign }) | (Huge { sign }, Power { c, .. }) => Huge {
                sign: sign * c.signum(),
            },
            (Huge { sign: s1 }, Huge { sign: s2 }) => Huge { sign: s1 * s2 },
            _ => Unknown,
        },
        Expr::Div(a, b) => match (lead(a), lead(b)) {
            (Zero, _) => Zero,
            (Power { c: c1, alpha: a1 }, Power { c: c2, alpha: a2 }) => Power {
                c: c1 / c2,
                alpha: a1 - a2,
            },
            (Huge { sign }, Power { c, .. }) => Huge {
                sign: sign * c.signum(),
            },
            _ => Unknown,
        },
        Expr::Pow(a, p) => match lead(a) {
            Power { c, alpha } if c > 0.0 || p.fract() == 0.0 => Power {
                c: c.powf(*p),
                alpha: alpha * p,
            },
            Zero if *p > 0.0 => Zero,
            Huge { sign } if *p > 0.0 && (sign > 0.0 || p.fract() == 0.0) => Huge {
                sign: sign.powf(*p).signum(),
            },
            _ => Unknown,
        },
        Expr::Call(f, a) => {
            let inner = lead(a);
            match f {
                Func::Exp => match inner {
                    Zero => Power { c: 1.0, alpha: 0.0 },
                    Power { c, alpha } if alpha == 0.0 => Power {
                        c: c.exp(),
                        alpha: 0.0,
                    },
                    Power { c, alpha } if alpha > 0.0 && c > 0.0 => Huge { sign: 1.0 },
                    _ => Unknown,
                },
                Func::Sin | Func::Cos => match inner {
                    Power { alpha, .. } if alpha > 0.0 => Osc,
                    Huge { .. } => Osc,
                    Power { c, alpha } if alpha < 0.0 && *f == Func::Sin => Power { c, alpha },
                    Power { alpha, .. } if alpha < 0.0 => Power { c: 1.0, alpha: 0.0 },
                    Zero if *f == Func::Sin => Zero,
                    Zero => Power { c: 1.0, alpha: 0.0 },
                    _ => Unknown,
                },
                Func::Abs => match inner {
                    Power { c, alpha } => Power { c: c.abs(), alpha },
                    Huge { .. } => Huge { sign: 1.0 },
                    Zero => Zero,
                    _ => Unknown,
                },
                Func::Pos | Func::NegPart => {
                    let keep = if *f == Func::Pos { 1.0 } else { -1.0 };
                    match inner {
                        Power { c, alpha } if c * keep > 0.0 => Power { c: c.abs(), alpha },
                        Power { .. } => Zero,
                        Huge { sign } if sign * keep > 0.0 => Huge { sign: 1.0 },
                        Huge { .. } => Zero,
                        Zero => Zero,
                        _ => Unknown,
                    }
                }
            }
        }
    }
}

fn negate(l: Lead) -> Lead {
    match l {
        Lead::Power { c, alpha } => Lead::Power { c: -c, alpha },
        Lead::Huge { sign } => Lead::Huge { sign: -sign },
        other => other,
    }
}

fn lead_sum(x: Lead, y: Lead) -> Lead {
    use Lead::*;
    match (x, y) {
        (Zero, o) | (o, Zero) => o,
        (Power { c: c1, alpha: a1 }, Power { c: c2, alpha: a2 }) => {
            if a1 > a2 {
                x
            } else if a2 > a1 {
                y
            } else if c1 + c2 != 0.0 {
                Power {
                    c: c1 + c2,
                    alpha: a1,
                }
            } else {
                Unknown
            }
        }
        (Huge { .. }, Power { .. }) | (Huge { .. }, Osc) => x,
        (Power { .. }, Huge { .. }) | (Osc, Huge { .. }) => y,
        (Power { alpha, .. }, Osc) if alpha > 0.0 => x,
        (Osc, Power { alpha, .. }) if alpha > 0.0 => y,
        _ => Unknown,
    }
}

/// Leading behavior of `ln|V(r)|` as `r -> inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum LogTail {
    /// `V` eventually vanishes.
    Vanishes,
    /// Faster than `-C r^t` for every `t`, e.g. `exp(-exp(r))`.
    Superexp,
    /// `~ c r^alpha` with `alpha > 0`, `c != 0`.
    Power { c: f64, alpha: f64 },
    /// `O(log r)`: powers of `r` times bounded factors.
    Logarithmic,
    Unknown,
}

/// Tail of `ln|a*b|` from the tails of `ln|a|` and `ln|b|`.
fn tail_product(x: LogTail, y: LogTail) -> LogTail {
    use LogTail::*;
    match (x, y) {
        (Vanishes, _) | (_, Vanishes) => Vanishes,
        (Unknown, _) | (_, Unknown) => Unknown,
        (Superexp, _) | (_, Superexp) => Superexp,
        (Power { c: c1, alpha: a1 }, Power { c: c2, alpha: a2 }) => {
            if a1 > a2 {
                x
            } else if a2 > a1 {
                y
            } else if c1 + c2 != 0.0 {
                Power {
                    c: c1 + c2,
                    alpha: a1,
                }
            } else {
                Logarithmic
            }
        }
        (Power { .. }, Logarithmic) => x,
        (Logarithmic, Power { .. }) => y,
        (Logarithmic, Logarithmic) => Logarithmic,
    }
}

/// Tail of `ln|a+b|`: the slower-decaying summand wins.
fn tail_sum(x: LogTail, y: LogTail) -> LogTail {
    use LogTail::*;
    let rank = |t: LogTail| -> Option<(i32, f64, f64)> {
        match t {
            Vanishes => Some((0, 0.0, 0.0)),
            Superexp => Some((1, 0.0, 0.0)),
            Power { c, alpha } if c < 0.0 => Some((2, -alpha, c)),
            Logarithmic => Some((3, 0.0, 0.0)),
            Power { c, alpha } => Some((4, alpha, c)),
            Unknown => None,
        }
    };
    match (rank(x), rank(y)) {
        (Some(rx), Some(ry)) => {
            let ord = rx
                .0
                .cmp(&ry.0)
                .then(rx.1.total_cmp(&ry.1))
                .then(rx.2.total_cmp(&ry.2));
            if ord.is_ge() {
                x
            } else {
                y
            }
        }
        _ => Unknown,
    }
}

fn log_tail(e: &Expr) -> LogTail {
    use LogTail::*;
    match e {
        Expr::Num(c) => {
            if *c == 0.0 {
                Vanishes
            } else {
                Logarithmic
            }
        }
        Expr::R => Logarithmic,
        Expr::Chi(..) => Vanishes,
        Expr::Neg(a) => log_tail(a),
        Expr::Add(a, b) | Expr::Sub(a, b) => tail_sum(log_tail(a), log_tail(b)),
        Expr::Mul(a, b) => tail_product(log_tail(a), log_tail(b)),
        Expr::Div(a, b) => match log_tail(b) {
            Power { c, alpha } => tail_product(log_tail(a), Power { c: -c, alpha }),
            Logarithmic => tail_product(log_tail(a), Logarithmic),
            _ => Unknown,
        },
        Expr::Pow(a, p) => match log_tail(a) {
            Power { c, alpha } if *p != 0.0 => Power { c: c * p, alpha },
            _ if *p == 0.0 => Logarithmic,
            Superexp if *p > 0.0 => Superexp,
            Vanishes if *p > 0.0 => Vanishes,
            Logarithmic => Logarithmic,
            _ => Unknown,
        },
        Expr::Call(f, a) => match f {
            Func::Exp => match lead(a) {
                Lead::Zero => Logarithmic,
                Lead::Power { alpha, .. } if alpha <= 0.0 => Logarithmic,
                Lead::Power { c, alpha } => Power { c, alpha },
                Lead::Huge { sign } if sign < 0.0 => Superexp,
                Lead::Osc => Logarithmic,
                _ => Unknown,
            },
            // Bounded by 1 in modulus; zeros of oscillating factors do not
            // change the envelope.
            Func::Sin => match lead(a) {
                Lead::Zero => Vanishes,
                Lead::Power { alpha, .. } if alpha < 0.0 => Logarithmic,
                Lead::Power { .. } | Lead::Huge { .. } | Lead::Osc => Logarithmic,
                Lead::Unknown => Unknown,
            },
            Func::Cos => match lead(a) {
                Lead::Unknown => Unknown,
                _ => Logarithmic,
            },
            Func::Abs => log_tail(a),
            Func::Pos | Func::NegPart => {
                let keep = if *f == Func::Pos { 1.0 } else { -1.0 };
                match lead(a) {
                    Lead::Power { c, .. } | Lead::Huge { sign: c } if c * keep < 0.0 => Vanishes,
                    _ => log_tail(a),
                }
            }
        },
    }
}

pub(crate) fn classify(e: &Expr, esr: Result<f64>) -> DecayClass {
    match esr {
        Ok(b) if b.is_finite() => DecayClass::CompactSupport(b),
        Ok(_) => match log_tail(e) {
            LogTail::Superexp => DecayClass::RapidDecay,
            LogTail::Power { c, alpha } if c < 0.0 && alpha > 0.0 => {
                DecayClass::StretchedExp(alpha / 2.0)
            }
            _ => DecayClass::Unknown,
        },
        Err(_) => DecayClass::Unknown,
    }
}

/// An expression with the same eventual zero set and no clamps, when one can
/// be read off structurally. `|f|` vanishes exactly where `f` does; a positive
/// or negative part does too when `f` has the matching sign eventually or
/// oscillates.
fn unclamp(e: &Expr) -> Option<Expr> {
    let b = |x: &Expr| unclamp(x).map(Box::new);
    Some(match e {
        Expr::Num(_) | Expr::R | Expr::Chi(..) => e.clone(),
        Expr::Neg(a) => Expr::Neg(b(a)?),
        Expr::Add(x, y) => Expr::Add(b(x)?, b(y)?),
        Expr::Sub(x, y) => Expr::Sub(b(x)?, b(y)?),
        Expr::Mul(x, y) => Expr::Mul(b(x)?, b(y)?),
        Expr::Div(x, y) => Expr::Div(b(x)?, b(y)?),
        Expr::Pow(a, p) => Expr::Pow(b(a)?, *p),
        Expr::Call(Func::Abs, a) => unclamp(a)?,
        Expr::Call(f @ (Func::Pos | Func::NegPart), a) => {
            let keep = if *f == Func::Pos { 1.0 } else { -1.0 };
            match lead(a) {
                Lead::Power { c, .. } | Lead::Huge { sign: c } if c * keep > 0.0 => unclamp(a)?,
                Lead::Osc => unclamp(a)?,
                _ => return None,
            }
        }
        Expr::Call(f, a) => Expr::Call(*f, b(a)?),
    })
}

const INTERVAL_SAMPLES: usize = 256;
const CLAMP_SAMPLES: usize = 4096;

fn interior_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}

/// Smallest `b` with `V = 0` on `(b, inf)` and `|V|` carrying mass up to `b`.
///
/// Indicator endpoints and the structural support bound give candidate
/// cutoffs; every candidate is confirmed by sampling. Between indicator
/// endpoints an expression without clamps is real-analytic, so one nonzero
/// sample certifies mass arbitrarily close to the right end of the interval.
pub(crate) fn exact_support_radius(e: &Expr) -> Result<f64> {
    let bound = e.support_bound();
    let breaks = e.breakpoints();
    let clamps = e.has_clamps();
    let nonzero = |r: f64| e.eval(r) != 0.0;

    if bound.is_infinite() {
        let last = breaks.last().copied().unwrap_or(0.0);
        // Beyond the last indicator endpoint the clamp-free form is
        // real-analytic, so a nonzero sample shows the tail is not identically 0.
        let tail_form = unclamp(e);
        let near = tail_form.as_ref().is_some_and(|t| {
            interior_points(last, last + 8.0, INTERVAL_SAMPLES).any(|r| t.eval(r) != 0.0)
        });
        if near {
            return Ok(f64::INFINITY);
        }
        return Err(Error::InconclusiveSupport(format!(
            "'{e}' has no indicator cutoff but its tail beyond r = {last} cannot be certified"
        )));
    }

    if let Some(r) = interior_points(bound, 2.0 * bound + 1.0, CLAMP_SAMPLES).find(|r| nonzero(*r)) {
        return Err(Error::InconclusiveSupport(format!(
            "'{e}' is nonzero at r = {r}, beyond its structural bound {bound}"
        )));
    }

    let mut cuts = vec![0.0];
    cuts.extend(breaks.iter().copied().filter(|x| *x < bound));
    cuts.push(bound);
    for w in cuts.windows(2).rev() {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        if !clamps {
            if interior_points(lo, hi, INTERVAL_SAMPLES).any(nonzero) {
                return Ok(hi);
            }
            continue;
        }
        let pts: Vec<f64> = interior_points(lo, hi, CLAMP_SAMPLES).collect();
        if let Some(i) = pts.iter().rposition(|r| nonzero(*r)) {
            // Bisect for the last sign of life between the last nonzero
            // sample and the next zero one (or the interval end).
            let (mut a, mut b) = (pts[i], pts.get(i + 1).copied().unwrap_or(hi));
            if i + 1 == pts.len() && nonzero(hi) {
                return Ok(hi);
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if nonzero(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(if (hi - b).abs() <= 1e-12 * hi { hi } else { b });
        }
    }
    Ok(0.0)
}
