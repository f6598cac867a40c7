use std::fmt::{self, Write};

/// Unary functions of the symbol language.
///
/// `Abs`, `Pos` and `NegPart` are the clamps `|x|`, `max(x, 0)` and
/// `max(-x, 0)`; they let sign-decomposed symbols keep a textual form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Abs,
    Pos,
    NegPart,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Pos => "pos",
            Func::NegPart => "neg",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "pos" => Func::Pos,
            "neg" => Func::NegPart,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Abs => x.abs(),
            Func::Pos => x.max(0.0),
            Func::NegPart => (-x).max(0.0),
        }
    }

    /// Clamps are continuous but not analytic, so zero sets of clamped
    /// expressions may contain intervals.
    pub(crate) fn is_clamp(self) -> bool {
        matches!(self, Func::Abs | Func::Pos | Func::NegPart)
    }
}

/// Signed log-sum-exp of two `(sign, ln|x|)` pairs.
fn log_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    if x.0.is_nan() || y.0.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x.0 == 0.0 {
        return y;
    }
    if y.0 == 0.0 {
        return x;
    }
    let (big, small) = if x.1 >= y.1 { (x, y) } else { (y, x) };
    if big.1 == f64::INFINITY {
        return if small.1 == f64::INFINITY && small.0 != big.0 {
            (f64::NAN, f64::NAN)
        } else {
            big
        };
    }
    let t = big.0 * small.0 * (small.1 - big.1).exp();
    let m = 1.0 + t;
    if m <= 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (big.0, big.1 + t.ln_1p())
    }
}

/// Expression tree over the radial variable `r`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    R,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
    /// Indicator of the closed interval `[a, b]`.
    Chi(f64, f64),
}

impl Expr {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::R => r,
            Expr::Neg(a) => -a.eval(r),
            Expr::Add(a, b) => a.eval(r) + b.eval(r),
            Expr::Sub(a, b) => a.eval(r) - b.eval(r),
            Expr::Mul(a, b) => {
                let x = a.eval(r);
                // An indicator factor that is off wins over an infinite partner.
                if x == 0.0 {
                    0.0
                } else {
                    x * b.eval(r)
                }
            }
            Expr::Div(a, b) => a.eval(r) / b.eval(r),
            Expr::Pow(a, p) => {
                let x = a.eval(r);
                if p.fract() == 0.0 && p.abs() < 1024.0 {
                    x.powi(*p as i32)
                } else {
                    x.powf(*p)
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(r)),
            Expr::Chi(lo, hi) => {
                if *lo <= r && r <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `(sign, ln|value|)` at `r`, with zero as `(0, -inf)` and NaN where the
    /// linear value is undefined. Stays finite where the linear value would
    /// overflow or underflow, as with `r^500 * exp(-exp(r))`.
    pub fn eval_log(&self, r: f64) -> (f64, f64) {
        const ZERO: (f64, f64) = (0.0, f64::NEG_INFINITY);
        const NAN: (f64, f64) = (f64::NAN, f64::NAN);
        let from_linear = |x: f64| {
            if x.is_nan() {
                NAN
            } else if x == 0.0 {
                ZERO
            } else {
                (x.signum(), x.abs().ln())
            }
        };
        let linear = |(s, l): (f64, f64)| s * l.exp();
        match self {
            Expr::Num(c) => from_linear(*c),
            Expr::R => from_linear(r),
            Expr::Neg(a) => {
                let (s, l) = a.eval_log(r);
                (-s, l)
            }
            Expr::Add(a, b) => log_add(a.eval_log(r), b.eval_log(r)),
            Expr::Sub(a, b) => {
                let (s, l) = b.eval_log(r);
                log_add(a.eval_log(r), (-s, l))
            }
            Expr::Mul(a, b) => {
                let (sa, la) = a.eval_log(r);
                if sa == 0.0 {
                    return ZERO;
                }
                let (sb, lb) = b.eval_log(r);
                if sb == 0.0 {
                    return if la == f64::INFINITY { NAN } else { ZERO };
                }
                (sa * sb, la + lb)
            }
            Expr::Div(a, b) => {
                let (sa, la) = a.eval_log(r);
                let (sb, lb) = b.eval_log(r);
                match (sa == 0.0, sb == 0.0) {
                    (true, true) => NAN,
                    (true, false) => ZERO,
                    (false, true) => (sa, f64::INFINITY),
                    (false, false) => (sa * sb, la - lb),
                }
            }
            Expr::Pow(a, p) => {
                let (s, l) = a.eval_log(r);
                if s.is_nan() {
                    NAN
                } else if *p == 0.0 {
                    (1.0, 0.0)
                } else if s == 0.0 {
                    if *p > 0.0 {
                        ZERO
                    } else {
                        (1.0, f64::INFINITY)
                    }
                } else if s > 0.0 {
                    (1.0, p * l)
                } else if p.fract() == 0.0 {
                    let odd = (p.abs() % 2.0) == 1.0;
                    (if odd { -1.0 } else { 1.0 }, p * l)
                } else {
                    NAN
                }
            }
            Expr::Call(f, a) => {
                let inner = a.eval_log(r);
                match f {
                    Func::Exp => {
                        let x = linear(inner);
                        if x.is_nan() {
                            NAN
                        } else if x == f64::NEG_INFINITY {
                            ZERO
                        } else {
                            (1.0, x)
                        }
                    }
                    Func::Abs => (inner.0.abs(), inner.1),
                    Func::Pos if inner.0 > 0.0 => inner,
                    Func::NegPart if inner.0 < 0.0 => (1.0, inner.1),
                    Func::Pos | Func::NegPart if inner.0.is_nan() => NAN,
                    Func::Pos | Func::NegPart => ZERO,
                    Func::Sin | Func::Cos => from_linear(f.apply(linear(inner))),
                }
            }
            Expr::Chi(..) => from_linear(self.eval(r)),
        }
    }

    /// Binding strength used when printing: larger binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(c) if c.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, min: u8, out: &mut String) {
        if self.precedence() < min {
            out.push('(');
            self.write_to(out);
            out.push(')');
        } else {
            self.write_to(out);
        }
    }

    fn write_to(&self, out: &mut String) {
        match self {
            Expr::Num(c) => out.push_str(&format_number(*c)),
            Expr::R => out.push('r'),
            Expr::Neg(a) => {
                out.push('-');
                a.write_at(3, out);
            }
            Expr::Add(a, b) => {
                a.write_at(1, out);
                out.push_str(" + ");
                b.write_at(2, out);
            }
            Expr::Sub(a, b) => {
                a.write_at(1, out);
                out.push_str(" - ");
                b.write_at(2, out);
            }
            Expr::Mul(a, b) => {
                a.write_at(2, out);
                out.push('*');
                b.write_at(3, out);
            }
            Expr::Div(a, b) => {
                a.write_at(2, out);
                out.push('/');
                b.write_at(3, out);
            }
            Expr::Pow(a, p) => {
                a.write_at(5, out);
                out.push('^');
                out.push_str(&format_number(*p));
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_to(out);
                out.push(')');
            }
            Expr::Chi(lo, hi) => {
                let _ = write!(out, "chi({}, {})", format_number(*lo), format_number(*hi));
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_to(&mut s);
        s
    }

    /// Visits every node, parents before children.
    pub fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.walk(visit),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Expr::Num(_) | Expr::R | Expr::Chi(..) => {}
        }
    }

    pub(crate) fn has_clamps(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Expr::Call(f, _) = e {
                found |= f.is_clamp();
            }
        });
        found
    }

    /// Upper bound on the support: the expression vanishes for every `r`
    /// beyond the returned value (`inf` when no such bound is visible).
    pub(crate) fn support_bound(&self) -> f64 {
        match self {
            Expr::Num(c) => {
                if *c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Expr::R => f64::INFINITY,
            Expr::Neg(a) | Expr::Div(a, _) => a.support_bound(),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.support_bound().max(b.support_bound()),
            Expr::Mul(a, b) => a.support_bound().min(b.support_bound()),
            Expr::Pow(a, p) => {
                if *p > 0.0 {
                    a.support_bound()
                } else {
                    f64::INFINITY
                }
            }
            Expr::Call(f, a) => match f {
                Func::Exp | Func::Cos => f64::INFINITY,
                Func::Sin | Func::Abs | Func::Pos | Func::NegPart => a.support_bound(),
            },
            Expr::Chi(_, hi) => *hi,
        }
    }

    /// Structural sign information: `Some(true)` when provably `>= 0`,
    /// `Some(false)` when provably `<= 0`, `None` otherwise.
    pub(crate) fn sign_hint(&self) -> Option<bool> {
        match self {
            Expr::Num(c) => Some(*c >= 0.0),
            Expr::R | Expr::Chi(..) => Some(true),
            Expr::Neg(a) => a.sign_hint().map(|s| !s),
            Expr::Add(a, b) => match (a.sign_hint(), b.sign_hint()) {
                (Some(x), Some(y)) if x == y => Some(x),
                _ => None,
            },
            Expr::Sub(a, b) => match (a.sign_hint(), b.sign_hint()) {
                (Some(x), Some(y)) if x != y => Some(x),
                _ => None,
            },
            Expr::Mul(a, b) | Expr::Div(a, b) => match (a.sign_hint(), b.sign_hint()) {
                (Some(x), Some(y)) => Some(x == y),
                _ => None,
            },
            Expr::Pow(a, p) => {
                if p.fract() == 0.0 && (*p as i64) % 2 == 0 {
                    Some(true)
                } else {
                    match a.sign_hint() {
                        Some(true) => Some(true),
                        Some(false) if p.fract() == 0.0 => Some(false),
                        _ => None,
                    }
                }
            }
            Expr::Call(f, _) => match f {
                Func::Exp | Func::Abs | Func::Pos | Func::NegPart => Some(true),
                Func::Sin | Func::Cos => None,
            },
        }
    }

    /// Sorted, deduplicated indicator endpoints strictly above zero.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Chi(lo, hi) = e {
                pts.push(*lo);
                pts.push(*hi);
            }
        });
        pts.retain(|x| *x > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Shortest text that parses back to exactly `x`.
pub(crate) fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}
