use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number stored as a sign and the natural logarithm of its magnitude.
///
/// Values such as `exp(-1e5)` or `Gamma(1e4)` are representable. The zero value
/// has `sign == 0` and `log_abs == -inf`; no other representation of zero is
/// produced by the constructors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    sign: i8,
    #[serde(serialize_with = "ser_log_abs", deserialize_with = "de_log_abs")]
    log_abs: f64,
}

fn ser_log_abs<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_log_abs<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v: Option<f64> = Option::deserialize(d)?;
    Ok(v.unwrap_or(f64::NEG_INFINITY))
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        log_abs: 0.0,
    };

    /// Builds a value from a sign and a log-magnitude. A zero sign or a
    /// `-inf` magnitude both give [`LogReal::ZERO`].
    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    /// `exp(log_abs)` with positive sign.
    pub fn from_ln(log_abs: f64) -> Self {
        Self::new(1, log_abs)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_finite(&self) -> bool {
        self.is_zero() || self.log_abs.is_finite()
    }

    /// Converts to `f64`; underflows to `0.0` and overflows to `±inf`.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn abs(&self) -> Self {
        LogReal {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    /// Multiplies by `exp(x)`.
    pub fn mul_exp(&self, x: f64) -> Self {
        if self.is_zero() {
            *self
        } else {
            LogReal::new(self.sign, self.log_abs + x)
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        assert!(self.sign >= 0, "powf of a negative LogReal");
        if self.is_zero() {
            if p > 0.0 {
                Self::ZERO
            } else {
                Self::ONE
            }
        } else {
            LogReal::new(1, self.log_abs * p)
        }
    }

    /// Compares magnitudes.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.log_abs.total_cmp(&other.log_abs),
        }
    }

    /// `|ln|self| - ln|other||`, the relative distance used for tolerance checks.
    /// Infinite when exactly one side is zero; zero when both are.
    pub fn log_distance(&self, other: &Self) -> f64 {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => f64::INFINITY,
            _ => (self.log_abs - other.log_abs).abs(),
        }
    }
}

impl Default for LogReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let by_sign = self.sign.cmp(&other.sign);
        if by_sign != Ordering::Equal {
            return Some(by_sign);
        }
        match self.sign {
            0 => Some(Ordering::Equal),
            1 => self.log_abs.partial_cmp(&other.log_abs),
            _ => other.log_abs.partial_cmp(&self.log_abs),
        }
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero() || rhs.is_zero() {
            LogReal::ZERO
        } else {
            LogReal::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(!rhs.is_zero(), "LogReal division by zero");
        if self.is_zero() {
            LogReal::ZERO
        } else {
            LogReal::new(self.sign * rhs.sign, self.log_abs - rhs.log_abs)
        }
    }
}

impl Add for LogReal {
    type Output = LogReal;
    fn add(self, rhs: LogReal) -> LogReal {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.log_abs >= rhs.log_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let diff = small.log_abs - big.log_abs;
        if big.sign == small.sign {
            LogReal::new(big.sign, big.log_abs + diff.exp().ln_1p())
        } else if diff == 0.0 {
            LogReal::ZERO
        } else {
            LogReal::new(big.sign, big.log_abs + (-diff.exp_m1()).ln())
        }
    }
}

impl Sub for LogReal {
    type Output = LogReal;
    fn sub(self, rhs: LogReal) -> LogReal {
        self + (-rhs)
    }
}

impl std::iter::Sum for LogReal {
    fn sum<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        iter.fold(LogReal::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let dec = self.log_abs / std::f64::consts::LN_10;
                let exp = dec.floor();
                let mant = 10f64.powf(dec - exp);
                write!(f, "{}{:.6}e{}", if s < 0 { "-" } else { "" }, mant, exp as i64)
            }
        }
    }
}
