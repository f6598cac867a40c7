//! Radial symbols `V(r)`: a small expression language with indicators,
//! evaluation, sign decomposition, exact support radius and decay class.

mod analysis;
mod ast;
mod parse;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use analysis::DecayClass;
pub use ast::{Expr, Func};
pub(crate) use ast::format_number;

use crate::error::{Error, Result};

/// An immutable parsed symbol. Cloning shares the tree.
#[derive(Clone, Debug)]
pub struct RadialSymbol {
    expr: Arc<Expr>,
    text: Arc<str>,
    // Computed on first use; shared by clones.
    support: Arc<OnceLock<Result<f64>>>,
}

/// Parses a symbol from its text form.
pub fn parse_symbol(text: &str) -> Result<RadialSymbol> {
    Ok(RadialSymbol::from_expr(parse::parse(text)?))
}

impl RadialSymbol {
    /// Wraps an expression tree. Indicator bounds are checked here as well
    /// as in the parser, so hand-built trees obey the same rules.
    pub fn try_from_expr(expr: Expr) -> Result<Self> {
        let mut bad = None;
        expr.walk(&mut |e| {
            if let Expr::Chi(a, b) = e {
                if !(0.0 <= *a && a < b && b.is_finite()) && bad.is_none() {
                    bad = Some((*a, *b));
                }
            }
        });
        if let Some((a, b)) = bad {
            return Err(Error::InvalidIndicator { a, b });
        }
        Ok(Self::from_expr(expr))
    }

    fn from_expr(expr: Expr) -> Self {
        let text = expr.to_text();
        RadialSymbol {
            expr: Arc::new(expr),
            text: text.into(),
            support: Arc::new(OnceLock::new()),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Num(c))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Canonical text; reparses to a tree that evaluates identically.
    pub fn canonical_text(&self) -> &str {
        &self.text
    }

    /// `V(r)`. Total on `r >= 0`.
    pub fn evaluate(&self, r: f64) -> f64 {
        self.expr.eval(r)
    }

    /// `V(r)` as `(sign, ln|V(r)|)`, finite where the linear value under- or
    /// overflows. Zero is `(0, -inf)`.
    pub fn evaluate_log(&self, r: f64) -> (f64, f64) {
        self.expr.eval_log(r)
    }

    /// The constant value when the symbol is a bare literal.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.expr {
            Expr::Num(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    /// `c * V`.
    pub fn scale(&self, c: f64) -> Self {
        if c == 1.0 {
            return self.clone();
        }
        Self::from_expr(Expr::Mul(
            Box::new(Expr::Num(c)),
            Box::new((*self.expr).clone()),
        ))
    }

    /// `V + W`.
    pub fn plus(&self, other: &RadialSymbol) -> Self {
        Self::from_expr(Expr::Add(
            Box::new((*self.expr).clone()),
            Box::new((*other.expr).clone()),
        ))
    }

    fn negated(&self) -> Self {
        match &*self.expr {
            Expr::Neg(inner) => Self::from_expr((**inner).clone()),
            Expr::Num(c) => Self::constant(-c),
            e => Self::from_expr(Expr::Neg(Box::new(e.clone()))),
        }
    }

    fn wrap(&self, f: Func) -> Self {
        Self::from_expr(Expr::Call(f, Box::new((*self.expr).clone())))
    }

    /// `(max(V,0), max(-V,0), |V|)`. Symbols of structurally known sign are
    /// returned without clamps.
    pub fn decompose_signs(&self) -> (RadialSymbol, RadialSymbol, RadialSymbol) {
        match self.expr.sign_hint() {
            Some(true) => (self.clone(), Self::constant(0.0), self.clone()),
            Some(false) => {
                let m = self.negated();
                (Self::constant(0.0), m.clone(), m)
            }
            None => (
                self.wrap(Func::Pos),
                self.wrap(Func::NegPart),
                self.wrap(Func::Abs),
            ),
        }
    }

    /// `|V|`.
    pub fn abs(&self) -> RadialSymbol {
        self.decompose_signs().2
    }

    /// Sorted indicator endpoints above zero; quadrature never straddles them.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.expr.breakpoints()
    }

    /// Smallest `b` such that `V` vanishes on `(b, inf)` while `|V|` has
    /// mass on every `(b', b)`; `inf` for infinite support.
    pub fn exact_support_radius(&self) -> Result<f64> {
        self.support
            .get_or_init(|| analysis::exact_support_radius(&self.expr))
            .clone()
    }

    pub fn classify_decay(&self) -> DecayClass {
        analysis::classify(&self.expr, self.exact_support_radius())
    }

    /// Sampling check that `V` is finite on `[0, r_max]`; returns the
    /// largest sampled `|V|`. Boundedness is not proved, only probed.
    pub fn check_bounded(&self, r_max: f64) -> Result<f64> {
        const N: usize = 4096;
        let mut pts: Vec<f64> = (0..=N).map(|i| r_max * i as f64 / N as f64).collect();
        for b in self.breakpoints() {
            if b <= r_max {
                pts.extend([b, b * (1.0 - 1e-12), b * (1.0 + 1e-12)]);
            }
        }
        let mut sup = 0.0f64;
        for r in pts {
            let v = self.evaluate(r);
            if !v.is_finite() {
                return Err(Error::Precondition(format!(
                    "symbol '{}' is not finite at r = {r}",
                    self.text
                )));
            }
            sup = sup.max(v.abs());
        }
        Ok(sup)
    }
}

impl PartialEq for RadialSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

impl fmt::Display for RadialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl std::str::FromStr for RadialSymbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_symbol(s)
    }
}

impl Serialize for RadialSymbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for RadialSymbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_symbol(&text).map_err(serde::de::Error::custom)
    }
}
