//! Eigenvalues `Lambda_k` and multiplicities `d_k` of radial Toeplitz operators
//! in the seven function spaces, assembled into spectrum tables.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{bessel_weighted, check_tol, moment_compact, moment_gaussian, Weight};
use crate::specialfn::{bessel_l2_ball, log_gamma, LogReal, R_MAX};
use crate::symbolics::RadialSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    BergmanComplex,
    BergmanHarmonic,
    BergmanHelmholtz,
    BargmannComplex,
    BargmannHarmonic,
    BargmannHelmholtz,
    AgmonHormander,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 7] = [
        SpaceKind::BergmanComplex,
        SpaceKind::BergmanHarmonic,
        SpaceKind::BergmanHelmholtz,
        SpaceKind::BargmannComplex,
        SpaceKind::BargmannHarmonic,
        SpaceKind::BargmannHelmholtz,
        SpaceKind::AgmonHormander,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::BergmanComplex => "BergmanComplex",
            SpaceKind::BergmanHarmonic => "BergmanHarmonic",
            SpaceKind::BergmanHelmholtz => "BergmanHelmholtz",
            SpaceKind::BargmannComplex => "BargmannComplex",
            SpaceKind::BargmannHarmonic => "BargmannHarmonic",
            SpaceKind::BargmannHelmholtz => "BargmannHelmholtz",
            SpaceKind::AgmonHormander => "AgmonHormander",
        }
    }

    /// Spaces on a ball of radius `R`.
    pub fn is_bergman(self) -> bool {
        matches!(
            self,
            SpaceKind::BergmanComplex | SpaceKind::BergmanHarmonic | SpaceKind::BergmanHelmholtz
        )
    }

    /// Spaces of analytic functions in `C^d`, as opposed to harmonic or
    /// Helmholtz solutions in `R^d`.
    pub fn is_complex(self) -> bool {
        matches!(self, SpaceKind::BergmanComplex | SpaceKind::BargmannComplex)
    }

    fn min_dimension(self) -> u32 {
        if self.is_complex() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    /// Accepts the type name (`BergmanComplex`) or its kebab-case form
    /// (`bergman-complex`), case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .flat_map(char::to_lowercase)
            .collect();
        SpaceKind::ALL
            .into_iter()
            .find(|k| k.name().to_lowercase() == key)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "unknown space '{s}'; expected one of {}",
                    SpaceKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

/// One of the seven spaces, with dimension and (for Bergman kinds) radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct SpaceSpec {
    kind: SpaceKind,
    d: u32,
    radius: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    kind: SpaceKind,
    d: u32,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
}

impl TryFrom<RawSpace> for SpaceSpec {
    type Error = Error;
    fn try_from(raw: RawSpace) -> Result<Self> {
        SpaceSpec::new(raw.kind, raw.d, raw.radius)
    }
}

impl From<SpaceSpec> for RawSpace {
    fn from(s: SpaceSpec) -> Self {
        RawSpace {
            kind: s.kind,
            d: s.d,
            radius: s.radius,
        }
    }
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind, d: u32, radius: Option<f64>) -> Result<Self> {
        if d < kind.min_dimension() {
            return Err(Error::Precondition(format!(
                "{kind} requires d >= {}, got {d}",
                kind.min_dimension()
            )));
        }
        match (kind.is_bergman(), radius) {
            (true, None) => {
                return Err(Error::Precondition(format!("{kind} requires a ball radius R")))
            }
            (true, Some(r)) if !(r > 0.0 && r <= R_MAX) => {
                return Err(Error::Precondition(format!(
                    "ball radius must lie in (0, {R_MAX}], got {r}"
                )))
            }
            (false, Some(_)) => {
                return Err(Error::Precondition(format!("{kind} takes no ball radius")))
            }
            _ => {}
        }
        Ok(SpaceSpec { kind, d, radius })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    fn bessel_order(&self, k: u32) -> f64 {
        f64::from(k) + (f64::from(self.d) - 2.0) / 2.0
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.radius {
            Some(r) => write!(f, "{} (d = {}, R = {r})", self.kind, self.d),
            None => write!(f, "{} (d = {})", self.kind, self.d),
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Dimension of the degree-`k` eigenspace: homogeneous polynomials in `d`
/// complex variables for the complex kinds, spherical harmonics of degree
/// `k` in `d` real variables otherwise.
pub fn multiplicity(space: &SpaceSpec, k: u32) -> u64 {
    let (k, d) = (u64::from(k), u64::from(space.d));
    let homogeneous = binomial(k + d - 1, d - 1);
    if space.kind.is_complex() || k < 2 {
        homogeneous
    } else {
        homogeneous - binomial(k + d - 3, d - 1)
    }
}

/// `Lambda_k` together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub k: u32,
    #[serde(flatten)]
    pub value: LogReal,
    pub multiplicity: u64,
    /// Quadrature tolerance; stored once per table in serialized form.
    #[serde(skip)]
    pub tol: f64,
}

/// `Lambda_k(V)` in the given space.
pub fn eigenvalue(space: &SpaceSpec, v: &RadialSymbol, k: u32, tol: f64) -> Result<EigenvalueEntry> {
    check_tol(tol)?;
    check_symbol(space, v)?;
    eigenvalue_unchecked(space, v, k, tol)
}

/// The largest radius at which the formulas sample the symbol.
fn sampling_radius(space: &SpaceSpec) -> f64 {
    space.radius.unwrap_or(R_MAX)
}

fn check_symbol(space: &SpaceSpec, v: &RadialSymbol) -> Result<f64> {
    v.check_bounded(sampling_radius(space))
}

fn eigenvalue_unchecked(space: &SpaceSpec, v: &RadialSymbol, k: u32, tol: f64) -> Result<EigenvalueEntry> {
    let kf = f64::from(k);
    let d = f64::from(space.d);
    // Ratios of two integrals share the tolerance budget.
    let half = 0.5 * tol;
    let value = match space.kind {
        SpaceKind::BergmanComplex | SpaceKind::BergmanHarmonic => {
            let radius = space.radius.expect("validated");
            let n = if space.kind == SpaceKind::BergmanComplex {
                2.0 * kf + 2.0 * d
            } else {
                2.0 * kf + d
            };
            let m = moment_compact(v, n - 1.0, radius, tol)?;
            m.value.mul_exp(n.ln() - n * radius.ln())
        }
        SpaceKind::BergmanHelmholtz => {
            let radius = space.radius.expect("validated");
            let nu = space.bessel_order(k);
            let num = bessel_weighted(v, nu, Weight::Ball(radius), half)?;
            num.value / bessel_l2_ball(nu, radius)?
        }
        SpaceKind::BargmannComplex | SpaceKind::BargmannHarmonic => {
            let (s, g) = if space.kind == SpaceKind::BargmannComplex {
                (2.0 * kf + 2.0 * d - 1.0, kf + d)
            } else {
                (2.0 * kf + d - 1.0, kf + d / 2.0)
            };
            let m = moment_gaussian(v, s, tol)?;
            m.value.mul_exp(2f64.ln() - log_gamma(g)?)
        }
        SpaceKind::BargmannHelmholtz => {
            let nu = space.bessel_order(k);
            let num = bessel_weighted(v, nu, Weight::Gaussian, half)?;
            if num.value.is_zero() {
                LogReal::ZERO
            } else {
                let den = bessel_weighted(&RadialSymbol::constant(1.0), nu, Weight::Gaussian, half)?;
                num.value / den.value
            }
        }
        SpaceKind::AgmonHormander => {
            let nu = space.bessel_order(k);
            let m = bessel_weighted(v, nu, Weight::Plain, tol)?;
            m.value.mul_exp(std::f64::consts::PI.ln())
        }
    };
    Ok(EigenvalueEntry {
        k,
        value,
        multiplicity: multiplicity(space, k),
        tol,
    })
}

/// Eigenvalues for `k = 0..=k_max` with their multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub space: SpaceSpec,
    pub symbol: String,
    pub tol: f64,
    pub k_max: u32,
    /// Upper bound for `|Lambda_k(V)|` at every `k > k_max`, when known.
    #[serde(default)]
    pub tail_bound: Option<LogReal>,
    pub entries: Vec<EigenvalueEntry>,
}

impl SpectrumTable {
    /// Assembles a table from precomputed entries, checking contiguity.
    pub fn from_entries(
        space: SpaceSpec,
        symbol: String,
        tol: f64,
        entries: Vec<EigenvalueEntry>,
        tail_bound: Option<LogReal>,
    ) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.k as usize != i {
                return Err(Error::Precondition(format!(
                    "entries must be contiguous from k = 0; position {i} holds k = {}",
                    e.k
                )));
            }
        }
        if entries.is_empty() {
            return Err(Error::Precondition("a spectrum table needs at least one entry".into()));
        }
        let k_max = entries.len() as u32 - 1;
        let entries = entries.into_iter().map(|e| EigenvalueEntry { tol, ..e }).collect();
        Ok(SpectrumTable {
            space,
            symbol,
            tol,
            k_max,
            tail_bound,
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: SpectrumTable = serde_json::from_str(text)
            .map_err(|e| Error::Precondition(format!("malformed spectrum table: {e}")))?;
        SpectrumTable::from_entries(t.space, t.symbol, t.tol, t.entries, t.tail_bound)
    }

    /// CSV with columns `k,sign,log_abs,multiplicity`; zero eigenvalues have
    /// `log_abs = -inf`.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "k,sign,log_abs,multiplicity")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{:?},{}",
                e.k,
                e.value.sign(),
                e.value.log_abs(),
                e.multiplicity
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn run_entries(
    space: &SpaceSpec,
    v: &RadialSymbol,
    ks: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> Result<Vec<EigenvalueEntry>> {
    let results: Vec<Result<EigenvalueEntry>> = ks
        .into_par_iter()
        .map(|k| eigenvalue_unchecked(space, v, k, tol))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::AtIndex {
                k: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Table of `Lambda_k(V)` for `k = 0..=k_max`, computed in parallel.
///
/// The table carries a bound on `|Lambda_k(V)|` for all `k > k_max` (see
/// [`tail_bound`]), which counting queries rely on.
pub fn spectrum(space: &SpaceSpec, v: &RadialSymbol, k_max: u32, tol: f64) -> Result<SpectrumTable> {
    check_tol(tol)?;
    let sup = check_symbol(space, v)?;
    let entries = run_entries(space, v, 0..=k_max, tol)?;
    let tail = tail_bound_with(space, v, sup, k_max, tol).map_err(|e| Error::AtIndex {
        k: k_max as usize,
        source: Box::new(e),
    })?;
    SpectrumTable::from_entries(space.to_owned(), v.canonical_text().to_string(), tol, entries, Some(tail))
}

/// Bound on `|Lambda_k(V)|` valid for every `k >= k`.
///
/// For a symbol vanishing beyond `b` (or for any symbol in a Bergman space,
/// with `b = R`) this is `sup|V| * Lambda_k(chi(0,b))`: every formula averages
/// `|V|` against a measure whose mass on `[0, b]` only shrinks as `k` grows.
/// Symbols of unbounded support fall back to `Lambda_k(|V|)` itself.
pub fn tail_bound(space: &SpaceSpec, v: &RadialSymbol, k: u32, tol: f64) -> Result<LogReal> {
    check_tol(tol)?;
    let sup = check_symbol(space, v)?;
    tail_bound_with(space, v, sup, k, tol)
}

fn tail_bound_with(space: &SpaceSpec, v: &RadialSymbol, sup: f64, k: u32, tol: f64) -> Result<LogReal> {
    if sup == 0.0 && v.is_zero() {
        return Ok(LogReal::ZERO);
    }
    let esr = v.exact_support_radius().ok().filter(|b| b.is_finite());
    let b = match (esr, space.radius) {
        (Some(b), Some(r)) => Some(b.min(r)),
        (Some(b), None) => Some(b),
        (None, Some(r)) => Some(r),
        (None, None) => None,
    };
    match b {
        Some(b) if b > 0.0 => {
            let chi = crate::symbolics::parse_symbol(&format!(
                "chi(0, {})",
                crate::symbolics::format_number(b)
            ))?;
            let e = eigenvalue_unchecked(space, &chi, k, tol)?;
            // Cover the sampling estimate of sup|V| and the quadrature error.
            Ok(e.value.abs().mul_exp((sup * (1.0 + 1e-6)).ln() + (1.0 + 4.0 * tol).ln()))
        }
        Some(_) => Ok(LogReal::ZERO),
        None => {
            let e = eigenvalue_unchecked(space, &v.abs(), k, tol)?;
            Ok(e.value.abs().mul_exp((1.0 + 4.0 * tol).ln()))
        }
    }
}

/// Smallest table whose tail bound lies strictly below `lambda`, searching
/// `k_max` up to `k_cap`.
pub fn spectrum_until(
    space: &SpaceSpec,
    v: &RadialSymbol,
    lambda: f64,
    tol: f64,
    k_cap: u32,
) -> Result<SpectrumTable> {
    check_tol(tol)?;
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    let sup = check_symbol(space, v)?;
    let target = LogReal::from_f64(lambda);
    let below = |k: u32| -> Result<bool> { Ok(tail_bound_with(space, v, sup, k, tol)? < target) };
    let mut hi = 16u32.min(k_cap);
    while !below(hi)? {
        if hi >= k_cap {
            let tail = tail_bound_with(space, v, sup, hi, tol)?;
            return Err(Error::InsufficientKMax {
                k_max: hi as usize,
                tail: tail.to_f64(),
                lambda,
            });
        }
        hi = (hi * 2).min(k_cap);
    }
    let mut lo = hi / 2;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    spectrum(space, v, hi, tol)
}
