//! Leading-order laws for the counting function in each space, comparison of
//! computed spectra against them, and the numerical experiments built on top:
//! slope fits, the cancellation counterexample, the periphery-sign experiment
//! and the limsup proxy for mixed-sign symbols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::{check_tail, counting, Counts};
use crate::quadrature::{check_tol, rotation_bound, OscillatorySymbol};
use crate::spectra::{spectrum_until, EigenvalueEntry, SpaceKind, SpaceSpec, SpectrumTable};
use crate::specialfn::{log_gamma, LogReal};
use crate::symbolics::{parse_symbol, DecayClass, RadialSymbol};

/// `n(lambda) ~ coefficient * |log lambda|^log_power / (log|log lambda|)^loglog_power`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub coefficient: f64,
    pub log_power: f64,
    pub loglog_power: f64,
}

impl AsymptoticLaw {
    /// Predicted `n(lambda)`, or `None` where the formula is not positive
    /// (thresholds too close to 1).
    pub fn predict(&self, lambda: f64) -> Option<f64> {
        let l = -lambda.ln();
        if !(l > 0.0) {
            return None;
        }
        let denom = if self.loglog_power == 0.0 {
            1.0
        } else {
            let ll = l.ln();
            if !(ll > 0.0) {
                return None;
            }
            ll.powf(self.loglog_power)
        };
        let n = self.coefficient * l.powf(self.log_power) / denom;
        (n.is_finite() && n > 0.0).then_some(n)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Leading asymptotics of `n(lambda)` for a nonnegative symbol of the given
/// decay class.
pub fn predicted_law(space: &SpaceSpec, class: DecayClass) -> Result<AsymptoticLaw> {
    let d = space.d();
    let df = f64::from(d);
    let unsupported = || {
        Error::Unsupported(format!(
            "no counting law for {} with decay class {class:?}",
            space.kind()
        ))
    };
    if space.kind().is_bergman() {
        let DecayClass::CompactSupport(b) = class else {
            return Err(unsupported());
        };
        let radius = space.radius().expect("validated");
        if !(b > 0.0 && b < radius) {
            return Err(Error::Unsupported(format!(
                "the Bergman law needs 0 < b < R, got b = {b}, R = {radius}"
            )));
        }
        let two_log = 2.0 * (b / radius).ln().abs();
        return Ok(if space.kind() == SpaceKind::BergmanComplex {
            AsymptoticLaw {
                coefficient: two_log.powf(-df) / factorial(d),
                log_power: df,
                loglog_power: 0.0,
            }
        } else {
            AsymptoticLaw {
                coefficient: 2.0 * two_log.powf(1.0 - df) / factorial(d - 1),
                log_power: df - 1.0,
                loglog_power: 0.0,
            }
        });
    }
    match class {
        DecayClass::CompactSupport(b) if b > 0.0 => {}
        DecayClass::RapidDecay => {}
        _ => return Err(unsupported()),
    }
    Ok(match space.kind() {
        SpaceKind::BargmannComplex => AsymptoticLaw {
            coefficient: 1.0 / factorial(d),
            log_power: df,
            loglog_power: df,
        },
        SpaceKind::BargmannHarmonic | SpaceKind::BargmannHelmholtz => AsymptoticLaw {
            coefficient: 2.0 / factorial(d - 1),
            log_power: df - 1.0,
            loglog_power: df - 1.0,
        },
        SpaceKind::AgmonHormander => AsymptoticLaw {
            coefficient: 2.0 / factorial(d - 1),
            log_power: (df - 1.0) / 2.0,
            loglog_power: (df - 1.0) / 2.0,
        },
        _ => unreachable!("Bergman kinds handled above"),
    })
}

/// `count` thresholds `10^max_log10 > ... > 10^min_log10`, evenly spaced in
/// the logarithm.
pub fn log_grid(min_log10: f64, max_log10: f64, points: usize) -> Result<Vec<f64>> {
    if !(min_log10 < max_log10 && max_log10 <= 0.0 && min_log10.is_finite()) {
        return Err(Error::Precondition(format!(
            "lambda grid needs min < max <= 0 (log10), got [{min_log10}, {max_log10}]"
        )));
    }
    if points < 2 {
        return Err(Error::Precondition("lambda grid needs at least 2 points".into()));
    }
    let step = (max_log10 - min_log10) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let e = if i + 1 == points {
                min_log10
            } else {
                max_log10 - step * i as f64
            };
            10f64.powf(e)
        })
        .collect())
}

/// Which counting function a comparison uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSeries {
    #[default]
    Total,
    Positive,
    Negative,
}

impl CountSeries {
    fn pick(self, c: &Counts) -> u64 {
        match self {
            CountSeries::Total => c.n,
            CountSeries::Positive => c.n_plus,
            CountSeries::Negative => c.n_minus,
        }
    }
}

/// Computed against predicted counting function on a grid of thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub law: AsymptoticLaw,
    pub series: CountSeries,
    pub lambdas: Vec<f64>,
    pub computed: Vec<u64>,
    pub predicted: Vec<Option<f64>>,
    pub ratios: Vec<Option<f64>>,
    /// Largest ratio over the grid, a proxy for the limsup.
    pub max_ratio: Option<f64>,
    /// Ratio at the last grid point.
    pub final_ratio: Option<f64>,
}

pub fn compare(table: &SpectrumTable, law: &AsymptoticLaw, lambdas: &[f64]) -> Result<ComparisonReport> {
    compare_series(table, law, lambdas, CountSeries::Total)
}

/// Like [`compare`], for a chosen counting function.
pub fn compare_series(
    table: &SpectrumTable,
    law: &AsymptoticLaw,
    lambdas: &[f64],
    series: CountSeries,
) -> Result<ComparisonReport> {
    if lambdas.is_empty() {
        return Err(Error::Precondition("empty lambda grid".into()));
    }
    let mut computed = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let c = counting(table, l).map_err(|e| annotate_lambda(e, l))?;
        computed.push(series.pick(&c));
    }
    let predicted: Vec<Option<f64>> = lambdas.iter().map(|&l| law.predict(l)).collect();
    let ratios: Vec<Option<f64>> = computed
        .iter()
        .zip(&predicted)
        .map(|(&n, p)| p.map(|p| n as f64 / p))
        .collect();
    let max_ratio = ratios.iter().flatten().copied().reduce(f64::max);
    let final_ratio = *ratios.last().expect("nonempty grid");
    Ok(ComparisonReport {
        law: *law,
        series,
        lambdas: lambdas.to_vec(),
        computed,
        predicted,
        ratios,
        max_ratio,
        final_ratio,
    })
}

fn annotate_lambda(e: Error, lambda: f64) -> Error {
    match e {
        Error::Precondition(msg) => Error::Precondition(format!("at lambda = {lambda:e}: {msg}")),
        other => other,
    }
}

/// Least-squares fit of `y_k ≈ a k ln k + b k` (no intercept).
pub fn fit_k_log_k(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(k, y) in points {
        let x1 = k * k.ln();
        let x2 = k;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        t1 += x1 * y;
        t2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if points.len() < 2 || !(det.abs() > 1e-12 * s11 * s22) {
        return Err(Error::Precondition("slope fit needs at least two distinct k".into()));
    }
    Ok(((t1 * s22 - t2 * s12) / det, (s11 * t2 - s12 * t1) / det))
}

/// Fit of `-ln|Lambda_k| ≈ a k ln k + b k` over `k_lo..=k_hi`.
pub fn log_slope_fit(table: &SpectrumTable, k_range: (u32, u32)) -> Result<(f64, f64)> {
    fit_entries(&table.entries, k_range)
}

fn fit_entries(entries: &[EigenvalueEntry], (k_lo, k_hi): (u32, u32)) -> Result<(f64, f64)> {
    if !(k_lo >= 10 && k_hi > k_lo) {
        return Err(Error::Precondition(format!(
            "slope fit needs 10 <= k_lo < k_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    if k_hi as usize >= entries.len() {
        return Err(Error::Precondition(format!(
            "slope fit range ends at {k_hi} beyond the table's k_max = {}",
            entries.len().saturating_sub(1)
        )));
    }
    let mut points = Vec::with_capacity((k_hi - k_lo + 1) as usize);
    for e in &entries[k_lo as usize..=k_hi as usize] {
        if e.value.is_zero() {
            return Err(Error::Precondition(format!(
                "Lambda_{} vanishes; no slope to fit",
                e.k
            )));
        }
        points.push((f64::from(e.k), -e.value.log_abs()));
    }
    fit_k_log_k(&points)
}

/// Pass/fail record of one assertion in an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Fitted `(a, b)` with `-ln|Lambda_k| ≈ a k ln k + b k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub a: f64,
    pub b: f64,
}

/// Result of the cancellation experiment in the one-dimensional Bargmann
/// space for `V = exp(-r^(2p) + r^2) sin(r^(2q))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub experiment: String,
    pub p: f64,
    pub q: f64,
    pub amplitude: f64,
    pub k_max: u32,
    pub tol: f64,
    pub k_range: (u32, u32),
    /// Expected slope for `|V|`: `(p - 1) / p`.
    pub target_abs: f64,
    /// Lower bound for the slope of `V`: `(q - 1) / q`.
    pub target_v: f64,
    pub slope_v: Option<Slope>,
    pub slope_abs: Option<Slope>,
    /// `k` at which `|I(k)| <= Gamma((k+1)/q) / (2q)` fails.
    pub bound_violations: Vec<u32>,
    pub v_spectrum: SpectrumTable,
    pub abs_spectrum: SpectrumTable,
    pub checks: Vec<Check>,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Relative slack on fitted slopes.
pub const SLOPE_TOLERANCE: f64 = 0.1;

/// Default fit window: the upper two thirds of `[0, k_max]`, from `k >= 10`.
pub fn default_fit_range(k_max: u32) -> (u32, u32) {
    ((k_max / 3).max(10), k_max)
}

/// Computes `Lambda_k(V)` and `Lambda_k(|V|)` for `k <= k_max`, fits both
/// slopes, and checks the rotation bound on every moment.
pub fn run_counterexample(sym: &OscillatorySymbol, k_max: u32, tol: f64) -> Result<CounterexampleReport> {
    check_tol(tol)?;
    let k_range = default_fit_range(k_max);
    if k_range.0 >= k_range.1 {
        return Err(Error::Precondition(format!("counterexample needs k_max > 10, got {k_max}")));
    }
    let space = SpaceSpec::new(SpaceKind::BargmannComplex, 1, None)?;
    let rows: Vec<Result<(EigenvalueEntry, EigenvalueEntry, bool)>> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let at = |e: Error| Error::AtIndex {
                k: k as usize,
                source: Box::new(e),
            };
            let m = sym.moment(k, tol).map_err(at)?;
            let ma = sym.abs_moment(k, tol).map_err(at)?;
            // Lambda_k = 2 I(k) / k! in the one-dimensional Bargmann space.
            let scale = 2f64.ln() - log_gamma(f64::from(k) + 1.0)?;
            let bound = rotation_bound(sym.q, k).mul_exp(sym.amplitude.abs().ln());
            let within = m.value.abs().log_abs() <= bound.log_abs() + 4.0 * tol;
            let entry = |value: LogReal| EigenvalueEntry {
                k,
                value: value.mul_exp(scale),
                multiplicity: 1,
                tol,
            };
            Ok((entry(m.value), entry(ma.value), within))
        })
        .collect();
    let mut v_entries = Vec::with_capacity(rows.len());
    let mut abs_entries = Vec::with_capacity(rows.len());
    let mut bound_violations = Vec::new();
    for row in rows {
        let (v, a, within) = row?;
        if !within {
            bound_violations.push(v.k);
        }
        v_entries.push(v);
        abs_entries.push(a);
    }
    let text = sym.to_symbol().canonical_text().to_string();
    let abs_text = format!("abs({text})");
    let v_spectrum = SpectrumTable::from_entries(space, text, tol, v_entries, None)?;
    let abs_spectrum = SpectrumTable::from_entries(space, abs_text, tol, abs_entries, None)?;

    let slope = |t: &SpectrumTable| log_slope_fit(t, k_range).ok().map(|(a, b)| Slope { a, b });
    let slope_v = slope(&v_spectrum);
    let slope_abs = slope(&abs_spectrum);
    let target_abs = (sym.p - 1.0) / sym.p;
    let target_v = (sym.q - 1.0) / sym.q;
    let min_separation = 0.6 * (1.0 / sym.p - 1.0 / sym.q);

    let show = |s: Option<Slope>| s.map_or("no fit".to_string(), |s| format!("{:.4}", s.a));
    let mut checks = vec![
        Check::new(
            "slope_abs",
            slope_abs.is_some_and(|s| (s.a - target_abs).abs() <= SLOPE_TOLERANCE * target_abs),
            format!("a_|V| = {} vs target {target_abs:.4}", show(slope_abs)),
        ),
        Check::new(
            "slope_v",
            slope_v.is_some_and(|s| s.a >= target_v * (1.0 - SLOPE_TOLERANCE)),
            format!("a_V = {} vs lower bound {target_v:.4}", show(slope_v)),
        ),
    ];
    let separation = slope_v.zip(slope_abs).map(|(v, a)| v.a - a.a);
    checks.push(Check::new(
        "separation",
        separation.is_some_and(|s| s >= min_separation),
        format!(
            "a_V - a_|V| = {} vs minimum {min_separation:.4}",
            separation.map_or("n/a".into(), |s| format!("{s:.4}"))
        ),
    ));
    checks.push(Check::new(
        "rotation_bound",
        bound_violations.is_empty(),
        format!("{} violations for k <= {k_max}", bound_violations.len()),
    ));
    Ok(CounterexampleReport {
        experiment: "counterexample".into(),
        p: sym.p,
        q: sym.q,
        amplitude: sym.amplitude,
        k_max,
        tol,
        k_range,
        target_abs,
        target_v,
        slope_v,
        slope_abs,
        bound_violations,
        v_spectrum,
        abs_spectrum,
        checks,
    })
}

/// Result of the periphery experiment: a compactly supported symbol that is
/// nonnegative near the edge of its support has finitely many negative
/// eigenvalues, and its positive spectrum follows the law for `chi(0, b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeripheryReport {
    pub experiment: String,
    pub symbol: String,
    pub space: SpaceSpec,
    pub tol: f64,
    pub support_radius: f64,
    /// Every `k` with `Lambda_k < 0`.
    pub negative_indices: Vec<u32>,
    /// `1 + largest negative index`, or 0 when none are negative.
    pub k0: u32,
    pub comparison: ComparisonReport,
    pub spectrum: SpectrumTable,
    pub checks: Vec<Check>,
}

impl PeripheryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Relative band for the positive-spectrum ratio at the deepest threshold.
pub const PERIPHERY_BAND: f64 = 0.15;

fn support_radius(v: &RadialSymbol) -> Result<f64> {
    let b = v.exact_support_radius()?;
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Precondition(format!(
            "symbol '{v}' must have compact support of positive radius, found {b}"
        )));
    }
    Ok(b)
}

/// Checks that `V >= 0` on a neighbourhood `(b0, b)` of the support edge.
fn check_periphery_sign(v: &RadialSymbol, b: f64) -> Result<()> {
    const SAMPLES: usize = 256;
    let width = 1e-3 * b;
    for i in 0..SAMPLES {
        let r = b - width * (i as f64 + 0.5) / SAMPLES as f64;
        if v.evaluate(r) < 0.0 {
            return Err(Error::Precondition(format!(
                "symbol '{v}' is negative at r = {r}, next to the support edge {b}"
            )));
        }
    }
    Ok(())
}

/// Builds the spectrum of `V` deep enough for `lambdas`, locates negative
/// eigenvalues and compares the positive counting function against the law
/// for the support radius.
pub fn run_periphery(
    v: &RadialSymbol,
    space: &SpaceSpec,
    k_max: u32,
    tol: f64,
    lambdas: &[f64],
) -> Result<PeripheryReport> {
    let b = support_radius(v)?;
    check_periphery_sign(v, b)?;
    let law = predicted_law(space, DecayClass::CompactSupport(b))?;
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let table = spectrum_until(space, v, lambda_min, tol, k_max)?;
    let negative_indices: Vec<u32> = table
        .entries
        .iter()
        .filter(|e| e.value.sign() < 0)
        .map(|e| e.k)
        .collect();
    let k0 = negative_indices.last().map_or(0, |k| k + 1);
    let comparison = compare_series(&table, &law, lambdas, CountSeries::Positive)?;
    let fin = comparison.final_ratio;
    let checks = vec![
        Check::new(
            "finitely_many_negative",
            k0 < table.k_max,
            format!("negative eigenvalues for k < {k0}, table to k = {}", table.k_max),
        ),
        Check::new(
            "positive_law",
            fin.is_some_and(|r| (r - 1.0).abs() <= PERIPHERY_BAND),
            format!(
                "n_+ / law at lambda = {:e}: {}",
                comparison.lambdas.last().copied().unwrap_or(f64::NAN),
                fin.map_or("n/a".into(), |r| format!("{r:.4}"))
            ),
        ),
    ];
    Ok(PeripheryReport {
        experiment: "periphery".into(),
        symbol: v.canonical_text().to_string(),
        space: *space,
        tol,
        support_radius: b,
        negative_indices,
        k0,
        comparison,
        spectrum: table,
        checks,
    })
}

/// `n(lambda; V) / n(lambda; |V|)` on a grid, whose maximum stands in for the
/// limsup as `lambda -> 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimsupReport {
    pub symbol: String,
    pub space: SpaceSpec,
    pub lambdas: Vec<f64>,
    pub n_v: Vec<u64>,
    pub n_abs: Vec<u64>,
    /// `None` where `n(lambda; |V|) = 0`.
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: Option<f64>,
}

pub fn limsup_proxy(
    v: &RadialSymbol,
    space: &SpaceSpec,
    lambdas: &[f64],
    tol: f64,
    k_cap: u32,
) -> Result<LimsupReport> {
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let abs = v.abs();
    let tv = spectrum_until(space, v, lambda_min, tol, k_cap)?;
    let ta = spectrum_until(space, &abs, lambda_min, tol, k_cap)?;
    let mut n_v = Vec::with_capacity(lambdas.len());
    let mut n_abs = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        check_tail(&tv, l)?;
        n_v.push(counting(&tv, l)?.n);
        n_abs.push(counting(&ta, l)?.n);
    }
    let ratios: Vec<Option<f64>> = n_v
        .iter()
        .zip(&n_abs)
        .map(|(&a, &b)| (b > 0).then(|| a as f64 / b as f64))
        .collect();
    let max_ratio = ratios.iter().flatten().copied().reduce(f64::max);
    Ok(LimsupReport {
        symbol: v.canonical_text().to_string(),
        space: *space,
        lambdas: lambdas.to_vec(),
        n_v,
        n_abs,
        ratios,
        max_ratio,
    })
}

/// `chi(0, b)` for the support radius of `v`, the comparison symbol of the
/// trivial upper bound `n(lambda; V) <= n(lambda; sup|V| chi(0, b))`.
pub fn support_indicator(v: &RadialSymbol) -> Result<RadialSymbol> {
    let b = support_radius(v)?;
    parse_symbol(&format!("chi(0, {})", crate::symbolics::format_number(b)))
}
