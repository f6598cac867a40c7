use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::specialfn::LogReal;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub l1: f64,
    pub error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 7/15-point pair on `[a, b]`.
pub(crate) fn kronrod15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut l1 = WGK[7] * fc.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (i, x) in XGK[..7].iter().enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[i] = (f1, f2);
        kronrod += WGK[i] * (f1 + f2);
        l1 += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (i, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[i] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let (value, l1, asc) = (kronrod * half, l1 * half.abs(), asc * half.abs());
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * l1;
    if floor > f64::MIN_POSITIVE {
        error = error.max(floor);
    }
    Panel { a, b, value, l1, error }
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    /// Target: estimated error <= rel_tol * int |f|.
    pub rel_tol: f64,
    /// Absolute floor: also accept once the error is below this.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_panels: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOutput {
    pub value: f64,
    /// Estimate of `int |f|` over the same interval.
    pub l1: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss-Kronrod integration of `f` over a finite `[a, b]`.
///
/// Accepts when the summed error estimate drops below `rel_tol` times the
/// integral of `|f|`; for a sign-definite integrand that is ordinary relative
/// error.
pub fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<AdaptiveOutput> {
    if a == b {
        return Ok(AdaptiveOutput {
            value: 0.0,
            l1: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let first = kronrod15(f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    let (mut value, mut l1, mut error) = (first.value, first.l1, first.error);
    heap.push(first);
    loop {
        if !value.is_finite() || !l1.is_finite() {
            return Err(Error::NonIntegrable(format!(
                "non-finite integrand values on [{a}, {b}]"
            )));
        }
        if error <= opts.rel_tol * l1 || error <= opts.abs_tol || l1 == 0.0 {
            return Ok(AdaptiveOutput {
                value,
                l1,
                error,
                evaluations,
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::ToleranceNotMet {
                best: LogReal::from_f64(value),
                achieved: error / l1,
                requested: opts.rel_tol,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point; accept it as is.
            let mut frozen = worst;
            frozen.error = 0.0;
            error -= worst.error;
            heap.push(frozen);
            continue;
        }
        let left = kronrod15(f, worst.a, mid);
        let right = kronrod15(f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        l1 += left.l1 + right.l1 - worst.l1;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Resum to keep the running totals free of drift.
            value = heap.iter().map(|p| p.value).sum();
            l1 = heap.iter().map(|p| p.l1).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_polynomials() {
        // The Kronrod rule integrates degree 22 exactly.
        for deg in 0..=22 {
            let p = kronrod15(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / f64::from(deg + 1);
            assert!((p.value - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let out = adaptive(&|x: f64| x.powi(800), 0.0, 1.0, &AdaptiveOptions::default()).unwrap();
        assert!((out.value * 801.0 - 1.0).abs() < 1e-11);
        let out = adaptive(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, &AdaptiveOptions::default())
            .unwrap();
        assert!((out.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reports_tolerance_failure() {
        let opts = AdaptiveOptions {
            rel_tol: 1e-13,
            max_panels: 3,
            ..AdaptiveOptions::default()
        };
        let err = adaptive(&|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }
}
