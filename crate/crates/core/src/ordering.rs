//! Monotone reordering of eigenvalue tables, counting functions, and the
//! combinatorics of reordering bijections.
//!
//! Spectra are kept run-length encoded: the multiplicity of `Lambda_k` grows
//! like `k^(d-1)`, so counting far into the spectrum never expands it.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::SpectrumTable;
use crate::specialfn::LogReal;

/// A value repeated `len` times in a nonincreasing sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub value: LogReal,
    pub len: u64,
}

/// s-numbers and the positive and negative eigenvalue sequences, each
/// nonincreasing and run-length encoded. Negative eigenvalues are stored by
/// magnitude.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OrderedSpectrum {
    pub s_runs: Vec<Run>,
    pub pos_runs: Vec<Run>,
    pub neg_runs: Vec<Run>,
}

impl OrderedSpectrum {
    /// Total multiplicity of nonzero eigenvalues.
    pub fn total(&self) -> u64 {
        total(&self.s_runs)
    }

    /// `(n, n_plus, n_minus)`: how many terms of each sequence exceed `lambda`.
    pub fn count_above(&self, lambda: LogReal) -> (u64, u64, u64) {
        let p = count_runs(&self.pos_runs, lambda);
        let m = count_runs(&self.neg_runs, lambda);
        (p + m, p, m)
    }

    /// The `n`-th s-number (0-based), or zero past the end.
    pub fn s_number(&self, n: u64) -> LogReal {
        let mut seen = 0u64;
        for r in &self.s_runs {
            seen = seen.saturating_add(r.len);
            if n < seen {
                return r.value;
            }
        }
        LogReal::ZERO
    }
}

fn total(runs: &[Run]) -> u64 {
    runs.iter().fold(0u64, |acc, r| acc.saturating_add(r.len))
}

fn count_runs(runs: &[Run], lambda: LogReal) -> u64 {
    let cut = runs.partition_point(|r| r.value > lambda);
    total(&runs[..cut])
}

/// Sorts magnitudes descending and merges values within `tol` (relative) of
/// the head of the current run.
fn build_runs(mut items: Vec<(LogReal, u64)>, tol: f64) -> Vec<Run> {
    items.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut runs: Vec<Run> = Vec::new();
    for (value, len) in items {
        match runs.last_mut() {
            Some(head) if head.value.log_abs() - value.log_abs() <= tol => {
                head.len = head.len.saturating_add(len)
            }
            _ => runs.push(Run { value, len }),
        }
    }
    runs
}

/// Reorders a table into s-numbers and signed sequences; zero eigenvalues are
/// dropped and eigenvalues tied to quadrature tolerance share a run.
pub fn order_spectrum(table: &SpectrumTable) -> OrderedSpectrum {
    let mut all = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for e in table.entries.iter().filter(|e| !e.value.is_zero()) {
        let item = (e.value.abs(), e.multiplicity);
        all.push(item);
        if e.value.sign() > 0 {
            pos.push(item);
        } else {
            neg.push(item);
        }
    }
    OrderedSpectrum {
        s_runs: build_runs(all, table.tol),
        pos_runs: build_runs(pos, table.tol),
        neg_runs: build_runs(neg, table.tol),
    }
}

/// Counting function values at one threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n: u64,
    pub n_plus: u64,
    pub n_minus: u64,
}

/// Checks that no eigenvalue beyond the table can exceed `lambda`.
///
/// A table without a tail bound is taken to be the whole spectrum.
pub fn check_tail(table: &SpectrumTable, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Precondition(format!("lambda must be positive and finite, got {lambda}")));
    }
    match table.tail_bound {
        Some(tail) if !(tail < LogReal::from_f64(lambda)) => Err(Error::InsufficientKMax {
            k_max: table.k_max as usize,
            tail: tail.to_f64(),
            lambda,
        }),
        _ => Ok(()),
    }
}

/// `n_plus(lambda) = sum of d_k over Lambda_k > lambda`, `n_minus` likewise for
/// `-Lambda_k > lambda`, and `n = n_plus + n_minus`.
pub fn counting(table: &SpectrumTable, lambda: f64) -> Result<Counts> {
    check_tail(table, lambda)?;
    let lam = LogReal::from_f64(lambda);
    let (mut n_plus, mut n_minus) = (0u64, 0u64);
    for e in &table.entries {
        if e.value > lam {
            n_plus = n_plus.saturating_add(e.multiplicity);
        } else if -e.value > lam {
            n_minus = n_minus.saturating_add(e.multiplicity);
        }
    }
    Ok(Counts {
        n: n_plus.saturating_add(n_minus),
        n_plus,
        n_minus,
    })
}

/// Counting function sampled on a grid of thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub lambdas: Vec<f64>,
    pub counts: Vec<Counts>,
}

impl CountingReport {
    pub fn compute(table: &SpectrumTable, lambdas: &[f64]) -> Result<Self> {
        let counts = lambdas
            .iter()
            .map(|&l| counting(table, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(CountingReport {
            lambdas: lambdas.to_vec(),
            counts,
        })
    }

    /// CSV with columns `lambda,n,n_plus,n_minus`.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "lambda,n,n_plus,n_minus")?;
        for (l, c) in self.lambdas.iter().zip(&self.counts) {
            writeln!(out, "{l:e},{},{},{}", c.n, c.n_plus, c.n_minus)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// The map `k -> m_k` on `[0, N]`, injective into the nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionPrefix {
    map: Vec<u64>,
}

impl BijectionPrefix {
    pub fn new(map: Vec<u64>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(map.len());
        for (k, &m) in map.iter().enumerate() {
            if !seen.insert(m) {
                return Err(Error::Precondition(format!(
                    "map is not injective: m_{k} = {m} repeats an earlier value"
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::Precondition("map must cover at least k = 0".into()));
        }
        Ok(BijectionPrefix { map })
    }

    pub fn identity(n: u64) -> Self {
        BijectionPrefix {
            map: (0..=n).collect(),
        }
    }

    pub fn map(&self) -> &[u64] {
        &self.map
    }

    /// Largest `k` covered.
    pub fn n(&self) -> u64 {
        self.map.len() as u64 - 1
    }

    /// Whether the map is a permutation of `[0, N]`.
    pub fn is_permutation(&self) -> bool {
        let n = self.n();
        self.map.iter().all(|&m| m <= n)
    }

    /// The values `m_k` with `m_k <= beta * k` (the set `F_beta`), unsorted.
    fn f_beta(&self, beta: f64) -> impl Iterator<Item = u64> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter(move |(k, &m)| m as f64 <= beta * *k as f64)
            .map(|(_, &m)| m)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("beta must exceed 1, got {beta}")))
    }
}

/// `#(F_beta ∩ [0, N])` where `F_beta = {m_k : m_k <= beta * k}`.
///
/// All slots of the prefix contribute, so for a permutation of `[0, M]` with
/// `M >= N` the result is exact.
pub fn reorder_share(b: &BijectionPrefix, beta: f64, n: u64) -> Result<u64> {
    check_beta(beta)?;
    if n > b.n() {
        return Err(Error::Precondition(format!(
            "N = {n} lies beyond the prefix [0, {}]",
            b.n()
        )));
    }
    Ok(b.f_beta(beta).filter(|&m| m <= n).count() as u64)
}

/// A permutation of `[0, N]` on which `reorder_share` stays near the lower
/// bound `(beta - 1) / beta * N`.
///
/// Slots `k` that are not powers of two take `floor(beta k) + 1` while that
/// target lies in `[0, N]`; those values always exceed `beta k`. The
/// remaining slots take the unused targets in ascending order.
pub fn sharpness_bijection(beta: f64, n: u64) -> Result<BijectionPrefix> {
    check_beta(beta)?;
    let size = usize::try_from(n).ok().and_then(|s| s.checked_add(1)).ok_or_else(|| {
        Error::Precondition(format!("N = {n} is too large"))
    })?;
    let mut map = vec![u64::MAX; size];
    let mut used = vec![false; size];
    for (k, slot) in map.iter_mut().enumerate() {
        let k64 = k as u64;
        if k64.is_power_of_two() {
            continue;
        }
        let target = (beta * k as f64).floor() as u64 + 1;
        if target <= n {
            *slot = target;
            used[target as usize] = true;
        }
    }
    let mut free = used.iter().enumerate().filter(|(_, &u)| !u).map(|(m, _)| m as u64);
    for slot in map.iter_mut().filter(|s| **s == u64::MAX) {
        *slot = free.next().expect("free targets match empty slots");
    }
    Ok(BijectionPrefix { map })
}

/// Decreasing rearrangement of `|a|`.
pub fn nonincreasing_rearrangement(a: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Indices `k_0 < k_1 < ...` with `|a_{k_l}| <= b_{floor(k_l / beta)}` and
/// `k_l <= floor(beta / (beta - 1) * l) + 1`, given that the decreasing
/// rearrangement of `|a|` is dominated by `b`.
///
/// With `j -> m_j` the rearranging permutation (`|a_{m_j}|` is the `j`-th
/// largest), the indices are the `m_j <= beta j`, in increasing order.
pub fn dense_subsequence(a: &[f64], b: &[f64], beta: f64) -> Result<Vec<usize>> {
    check_beta(beta)?;
    if b.len() < a.len() {
        return Err(Error::Hypothesis(format!(
            "b has {} terms but a has {}",
            b.len(),
            a.len()
        )));
    }
    if let Some(i) = b.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Hypothesis(format!("b_{i} = {} is not positive", b[i])));
    }
    if let Some(i) = b.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Hypothesis(format!("b increases at index {}", i + 1)));
    }
    if let Some(i) = a.iter().position(|x| !x.is_finite()) {
        return Err(Error::Hypothesis(format!("a_{i} is not finite")));
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&x, &y| a[y].abs().total_cmp(&a[x].abs()));
    for (j, &m) in order.iter().enumerate() {
        if a[m].abs() > b[j] {
            return Err(Error::Hypothesis(format!(
                "the {j}-th largest |a| (index {m}, {}) exceeds b_{j} = {}",
                a[m].abs(),
                b[j]
            )));
        }
    }
    let mut out: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(j, &m)| m as f64 <= beta * *j as f64)
        .map(|(_, &m)| m)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// `(log N)^(-1) * sum of 1/m over m in F_beta ∩ [1, N]`.
pub fn inverse_sum_ratio(b: &BijectionPrefix, beta: f64, n: u64) -> Result<f64> {
    check_beta(beta)?;
    if n < 2 || n > b.n() {
        return Err(Error::Precondition(format!(
            "N must lie in [2, {}], got {n}",
            b.n()
        )));
    }
    let mut terms: Vec<u64> = b.f_beta(beta).filter(|&m| (1..=n).contains(&m)).collect();
    // Summing small terms last keeps the result independent of slot order.
    terms.sort_unstable_by(|x, y| y.cmp(x));
    let sum: f64 = terms.iter().map(|&m| 1.0 / m as f64).sum();
    Ok(sum / (n as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{EigenvalueEntry, SpaceKind, SpaceSpec};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(values: &[(f64, u64)]) -> SpectrumTable {
        let space = SpaceSpec::new(SpaceKind::BergmanComplex, 1, Some(1.0)).unwrap();
        let entries = values
            .iter()
            .enumerate()
            .map(|(k, &(v, m))| EigenvalueEntry {
                k: k as u32,
                value: LogReal::from_f64(v),
                multiplicity: m,
                tol: 0.0,
            })
            .collect();
        SpectrumTable::from_entries(space, "test".into(), 1e-12, entries, None).unwrap()
    }

    #[test]
    fn order_examples() {
        let o = order_spectrum(&table(&[(0.3, 1), (-0.4, 2)]));
        assert_eq!(o.s_runs.len(), 2);
        assert!((o.s_runs[0].value.to_f64() - 0.4).abs() < 1e-15);
        assert_eq!((o.s_runs[0].len, o.s_runs[1].len), (2, 1));
        assert_eq!(o.pos_runs.len(), 1);
        assert_eq!(o.neg_runs[0].len, 2);

        let o = order_spectrum(&table(&[(0.0, 1), (0.0, 5)]));
        assert!(o.s_runs.is_empty() && o.pos_runs.is_empty() && o.neg_runs.is_empty());
    }

    #[test]
    fn ties_merge() {
        let o = order_spectrum(&table(&[(0.5, 1), (-0.5, 2), (0.5 * (1.0 + 1e-14), 3), (0.1, 1)]));
        assert_eq!(o.s_runs.len(), 2);
        assert_eq!(o.s_runs[0].len, 6);
        assert_eq!(o.pos_runs[0].len, 4);
        assert_eq!(o.neg_runs[0].len, 2);
    }

    #[test]
    fn counting_examples() {
        let t = table(&[(0.5, 1), (0.25, 2), (-0.1, 3)]);
        let c = |l| {
            let c = counting(&t, l).unwrap();
            (c.n, c.n_plus, c.n_minus)
        };
        assert_eq!(c(0.2), (3, 3, 0));
        assert_eq!(c(0.05), (6, 3, 3));
        assert_eq!(c(0.25), (1, 1, 0));
        let o = order_spectrum(&t);
        assert_eq!(o.count_above(LogReal::from_f64(0.05)), (6, 3, 3));
        assert_eq!(o.count_above(LogReal::from_f64(0.25)), (1, 1, 0));
        assert!(counting(&t, 0.0).is_err());
    }

    #[test]
    fn counting_refuses_short_tables() {
        let mut t = table(&[(0.5, 1), (0.25, 1)]);
        t.tail_bound = Some(LogReal::from_f64(0.125));
        assert!(counting(&t, 0.2).is_ok());
        let err = counting(&t, 0.1).unwrap_err();
        assert!(matches!(err, Error::InsufficientKMax { k_max: 1, .. }), "{err:?}");
    }

    #[test]
    fn counting_report_csv() {
        let t = table(&[(0.5, 1), (0.25, 2)]);
        let r = CountingReport::compute(&t, &[0.3, 0.1]).unwrap();
        assert_eq!(r.to_csv(), "lambda,n,n_plus,n_minus\n3e-1,1,1,0\n1e-1,3,3,0\n");
    }

    #[test]
    fn reorder_share_examples() {
        let id = BijectionPrefix::identity(100);
        assert_eq!(reorder_share(&id, 2.0, 100).unwrap(), 101);
        let mut swap: Vec<u64> = (0..=10).collect();
        swap.swap(0, 1);
        let swap = BijectionPrefix::new(swap).unwrap();
        assert_eq!(reorder_share(&swap, 1.5, 10).unwrap(), 10);
        assert!(BijectionPrefix::new(vec![0, 1, 1]).is_err());
        assert!(reorder_share(&id, 1.0, 10).is_err());
        assert!(reorder_share(&id, 2.0, 101).is_err());
    }

    #[test]
    fn sharpness_construction() {
        let b = sharpness_bijection(2.0, 10_000).unwrap();
        assert!(b.is_permutation());
        assert_eq!(b.map()[3], 7);
        assert_ne!(b.map()[4], 9);
        let share = reorder_share(&b, 2.0, 10_000).unwrap() as f64 / 1e4;
        assert!((0.49..=0.52).contains(&share), "{share}");
    }

    #[test]
    fn inverse_sums() {
        let id = BijectionPrefix::identity(1_000_000);
        let r = inverse_sum_ratio(&id, 2.0, 1_000_000).unwrap();
        assert!((r - 1.0).abs() < 0.05, "{r}");
        // On a longer prefix the unused small targets sit in late slots.
        let b = sharpness_bijection(2.0, 4_000_000).unwrap();
        let r = inverse_sum_ratio(&b, 2.0, 1_000_000).unwrap();
        assert!(r >= 0.5 * 0.95, "{r}");
        assert!(r < 0.65, "{r}");
    }

    fn check_dense(a: &[f64], b: &[f64], beta: f64, ks: &[usize]) {
        for (l, &k) in ks.iter().enumerate() {
            assert!(a[k].abs() <= b[(k as f64 / beta).floor() as usize]);
            assert!(k as f64 <= (beta / (beta - 1.0) * l as f64).floor() + 1.0);
        }
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dense_examples() {
        let a: Vec<f64> = (0..50).map(|k| 0.9f64.powi(k)).collect();
        let ks = dense_subsequence(&a, &a, 2.0).unwrap();
        assert_eq!(ks, (0..50).collect::<Vec<_>>());

        // Reversed blocks of 8 of a geometric sequence.
        let b: Vec<f64> = (0..64).map(|k| 0.8f64.powi(k)).collect();
        let a: Vec<f64> = (0..64).map(|k| b[8 * (k / 8) + 7 - k % 8]).collect();
        let ks = dense_subsequence(&a, &b, 2.0).unwrap();
        check_dense(&a, &b, 2.0, &ks);
        let direct: Vec<usize> = (0..64)
            .filter(|&k| {
                let j = 8 * (k / 8) + 7 - k % 8;
                k as f64 <= 2.0 * j as f64
            })
            .collect();
        assert_eq!(ks, direct);

        let mut a: Vec<f64> = (0..30).map(|k| 0.7f64.powi(k)).collect();
        let b = a.clone();
        a.swap(10, 11);
        let ks = dense_subsequence(&a, &b, 2.0).unwrap();
        assert!(ks.len() >= 29);
        assert!((0..30).filter(|k| !ks.contains(k)).all(|k| k == 11));

        assert!(matches!(
            dense_subsequence(&[1.0, 2.0], &[1.5, 1.0], 2.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn random_permutations_respect_share_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 2000u64;
        for _ in 0..20 {
            let mut map: Vec<u64> = (0..=n).collect();
            map.shuffle(&mut rng);
            let b = BijectionPrefix::new(map).unwrap();
            for beta in [1.5, 2.0, 3.0] {
                let share = reorder_share(&b, beta, n).unwrap() as f64;
                assert!(share >= (beta - 1.0) / beta * n as f64 - 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn rearrangement_is_dominated(
            pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..60)
        ) {
            let mut b: Vec<f64> = pairs.iter().map(|p| p.0 + 1e-3).collect();
            b.sort_by(|x, y| y.total_cmp(x));
            let a: Vec<f64> = b.iter().zip(&pairs).map(|(bk, p)| bk * (2.0 * p.1 - 1.0)).collect();
            let star = nonincreasing_rearrangement(&a);
            prop_assert!(star.iter().zip(&b).all(|(x, y)| x <= y));
        }

        #[test]
        fn dense_outputs_satisfy_both_bounds(
            seed in any::<u64>(),
            len in 1usize..200,
            beta in 1.1f64..4.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut b: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
            b.sort_by(|x, y| y.total_cmp(x));
            let mut a: Vec<f64> = b.iter().map(|x| x * rng.gen_range(-1.0..1.0)).collect();
            a.shuffle(&mut rng);
            let ks = dense_subsequence(&a, &b, beta).unwrap();
            check_dense(&a, &b, beta, &ks);
        }

        #[test]
        fn runs_conserve_multiplicity(values in prop::collection::vec((-1.0f64..1.0, 1u64..20), 1..40)) {
            let t = table(&values);
            let o = order_spectrum(&t);
            let nonzero: u64 = values.iter().filter(|v| v.0 != 0.0).map(|v| v.1).sum();
            prop_assert_eq!(o.total(), nonzero);
            prop_assert_eq!(total(&o.pos_runs) + total(&o.neg_runs), o.total());
            prop_assert!(o.s_runs.windows(2).all(|w| w[0].value > w[1].value));
        }

        #[test]
        fn counting_is_monotone(
            values in prop::collection::vec((-1.0f64..1.0, 1u64..20), 1..40),
            l1 in 1e-3f64..1.0,
            l2 in 1e-3f64..1.0,
        ) {
            let t = table(&values);
            let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
            prop_assert!(counting(&t, lo).unwrap().n >= counting(&t, hi).unwrap().n);
            let o = order_spectrum(&t);
            prop_assert_eq!(o.count_above(LogReal::from_f64(lo)).0, counting(&t, lo).unwrap().n);
        }
    }
}
