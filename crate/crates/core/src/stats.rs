//! Goodness-of-fit machinery for comparing simulated extremes with their
//! limit laws. Everything here is deterministic in its inputs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::math::{self, exp, sqrt};

/// Which check produced a [`GofReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GofTest {
    Ks,
    PoissonMean,
    PoissonChisq,
    MedianCi,
}

impl GofTest {
    pub fn name(self) -> &'static str {
        match self {
            GofTest::Ks => "ks",
            GofTest::PoissonMean => "poisson_mean",
            GofTest::PoissonChisq => "poisson_chisq",
            GofTest::MedianCi => "median_ci",
        }
    }
}

/// Outcome of one goodness-of-fit check. `pass` holds exactly when
/// `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct GofReport {
    pub test: GofTest,
    pub statistic: f64,
    pub n_samples: usize,
    pub pass: bool,
    pub threshold: f64,
    pub notes: String,
}

impl GofReport {
    fn new(test: GofTest, statistic: f64, threshold: f64, n_samples: usize, notes: String) -> Self {
        GofReport {
            test,
            statistic,
            n_samples,
            pass: statistic <= threshold,
            threshold,
            notes,
        }
    }
}

/// Two-sided Kolmogorov-Smirnov distance `sup |F_n - F|` between the
/// empirical CDF of sorted `samples` and `cdf`.
///
/// Both step edges are compared at every sample point.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if let Some(w) = samples.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(domain("KS samples must be sorted", w[1]));
    }
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    Ok(d)
}

/// KS distance packaged as a report against a fixed acceptance threshold.
pub fn ks_report<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, threshold: f64) -> Result<GofReport> {
    let d = ks_statistic(samples, cdf)?;
    Ok(GofReport::new(GofTest::Ks, d, threshold, samples.len(), String::new()))
}

/// Minimum number of replicates accepted by [`poisson_gof`].
pub const POISSON_MIN_REPLICATES: usize = 100;
/// Minimum expected count per chi-square bin after merging.
pub const CHISQ_MIN_EXPECTED: f64 = 5.0;

/// Both halves of the Poisson comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonGof {
    pub chisq: GofReport,
    pub mean: GofReport,
}

impl PoissonGof {
    pub fn pass(&self) -> bool {
        self.chisq.pass && self.mean.pass
    }
}

/// Compare per-replicate exceedance counts with `Poisson(mean)`.
///
/// The chi-square part uses singleton bins `0, 1, ..., K` plus a tail bin
/// `> K` with `K = max(2, floor(mean + 3 sqrt(mean)))` (so `{0, 1, 2, >= 3}`
/// for small means), merged left to right until every bin expects at least
/// five counts, and is judged at significance `level`. The mean part passes
/// when the relative error of the sample mean is within `4 / sqrt(mean n)`,
/// i.e. four standard errors.
pub fn poisson_gof(counts: &[u64], mean: f64, level: f64) -> Result<PoissonGof> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(domain("Poisson mean", mean));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain("significance level", level));
    }
    let n = counts.len();
    if n < POISSON_MIN_REPLICATES {
        return Err(Error::InsufficientData {
            needed: POISSON_MIN_REPLICATES,
            got: n,
        });
    }
    let nf = n as f64;
    let last = (math::floor(mean + 3.0 * sqrt(mean)) as usize).max(2);

    let mut observed = alloc::vec![0.0_f64; last + 2];
    for &c in counts {
        let bin = (c as usize).min(last + 1);
        observed[bin] += 1.0;
    }
    let mut expected: Vec<f64> = (0..=last).map(|k| nf * math::poisson_pmf(k, mean)).collect();
    let head: f64 = expected.iter().sum();
    expected.push((nf - head).max(0.0));

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= CHISQ_MIN_EXPECTED {
            bins.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match bins.last_mut() {
            Some(b) => {
                b.0 += acc_o;
                b.1 += acc_e;
            }
            None => bins.push((acc_o, acc_e)),
        }
    }

    let mut notes = String::new();
    let chisq = if bins.len() < 2 {
        let _ = write!(notes, "degenerate binning ({} bin)", bins.len());
        GofReport {
            test: GofTest::PoissonChisq,
            statistic: f64::INFINITY,
            n_samples: n,
            pass: false,
            threshold: 0.0,
            notes,
        }
    } else {
        let stat: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
        let df = bins.len() - 1;
        let crit = math::chi_square_critical(level, df);
        let _ = write!(
            notes,
            "{} bins (expected >= {CHISQ_MIN_EXPECTED} after merging), df={df}, p={:.4}",
            bins.len(),
            math::chi_square_sf(stat, df)
        );
        GofReport::new(GofTest::PoissonChisq, stat, crit, n, notes)
    };

    let sample_mean = counts.iter().map(|&c| c as f64).sum::<f64>() / nf;
    let mut notes = String::new();
    let _ = write!(notes, "sample mean {sample_mean:.5} vs {mean:.5}");
    let mean_report = GofReport::new(
        GofTest::PoissonMean,
        (sample_mean - mean).abs() / mean,
        4.0 / sqrt(mean * nf),
        n,
        notes,
    );

    Ok(PoissonGof {
        chisq,
        mean: mean_report,
    })
}

/// Sample median (average of the middle pair for even lengths). Sorts a copy.
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Minimum sample size for [`median_ci`].
pub const MEDIAN_CI_MIN_SAMPLES: usize = 20;

/// Distribution-free confidence interval for a median.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianCi {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    pub level: f64,
    /// Exact binomial coverage of `[lower, upper]`, at least `level`.
    pub coverage: f64,
}

impl MedianCi {
    pub fn contains(&self, target: f64) -> bool {
        self.lower <= target && target <= self.upper
    }

    pub fn report(&self, target: f64, n_samples: usize) -> GofReport {
        let mut notes = String::new();
        let _ = write!(
            notes,
            "median {:.6} in [{:.6}, {:.6}] at {:.3} (coverage {:.4}), target {target:.6}",
            self.median, self.lower, self.upper, self.level, self.coverage
        );
        let pass = self.contains(target);
        GofReport {
            test: GofTest::MedianCi,
            statistic: self.median,
            n_samples,
            pass,
            threshold: target,
            notes,
        }
    }
}

/// Order-statistic confidence interval `[x_(l), x_(n-l+1)]` for the median,
/// with `l` the largest index whose exact coverage
/// `1 - 2 P(Bin(n, 1/2) <= l - 1)` is still at least `level`.
pub fn median_ci(samples: &[f64], level: f64) -> Result<MedianCi> {
    if !(level > 0.0 && level < 1.0) {
        return Err(domain("confidence level", level));
    }
    let n = samples.len();
    if n < MEDIAN_CI_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MEDIAN_CI_MIN_SAMPLES,
            got: n,
        });
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let alpha_half = 0.5 * (1.0 - level);
    // cdf = P(B <= l - 1); grow l while the two-sided miss stays small.
    let mut l = 0usize;
    let mut cdf = 0.0_f64;
    loop {
        let next = cdf + exp(math::binomial_log_pmf(n, l, 0.5));
        if next > alpha_half || l + 1 > n / 2 {
            break;
        }
        cdf = next;
        l += 1;
    }
    if l == 0 {
        return Err(Error::InsufficientData { needed: n + 1, got: n });
    }
    let m = n / 2;
    let med = if n % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) };
    Ok(MedianCi {
        lower: v[l - 1],
        median: med,
        upper: v[n - l],
        level,
        coverage: 1.0 - 2.0 * cdf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ks_plug_in_bound_for_exact_quantiles() {
        let n = 500;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x).unwrap();
        assert!(d <= 1.0 / n as f64 + 1e-15);
    }

    #[test]
    fn ks_single_sample_at_median() {
        let d = ks_statistic(&[0.0], math::normal_cdf).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_rejects_empty_and_unsorted() {
        assert!(matches!(
            ks_statistic(&[], |x| x),
            Err(Error::InsufficientData { .. })
        ));
        assert!(ks_statistic(&[0.3, 0.1], |x| x).is_err());
    }

    #[test]
    fn poisson_gof_rejects_degenerate_inputs() {
        let zeros = vec![0u64; 1000];
        let g = poisson_gof(&zeros, 1.0, 0.01).unwrap();
        assert!(!g.pass());
        assert!(!g.mean.pass);
        let constant = vec![20u64; 1000];
        let g = poisson_gof(&constant, 20.0, 0.01).unwrap();
        assert!(g.mean.pass, "mean is exact");
        assert!(!g.chisq.pass, "zero variance must fail");
        assert!(poisson_gof(&[1; 99], 1.0, 0.01).is_err());
        assert!(poisson_gof(&[1; 200], 0.0, 0.01).is_err());
    }

    #[test]
    fn poisson_gof_small_mean_uses_four_bins() {
        // Exactly expected frequencies for mean 0.5 over 10^4 replicates.
        let n = 10_000usize;
        let mut counts = Vec::new();
        for k in 0..3u64 {
            let m = (n as f64 * math::poisson_pmf(k as usize, 0.5)).round() as usize;
            counts.extend(core::iter::repeat_n(k, m));
        }
        while counts.len() < n {
            counts.push(3);
        }
        let g = poisson_gof(&counts, 0.5, 0.01).unwrap();
        assert!(g.chisq.notes.starts_with("4 bins"), "{}", g.chisq.notes);
        assert!(g.pass(), "{g:?}");
    }

    #[test]
    fn median_ci_examples() {
        let sym: Vec<f64> = (-15..=15).map(|k| k as f64).collect();
        let ci = median_ci(&sym, 0.95).unwrap();
        assert!(ci.contains(0.0));
        assert!(ci.coverage >= 0.95);
        let constant = vec![3.25; 40];
        let ci = median_ci(&constant, 0.99).unwrap();
        assert_eq!((ci.lower, ci.upper), (3.25, 3.25));
        assert!(median_ci(&constant, 1.0).is_err());
        assert!(median_ci(&constant, 0.0).is_err());
        assert!(median_ci(&constant[..19], 0.9).is_err());
    }

    #[test]
    fn median_ci_matches_known_order_statistics() {
        // n = 20, 95%: P(Bin(20, 1/2) <= 5) = 0.0207 is the largest tail
        // under 0.025, so the interval is [x_(6), x_(15)].
        let xs: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let ci = median_ci(&xs, 0.95).unwrap();
        assert_eq!((ci.lower, ci.upper), (6.0, 15.0));
        assert!((ci.coverage - (1.0 - 2.0 * 0.020_694_732_666_015_625)).abs() < 1e-12);
    }

    #[test]
    fn median_helper() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
