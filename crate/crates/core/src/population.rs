//! Galton-Watson population sizes: exact simulation, a log-space stable
//! surrogate for the double-exponential regime, and statistics of the path.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::distributions::{log_positive_stable, ProgenyLaw};
use crate::error::{domain, Error, Result};
use crate::math::{self, lgamma, log, pow};
use crate::rng::open01;

/// How a [`PopulationPath`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Every generation is an exact sum of progeny draws.
    Exact,
    /// Exact up to `switch_generation - 1`; generations from
    /// `switch_generation` on come from the stable recursion.
    Hybrid { switch_generation: usize },
}

/// Natural-log population sizes `log Z_0, ..., log Z_n` with `log Z_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationPath {
    pub log_sizes: Vec<f64>,
    pub mode: PathMode,
    pub alpha: f64,
    /// Generation whose size would have exceeded the cap; the path stops one
    /// generation earlier.
    pub truncated_at: Option<usize>,
}

impl PopulationPath {
    /// Last generation present in the path.
    pub fn generation(&self) -> usize {
        self.log_sizes.len() - 1
    }

    pub fn last_log_size(&self) -> f64 {
        self.log_sizes[self.generation()]
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_at.is_some()
    }
}

/// Sum of `count` progeny draws, or `None` as soon as it passes `cap`.
fn exact_generation<R: RngCore + ?Sized>(law: &ProgenyLaw, count: u64, cap: u64, rng: &mut R) -> Option<u64> {
    let mut total: u64 = 0;
    for _ in 0..count {
        total = total.saturating_add(law.offspring(open01(rng)));
        if total > cap {
            return None;
        }
    }
    Some(total)
}

/// Simulate `Z_0 = 1, Z_1, ..., Z_{n_max}` exactly, each `Z_{i+1}` the sum of
/// `Z_i` progeny draws. Stops at the first generation exceeding `cap`,
/// recording it in `truncated_at`.
pub fn simulate_exact_sizes<R: RngCore + ?Sized>(
    law: &ProgenyLaw,
    n_max: usize,
    cap: u64,
    rng: &mut R,
) -> Result<PopulationPath> {
    if n_max < 1 {
        return Err(domain("number of generations", n_max as f64));
    }
    if cap < 1 {
        return Err(domain("population cap", 0.0));
    }
    let mut log_sizes = Vec::with_capacity(n_max + 1);
    log_sizes.push(0.0);
    let mut z: u64 = 1;
    let mut truncated_at = None;
    for generation in 1..=n_max {
        match exact_generation(law, z, cap, rng) {
            Some(next) => {
                z = next;
                log_sizes.push(log(z as f64));
            }
            None => {
                truncated_at = Some(generation);
                break;
            }
        }
    }
    Ok(PopulationPath {
        log_sizes,
        mode: PathMode::Exact,
        alpha: law.alpha(),
        truncated_at,
    })
}

/// Smallest switch point accepted by [`simulate_surrogate_sizes`].
pub const MIN_SWITCH_LOG_SIZE: f64 = 9.210_340_371_976_184; // ln 1e4
/// Default switch point, `ln 1e6`.
pub const DEFAULT_SWITCH_LOG_SIZE: f64 = 13.815_510_557_964_274;
/// Largest switch point, `ln 2^32`, keeping the exact phase affordable.
pub const MAX_SWITCH_LOG_SIZE: f64 = 22.180_709_777_918_25;

/// Exact recursion while `log Z_n <= switch_log_size`, then
/// `log Z_{n+1} = log Z_n / α + log(scale · S_α)` with `S_α` standard
/// positive stable. Since every individual has at least one child the
/// surrogate step is clamped so the path never decreases.
///
/// `stable_scale` is the constant `c` in `N^{-1/α} Σ Z^{(i)} ⇒ c S_α`; see
/// [`fit_stable_scale`].
pub fn simulate_surrogate_sizes<R: RngCore + ?Sized>(
    law: &ProgenyLaw,
    n_max: usize,
    switch_log_size: f64,
    stable_scale: f64,
    rng: &mut R,
) -> Result<PopulationPath> {
    let alpha = law.alpha();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("moment index", alpha));
    }
    if n_max < 1 {
        return Err(domain("number of generations", n_max as f64));
    }
    if !(MIN_SWITCH_LOG_SIZE..=MAX_SWITCH_LOG_SIZE).contains(&switch_log_size) {
        return Err(domain("surrogate switch log-size", switch_log_size));
    }
    if !(stable_scale > 0.0 && stable_scale.is_finite()) {
        return Err(domain("stable scale", stable_scale));
    }
    let log_scale = log(stable_scale);
    let mut log_sizes = Vec::with_capacity(n_max + 1);
    log_sizes.push(0.0);
    let mut switch_generation = None;
    // Exact size while in the exact phase; below 2^53 after every exact step
    // that starts from at most 2^32 individuals with probability one.
    let mut z = 1.0_f64;
    for generation in 1..=n_max {
        let prev = log_sizes[generation - 1];
        let next = if prev <= switch_log_size {
            let mut total = 0.0;
            for _ in 0..z as u64 {
                total += law.offspring_f64(open01(rng));
            }
            z = total;
            log(total)
        } else {
            switch_generation.get_or_insert(generation);
            let s = log_positive_stable(alpha, open01(rng), open01(rng))?;
            (prev / alpha + log_scale + s).max(prev)
        };
        log_sizes.push(next);
    }
    let mode = match switch_generation {
        Some(g) => PathMode::Hybrid { switch_generation: g },
        None => PathMode::Exact,
    };
    Ok(PopulationPath {
        log_sizes,
        mode,
        alpha,
        truncated_at: None,
    })
}

/// `N^{-1/α} Σ_{i=1}^N Z^{(i)}` for one batch of `n_terms` progeny draws.
pub fn normalized_progeny_sum<R: RngCore + ?Sized>(law: &ProgenyLaw, n_terms: u64, rng: &mut R) -> f64 {
    let mut total = 0.0;
    for _ in 0..n_terms {
        total += law.offspring_f64(open01(rng));
    }
    math::exp(log(total) - log(n_terms as f64) / law.alpha())
}

/// Asymptotic value of the stable scale for a law with `P(Z > x) ~ x^{-α}`:
/// `Γ(1-α)^{1/α}`.
pub fn theoretical_stable_scale(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("moment index", alpha));
    }
    Ok(math::exp(lgamma(1.0 - alpha) / alpha))
}

/// A measured stable scale together with the sample sizes behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableCalibration {
    pub alpha: f64,
    pub value: f64,
    pub n_terms: u64,
    pub samples: usize,
}

/// Reference stable draws per normalized sum in [`fit_stable_scale`]; stable
/// draws cost two uniforms, sums cost `n_terms`.
const STABLE_DRAWS_PER_SUM: usize = 16;

/// Fit the stable scale by quantile matching: the mean over the deciles
/// `p = 0.1, ..., 0.9` of `log q_sum(p) - log q_stable(p)`, where `q_sum` are
/// the empirical quantiles of `samples` normalized sums of `n_terms` draws and
/// `q_stable` those of standard stable draws. Averaging over deciles cuts the
/// noise of a single median match roughly in half.
pub fn fit_stable_scale<R: RngCore + ?Sized>(
    law: &ProgenyLaw,
    n_terms: u64,
    samples: usize,
    rng: &mut R,
) -> Result<StableCalibration> {
    let alpha = law.alpha();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("moment index", alpha));
    }
    if n_terms < 1 {
        return Err(domain("calibration batch size", 0.0));
    }
    if samples < 10 {
        return Err(Error::InsufficientData { needed: 10, got: samples });
    }
    let mut sums: Vec<f64> = (0..samples)
        .map(|_| log(normalized_progeny_sum(law, n_terms, rng)))
        .collect();
    let mut stable = Vec::with_capacity(samples * STABLE_DRAWS_PER_SUM);
    for _ in 0..samples * STABLE_DRAWS_PER_SUM {
        stable.push(log_positive_stable(alpha, open01(rng), open01(rng))?);
    }
    sums.sort_by(f64::total_cmp);
    stable.sort_by(f64::total_cmp);
    let quantile = |v: &[f64], p: f64| v[((p * v.len() as f64) as usize).min(v.len() - 1)];
    let log_scale = (1..10)
        .map(|d| {
            let p = d as f64 / 10.0;
            quantile(&sums, p) - quantile(&stable, p)
        })
        .sum::<f64>()
        / 9.0;
    Ok(StableCalibration {
        alpha,
        value: math::exp(log_scale),
        n_terms,
        samples,
    })
}

/// Estimate of the limit `W = lim α^n log(Z_n + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WEstimate {
    pub value: f64,
    pub generation: usize,
    /// `|α^{i+1} log(Z_{i+1}+1) - α^i log(Z_i+1)|` for `i = 0..n`.
    pub increments: Vec<f64>,
}

/// `α^i log(Z_i + 1)` along the whole path.
pub fn w_sequence(path: &PopulationPath) -> Vec<f64> {
    path.log_sizes
        .iter()
        .enumerate()
        .map(|(i, &l)| pow(path.alpha, i as f64) * math::log1p_exp(l))
        .collect()
}

/// `α^n log(Z_n + 1)` at the last generation of `path`, with the Cauchy
/// increments of the sequence for convergence diagnostics.
pub fn estimate_w(path: &PopulationPath) -> WEstimate {
    let seq = w_sequence(path);
    let increments = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    WEstimate {
        value: seq[seq.len() - 1],
        generation: path.generation(),
        increments,
    }
}

/// `log(Σ_{i<n} Z_i^s) / log Z_n`, evaluated with log-sum-exp so that paths
/// with `log Z_i` in the tens of thousands stay finite.
pub fn mass_concentration_stat(path: &PopulationPath, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain("mass exponent", s));
    }
    let n = path.generation();
    if n < 1 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let last = path.log_sizes[n];
    if last == 0.0 {
        return Err(Error::Undefined { what: "log Z_n = 0" });
    }
    let terms: Vec<f64> = path.log_sizes[..n].iter().map(|&l| s * l).collect();
    Ok(math::log_sum_exp(&terms) / last)
}

/// `log(Σ_{i=1}^n L_i) / log n` for `n` i.i.d. progeny draws.
pub fn heavy_sum_log_ratio<R: RngCore + ?Sized>(law: &ProgenyLaw, n: u64, rng: &mut R) -> Result<f64> {
    if n < 2 {
        return Err(domain("heavy-sum length", n as f64));
    }
    let mut total = 0.0;
    for _ in 0..n {
        total += law.offspring_f64(open01(rng));
    }
    Ok(log(total) / log(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use alloc::vec;

    fn path(log_sizes: Vec<f64>, alpha: f64) -> PopulationPath {
        PopulationPath {
            log_sizes,
            mode: PathMode::Exact,
            alpha,
            truncated_at: None,
        }
    }

    #[test]
    fn degenerate_law_keeps_one_individual() {
        let law = ProgenyLaw::fixed(1, 0.5).unwrap();
        let p = simulate_exact_sizes(&law, 12, 10, &mut stream(1, 0)).unwrap();
        assert_eq!(p.log_sizes, vec![0.0; 13]);
        assert!(!p.is_truncated());
    }

    #[test]
    fn doubling_law_truncates_past_cap() {
        let law = ProgenyLaw::fixed(2, 0.5).unwrap();
        let p = simulate_exact_sizes(&law, 10, 100, &mut stream(1, 0)).unwrap();
        // 2^6 = 64 fits, 2^7 = 128 does not.
        assert_eq!(p.generation(), 6);
        assert_eq!(p.truncated_at, Some(7));
        assert!((p.last_log_size() - 6.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn exact_paths_are_reproducible_integer_and_monotone() {
        let law = ProgenyLaw::pareto_floor(0.8).unwrap();
        for rep in 0..50 {
            let a = simulate_exact_sizes(&law, 6, 1_000_000, &mut stream(9, rep)).unwrap();
            let b = simulate_exact_sizes(&law, 6, 1_000_000, &mut stream(9, rep)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.log_sizes[0], 0.0);
            for w in a.log_sizes.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for &l in &a.log_sizes {
                let z = l.exp();
                assert!((z - z.round()).abs() <= 1e-9 * z);
            }
        }
    }

    #[test]
    fn bad_arguments() {
        let law = ProgenyLaw::pareto_floor(0.5).unwrap();
        let mut rng = stream(0, 0);
        assert!(simulate_exact_sizes(&law, 0, 10, &mut rng).is_err());
        assert!(simulate_exact_sizes(&law, 3, 0, &mut rng).is_err());
        assert!(simulate_surrogate_sizes(&law, 5, 5.0, 1.0, &mut rng).is_err());
        assert!(heavy_sum_log_ratio(&law, 1, &mut rng).is_err());
        assert!(theoretical_stable_scale(1.0).is_err());
    }

    #[test]
    fn surrogate_switches_and_never_decreases() {
        let law = ProgenyLaw::pareto_floor(0.5).unwrap();
        let scale = theoretical_stable_scale(0.5).unwrap();
        for rep in 0..20 {
            let p = simulate_surrogate_sizes(&law, 25, DEFAULT_SWITCH_LOG_SIZE, scale, &mut stream(4, rep))
                .unwrap();
            assert_eq!(p.log_sizes.len(), 26);
            let PathMode::Hybrid { switch_generation } = p.mode else {
                panic!("path never switched: {:?}", p.log_sizes);
            };
            assert!(p.log_sizes[switch_generation - 1] > DEFAULT_SWITCH_LOG_SIZE);
            assert!(p.log_sizes[..switch_generation - 1]
                .iter()
                .all(|&l| l <= DEFAULT_SWITCH_LOG_SIZE));
            for w in p.log_sizes.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let again = simulate_surrogate_sizes(&law, 25, DEFAULT_SWITCH_LOG_SIZE, scale, &mut stream(4, rep))
                .unwrap();
            assert_eq!(p, again);
        }
    }

    #[test]
    fn w_of_constant_path() {
        let p = path(vec![0.0; 8], 0.5);
        let w = estimate_w(&p);
        assert_eq!(w.generation, 7);
        assert!((w.value - 0.5f64.powi(7) * core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(w.increments.len(), 7);
        assert!(w.value >= 0.0);
    }

    #[test]
    fn w_handles_huge_log_sizes() {
        let p = path(vec![0.0, 1e3, 1e5], 0.1);
        let w = estimate_w(&p);
        assert!((w.value - 0.01 * 1e5).abs() < 1e-9);
    }

    #[test]
    fn mass_concentration_convention_and_errors() {
        let p = path(vec![0.0, 1.0], 0.5);
        assert_eq!(mass_concentration_stat(&p, 1.0).unwrap(), 0.0);
        let flat = path(vec![0.0, 0.0, 0.0], 0.5);
        assert!(matches!(
            mass_concentration_stat(&flat, 1.0),
            Err(Error::Undefined { .. })
        ));
        assert!(mass_concentration_stat(&path(vec![0.0], 0.5), 1.0).is_err());
        assert!(mass_concentration_stat(&p, 0.0).is_err());
    }

    #[test]
    fn mass_concentration_matches_naive_sum() {
        let p = path(vec![0.0, 1.5, 4.0, 9.0, 20.0], 0.5);
        for s in [0.5, 1.0, 2.0] {
            let naive: f64 = p.log_sizes[..4].iter().map(|l| (s * l).exp()).sum::<f64>().ln() / 20.0;
            assert!((mass_concentration_stat(&p, s).unwrap() - naive).abs() < 1e-9);
        }
        let huge = path(vec![0.0, 3e4, 1e5], 0.3);
        let v = mass_concentration_stat(&huge, 2.0).unwrap();
        assert!(v.is_finite() && (v - 0.6).abs() < 1e-9);
    }

    #[test]
    fn heavy_sum_of_ones_is_exactly_one() {
        let law = ProgenyLaw::fixed(1, 0.5).unwrap();
        let v = heavy_sum_log_ratio(&law, 1000, &mut stream(0, 0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theoretical_scale_values() {
        // Γ(1/2)^2 = π.
        let c = theoretical_stable_scale(0.5).unwrap();
        assert!((c - core::f64::consts::PI).abs() < 1e-12);
    }
}
