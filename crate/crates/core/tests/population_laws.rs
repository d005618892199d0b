//! Monte Carlo checks of the population-size simulators against their
//! limit laws. Sample sizes follow the documented examples.

use brwx_core::math;
use brwx_core::population::{
    estimate_w, fit_stable_scale, heavy_sum_log_ratio, mass_concentration_stat, normalized_progeny_sum,
    simulate_exact_sizes, simulate_surrogate_sizes, theoretical_stable_scale, DEFAULT_SWITCH_LOG_SIZE,
};
use brwx_core::rng::{open01, stream, CALIBRATION_STREAM};
use brwx_core::stats::{ks_statistic, median};
use brwx_core::{distributions, ProgenyLaw};

#[test]
fn progeny_tail_frequencies_within_three_sigma() {
    let law = ProgenyLaw::pareto_floor(0.5).unwrap();
    let mut rng = stream(11, 0);
    let n = 1_000_000;
    let ks = [1u64, 2, 3, 10, 100, 10_000];
    let mut hits = [0u64; 6];
    for _ in 0..n {
        let z = law.offspring(open01(&mut rng));
        for (h, &k) in hits.iter_mut().zip(&ks) {
            *h += (z >= k) as u64;
        }
    }
    for (&h, &k) in hits.iter().zip(&ks) {
        let p = law.tail_progeny(k).unwrap();
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        let freq = h as f64 / n as f64;
        assert!((freq - p).abs() <= 3.0 * sd + 1e-12, "k={k}: {freq} vs {p}");
    }
}

#[test]
fn stable_seam_at_one_hundred_thousand() {
    let law = ProgenyLaw::pareto_floor(0.5).unwrap();
    let cal = fit_stable_scale(&law, 10_000, 4_000, &mut stream(5, CALIBRATION_STREAM)).unwrap();
    let theory = theoretical_stable_scale(0.5).unwrap();
    assert!((cal.value / theory - 1.0).abs() < 0.06, "{cal:?} vs {theory}");

    let mut rng = stream(5, 0);
    let mut sums: Vec<f64> = (0..8_000)
        .map(|_| normalized_progeny_sum(&law, 100_000, &mut rng))
        .collect();
    sums.sort_by(f64::total_cmp);
    // Standard 1/2-stable law is Lévy: P(S <= x) = erfc(1 / (2 sqrt x)).
    let d = ks_statistic(&sums, |x| math::erfc(1.0 / (2.0 * (x / cal.value).sqrt()))).unwrap();
    assert!(d < 0.02, "KS {d}");
}

/// At `α = 0.8` each generation adds roughly `α^{n+1} log(c S_α)` to
/// `α^n log Z_n`, so the normalized sizes are still visibly drifting at
/// `n = 4..6`. The check is that the drift shrinks from one generation to the
/// next and that the `n = 6` value exceeds the `n = 4` one.
#[test]
fn exact_path_normalization_settles_across_generations() {
    let law = ProgenyLaw::pareto_floor(0.8).unwrap();
    let alpha: f64 = 0.8;
    let mut w = [Vec::new(), Vec::new(), Vec::new()];
    for rep in 0..1_000 {
        let p = simulate_exact_sizes(&law, 6, 10_000_000, &mut stream(21, rep)).unwrap();
        if p.is_truncated() {
            continue;
        }
        for (j, n) in (4..=6).enumerate() {
            w[j].push(alpha.powi(n as i32) * p.log_sizes[n]);
        }
    }
    assert!(w[0].len() > 500, "only {} untruncated paths", w[0].len());
    let m: Vec<f64> = w.iter().map(|v| median(v).unwrap()).collect();
    assert!(m[0] < m[1] && m[1] < m[2], "{m:?}");
    assert!(m[2] - m[1] < m[1] - m[0], "{m:?}");
}

struct SurrogateRun {
    w: Vec<Vec<f64>>,
}

fn surrogate_runs(alpha: f64, reps: u64, seed: u64) -> Vec<brwx_core::population::PopulationPath> {
    let law = ProgenyLaw::pareto_floor(alpha).unwrap();
    let cal = fit_stable_scale(&law, 10_000, 2_000, &mut stream(seed, CALIBRATION_STREAM)).unwrap();
    (0..reps)
        .map(|rep| {
            simulate_surrogate_sizes(&law, 25, DEFAULT_SWITCH_LOG_SIZE, cal.value, &mut stream(seed, rep)).unwrap()
        })
        .collect()
}

#[test]
fn surrogate_w_converges() {
    let paths = surrogate_runs(0.5, 1_000, 31);
    let run = SurrogateRun {
        w: paths.iter().map(brwx_core::population::w_sequence).collect(),
    };
    let med_inc = |i: usize| median(&run.w.iter().map(|s| (s[i + 1] - s[i]).abs()).collect::<Vec<_>>()).unwrap();
    let incs: Vec<f64> = (0..25).map(med_inc).collect();
    // Medians shrink geometrically once the stable phase takes over.
    for i in 12..24 {
        assert!(incs[i + 1] < incs[i], "increment medians {incs:?}");
    }
    let w_med = median(&paths.iter().map(|p| estimate_w(p).value).collect::<Vec<_>>()).unwrap();
    assert!(incs[20] < 0.05 * w_med, "|Δ20| {} vs W {w_med}", incs[20]);

    let close = run
        .w
        .iter()
        .filter(|s| (s[25] - s[24]).abs() < 0.05 * s[25])
        .count();
    assert!(close >= 900, "{close} of 1000");
}

#[test]
fn mass_concentrates_in_last_generation() {
    for (alpha, s, lo, hi, seed) in [(0.5, 1.0, 0.45, 0.55, 41), (0.3, 2.0, 0.54, 0.66, 42)] {
        let paths = surrogate_runs(alpha, 500, seed);
        let stats: Vec<f64> = paths
            .iter()
            .map(|p| mass_concentration_stat(p, s).unwrap())
            .collect();
        let m = median(&stats).unwrap();
        assert!((lo..=hi).contains(&m), "alpha={alpha} s={s}: {m}");
    }
}

/// Median of `log(c S_α) / log n` over many stable draws: the finite-`n`
/// offset of `log Σ L_i / log n` from `1/α`.
fn heavy_sum_offset(alpha: f64, n: f64) -> f64 {
    let mut rng = stream(77, CALIBRATION_STREAM);
    let draws: Vec<f64> = (0..200_000)
        .map(|_| distributions::log_positive_stable(alpha, open01(&mut rng), open01(&mut rng)).unwrap())
        .collect();
    (theoretical_stable_scale(alpha).unwrap().ln() + median(&draws).unwrap()) / n.ln()
}

#[test]
fn heavy_sums_grow_like_n_to_one_over_alpha() {
    let n = 1_000_000u64;
    for (alpha, seed) in [(0.5, 51), (0.8, 52)] {
        let law = ProgenyLaw::pareto_floor(alpha).unwrap();
        let ratios: Vec<f64> = (0..100)
            .map(|rep| heavy_sum_log_ratio(&law, n, &mut stream(seed, rep)).unwrap())
            .collect();
        let m = median(&ratios).unwrap();
        let predicted = 1.0 / alpha + heavy_sum_offset(alpha, n as f64);
        assert!((m - predicted).abs() < 0.05, "alpha={alpha}: {m} vs {predicted}");
        if alpha == 0.5 {
            assert!((1.8..=2.2).contains(&m), "{m}");
        }
    }
}
