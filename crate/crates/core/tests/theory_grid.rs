//! Closed forms, recursions and the variational oracle over parameter grids.

use brwx_core::theory::{
    alpha_k_closed, alpha_k_recursive, f_bruteforce_oracle, f_closed, f_recursive, frechet_kth_cdf,
    light_tail_constant,
};
use proptest::prelude::*;

const ALPHAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const RS: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

#[test]
fn f_closed_matches_recursion() {
    for alpha in ALPHAS {
        for r in RS {
            for k in 0..=50 {
                let (c, rec) = (f_closed(alpha, r, k).unwrap(), f_recursive(alpha, r, k).unwrap());
                assert!((c - rec).abs() <= 1e-12, "alpha={alpha} r={r} k={k}: {c} vs {rec}");
            }
        }
    }
}

#[test]
fn f_sequence_increases_to_the_light_constant() {
    for alpha in ALPHAS {
        for r in RS {
            let mut last = 0.0;
            for k in 0..=50 {
                let f = f_closed(alpha, r, k).unwrap();
                assert!(f >= last);
                last = f;
            }
            // f_200^{r/(r-1)} misses the geometric series by q^201/(1-q),
            // q = α^{1/(r-1)}; that remainder (times the chain-rule factor
            // below one) bounds the gap, and drops under 1e-10 once q <= 0.88.
            let limit = light_tail_constant(alpha, r).unwrap();
            let q = alpha.powf(1.0 / (r - 1.0));
            let remainder = q.powi(201) / (1.0 - q);
            let gap = (f_closed(alpha, r, 200).unwrap() - limit).abs();
            assert!(gap <= remainder + 1e-13, "alpha={alpha} r={r}: {gap} vs {remainder}");
            if q <= 0.88 {
                assert!(gap < 1e-10, "alpha={alpha} r={r}: {gap}");
            }
        }
    }
}

#[test]
fn alpha_k_closed_matches_recursion() {
    // α_k grows like α^{-k/r}; compare relative to its size.
    for alpha in ALPHAS {
        for r in RS.into_iter().chain([0.5, 1.0]) {
            for k in 1..=50 {
                let c = alpha_k_closed(alpha, r, k).unwrap();
                let rec = alpha_k_recursive(alpha, r, k).unwrap();
                assert!((c - rec).abs() <= 1e-12 * c.max(1.0), "alpha={alpha} r={r} k={k}");
            }
        }
    }
    assert!(alpha_k_closed(0.5, 2.0, 0).is_err());
    assert!(alpha_k_recursive(0.5, 2.0, 0).is_err());
}

/// The grid keeps every `δ_i` in `[s, 1 - s]`. When an optimal `δ_i` sits
/// below `s` (small `α`, `r` near 1) each level then costs a factor
/// `(1 - s)^{1/r}`, so the grid optimum can trail by up to about
/// `(k + 1) s / r` rather than `2 s`.
#[test]
fn oracle_within_grid_resolution() {
    let step = 1e-3;
    for alpha in ALPHAS {
        for r in RS {
            for k in 0..=6 {
                let exact = f_closed(alpha, r, k).unwrap();
                let grid = f_bruteforce_oracle(alpha, r, k, step).unwrap();
                assert!(grid <= exact + 1e-12, "grid optimum above the supremum");
                let floor = exact * (1.0 - step).powf((k + 1) as f64 / r);
                assert!(grid >= floor - 1e-12, "alpha={alpha} r={r} k={k}: {grid} vs {exact}");
            }
        }
    }
}

proptest! {
    #[test]
    fn frechet_cdf_is_monotone_in_x_and_k(beta in 0.2f64..4.0, k in 1usize..8, a in 0.01f64..50.0, b in 0.01f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let f = |x| frechet_kth_cdf(beta, k, x).unwrap();
        prop_assert!(f(lo) <= f(hi) + 1e-15);
        prop_assert!((0.0..=1.0).contains(&f(lo)));
        prop_assert!(frechet_kth_cdf(beta, k + 1, lo).unwrap() >= f(lo));
    }
}
