//! Special functions and numerically careful helpers.
//!
//! Everything here is `no_std`; transcendental functions come from `libm`.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

pub use libm::{erfc, exp, expm1, floor, lgamma, log, log1p, pow, sin, sqrt};

/// `ln(sqrt(2 * pi))`.
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `log⁺ x = max(log x, 0)`, with `log⁺ x = 0` for every `x <= 1` (including
/// non-positive and NaN inputs).
#[inline]
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        log(x)
    } else {
        0.0
    }
}

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}

/// `log(sum(exp(x_i)))`, returning `-inf` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| exp(x - max)).sum();
    max + log(s)
}

/// `log(1 + exp(x))`.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + exp(-x)
    } else if x < -35.0 {
        exp(x)
    } else {
        log1p(exp(x))
    }
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x - LN_SQRT_2PI)
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate in the far tail.
#[inline]
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `log(1 - Φ(x))`, finite for every finite `x`.
///
/// Past `x = 35` the complementary error function is close to underflow, so
/// the asymptotic Mills-ratio series takes over; its truncation error there is
/// below `1e-12` relative.
pub fn normal_log_tail(x: f64) -> f64 {
    if x < 35.0 {
        log(normal_tail(x))
    } else {
        let z = 1.0 / (x * x);
        let series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z)));
        -0.5 * x * x - log(x) - LN_SQRT_2PI + log(series)
    }
}

const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam_lower(p: f64) -> f64 {
    let q = sqrt(-2.0 * log(p));
    let c = &ACKLAM_C;
    let d = &ACKLAM_D;
    (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
        / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
}

fn acklam(p: f64) -> f64 {
    const P_LOW: f64 = 0.024_25;
    if p < P_LOW {
        acklam_lower(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        let a = &ACKLAM_A;
        let b = &ACKLAM_B;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    } else {
        -acklam_lower(1.0 - p)
    }
}

/// Standard normal quantile for `p` in `(0, 1)`.
///
/// Rational initial guess refined by two Halley steps against `erfc`; the
/// result is accurate to roughly machine precision relative to `p`.
pub fn normal_quantile(p: f64) -> f64 {
    if p > 0.5 {
        return -normal_lower_quantile(1.0 - p);
    }
    normal_lower_quantile(p)
}

/// Quantile for `p <= 0.5`, where `p` carries full relative precision.
fn normal_lower_quantile(p: f64) -> f64 {
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * sqrt(2.0 * PI) * exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Inverse of the standard normal upper tail: the `x` with `1 - Φ(x) = q`.
pub fn normal_tail_quantile(q: f64) -> f64 {
    if q <= 0.5 {
        -normal_lower_quantile(q)
    } else {
        normal_lower_quantile(1.0 - q)
    }
}

/// Solve `log(1 - Φ(x)) = -u` for `u > 0` to an absolute tolerance of 1e-10.
///
/// Safeguarded Newton iteration; `log(1 - Φ)` is concave and strictly
/// decreasing so the bracket always shrinks.
pub fn normal_inverse_log_tail(u: f64) -> f64 {
    debug_assert!(u > 0.0);
    let target = -u;
    let mut x = if u < 700.0 {
        normal_tail_quantile(exp(-u))
    } else {
        sqrt(2.0 * u - log(4.0 * PI * u))
    };
    // Bracket: g(lo) > 0 > g(hi) for g(x) = log_tail(x) - target.
    let mut lo = -40.0_f64;
    let mut hi = sqrt(2.0 * u) + 1.0;
    if !(lo..=hi).contains(&x) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let lt = normal_log_tail(x);
        let g = lt - target;
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx log(1 - Φ(x)) = -φ(x) / (1 - Φ(x)).
        let slope = -exp(-0.5 * x * x - LN_SQRT_2PI - lt);
        let mut next = x - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step < 1e-13 || hi - lo < 1e-13 {
            break;
        }
    }
    x
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..1000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * exp(-x + a * log(x) - lgamma(a))
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    exp(-x + a * log(x) - lgamma(a)) * h
}

/// Survival function of the chi-square distribution with `df` degrees of
/// freedom.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * df as f64, 0.5 * x)
}

/// Upper `level` critical value of the chi-square law: the `x` with
/// `P(χ² > x) = level`.
pub fn chi_square_critical(level: f64, df: usize) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while chi_square_sf(hi, df) > level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_sf(mid, df) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `log P(Bin(n, p) = k)`.
pub fn binomial_log_pmf(n: usize, k: usize, p: f64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    lgamma(nf + 1.0) - lgamma(kf + 1.0) - lgamma(nf - kf + 1.0)
        + kf * log(p)
        + (nf - kf) * log1p(-p)
}

/// `P(Poisson(mean) = k)`.
pub fn poisson_pmf(k: usize, mean: f64) -> f64 {
    let kf = k as f64;
    exp(-mean + kf * log(mean) - lgamma(kf + 1.0))
}
