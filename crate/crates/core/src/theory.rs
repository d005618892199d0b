//! Limit constants for the extremes, and the finite-depth sequences that
//! converge to them.
//!
//! Throughout, `r = 1` is handled by the `r <= 1` branch so `1/(r - 1)` is
//! never evaluated at the singularity.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::math::{exp, lgamma, log, pow};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("moment index alpha", alpha))
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(domain("hazard index r", r))
    }
}

/// Limit of `M_n / L(log Z_n)`: `(1 - α^{1/(r-1)})^{1/r - 1}` for `r > 1`,
/// and `1` for `0 < r <= 1`.
pub fn light_tail_constant(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    if r <= 1.0 {
        return Ok(1.0);
    }
    Ok(pow(1.0 - pow(alpha, 1.0 / (r - 1.0)), 1.0 / r - 1.0))
}

/// Lower-bound constant `f_k` from the closed sum
/// `f_k^{r/(r-1)} = Σ_{i=0}^k α^{i/(r-1)}` (`r > 1`); `f_k = 1` for `r <= 1`.
pub fn f_closed(alpha: f64, r: f64, k: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    if r <= 1.0 {
        return Ok(1.0);
    }
    let q = 1.0 / (r - 1.0);
    let sum: f64 = (0..=k).map(|i| pow(alpha, i as f64 * q)).sum();
    Ok(pow(sum, 1.0 - 1.0 / r))
}

/// `f_k` by the one-step recursion, starting from `f_0 = 1`:
/// `f_k = (α^{k/(r-1)} + f_{k-1}^{r/(r-1)})^{1-1/r}` for `r > 1`,
/// `f_k = max(α^{k/r}, f_{k-1})` for `r <= 1`.
pub fn f_recursive(alpha: f64, r: f64, k: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    let mut f = 1.0_f64;
    for j in 1..=k {
        let j = j as f64;
        f = if r > 1.0 {
            pow(pow(alpha, j / (r - 1.0)) + pow(f, r / (r - 1.0)), 1.0 - 1.0 / r)
        } else {
            f.max(pow(alpha, j / r))
        };
    }
    Ok(f)
}

/// Grid maximum of
/// `h_k(δ_0..δ_k) = Σ_{i=0}^k (α^i δ_i Π_{q=i+1}^k (1 - δ_q))^{1/r}`
/// with every `δ_i` on `{s, 2s, ..., 1 - s}`.
///
/// Uses the factorization `h_k = (α^k δ_k)^{1/r} + (1 - δ_k)^{1/r} h_{k-1}`:
/// the optimum over `δ_0..δ_{k-1}` does not depend on `δ_k`, so each level
/// is a one-dimensional grid search over the previous level's optimum. Cost
/// is `O(k / s)`.
pub fn f_bruteforce_oracle(alpha: f64, r: f64, k: usize, grid_step: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(domain("grid step", grid_step));
    }
    let points = libm::round(1.0 / grid_step) as usize;
    let grid: Vec<f64> = (1..points)
        .map(|j| j as f64 * grid_step)
        .filter(|&d| d < 1.0)
        .collect();
    let inv_r = 1.0 / r;
    let mut best = grid
        .iter()
        .map(|&d| pow(d, inv_r))
        .fold(f64::NEG_INFINITY, f64::max);
    for level in 1..=k {
        let weight = pow(alpha, level as f64 * inv_r);
        let prev = best;
        best = grid
            .iter()
            .map(|&d| weight * pow(d, inv_r) + pow(1.0 - d, inv_r) * prev)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(best)
}

/// Upper-bound constant `α_k` in closed form:
/// `(Σ_{i=1}^k α^{-i/(r-1)})^{1-1/r}` for `r > 1`, `α^{-k/r}` for `r <= 1`.
pub fn alpha_k_closed(alpha: f64, r: f64, k: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    if k < 1 {
        return Err(domain("alpha_k depth", 0.0));
    }
    if r <= 1.0 {
        return Ok(pow(alpha, -(k as f64) / r));
    }
    let q = 1.0 / (r - 1.0);
    let sum: f64 = (1..=k).map(|i| pow(alpha, -(i as f64) * q)).sum();
    Ok(pow(sum, 1.0 - 1.0 / r))
}

/// `α_k` from `α_1 = α^{-1/r}` and
/// `α_{k+1} = α^{-1/r} (α_k^{r/(r-1)} + 1)^{(r-1)/r}` (`r > 1`), or
/// `α_{k+1} = α^{-1/r} α_k` (`r <= 1`).
pub fn alpha_k_recursive(alpha: f64, r: f64, k: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    if k < 1 {
        return Err(domain("alpha_k depth", 0.0));
    }
    let lead = pow(alpha, -1.0 / r);
    let mut a = lead;
    for _ in 1..k {
        a = if r > 1.0 {
            lead * pow(pow(a, r / (r - 1.0)) + 1.0, (r - 1.0) / r)
        } else {
            lead * a
        };
    }
    Ok(a)
}

/// Limit of `M_n / L(α^{-n})`:
/// `[(1 - α^{1/(r-1)})_+^{1/r - 1} ∨ 1] w^{1/r}`.
pub fn deterministic_limit_factor(alpha: f64, r: f64, w: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    if !(w >= 0.0) {
        return Err(domain("limit variable W", w));
    }
    let constant = if r == 1.0 {
        1.0
    } else {
        let base = (1.0 - pow(alpha, 1.0 / (r - 1.0))).max(0.0);
        pow(base, 1.0 / r - 1.0).max(1.0)
    };
    Ok(constant * pow(w, 1.0 / r))
}

/// `P(Poisson(x^{-β}) <= k - 1) = e^{-x^{-β}} Σ_{j<k} x^{-βj} / j!`, the
/// limiting CDF of the `k`-th largest scaled position.
pub fn frechet_kth_cdf(beta: f64, k: usize, x: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(domain("tail index beta", beta));
    }
    if k < 1 {
        return Err(domain("order k", 0.0));
    }
    if !(x > 0.0) {
        return Err(domain("Frechet argument", x));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let t = pow(x, -beta);
    if t == 0.0 {
        return Ok(1.0);
    }
    let lt = log(t);
    let s: f64 = (0..k)
        .map(|j| exp(-t + j as f64 * lt - lgamma(j as f64 + 1.0)))
        .sum();
    Ok(s.min(1.0))
}

/// Log-log cloud speed `-log α` for regularly varying displacements.
pub fn cloud_speed_heavy(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-log(alpha))
}

/// Log-scale cloud speed `-(log α) / r` for lighter-tailed displacements.
pub fn cloud_speed_light(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_r(r)?;
    Ok(-log(alpha) / r)
}

/// Partial geometric sum of a regularly varying function and its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricSum {
    /// `(1 / h(a^{-n})) Σ_{i=1}^n h(a^{-i})`.
    pub ratio: f64,
    /// `1 / (1 - a^ρ)`.
    pub limit: f64,
}

/// Evaluate `(1 / h(a^{-n})) Σ_{i=1}^n h(a^{-i})` for `h ∈ RV_ρ`.
pub fn regvar_geometric_sum<H: Fn(f64) -> f64>(
    rho: f64,
    a: f64,
    n: usize,
    h: H,
) -> Result<GeometricSum> {
    if !(rho > 0.0) {
        return Err(domain("regular variation index rho", rho));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(domain("geometric ratio a", a));
    }
    if n < 1 {
        return Err(domain("number of terms", 0.0));
    }
    let denom = h(pow(a, -(n as f64)));
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Undefined {
            what: "h(a^{-n}) must be finite and non-zero",
        });
    }
    // Sum from the largest term down, each already divided by the leader.
    let ratio: f64 = (1..=n).rev().map(|i| h(pow(a, -(i as f64))) / denom).sum();
    Ok(GeometricSum {
        ratio,
        limit: 1.0 / (1.0 - pow(a, rho)),
    })
}

/// Every constant tied to one `(α, r)` pair, to depth `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitConstants {
    pub alpha: f64,
    pub r: f64,
    pub light_constant: f64,
    /// `f_0, ..., f_k`.
    pub f_sequence: Vec<f64>,
    /// `α_1, ..., α_k`.
    pub alpha_sequence: Vec<f64>,
    /// `-(log α) / r`.
    pub cloud_speed: f64,
}

impl LimitConstants {
    pub fn compute(alpha: f64, r: f64, k: usize) -> Result<Self> {
        let f_sequence = (0..=k)
            .map(|j| f_closed(alpha, r, j))
            .collect::<Result<Vec<_>>>()?;
        let alpha_sequence = (1..=k)
            .map(|j| alpha_k_closed(alpha, r, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(LimitConstants {
            alpha,
            r,
            light_constant: light_tail_constant(alpha, r)?,
            f_sequence,
            alpha_sequence,
            cloud_speed: cloud_speed_light(alpha, r)?,
        })
    }
}
