//! Progeny and displacement laws.
//!
//! All samplers are pure functions of their parameters and the uniforms they
//! are handed; no law holds random state.

use core::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::math::{self, exp, expm1, floor, log, log1p, pow, sin};

/// Constant `c` of the envelope exponent `γ(x) = c / (1 + log x)`.
pub const DAVIES_GAMMA_C: f64 = 1.0;
/// Envelope lower end point `x_0`; the bounds are checked for `x >= x_0`.
pub const DAVIES_X0: f64 = 2.0;

/// Envelope exponent `γ(x) = c / (1 + log x)`.
///
/// Non-increasing, `x^γ(x)` non-decreasing, and `∫ γ(e^{e^t}) dt < ∞`, so it
/// is an admissible envelope for any moment index in `(0, 1)`.
pub fn davies_gamma(x: f64) -> f64 {
    DAVIES_GAMMA_C / (1.0 + log(x))
}

/// Offspring distribution of the Galton-Watson tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProgenyLaw {
    /// `Z = floor(U^{-1/α})`, so `P(Z >= k) = k^{-α}` for integer `k >= 1`.
    /// Never zero: the tree survives almost surely.
    ParetoFloor { alpha: f64 },
    /// Degenerate law `P(Z = count) = 1`. A test double; `alpha` is only the
    /// nominal index used when scaling `log Z_n`.
    Fixed { count: u64, alpha: f64 },
}

impl ProgenyLaw {
    pub fn pareto_floor(alpha: f64) -> Result<Self> {
        check_moment_index(alpha)?;
        Ok(ProgenyLaw::ParetoFloor { alpha })
    }

    pub fn fixed(count: u64, alpha: f64) -> Result<Self> {
        if count == 0 {
            return Err(domain("fixed progeny count", 0.0));
        }
        check_moment_index(alpha)?;
        Ok(ProgenyLaw::Fixed { count, alpha })
    }

    /// Moment index `α`.
    pub fn alpha(&self) -> f64 {
        match *self {
            ProgenyLaw::ParetoFloor { alpha } | ProgenyLaw::Fixed { alpha, .. } => alpha,
        }
    }

    /// Inverse-transform offspring count for `u` in `(0, 1)`, saturating at
    /// `u64::MAX`.
    pub fn sample_progeny(&self, u: f64) -> Result<u64> {
        check_open_unit(u)?;
        Ok(self.offspring(u))
    }

    /// Offspring count without argument validation (`u` must lie in `(0, 1)`).
    #[inline]
    pub fn offspring(&self, u: f64) -> u64 {
        match *self {
            // `as` saturates for values past u64::MAX.
            ProgenyLaw::ParetoFloor { .. } => self.offspring_f64(u) as u64,
            ProgenyLaw::Fixed { count, .. } => count,
        }
    }

    /// Offspring count as a float; exact below 2^53 and never saturates, for
    /// sums where single draws can exceed `u64::MAX`.
    #[inline]
    pub fn offspring_f64(&self, u: f64) -> f64 {
        match *self {
            ProgenyLaw::ParetoFloor { alpha } => {
                if alpha == 0.5 {
                    floor(1.0 / (u * u))
                } else {
                    floor(pow(u, -1.0 / alpha))
                }
            }
            ProgenyLaw::Fixed { count, .. } => count as f64,
        }
    }

    /// `P(Z >= k)` for integer `k >= 1`.
    pub fn tail_progeny(&self, k: u64) -> Result<f64> {
        if k < 1 {
            return Err(domain("progeny tail argument", k as f64));
        }
        Ok(match *self {
            ProgenyLaw::ParetoFloor { alpha } => pow(k as f64, -alpha),
            ProgenyLaw::Fixed { count, .. } => {
                if k <= count {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// Survival function `Ḡ(x) = P(Z > x)` for real `x`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 1.0 {
            return 1.0;
        }
        // P(Z > x) = P(Z >= floor(x) + 1).
        let next = floor(x) + 1.0;
        match *self {
            ProgenyLaw::ParetoFloor { alpha } => pow(next, -alpha),
            ProgenyLaw::Fixed { count, .. } => {
                if next <= count as f64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether `x^{-γ(x)} <= x^α Ḡ(x) <= x^{γ(x)}` holds at `x >= x_0`.
    pub fn davies_envelope_holds(&self, x: f64) -> bool {
        if !(x >= DAVIES_X0) {
            return false;
        }
        let sf = self.survival(x);
        if sf <= 0.0 {
            return false;
        }
        // Compare on the log scale: -γ log x <= α log x + log Ḡ(x) <= γ log x.
        let lx = log(x);
        let g = davies_gamma(x) * lx;
        let mid = self.alpha() * lx + log(sf);
        -g <= mid && mid <= g
    }
}

fn check_moment_index(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("moment index alpha", alpha))
    }
}

fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(domain("uniform variate", u))
    }
}

/// Displacement distribution `F` of the branching random walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisplacementLaw {
    /// `1 - F(x) = x^{-β}` on `x >= 1`.
    Pareto { beta: f64 },
    /// `K(x) = c x^r` on `x >= 0`.
    Weibull { r: f64, c: f64 },
    /// Standard normal; `K(x) ~ x²/2`.
    Gaussian,
    /// `K(x) = rate * x` on `x >= 0`.
    Exponential { rate: f64 },
}

impl DisplacementLaw {
    pub fn pareto(beta: f64) -> Result<Self> {
        positive("tail index beta", beta)?;
        Ok(DisplacementLaw::Pareto { beta })
    }

    pub fn weibull(r: f64, c: f64) -> Result<Self> {
        positive("hazard index r", r)?;
        positive("hazard scale c", c)?;
        Ok(DisplacementLaw::Weibull { r, c })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("exponential rate", rate)?;
        Ok(DisplacementLaw::Exponential { rate })
    }

    /// Regular-variation index `β` of the tail, for regularly varying laws.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            DisplacementLaw::Pareto { beta } => Some(beta),
            _ => None,
        }
    }

    /// Index `r` with `K ∈ RV_r`, for the lighter-tailed laws.
    pub fn hazard_index(&self) -> Option<f64> {
        match *self {
            DisplacementLaw::Pareto { .. } => None,
            DisplacementLaw::Weibull { r, .. } => Some(r),
            DisplacementLaw::Gaussian => Some(2.0),
            DisplacementLaw::Exponential { .. } => Some(1.0),
        }
    }

    pub fn is_regularly_varying(&self) -> bool {
        self.tail_index().is_some()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DisplacementLaw::Pareto { beta } => {
                if x < 1.0 {
                    0.0
                } else {
                    -expm1(-beta * log(x))
                }
            }
            DisplacementLaw::Weibull { r, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -expm1(-c * pow(x, r))
                }
            }
            DisplacementLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -expm1(-rate * x)
                }
            }
            DisplacementLaw::Gaussian => math::normal_cdf(x),
        }
    }

    /// `1 - F(x)`.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            DisplacementLaw::Pareto { beta } => {
                if x < 1.0 {
                    1.0
                } else {
                    pow(x, -beta)
                }
            }
            DisplacementLaw::Gaussian => math::normal_tail(x),
            _ => exp(-self.hazard_unchecked(x)),
        }
    }

    fn hazard_unchecked(&self, x: f64) -> f64 {
        match *self {
            DisplacementLaw::Pareto { beta } => {
                if x <= 1.0 {
                    0.0
                } else {
                    beta * log(x)
                }
            }
            DisplacementLaw::Weibull { r, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    c * pow(x, r)
                }
            }
            DisplacementLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    rate * x
                }
            }
            DisplacementLaw::Gaussian => -math::normal_log_tail(x),
        }
    }

    /// Hazard `K(x) = -log(1 - F(x))`.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(domain("hazard argument", x));
        }
        let k = self.hazard_unchecked(x);
        if k.is_finite() {
            Ok(k)
        } else {
            Err(Error::Overflow { what: "hazard" })
        }
    }

    /// Left-continuous inverse `L(u) = inf{x : K(x) > u}` for `u >= 0`.
    ///
    /// For the Gaussian law `L(0) = -∞`, which is reported as a domain error.
    pub fn inverse_hazard(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) || u.is_infinite() {
            return Err(domain("inverse hazard argument", u));
        }
        let x = match *self {
            DisplacementLaw::Pareto { beta } => exp(u / beta),
            DisplacementLaw::Weibull { r, c } => pow(u / c, 1.0 / r),
            DisplacementLaw::Exponential { rate } => u / rate,
            DisplacementLaw::Gaussian => {
                if u == 0.0 {
                    return Err(domain("inverse hazard argument (Gaussian L(0) = -inf)", u));
                }
                math::normal_inverse_log_tail(u)
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Overflow {
                what: "inverse hazard",
            })
        }
    }

    /// Left-continuous quantile `F^←(p)` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain("probability", p));
        }
        let mut x = match *self {
            DisplacementLaw::Pareto { beta } => pow(1.0 - p, -1.0 / beta),
            DisplacementLaw::Weibull { r, c } => pow(-log1p(-p) / c, 1.0 / r),
            DisplacementLaw::Exponential { rate } => -log1p(-p) / rate,
            DisplacementLaw::Gaussian => math::normal_quantile(p),
        };
        // Rounding may land one ulp short of the generalized inverse.
        for _ in 0..64 {
            if self.cdf(x) >= p {
                break;
            }
            x = x.next_up();
        }
        Ok(x)
    }

    /// Upper-tail quantile `F^←(1 - q)` computed without forming `1 - q`, so
    /// it keeps full precision for tiny `q`. Requires `q` in `(0, 1)`.
    #[inline]
    pub fn tail_quantile(&self, q: f64) -> f64 {
        match *self {
            DisplacementLaw::Pareto { beta } => {
                if beta == 1.0 {
                    1.0 / q
                } else {
                    pow(q, -1.0 / beta)
                }
            }
            DisplacementLaw::Weibull { r, c } => pow(-log(q) / c, 1.0 / r),
            DisplacementLaw::Exponential { rate } => -log(q) / rate,
            DisplacementLaw::Gaussian => math::normal_tail_quantile(q),
        }
    }

    /// One displacement from a uniform `u` in `(0, 1)`: `F^←(1 - u)`, the
    /// inverse transform applied to the reflected uniform.
    #[inline]
    pub fn sample(&self, u: f64) -> f64 {
        self.tail_quantile(u)
    }

    /// Scaling `C = F^←(1 - 1/z)` for a population of size `z >= 2`.
    ///
    /// Uses `z^{1/β}` directly for the Pareto law.
    pub fn scale_for_population(&self, z: f64) -> Result<f64> {
        if !(z >= 2.0) {
            return Err(Error::Undefined {
                what: "scaling C_n needs z_n >= 2",
            });
        }
        Ok(match *self {
            DisplacementLaw::Pareto { beta } => pow(z, 1.0 / beta),
            _ => self.tail_quantile(1.0 / z),
        })
    }
}

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(what, v))
    }
}

/// `log S` for one draw `S` of the standard positive `α`-stable law with
/// Laplace transform `E[e^{-λS}] = e^{-λ^α}`, by Kanter's representation.
///
/// `u1` picks the angle `U = π u1`, `u2` the exponential `E = -log u2`.
pub fn log_positive_stable(alpha: f64, u1: f64, u2: f64) -> Result<f64> {
    check_moment_index(alpha)?;
    check_open_unit(u1)?;
    check_open_unit(u2)?;
    let angle = PI * u1;
    let e = -log(u2);
    let one_minus = 1.0 - alpha;
    let log_a = (alpha / one_minus) * log(sin(alpha * angle)) + log(sin(one_minus * angle))
        - log(sin(angle)) / one_minus;
    Ok((one_minus / alpha) * (log_a - log(e)))
}

/// One draw of the standard positive `α`-stable law (see
/// [`log_positive_stable`]).
pub fn sample_positive_stable(alpha: f64, u1: f64, u2: f64) -> Result<f64> {
    log_positive_stable(alpha, u1, u2).map(exp)
}
