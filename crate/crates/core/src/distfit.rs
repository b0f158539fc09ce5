//! Moment-matched approximations of `p(I | n)`.
//!
//! The Beta family is fitted on `[0, I_max]` by linear rescaling, the Gamma
//! family on `[0, inf)` by shape/rate, and the Gaussian on the whole line.
//! Regularized incomplete Beta/Gamma functions and `erfc` come from `statrs`;
//! densities use [`crate::specfun::ln_gamma`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc, gamma::gamma_lr};

use crate::error::{MiError, Result};
use crate::specfun::ln_gamma_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Gamma,
    Beta,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Gamma, Family::Beta];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Family::Gaussian => "gaussian",
            Family::Gamma => "gamma",
            Family::Beta => "beta",
        })
    }
}

impl FromStr for Family {
    type Err = MiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "gamma" => Ok(Family::Gamma),
            "beta" => Ok(Family::Beta),
            other => Err(MiError::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

/// A fitted two-parameter distribution.
///
/// `params` holds `(mean, sd)` for the Gaussian, `(shape, rate)` for the
/// Gamma and `(alpha, beta)` for the Beta on `[0, scale]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedDist {
    pub family: Family,
    pub params: (f64, f64),
    /// Upper end of the Beta support; `I_max` for the other families too,
    /// kept for reference.
    pub scale: f64,
    pub source_mean: f64,
    pub source_variance: f64,
}

/// Matches the first two moments.
pub fn fit(mean: f64, variance: f64, i_max: f64, family: Family) -> Result<FittedDist> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(MiError::InfeasibleFit(format!(
            "variance must be positive, got {variance}"
        )));
    }
    if !mean.is_finite() {
        return Err(MiError::InfeasibleFit("mean is not finite".into()));
    }
    let params = match family {
        Family::Gaussian => (mean, variance.sqrt()),
        Family::Gamma => {
            if !(mean > 0.0) {
                return Err(MiError::InfeasibleFit(format!(
                    "gamma fit needs a positive mean, got {mean}"
                )));
            }
            (mean * mean / variance, mean / variance)
        }
        Family::Beta => {
            if !(i_max > 0.0) || !(mean > 0.0 && mean < i_max) {
                return Err(MiError::InfeasibleFit(format!(
                    "beta fit needs 0 < mean < I_max, got mean {mean}, I_max {i_max}; try the gamma family"
                )));
            }
            let m = mean / i_max;
            let v = variance / (i_max * i_max);
            let common = m * (1.0 - m) / v - 1.0;
            if !(common > 0.0) {
                return Err(MiError::InfeasibleFit(format!(
                    "variance {variance} is too large for a beta on [0, {i_max}] with mean {mean}; try the gamma family"
                )));
            }
            (m * common, (1.0 - m) * common)
        }
    };
    Ok(FittedDist {
        family,
        params,
        scale: i_max,
        source_mean: mean,
        source_variance: variance,
    })
}

/// Fits `family`, falling back to the Gamma family when a Beta fit is
/// infeasible. The flag reports whether the fallback was taken.
pub fn fit_with_fallback(
    mean: f64,
    variance: f64,
    i_max: f64,
    family: Family,
) -> Result<(FittedDist, bool)> {
    match fit(mean, variance, i_max, family) {
        Ok(d) => Ok((d, false)),
        Err(MiError::InfeasibleFit(_)) if family == Family::Beta => {
            fit(mean, variance, i_max, Family::Gamma).map(|d| (d, true))
        }
        Err(e) => Err(e),
    }
}

/// One row of an exported curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub pdf: f64,
    pub cdf: f64,
}

impl FittedDist {
    /// Support `[lo, hi]` of the fitted family.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Gaussian => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Gamma => (0.0, f64::INFINITY),
            Family::Beta => (0.0, self.scale),
        }
    }

    /// Analytic mean of the fitted distribution.
    pub fn mean(&self) -> f64 {
        let (a, b) = self.params;
        match self.family {
            Family::Gaussian => a,
            Family::Gamma => a / b,
            Family::Beta => self.scale * a / (a + b),
        }
    }

    /// Analytic variance of the fitted distribution.
    pub fn variance(&self) -> f64 {
        let (a, b) = self.params;
        match self.family {
            Family::Gaussian => b * b,
            Family::Gamma => a / (b * b),
            Family::Beta => self.scale * self.scale * a * b / ((a + b).powi(2) * (a + b + 1.0)),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (a, b) = self.params;
        match self.family {
            Family::Gaussian => {
                let z = (x - a) / b;
                (-0.5 * z * z).exp() / (b * (2.0 * std::f64::consts::PI).sqrt())
            }
            Family::Gamma => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match a.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => b,
                        _ => 0.0,
                    }
                } else {
                    (a * b.ln() + (a - 1.0) * x.ln() - b * x - ln_gamma_unchecked(a)).exp()
                }
            }
            Family::Beta => {
                let u = x / self.scale;
                if !(0.0..=1.0).contains(&u) {
                    return 0.0;
                }
                if (u == 0.0 && a < 1.0) || (u == 1.0 && b < 1.0) {
                    return f64::INFINITY;
                }
                if (u == 0.0 && a > 1.0) || (u == 1.0 && b > 1.0) {
                    return 0.0;
                }
                let ln_beta = ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b);
                let body = if u == 0.0 || u == 1.0 {
                    0.0
                } else {
                    (a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln()
                };
                (body - ln_beta).exp() / self.scale
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.params;
        let v = match self.family {
            Family::Gaussian => 0.5 * erfc(-(x - a) / (b * std::f64::consts::SQRT_2)),
            Family::Gamma => {
                if x <= 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    gamma_lr(a, b * x)
                }
            }
            Family::Beta => {
                let u = x / self.scale;
                if u <= 0.0 {
                    0.0
                } else if u >= 1.0 {
                    1.0
                } else {
                    beta_reg(a, b, u)
                }
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// `p(I > threshold)`.
    pub fn tail_above(&self, threshold: f64) -> f64 {
        1.0 - self.cdf(threshold)
    }

    /// Inverse cdf by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(MiError::InvalidArgument(format!(
                "quantile level must be in (0, 1), got {p}"
            )));
        }
        let sd = self.variance().sqrt();
        let mean = self.mean();
        let (mut lo, mut hi) = match self.family {
            Family::Gaussian => (mean - 40.0 * sd, mean + 40.0 * sd),
            Family::Gamma => {
                let mut hi = mean + 40.0 * sd;
                while self.cdf(hi) < p {
                    hi *= 2.0;
                }
                (0.0, hi)
            }
            Family::Beta => (0.0, self.scale),
        };
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Evaluates `(x, pdf, cdf)` on `points` equally spaced abscissae over
    /// `[0, scale]`.
    pub fn curve(&self, points: usize) -> Vec<CurvePoint> {
        self.curve_between(0.0, self.scale, points)
    }

    /// Like [`FittedDist::curve`] on `[lo, hi]`.
    pub fn curve_between(&self, lo: f64, hi: f64, points: usize) -> Vec<CurvePoint> {
        let points = points.max(2);
        (0..points)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
                CurvePoint {
                    x,
                    pdf: self.pdf(x),
                    cdf: self.cdf(x),
                }
            })
            .collect()
    }
}

/// Enough halvings to exhaust double precision on any bracket used above.
const MAX_BISECTIONS: usize = 200;

/// Writes a curve as `x,pdf,cdf` CSV with a header.
pub fn write_curve_csv<W: Write>(mut out: W, curve: &[CurvePoint]) -> Result<()> {
    writeln!(out, "x,pdf,cdf")?;
    for p in curve {
        writeln!(out, "{},{},{}", p.x, p.pdf, p.cdf)?;
    }
    Ok(())
}
