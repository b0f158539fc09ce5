//! Digamma and log-Gamma.
//!
//! The moment formulas evaluate `psi` almost exclusively at integer and
//! half-integer arguments (counts plus small pseudo-counts), so those are
//! served from a table built from the exact finite sums. Everything else is
//! shifted upward with `psi(z+1) = psi(z) + 1/z` until the asymptotic series
//! is accurate to well below `1e-12`.

use std::sync::OnceLock;

use crate::error::{MiError, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

const LN_2: f64 = std::f64::consts::LN_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_8;

/// Arguments at or above this use the asymptotic expansions directly.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// Default table size.
pub const DEFAULT_TABLE_MAX: usize = 4096;

/// Precomputed digamma values at `1..=max` and `1/2, 3/2, ..., max - 1/2`.
#[derive(Debug, Clone)]
pub struct PsiTable {
    max_index: usize,
    /// `integer[k] = psi(k)`, index 0 unused.
    integer: Vec<f64>,
    /// `half[k] = psi(k + 1/2)`.
    half: Vec<f64>,
}

/// Kahan-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

impl PsiTable {
    pub fn new(max_index: usize) -> Self {
        let max_index = max_index.max(1);
        let mut integer = vec![f64::NAN; max_index + 1];
        let mut harmonic = Compensated::default();
        for (k, slot) in integer.iter_mut().enumerate().skip(1) {
            // psi(k) = -gamma + sum_{m<k} 1/m
            *slot = -EULER_GAMMA + harmonic.sum;
            harmonic.add(1.0 / k as f64);
        }
        let mut half = vec![f64::NAN; max_index];
        let mut odd = Compensated::default();
        for (k, slot) in half.iter_mut().enumerate() {
            // psi(k + 1/2) = -gamma - 2 ln 2 + 2 sum_{m=1}^{k} 1/(2m - 1)
            *slot = -EULER_GAMMA - 2.0 * LN_2 + 2.0 * odd.sum;
            odd.add(1.0 / (2 * k + 1) as f64);
        }
        Self {
            max_index,
            integer,
            half,
        }
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    /// Table value when `z` is an integer or half-integer in range.
    #[inline]
    pub fn lookup(&self, z: f64) -> Option<f64> {
        if z <= 0.0 || z > self.max_index as f64 {
            return None;
        }
        if z.fract() == 0.0 {
            return Some(self.integer[z as usize]);
        }
        let twice = 2.0 * z;
        if twice.fract() == 0.0 {
            return Some(self.half[(z - 0.5) as usize]);
        }
        None
    }
}

fn shared_table() -> &'static PsiTable {
    static TABLE: OnceLock<PsiTable> = OnceLock::new();
    TABLE.get_or_init(|| PsiTable::new(DEFAULT_TABLE_MAX))
}

/// Digamma for `x >= ASYMPTOTIC_FROM` via the asymptotic series.
#[inline]
fn psi_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli terms B_2k / (2k x^2k), k = 1..6
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    x.ln() - 0.5 * inv - series
}

/// Digamma without the table.
fn psi_series(z: f64) -> f64 {
    let mut x = z;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_FROM {
        shift += 1.0 / x;
        x += 1.0;
    }
    psi_asymptotic(x) - shift
}

/// Digamma function `psi(z) = d ln Gamma(z) / dz` for `z > 0`.
pub fn psi(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(MiError::Domain(format!("psi is evaluated only for z > 0, got {z}")));
    }
    Ok(psi_unchecked(z))
}

/// `psi` for arguments the caller already knows to be positive and finite.
#[inline]
pub(crate) fn psi_unchecked(z: f64) -> f64 {
    match shared_table().lookup(z) {
        Some(v) => v,
        None => psi_series(z),
    }
}

/// `psi(n) = -gamma + sum_{k=1}^{n-1} 1/k`.
pub fn psi_integer(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(MiError::Domain("psi_integer needs n >= 1".into()));
    }
    let table = shared_table();
    if n as usize <= table.max_index() {
        return Ok(table.integer[n as usize]);
    }
    Ok(psi_series(n as f64))
}

/// Natural log of the Gamma function for `z > 0`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(MiError::Domain(format!("ln_gamma is evaluated only for z > 0, got {z}")));
    }
    Ok(ln_gamma_unchecked(z))
}

pub(crate) fn ln_gamma_unchecked(z: f64) -> f64 {
    let mut x = z;
    let mut prod = 1.0;
    while x < ASYMPTOTIC_FROM {
        prod *= x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Stirling series with Bernoulli terms up to x^-11
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0 - inv2 * (691.0 / 360360.0))))));
    let stirling = (x - 0.5) * x.ln() - x + HALF_LN_2PI + series;
    if prod == 1.0 {
        stirling
    } else {
        stirling - prod.ln()
    }
}
