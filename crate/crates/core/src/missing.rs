//! Leading-order posterior of the mutual information when some units have
//! only one of the two variables observed (missing at random).
//!
//! The chances are estimated by the maximum-likelihood fixed point
//!
//! ```text
//! pi_ij = (n_ij + n_i? pi_ij / pi_i+ + n_?j pi_ij / pi_+j) / n
//! ```
//!
//! which is exactly one EM step when iterated. The posterior covariance of
//! the chances is the inverse of the Hessian kernel `A` of the negative
//! log-likelihood projected onto `sum(pi) = 1`. `A` is a diagonal plus a
//! row-block plus a column-block term; the row part is inverted in closed
//! form and the column part is folded in with Woodbury, so only a
//! `m x m` matrix is factorized, `m` being the number of columns that carry
//! margin-only counts.

use serde::{Deserialize, Serialize};

use crate::error::{MiError, Result};
use crate::moments::{mutual_information, VarianceEstimate};
use crate::table::CountTable;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Maximum-likelihood chances with convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `pi_hat`, sums to one.
    pub pi_hat: Vec<f64>,
    pub iterations: usize,
    /// Largest cellwise change in the last fixed-point step.
    pub final_residual: f64,
    /// Log-likelihood at the start and after every iteration.
    pub loglik_trace: Vec<f64>,
}

impl MleEstimate {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi_hat[i * self.cols + j]
    }

    pub fn row_marginals(&self) -> Vec<f64> {
        self.pi_hat.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.pi_hat.chunks_exact(self.cols) {
            for (o, &p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    fn transpose(&self) -> Self {
        let mut pi = vec![0.0; self.pi_hat.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                pi[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            pi_hat: pi,
            iterations: self.iterations,
            final_residual: self.final_residual,
            loglik_trace: self.loglik_trace.clone(),
        }
    }
}

fn require_positive_cells(table: &CountTable) -> Result<()> {
    match table.first_zero_cell() {
        Some((row, col)) => Err(MiError::ZeroCell { row, col }),
        None => Ok(()),
    }
}

fn check_shape(table: &CountTable, mle: &MleEstimate) -> Result<()> {
    if mle.rows != table.rows() || mle.cols != table.cols() {
        return Err(MiError::InvalidArgument(format!(
            "estimate is {}x{} but table is {}x{}",
            mle.rows,
            mle.cols,
            table.rows(),
            table.cols()
        )));
    }
    Ok(())
}

fn marginals(pi: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let mut row = vec![0.0; rows];
    let mut col = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            let p = pi[i * cols + j];
            row[i] += p;
            col[j] += p;
        }
    }
    (row, col)
}

/// Incomplete-data log-likelihood
/// `sum n_ij ln pi_ij + sum n_i? ln pi_i+ + sum n_?j ln pi_+j`.
pub fn log_likelihood(table: &CountTable, pi: &[f64]) -> f64 {
    let (r, s) = (table.rows(), table.cols());
    let (row, col) = marginals(pi, r, s);
    let mut ll = 0.0;
    for (k, &n) in table.counts().iter().enumerate() {
        if n > 0.0 {
            ll += n * pi[k].ln();
        }
    }
    for (&n, &p) in table.row_missing().iter().zip(&row) {
        if n > 0.0 {
            ll += n * p.ln();
        }
    }
    for (&n, &p) in table.col_missing().iter().zip(&col) {
        if n > 0.0 {
            ll += n * p.ln();
        }
    }
    ll
}

/// Quadratic form `v' H v` of the Hessian of the negative log-likelihood at
/// `pi`.
pub fn hessian_quadratic_form(table: &CountTable, pi: &[f64], v: &[f64]) -> f64 {
    let (r, s) = (table.rows(), table.cols());
    let (pr, pc) = marginals(pi, r, s);
    let (vr, vc) = marginals(v, r, s);
    let mut q = 0.0;
    for (k, &n) in table.counts().iter().enumerate() {
        q += n * v[k] * v[k] / (pi[k] * pi[k]);
    }
    for i in 0..r {
        q += table.row_missing()[i] * vr[i] * vr[i] / (pr[i] * pr[i]);
    }
    for j in 0..s {
        q += table.col_missing()[j] * vc[j] * vc[j] / (pc[j] * pc[j]);
    }
    q
}

/// Runs the fixed-point iteration from the renormalized complete-data
/// proportions.
pub fn em_mle(table: &CountTable, tol: f64, max_iter: usize) -> Result<MleEstimate> {
    let n_c = table.complete_total();
    if !(n_c > 0.0) {
        return Err(MiError::InvalidTable("no complete units to start EM from".into()));
    }
    let start: Vec<f64> = table.counts().iter().map(|&c| c / n_c).collect();
    em_mle_from(table, &start, tol, max_iter)
}

/// Runs the fixed-point iteration from a caller-supplied interior point.
pub fn em_mle_from(
    table: &CountTable,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<MleEstimate> {
    require_positive_cells(table)?;
    let (r, s) = (table.rows(), table.cols());
    if start.len() != r * s || start.iter().any(|&p| !(p > 0.0)) {
        return Err(MiError::InvalidArgument(
            "EM start must be a strictly positive r*s vector".into(),
        ));
    }
    let total: f64 = start.iter().sum();
    let mut pi: Vec<f64> = start.iter().map(|&p| p / total).collect();
    let n = table.total();
    let mut next = vec![0.0; r * s];
    let mut trace = vec![log_likelihood(table, &pi)];
    let mut residual = f64::INFINITY;

    for iter in 1..=max_iter {
        let (row, col) = marginals(&pi, r, s);
        residual = 0.0;
        for i in 0..r {
            let wr = table.row_missing()[i] / row[i];
            for j in 0..s {
                let k = i * s + j;
                let wc = table.col_missing()[j] / col[j];
                next[k] = (table.counts()[k] + pi[k] * (wr + wc)) / n;
                residual = f64::max(residual, (next[k] - pi[k]).abs());
            }
        }
        std::mem::swap(&mut pi, &mut next);
        trace.push(log_likelihood(table, &pi));
        if residual <= tol {
            return Ok(MleEstimate {
                rows: r,
                cols: s,
                pi_hat: pi,
                iterations: iter,
                final_residual: residual,
                loglik_trace: trace,
            });
        }
    }
    Err(MiError::NoConvergence {
        iterations: max_iter,
        residual,
        loglik_trace: trace,
    })
}

/// Closed-form estimate when only one of the variables has missing values:
/// `pi_ij = ((n_i+ + n_i?)/n) (n_ij/n_i+)`, or the transposed form when only
/// the row variable is missing.
pub fn mle_one_side(table: &CountTable) -> Result<MleEstimate> {
    if table.has_row_missing() && table.has_col_missing() {
        return Err(MiError::Unsupported(
            "both variables have missing values; use em_mle".into(),
        ));
    }
    if table.has_col_missing() {
        return Ok(mle_one_side(&table.transpose())?.transpose());
    }
    let (r, s) = (table.rows(), table.cols());
    let n = table.total();
    let row_sums = table.row_sums();
    if let Some(i) = row_sums.iter().position(|&x| !(x > 0.0)) {
        return Err(MiError::InvalidTable(format!(
            "row {i} has no complete units; its conditional is undetermined"
        )));
    }
    let mut pi = vec![0.0; r * s];
    for i in 0..r {
        let scale = (row_sums[i] + table.row_missing()[i]) / n / row_sums[i];
        for j in 0..s {
            pi[i * s + j] = scale * table.get(i, j);
        }
    }
    let ll = log_likelihood(table, &pi);
    let (row, col) = marginals(&pi, r, s);
    let mut residual: f64 = 0.0;
    for i in 0..r {
        for j in 0..s {
            let k = i * s + j;
            let step = (table.counts()[k]
                + pi[k] * (table.row_missing()[i] / row[i] + table.col_missing()[j] / col[j]))
                / n;
            residual = residual.max((step - pi[k]).abs());
        }
    }
    Ok(MleEstimate {
        rows: r,
        cols: s,
        pi_hat: pi,
        iterations: 0,
        final_residual: residual,
        loglik_trace: vec![ll],
    })
}

/// The `rho` coefficients of the Hessian kernel. Margin terms whose count
/// is zero correspond to `rho = infinity` and are stored as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoCoefficients {
    pub rho: Vec<f64>,
    pub rho_row: Vec<Option<f64>>,
    pub rho_col: Vec<Option<f64>>,
}

pub fn rho_coefficients(table: &CountTable, mle: &MleEstimate) -> Result<RhoCoefficients> {
    check_shape(table, mle)?;
    require_positive_cells(table)?;
    let n = table.total();
    let rho = table
        .counts()
        .iter()
        .zip(&mle.pi_hat)
        .map(|(&c, &p)| n * p * p / c)
        .collect();
    let margin = |counts: &[f64], pis: Vec<f64>| -> Vec<Option<f64>> {
        counts
            .iter()
            .zip(pis)
            .map(|(&c, p)| (c > 0.0).then(|| n * p * p / c))
            .collect()
    };
    Ok(RhoCoefficients {
        rho,
        rho_row: margin(table.row_missing(), mle.row_marginals()),
        rho_col: margin(table.col_missing(), mle.col_marginals()),
    })
}

/// `l_ij = ln(pi_ij / (pi_i+ pi_+j))`.
pub fn log_ratios(mle: &MleEstimate) -> Vec<f64> {
    let (row, col) = (mle.row_marginals(), mle.col_marginals());
    let mut l = vec![0.0; mle.pi_hat.len()];
    for i in 0..mle.rows {
        for j in 0..mle.cols {
            l[i * mle.cols + j] = (mle.get(i, j) / (row[i] * col[j])).ln();
        }
    }
    l
}

/// Leading-order variance when only one variable has missing values:
/// `(1/n) [K~ - J~^2/Q~ - P~]`, computed in `O(rs)`.
pub fn variance_one_side(table: &CountTable, mle: &MleEstimate) -> Result<f64> {
    check_shape(table, mle)?;
    if table.has_row_missing() && table.has_col_missing() {
        return Err(MiError::Unsupported(
            "both variables have missing values; use variance_general".into(),
        ));
    }
    if table.has_col_missing() {
        return variance_one_side(&table.transpose(), &mle.transpose());
    }
    let rho = rho_coefficients(table, mle)?;
    let l = log_ratios(mle);
    let (r, s) = (table.rows(), table.cols());
    let n = table.total();

    let (mut k_t, mut j_t, mut q_t, mut p_t) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..r {
        let mut rho_row_sum = 0.0;
        let mut j_row = 0.0;
        for j in 0..s {
            let k = i * s + j;
            rho_row_sum += rho.rho[k];
            j_row += rho.rho[k] * l[k];
            k_t += rho.rho[k] * l[k] * l[k];
        }
        // Q~_i? = rho_i? / (rho_i? + rho_i+), and Q~_i?/rho_i? = 1/(rho_i? + rho_i+)
        let (q_row, q_over_rho) = match rho.rho_row[i] {
            Some(rr) => (rr / (rr + rho_row_sum), 1.0 / (rr + rho_row_sum)),
            None => (1.0, 0.0),
        };
        j_t += j_row * q_row;
        q_t += rho_row_sum * q_row;
        p_t += j_row * j_row * q_over_rho;
    }
    Ok((k_t - j_t * j_t / q_t - p_t) / n)
}

/// Structured representation of the leading-order posterior covariance of
/// the chances.
///
/// Internally the table is transposed when it has more columns than rows so
/// the Woodbury system stays small; all public indices are in the caller's
/// orientation.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    rows: usize,
    cols: usize,
    transposed: bool,
    n: f64,
    rho: Vec<f64>,
    /// `1/(rho_i+ + rho_i?)`, zero when row `i` has no margin-only counts.
    row_shrink: Vec<f64>,
    /// Working-orientation columns carrying margin-only counts.
    missing_cols: Vec<usize>,
    /// Lower Cholesky factor of `G`, row-major `m x m`.
    g_factor: Vec<f64>,
    log_ratios: Vec<f64>,
    a_inv_e: Vec<f64>,
    e_a_inv_e: f64,
}

impl CovarianceModel {
    /// Shape in the caller's orientation.
    pub fn shape(&self) -> (usize, usize) {
        if self.transposed {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        }
    }

    /// Whether the computation ran on the transposed table.
    pub fn transposed(&self) -> bool {
        self.transposed
    }

    /// Size of the factorized Woodbury system.
    pub fn woodbury_dim(&self) -> usize {
        self.missing_cols.len()
    }

    /// `l_ij` in the caller's orientation.
    pub fn log_ratios(&self) -> Vec<f64> {
        self.to_caller(&self.log_ratios)
    }

    fn to_working(&self, x: &[f64]) -> Vec<f64> {
        if !self.transposed {
            return x.to_vec();
        }
        // caller is cols x rows (working rows/cols swapped)
        let (cr, cc) = (self.cols, self.rows);
        let mut out = vec![0.0; x.len()];
        for i in 0..cr {
            for j in 0..cc {
                out[j * self.cols + i] = x[i * cc + j];
            }
        }
        out
    }

    fn to_caller(&self, x: &[f64]) -> Vec<f64> {
        if !self.transposed {
            return x.to_vec();
        }
        let (cr, cc) = (self.cols, self.rows);
        let mut out = vec![0.0; x.len()];
        for i in 0..cr {
            for j in 0..cc {
                out[i * cc + j] = x[j * self.cols + i];
            }
        }
        out
    }

    /// `B^-1 x` where `A = n (B + U D U')`.
    fn apply_b_inv(&self, x: &[f64], out: &mut [f64]) {
        let s = self.cols;
        for i in 0..self.rows {
            let row = i * s..(i + 1) * s;
            let dot: f64 = self.rho[row.clone()].iter().zip(&x[row.clone()]).map(|(a, b)| a * b).sum();
            let shrink = self.row_shrink[i] * dot;
            for k in row {
                out[k] = self.rho[k] * (x[k] - shrink);
            }
        }
    }

    /// `F' x` with `F = B^-1 U`, restricted to the missing columns.
    fn apply_f_t(&self, x: &[f64]) -> Vec<f64> {
        let s = self.cols;
        let row_dots: Vec<f64> = (0..self.rows)
            .map(|i| {
                let row = i * s..(i + 1) * s;
                self.row_shrink[i] * self.rho[row.clone()].iter().zip(&x[row]).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        self.missing_cols
            .iter()
            .map(|&m| {
                (0..self.rows)
                    .map(|i| {
                        let k = i * s + m;
                        self.rho[k] * (x[k] - row_dots[i])
                    })
                    .sum()
            })
            .collect()
    }

    fn g_solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.missing_cols.len();
        let l = &self.g_factor;
        let mut y = b.to_vec();
        for i in 0..m {
            for k in 0..i {
                y[i] -= l[i * m + k] * y[k];
            }
            y[i] /= l[i * m + i];
        }
        for i in (0..m).rev() {
            for k in i + 1..m {
                y[i] -= l[k * m + i] * y[k];
            }
            y[i] /= l[i * m + i];
        }
        y
    }

    /// `A^-1 x` in the working orientation.
    fn apply_a_inv_working(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_b_inv(x, &mut out);
        if !self.missing_cols.is_empty() {
            let y = self.g_solve(&self.apply_f_t(x));
            // subtract F y
            let s = self.cols;
            let mut spread = vec![0.0; s];
            for (&m, &ym) in self.missing_cols.iter().zip(&y) {
                spread[m] = ym;
            }
            for i in 0..self.rows {
                let row = i * s..(i + 1) * s;
                let dot: f64 = self.rho[row.clone()].iter().zip(&spread).map(|(a, b)| a * b).sum();
                let shrink = self.row_shrink[i] * dot;
                for (jj, k) in row.enumerate() {
                    out[k] -= self.rho[k] * (spread[jj] - shrink);
                }
            }
        }
        out.iter_mut().for_each(|v| *v /= self.n);
        out
    }

    /// Applies the inverse Hessian kernel `A^-1` to a caller-oriented vector.
    pub fn apply_kernel_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.to_caller(&self.apply_a_inv_working(&self.to_working(x)))
    }

    /// `Cov x` with `Cov = A^-1 - A^-1 e e' A^-1 / (e' A^-1 e)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let xw = self.to_working(x);
        let ax = self.apply_a_inv_working(&xw);
        let proj: f64 = self.a_inv_e.iter().zip(&xw).map(|(a, b)| a * b).sum::<f64>() / self.e_a_inv_e;
        let out: Vec<f64> = ax
            .iter()
            .zip(&self.a_inv_e)
            .map(|(&v, &a)| v - a * proj)
            .collect();
        self.to_caller(&out)
    }

    /// `Cov_(ij)(kl)` in the caller's orientation.
    pub fn cov(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (_, s) = self.shape();
        let mut unit = vec![0.0; self.rho.len()];
        unit[k * s + l] = 1.0;
        self.apply(&unit)[i * s + j]
    }

    /// Full `rs x rs` covariance matrix (row-major, caller orientation).
    /// Quadratic in `rs`; meant for small tables and diagnostics.
    pub fn dense(&self) -> Vec<f64> {
        let d = self.rho.len();
        let mut out = vec![0.0; d * d];
        let mut unit = vec![0.0; d];
        for c in 0..d {
            unit[c] = 1.0;
            let col = self.apply(&unit);
            unit[c] = 0.0;
            for (r, v) in col.into_iter().enumerate() {
                out[r * d + c] = v;
            }
        }
        out
    }
}

fn cholesky(a: &mut [f64], m: usize) -> Result<()> {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !(d > 0.0) {
            return Err(MiError::Singular(format!(
                "Woodbury system is not positive definite at pivot {j}"
            )));
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut v = a[i * m + j];
            for k in 0..j {
                v -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = v / d;
        }
        for k in j + 1..m {
            a[j * m + k] = 0.0;
        }
    }
    Ok(())
}

/// Builds the structured covariance of the chances for arbitrary missing
/// patterns. Cost `O(m^2 r + m^3)` beyond the `O(rs)` setup, with `m <= s`
/// and the table oriented so that `s <= r`.
pub fn covariance_general(table: &CountTable, mle: &MleEstimate) -> Result<CovarianceModel> {
    check_shape(table, mle)?;
    require_positive_cells(table)?;
    if table.cols() > table.rows() {
        let mut model = covariance_general(&table.transpose(), &mle.transpose())?;
        model.transposed = true;
        return Ok(model);
    }
    let (r, s) = (table.rows(), table.cols());
    let n = table.total();
    let coeffs = rho_coefficients(table, mle)?;
    let rho = coeffs.rho;

    let row_shrink: Vec<f64> = (0..r)
        .map(|i| match coeffs.rho_row[i] {
            Some(rr) => 1.0 / (rr + rho[i * s..(i + 1) * s].iter().sum::<f64>()),
            None => 0.0,
        })
        .collect();
    let missing_cols: Vec<usize> = (0..s).filter(|&j| coeffs.rho_col[j].is_some()).collect();
    let m = missing_cols.len();

    // G_mn = rho_?m delta_mn + sum_i (rho_im delta_mn - rho_im c_i rho_in)
    let mut g = vec![0.0; m * m];
    for (a, &ja) in missing_cols.iter().enumerate() {
        g[a * m + a] += coeffs.rho_col[ja].unwrap_or(0.0);
        for i in 0..r {
            let rho_ia = rho[i * s + ja];
            g[a * m + a] += rho_ia;
            let w = row_shrink[i] * rho_ia;
            if w != 0.0 {
                for (b, &jb) in missing_cols.iter().enumerate() {
                    g[a * m + b] -= w * rho[i * s + jb];
                }
            }
        }
    }
    cholesky(&mut g, m)?;

    let mut model = CovarianceModel {
        rows: r,
        cols: s,
        transposed: false,
        n,
        rho,
        row_shrink,
        missing_cols,
        g_factor: g,
        log_ratios: log_ratios(mle),
        a_inv_e: Vec::new(),
        e_a_inv_e: 0.0,
    };
    let ones = vec![1.0; r * s];
    model.a_inv_e = model.apply_a_inv_working(&ones);
    model.e_a_inv_e = model.a_inv_e.iter().sum();
    if !(model.e_a_inv_e > 0.0) {
        return Err(MiError::Singular("e' A^-1 e is not positive".into()));
    }
    Ok(model)
}

/// Leading-order variance `l'A^-1 l - (l'A^-1 e)^2 / (e'A^-1 e)`.
pub fn variance_general(
    table: &CountTable,
    mle: &MleEstimate,
    cov: &CovarianceModel,
) -> Result<f64> {
    check_shape(table, mle)?;
    if cov.shape() != (table.rows(), table.cols()) {
        return Err(MiError::InvalidArgument(
            "covariance model was built for a different table".into(),
        ));
    }
    let l = &cov.log_ratios;
    let al = cov.apply_a_inv_working(l);
    let lal: f64 = l.iter().zip(&al).map(|(a, b)| a * b).sum();
    let lae: f64 = l.iter().zip(&cov.a_inv_e).map(|(a, b)| a * b).sum();
    Ok(lal - lae * lae / cov.e_a_inv_e)
}

/// Leading-order mean `I(pi_hat)`.
pub fn mean_leading(mle: &MleEstimate) -> f64 {
    mutual_information(&mle.pi_hat, mle.rows, mle.cols)
}

/// Mean, variance and chances for an incomplete table, choosing the
/// closed form when only one variable is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingMoments {
    pub mean: f64,
    pub variance: VarianceEstimate,
    pub mle: MleEstimate,
}

pub fn leading_moments(table: &CountTable) -> Result<LeadingMoments> {
    require_positive_cells(table)?;
    let (mle, var) = if table.has_row_missing() && table.has_col_missing() {
        let mle = em_mle(table, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let cov = covariance_general(table, &mle)?;
        let v = variance_general(table, &mle, &cov)?;
        (mle, v)
    } else {
        let mle = mle_one_side(table)?;
        let v = variance_one_side(table, &mle)?;
        (mle, v)
    };
    let variance = if var < 0.0 {
        VarianceEstimate {
            value: 0.0,
            clamped: true,
        }
    } else {
        VarianceEstimate {
            value: var,
            clamped: false,
        }
    };
    Ok(LeadingMoments {
        mean: mean_leading(&mle),
        variance,
        mle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{core_stats, empirical_mi};
    use approx::assert_abs_diff_eq;

    fn example_22() -> CountTable {
        CountTable::with_missing(2, 2, vec![2.0; 4], vec![4.0, 0.0], vec![0.0; 2]).unwrap()
    }

    #[test]
    fn complete_data_converges_immediately() {
        let t = CountTable::parse_inline("3,5;7,2").unwrap();
        let est = em_mle(&t, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(est.iterations, 1);
        for (p, c) in est.pi_hat.iter().zip(t.counts()) {
            assert_abs_diff_eq!(*p, c / 17.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn one_side_closed_form_example() {
        let t = example_22();
        let est = mle_one_side(&t).unwrap();
        let want = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (p, w) in est.pi_hat.iter().zip(want) {
            assert_abs_diff_eq!(*p, w, epsilon = 1e-15);
        }
        let em = em_mle(&t, 1e-13, DEFAULT_MAX_ITER).unwrap();
        for (p, w) in em.pi_hat.iter().zip(want) {
            assert_abs_diff_eq!(*p, w, epsilon = 1e-10);
        }
    }

    #[test]
    fn one_side_symmetric_variant() {
        let t = example_22().transpose();
        let est = mle_one_side(&t).unwrap();
        assert_abs_diff_eq!(est.get(0, 0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(est.get(0, 1), 1.0 / 6.0, epsilon = 1e-15);
        let both = CountTable::with_missing(2, 2, vec![1.0; 4], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(mle_one_side(&both), Err(MiError::Unsupported(_))));
    }

    #[test]
    fn one_side_without_missing_is_relative_frequency() {
        let t = CountTable::parse_inline("3,5;7,2").unwrap();
        let est = mle_one_side(&t).unwrap();
        for (p, c) in est.pi_hat.iter().zip(t.counts()) {
            assert_abs_diff_eq!(*p, c / 17.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn complete_variance_reduces_to_k_minus_j2() {
        let t = CountTable::parse_inline("40,10;20,80").unwrap();
        let st = core_stats(&t).unwrap();
        let want = (st.k - st.j * st.j) / 150.0;
        let est = mle_one_side(&t).unwrap();
        assert_abs_diff_eq!(variance_one_side(&t, &est).unwrap(), want, epsilon = 1e-15);
        let cov = covariance_general(&t, &est).unwrap();
        assert_abs_diff_eq!(variance_general(&t, &est, &cov).unwrap(), want, epsilon = 1e-15);
    }

    #[test]
    fn independent_table_has_zero_variance() {
        let t = example_22();
        let est = mle_one_side(&t).unwrap();
        assert_abs_diff_eq!(variance_one_side(&t, &est).unwrap(), 0.0, epsilon = 1e-15);
        let cov = covariance_general(&t, &est).unwrap();
        assert_abs_diff_eq!(variance_general(&t, &est, &cov).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean_leading(&est), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_leading_complete_is_empirical() {
        let t = CountTable::parse_inline("3,5,1;7,2,4").unwrap();
        let est = em_mle(&t, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_abs_diff_eq!(mean_leading(&est), empirical_mi(&t).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn covariance_rows_sum_to_zero() {
        let t = CountTable::with_missing(
            3,
            2,
            vec![5.0, 2.0, 3.0, 8.0, 1.0, 4.0],
            vec![2.0, 0.0, 3.0],
            vec![1.0, 4.0],
        )
        .unwrap();
        let est = em_mle(&t, 1e-12, DEFAULT_MAX_ITER).unwrap();
        let cov = covariance_general(&t, &est).unwrap();
        let d = cov.dense();
        for row in d.chunks_exact(6) {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 0.0, epsilon = 1e-14);
        }
        // symmetric
        for a in 0..6 {
            for b in 0..6 {
                assert_abs_diff_eq!(d[a * 6 + b], d[b * 6 + a], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn transposed_orientation_is_transparent() {
        let t = CountTable::with_missing(
            2,
            3,
            vec![5.0, 2.0, 3.0, 8.0, 1.0, 4.0],
            vec![2.0, 1.0],
            vec![1.0, 0.0, 3.0],
        )
        .unwrap();
        let est = em_mle(&t, 1e-12, DEFAULT_MAX_ITER).unwrap();
        let cov = covariance_general(&t, &est).unwrap();
        assert!(cov.transposed());
        assert_eq!(cov.shape(), (2, 3));
        let tt = t.transpose();
        let est_t = em_mle(&tt, 1e-12, DEFAULT_MAX_ITER).unwrap();
        let cov_t = covariance_general(&tt, &est_t).unwrap();
        assert!(!cov_t.transposed());
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..2 {
                    for l in 0..3 {
                        assert_abs_diff_eq!(cov.cov(i, j, k, l), cov_t.cov(j, i, l, k), epsilon = 1e-12);
                    }
                }
            }
        }
        let v = variance_general(&t, &est, &cov).unwrap();
        let vt = variance_general(&tt, &est_t, &cov_t).unwrap();
        assert_abs_diff_eq!(v, vt, epsilon = 1e-12);
    }

    #[test]
    fn em_rejects_zero_cells_and_reports_nonconvergence() {
        let t = CountTable::with_missing(2, 2, vec![0.0, 1.0, 1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(em_mle(&t, 1e-10, 100), Err(MiError::ZeroCell { .. })));
        let t = CountTable::with_missing(2, 2, vec![1.0, 2.0, 3.0, 1.0], vec![30.0, 0.0], vec![0.0, 40.0]).unwrap();
        match em_mle(&t, 1e-15, 2) {
            Err(MiError::NoConvergence { iterations, loglik_trace, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(loglik_trace.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn leading_moments_picks_route() {
        let t = example_22();
        let lm = leading_moments(&t).unwrap();
        assert_eq!(lm.mle.iterations, 0);
        let both = CountTable::with_missing(2, 2, vec![4.0, 1.0, 2.0, 6.0], vec![1.0, 0.0], vec![0.0, 3.0]).unwrap();
        let lm = leading_moments(&both).unwrap();
        assert!(lm.mle.iterations > 0);
        assert!(lm.variance.value > 0.0);
    }
}
