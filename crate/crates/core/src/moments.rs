//! Posterior moments of the mutual information under a Dirichlet posterior.
//!
//! All quantities are in nats. The table counts are the Dirichlet
//! parameters, i.e. real counts plus prior pseudo-counts.

use serde::{Deserialize, Serialize};

use crate::error::{MiError, Result};
use crate::missing;
use crate::specfun::psi_unchecked;
use crate::table::{CountTable, PriorSpec};

#[inline]
fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Mutual information `I(pi)` of a row-major joint distribution, with
/// `0 ln 0 = 0`. `pi` need not be normalized; it is read as `pi / sum(pi)`.
pub fn mutual_information(pi: &[f64], rows: usize, cols: usize) -> f64 {
    debug_assert_eq!(pi.len(), rows * cols);
    let total: f64 = pi.iter().sum();
    let mut row = vec![0.0; rows];
    let mut col = vec![0.0; cols];
    let mut cells = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let p = pi[i * cols + j] / total;
            row[i] += p;
            col[j] += p;
            cells += xlnx(p);
        }
    }
    let mi = cells - row.iter().map(|&p| xlnx(p)).sum::<f64>() - col.iter().map(|&p| xlnx(p)).sum::<f64>();
    mi.max(0.0)
}

/// Descriptive index `I(pi_hat)` of the complete part of the table.
pub fn empirical_mi(table: &CountTable) -> Result<f64> {
    if !(table.complete_total() > 0.0) {
        return Err(MiError::UndefinedDistribution(
            "the complete part of the table is empty".into(),
        ));
    }
    Ok(mutual_information(table.counts(), table.rows(), table.cols()).min(table.i_max()))
}

/// The statistics `J, K, L, M, P, Q` together with the per-cell terms
/// `J_ij = (n_ij/n) ln(n_ij n / (n_i+ n_+j))` and their row/column sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreStats {
    pub j: f64,
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub p: f64,
    pub q: f64,
    pub cell_terms: Vec<f64>,
    pub row_terms: Vec<f64>,
    pub col_terms: Vec<f64>,
}

/// Computes `J, K, L, M, P, Q` in one `O(rs)` pass over the complete part.
///
/// Every joint cell must be positive: `M` contains `1/n_ij`.
pub fn core_stats(table: &CountTable) -> Result<CoreStats> {
    if let Some((row, col)) = table.first_zero_cell() {
        return Err(MiError::ZeroCell { row, col });
    }
    let (r, s) = (table.rows(), table.cols());
    let n = table.complete_total();
    let row_sums = table.row_sums();
    let col_sums = table.col_sums();

    let mut cell_terms = vec![0.0; r * s];
    let mut row_terms = vec![0.0; r];
    let mut col_terms = vec![0.0; s];
    let (mut j_sum, mut k_sum, mut l_sum, mut m_sum, mut q_sum) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..r {
        let ni = row_sums[i];
        for jj in 0..s {
            let nj = col_sums[jj];
            let nij = table.get(i, jj);
            let log_ratio = (nij * n / (ni * nj)).ln();
            let w = nij / n;
            let term = w * log_ratio;
            cell_terms[i * s + jj] = term;
            row_terms[i] += term;
            col_terms[jj] += term;
            j_sum += term;
            k_sum += term * log_ratio;
            l_sum += term * log_ratio * log_ratio;
            m_sum += (1.0 / nij - 1.0 / ni - 1.0 / nj + 1.0 / n) * nij * log_ratio;
            q_sum += nij * nij / (ni * nj);
        }
    }
    let p_sum = row_terms
        .iter()
        .zip(&row_sums)
        .map(|(&t, &ni)| n * t * t / ni)
        .sum::<f64>()
        + col_terms
            .iter()
            .zip(&col_sums)
            .map(|(&t, &nj)| n * t * t / nj)
            .sum::<f64>();

    Ok(CoreStats {
        j: j_sum,
        k: k_sum,
        l: l_sum,
        m: m_sum,
        p: p_sum,
        q: 1.0 - q_sum,
        cell_terms,
        row_terms,
        col_terms,
    })
}

/// Exact posterior mean
/// `E[I] = (1/n) sum_ij n_ij [psi(n_ij+1) - psi(n_i+ +1) - psi(n_+j +1) + psi(n+1)]`.
///
/// Zero cells are allowed; each of their terms carries a factor `n_ij = 0`.
pub fn mean_exact(table: &CountTable) -> Result<f64> {
    if !table.is_complete() {
        return Err(MiError::Unsupported(
            "exact mean needs complete data; use the missing-data estimates".into(),
        ));
    }
    let n = table.complete_total();
    let (r, s) = (table.rows(), table.cols());
    let row_psi: Vec<f64> = table.row_sums().iter().map(|&x| psi_unchecked(x + 1.0)).collect();
    let col_psi: Vec<f64> = table.col_sums().iter().map(|&x| psi_unchecked(x + 1.0)).collect();
    let psi_n = psi_unchecked(n + 1.0);
    let mut acc = 0.0;
    for i in 0..r {
        for j in 0..s {
            let nij = table.get(i, j);
            if nij > 0.0 {
                acc += nij * (psi_unchecked(nij + 1.0) - row_psi[i] - col_psi[j] + psi_n);
            }
        }
    }
    Ok((acc / n).clamp(0.0, table.i_max()))
}

fn degrees_of_freedom(table: &CountTable) -> f64 {
    ((table.rows() - 1) * (table.cols() - 1)) as f64
}

/// Second-order mean `J + (r-1)(s-1) / (2(n+1))`.
pub fn mean_order2(stats: &CoreStats, table: &CountTable) -> f64 {
    let n = table.complete_total();
    stats.j + degrees_of_freedom(table) / (2.0 * (n + 1.0))
}

/// Expansion order for the variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceOrder {
    /// `(K - J^2)/(n+1)`.
    First,
    /// Adds the `1/((n+1)(n+2))` correction.
    Second,
}

/// A variance value plus whether a negative approximation was clamped to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub clamped: bool,
}

/// Approximate posterior variance of `I`.
pub fn variance(stats: &CoreStats, table: &CountTable, order: VarianceOrder) -> VarianceEstimate {
    let n = table.complete_total();
    let mut v = (stats.k - stats.j * stats.j) / (n + 1.0);
    if order == VarianceOrder::Second {
        v += (stats.m + degrees_of_freedom(table) * (0.5 - stats.j) - stats.q)
            / ((n + 1.0) * (n + 2.0));
    }
    if v < 0.0 {
        VarianceEstimate {
            value: 0.0,
            clamped: true,
        }
    } else {
        VarianceEstimate {
            value: v,
            clamped: false,
        }
    }
}

/// Leading-order third and fourth central moments and the derived shape
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherMoments {
    pub central3: f64,
    pub central4: f64,
    /// `None` when the second-order variance is zero.
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

/// `c3 = (2/n^2)(2J^3 - 3KJ + L) + (3/n^2)(K + J^2 - P)`, `c4 = (3/n^2)(K - J^2)^2`.
/// Skewness and kurtosis divide by the second-order variance; they are `None`
/// when the leading-order spread `K - J^2` vanishes (independent `pi_hat`),
/// where both central moments are zero to this order.
pub fn central_moments_34(stats: &CoreStats, table: &CountTable) -> HigherMoments {
    let n = table.complete_total();
    let (j, k) = (stats.j, stats.k);
    let n2 = n * n;
    let central3 = 2.0 / n2 * (2.0 * j * j * j - 3.0 * k * j + stats.l) + 3.0 / n2 * (k + j * j - stats.p);
    let central4 = 3.0 / n2 * (k - j * j).powi(2);
    let var = variance(stats, table, VarianceOrder::Second).value;
    let spread = k - j * j;
    let (skewness, kurtosis) = if var > 0.0 && spread > 1e-14 * (k + f64::MIN_POSITIVE) {
        (Some(central3 / var.powf(1.5)), Some(central4 / (var * var)))
    } else {
        (None, None)
    };
    HigherMoments {
        central3,
        central4,
        skewness,
        kurtosis,
    }
}

/// Everything known about `p(I | n)` for one table.
///
/// For complete data all fields are filled. With margin-only counts only the
/// leading-order mean `I(pi_hat)` (stored in `mean_exact`) and variance
/// (`var_order1`) are available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub rows: usize,
    pub cols: usize,
    /// Sample size including pseudo-counts and margin-only counts.
    pub n: f64,
    pub complete: bool,
    /// `J = I(pi_hat)`.
    pub empirical_mi: f64,
    pub mean_exact: f64,
    pub mean_order2: Option<f64>,
    pub var_order1: f64,
    pub var_order2: Option<f64>,
    pub central3: Option<f64>,
    pub central4: Option<f64>,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub i_max: f64,
    /// Set when an approximate variance came out negative and was clamped.
    pub variance_clamped: bool,
}

impl MomentSummary {
    pub fn mean(&self) -> f64 {
        self.mean_exact
    }

    /// Most accurate variance available.
    pub fn variance(&self) -> f64 {
        self.var_order2.unwrap_or(self.var_order1)
    }
}

/// Applies the prior and computes every moment the data support.
pub fn summarize(table: &CountTable, prior: PriorSpec) -> Result<MomentSummary> {
    let t = table.with_prior(prior)?;
    if !t.is_complete() {
        let est = missing::leading_moments(&t)?;
        return Ok(MomentSummary {
            rows: t.rows(),
            cols: t.cols(),
            n: t.total(),
            complete: false,
            empirical_mi: est.mean,
            mean_exact: est.mean,
            mean_order2: None,
            var_order1: est.variance.value,
            var_order2: None,
            central3: None,
            central4: None,
            skewness: None,
            kurtosis: None,
            i_max: t.i_max(),
            variance_clamped: est.variance.clamped,
        });
    }
    let stats = core_stats(&t)?;
    let mean = mean_exact(&t)?;
    let v1 = variance(&stats, &t, VarianceOrder::First);
    let v2 = variance(&stats, &t, VarianceOrder::Second);
    let hm = central_moments_34(&stats, &t);
    Ok(MomentSummary {
        rows: t.rows(),
        cols: t.cols(),
        n: t.total(),
        complete: true,
        empirical_mi: stats.j,
        mean_exact: mean,
        mean_order2: Some(mean_order2(&stats, &t)),
        var_order1: v1.value,
        var_order2: Some(v2.value),
        central3: Some(hm.central3),
        central4: Some(hm.central4),
        skewness: hm.skewness,
        kurtosis: hm.kurtosis,
        i_max: t.i_max(),
        variance_clamped: v1.clamped || v2.clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::psi;
    use approx::assert_abs_diff_eq;

    fn table(s: &str) -> CountTable {
        CountTable::parse_inline(s).unwrap()
    }

    /// Direct evaluation of the defining sums, kept separate from the
    /// single-pass implementation.
    fn brute_stats(t: &CountTable) -> [f64; 6] {
        let (r, s) = (t.rows(), t.cols());
        let n = t.complete_total();
        let ni: Vec<f64> = (0..r).map(|i| (0..s).map(|j| t.get(i, j)).sum()).collect();
        let nj: Vec<f64> = (0..s).map(|j| (0..r).map(|i| t.get(i, j)).sum()).collect();
        let lr = |i: usize, j: usize| (t.get(i, j) * n / (ni[i] * nj[j])).ln();
        let mut out = [0.0; 6];
        for i in 0..r {
            for j in 0..s {
                let w = t.get(i, j) / n;
                out[0] += w * lr(i, j);
                out[1] += w * lr(i, j).powi(2);
                out[2] += w * lr(i, j).powi(3);
                out[3] += (1.0 / t.get(i, j) - 1.0 / ni[i] - 1.0 / nj[j] + 1.0 / n) * t.get(i, j) * lr(i, j);
                out[5] += t.get(i, j).powi(2) / (ni[i] * nj[j]);
            }
        }
        out[5] = 1.0 - out[5];
        for i in 0..r {
            let ji: f64 = (0..s).map(|j| t.get(i, j) / n * lr(i, j)).sum();
            out[4] += n * ji * ji / ni[i];
        }
        for j in 0..s {
            let jj: f64 = (0..r).map(|i| t.get(i, j) / n * lr(i, j)).sum();
            out[4] += n * jj * jj / nj[j];
        }
        out
    }

    #[test]
    fn empirical_mi_examples() {
        for k in [1.0, 3.0, 250.0] {
            let t = CountTable::new(2, 2, vec![k; 4]).unwrap();
            assert_abs_diff_eq!(empirical_mi(&t).unwrap(), 0.0, epsilon = 1e-15);
            let t = CountTable::new(2, 2, vec![k, 0.0, 0.0, k]).unwrap();
            assert_abs_diff_eq!(empirical_mi(&t).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        }
        // (40,10;20,80): sum of (n_ij/n) ln(n_ij n/(n_i+ n_+j)) by hand
        let expected = (40.0 / 150.0) * (40.0 * 150.0 / (50.0 * 60.0f64)).ln()
            + (10.0 / 150.0) * (10.0 * 150.0 / (50.0 * 90.0f64)).ln()
            + (20.0 / 150.0) * (20.0 * 150.0 / (100.0 * 60.0f64)).ln()
            + (80.0 / 150.0) * (80.0 * 150.0 / (100.0 * 90.0f64)).ln();
        let got = empirical_mi(&table("40,10;20,80")).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-14);
        // independent double-precision evaluation of the same sum
        assert_abs_diff_eq!(got, 0.172_609_243_471_068_5, epsilon = 1e-14);
    }

    #[test]
    fn empirical_mi_of_empty_complete_part() {
        let t = CountTable::with_missing(2, 2, vec![0.0; 4], vec![1.0, 2.0], vec![0.0; 2]).unwrap();
        assert!(matches!(empirical_mi(&t), Err(MiError::UndefinedDistribution(_))));
    }

    #[test]
    fn core_stats_match_brute_force() {
        for s in ["40,10;20,80", "8,2;4,16", "3,1,2;5,7,1;2,2,9", "1.5,2.5;0.5,4"] {
            let t = table(s);
            let st = core_stats(&t).unwrap();
            let b = brute_stats(&t);
            for (got, want) in [st.j, st.k, st.l, st.m, st.p, st.q].iter().zip(b) {
                assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(st.j, empirical_mi(&t).unwrap(), epsilon = 1e-14);
            assert!(st.k >= st.j * st.j);
            assert!(st.q <= 1.0);
        }
    }

    #[test]
    fn core_stats_vanish_under_independence() {
        for t in [table("3,3;3,3"), CountTable::new(2, 3, vec![4.0; 6]).unwrap()] {
            let st = core_stats(&t).unwrap();
            for v in [st.j, st.k, st.l, st.m, st.p, st.q] {
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn core_stats_rejects_zero_cell() {
        assert_eq!(
            core_stats(&table("1,2;0,4")).unwrap_err(),
            MiError::ZeroCell { row: 1, col: 0 }
        );
    }

    #[test]
    fn mean_exact_unit_table() {
        let t = table("1,1;1,1");
        let by_psi = psi(2.0).unwrap() - 2.0 * psi(3.0).unwrap() + psi(5.0).unwrap();
        assert_abs_diff_eq!(mean_exact(&t).unwrap(), by_psi, epsilon = 1e-14);
        assert_abs_diff_eq!(mean_exact(&t).unwrap(), 1.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn mean_exact_independent_tends_to_correction() {
        for k in [100.0, 1000.0, 10000.0] {
            let t = CountTable::new(2, 2, vec![k; 4]).unwrap();
            let n = 4.0 * k;
            let m = mean_exact(&t).unwrap();
            assert!((m - 1.0 / (2.0 * n)).abs() < 2.0 / (n * n));
        }
    }

    #[test]
    fn mean_exact_accepts_zero_cells_and_rejects_missing() {
        let m = mean_exact(&table("5,0;0,5")).unwrap();
        assert!(m > 0.0 && m < std::f64::consts::LN_2);
        let t = CountTable::with_missing(2, 2, vec![1.0; 4], vec![1.0, 0.0], vec![0.0; 2]).unwrap();
        assert!(matches!(mean_exact(&t), Err(MiError::Unsupported(_))));
    }

    #[test]
    fn mean_order2_examples() {
        for k in [1.0, 7.0] {
            let t = CountTable::new(2, 2, vec![k; 4]).unwrap();
            let st = core_stats(&t).unwrap();
            assert_abs_diff_eq!(mean_order2(&st, &t), 1.0 / (2.0 * (4.0 * k + 1.0)), epsilon = 1e-15);
        }
        let t = table("40,10;20,80");
        let st = core_stats(&t).unwrap();
        assert_abs_diff_eq!(mean_order2(&st, &t), st.j + 1.0 / 302.0, epsilon = 1e-15);
    }

    #[test]
    fn variance_unit_table() {
        let t = table("1,1;1,1");
        let st = core_stats(&t).unwrap();
        assert_eq!(variance(&st, &t, VarianceOrder::First).value, 0.0);
        assert_abs_diff_eq!(variance(&st, &t, VarianceOrder::Second).value, 1.0 / 60.0, epsilon = 1e-15);
        let k = 5.0;
        let t = CountTable::new(2, 2, vec![k; 4]).unwrap();
        let st = core_stats(&t).unwrap();
        let n = 4.0 * k;
        assert_abs_diff_eq!(
            variance(&st, &t, VarianceOrder::Second).value,
            0.5 / ((n + 1.0) * (n + 2.0)),
            epsilon = 1e-15
        );
    }

    #[test]
    fn negative_second_order_variance_is_clamped() {
        let st = CoreStats {
            j: 0.6,
            k: 0.36,
            l: 0.0,
            m: -50.0,
            p: 0.0,
            q: 0.9,
            cell_terms: vec![],
            row_terms: vec![],
            col_terms: vec![],
        };
        let t = table("1,1;1,1");
        let v = variance(&st, &t, VarianceOrder::Second);
        assert!(v.clamped);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn higher_moments_vanish_under_independence() {
        let t = table("4,4;4,4");
        let st = core_stats(&t).unwrap();
        let hm = central_moments_34(&st, &t);
        assert_eq!(hm.central3, 0.0);
        assert_eq!(hm.central4, 0.0);
        assert_eq!(hm.skewness, None);
        assert_eq!(hm.kurtosis, None);
    }

    #[test]
    fn summarize_uniform_and_prior_only() {
        let s = summarize(&table("1,1;1,1"), PriorSpec::none()).unwrap();
        assert_abs_diff_eq!(s.mean_exact, 1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.var_order2.unwrap(), 1.0 / 60.0, epsilon = 1e-15);
        assert!(s.complete);

        let t = CountTable::prior_only(2, 2, PriorSpec::jeffreys()).unwrap();
        let s = summarize(&t, PriorSpec::none()).unwrap();
        assert_eq!(s.empirical_mi, 0.0);
        assert_abs_diff_eq!(s.mean_order2.unwrap(), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn summarize_lower_figure_group() {
        let s = summarize(&table("8,2;4,16"), PriorSpec::none()).unwrap();
        assert!(s.mean_exact > 0.0 && s.mean_exact < s.i_max);
        assert!(s.var_order2.unwrap() > 0.0);
        assert!(s.var_order2.unwrap() < s.mean_exact * (s.i_max - s.mean_exact));
    }

    #[test]
    fn summarize_propagates_zero_cells() {
        assert!(summarize(&table("3,0;2,4"), PriorSpec::none()).is_err());
        assert!(summarize(&table("3,0;2,4"), PriorSpec::uniform()).is_ok());
    }
}
