//! Contingency counts for two categorical variables.
//!
//! A [`CountTable`] holds the joint counts `n_ij` of an `r x s` table and,
//! for incomplete samples, the margin-only counts: `row_missing[i]` counts
//! units where only the row variable was observed (value `i`), and
//! `col_missing[j]` counts units where only the column variable was observed.
//! Counts are real-valued so that fractional prior pseudo-counts fit in the
//! same representation.

use serde::{Deserialize, Serialize};

use crate::error::{MiError, Result};

/// Joint and margin-only counts of an `r x s` contingency table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    rows: usize,
    cols: usize,
    counts: Vec<f64>,
    row_missing: Vec<f64>,
    col_missing: Vec<f64>,
}

/// Uniform Dirichlet pseudo-count added to every joint cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub pseudo_count_per_cell: f64,
}

impl PriorSpec {
    pub fn new(pseudo_count_per_cell: f64) -> Result<Self> {
        if !(pseudo_count_per_cell >= 0.0) || !pseudo_count_per_cell.is_finite() {
            return Err(MiError::InvalidPrior(pseudo_count_per_cell));
        }
        Ok(Self {
            pseudo_count_per_cell,
        })
    }

    /// Haldane's prior: no pseudo-counts.
    pub const fn none() -> Self {
        Self {
            pseudo_count_per_cell: 0.0,
        }
    }

    /// Bayes-Laplace uniform prior (one pseudo-count per cell).
    pub const fn uniform() -> Self {
        Self {
            pseudo_count_per_cell: 1.0,
        }
    }

    /// Jeffreys-style prior, one half per cell.
    pub const fn jeffreys() -> Self {
        Self {
            pseudo_count_per_cell: 0.5,
        }
    }

    /// Perks prior `1/(rs)` per cell.
    pub fn perks(rows: usize, cols: usize) -> Self {
        Self {
            pseudo_count_per_cell: 1.0 / (rows * cols) as f64,
        }
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// Row sums, column sums and grand total of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub row_sums: Vec<f64>,
    pub col_sums: Vec<f64>,
    /// Total sample size including margin-only counts.
    pub total: f64,
}

fn check_entries(what: &str, values: &[f64]) -> Result<()> {
    for (k, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(MiError::InvalidTable(format!(
                "{what}[{k}] = {v} is not a finite nonnegative count"
            )));
        }
    }
    Ok(())
}

impl CountTable {
    /// Builds a complete-data table from row-major joint counts.
    pub fn new(rows: usize, cols: usize, counts: Vec<f64>) -> Result<Self> {
        Self::with_missing(rows, cols, counts, vec![0.0; rows], vec![0.0; cols])
    }

    /// Builds a table with margin-only counts `n_i?` (`row_missing`) and
    /// `n_?j` (`col_missing`).
    pub fn with_missing(
        rows: usize,
        cols: usize,
        counts: Vec<f64>,
        row_missing: Vec<f64>,
        col_missing: Vec<f64>,
    ) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(MiError::InvalidTable(format!(
                "need at least 2 rows and 2 columns, got {rows}x{cols}"
            )));
        }
        if counts.len() != rows * cols {
            return Err(MiError::InvalidTable(format!(
                "expected {} joint counts, got {}",
                rows * cols,
                counts.len()
            )));
        }
        if row_missing.len() != rows || col_missing.len() != cols {
            return Err(MiError::InvalidTable(format!(
                "margin-only counts must have lengths {rows} and {cols}, got {} and {}",
                row_missing.len(),
                col_missing.len()
            )));
        }
        check_entries("counts", &counts)?;
        check_entries("row_missing", &row_missing)?;
        check_entries("col_missing", &col_missing)?;
        let table = Self {
            rows,
            cols,
            counts,
            row_missing,
            col_missing,
        };
        if !(table.total() > 0.0) {
            return Err(MiError::InvalidTable("total count is zero".into()));
        }
        Ok(table)
    }

    /// Table of `rows x cols` cells holding only the prior pseudo-counts,
    /// i.e. the posterior before any data has been observed.
    pub fn prior_only(rows: usize, cols: usize, prior: PriorSpec) -> Result<Self> {
        let a = prior.pseudo_count_per_cell;
        if !(a >= 0.0) || !a.is_finite() {
            return Err(MiError::InvalidPrior(a));
        }
        Self::new(rows, cols, vec![a; rows * cols])
    }

    /// Builds a complete table from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let s = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != s) {
            return Err(MiError::InvalidTable("ragged rows".into()));
        }
        Self::new(r, s, rows.concat())
    }

    /// Parses the inline syntax `a,b;c,d` (rows separated by `;`).
    pub fn parse_inline(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, row) in text.split(';').enumerate() {
            let row = row.trim();
            if row.is_empty() {
                return Err(MiError::InvalidArgument(format!("row {i} is empty")));
            }
            let values = row
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        MiError::InvalidArgument(format!("row {i}: cannot parse count {cell:?}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(values);
        }
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Joint count `n_ij`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.cols + j]
    }

    /// Row-major joint counts.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn row_missing(&self) -> &[f64] {
        &self.row_missing
    }

    pub fn col_missing(&self) -> &[f64] {
        &self.col_missing
    }

    pub fn has_row_missing(&self) -> bool {
        self.row_missing.iter().any(|&v| v > 0.0)
    }

    pub fn has_col_missing(&self) -> bool {
        self.col_missing.iter().any(|&v| v > 0.0)
    }

    /// True when there are no margin-only counts.
    pub fn is_complete(&self) -> bool {
        !self.has_row_missing() && !self.has_col_missing()
    }

    /// `n_i+`, summed over the complete part only.
    pub fn row_sums(&self) -> Vec<f64> {
        self.counts
            .chunks_exact(self.cols)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// `n_+j`, summed over the complete part only.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.counts.chunks_exact(self.cols) {
            for (acc, &v) in sums.iter_mut().zip(row) {
                *acc += v;
            }
        }
        sums
    }

    /// Number of complete units `sum_ij n_ij`.
    pub fn complete_total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Sample size including margin-only counts.
    pub fn total(&self) -> f64 {
        self.complete_total()
            + self.row_missing.iter().sum::<f64>()
            + self.col_missing.iter().sum::<f64>()
    }

    pub fn marginals(&self) -> Marginals {
        Marginals {
            row_sums: self.row_sums(),
            col_sums: self.col_sums(),
            total: self.total(),
        }
    }

    /// Adds the prior pseudo-count to every joint cell. Margin-only counts
    /// are left untouched.
    pub fn with_prior(&self, prior: PriorSpec) -> Result<Self> {
        let a = prior.pseudo_count_per_cell;
        if !(a >= 0.0) || !a.is_finite() {
            return Err(MiError::InvalidPrior(a));
        }
        let mut out = self.clone();
        if a > 0.0 {
            out.counts.iter_mut().for_each(|c| *c += a);
        }
        Ok(out)
    }

    /// Swaps the roles of the two variables.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0.0; self.counts.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                counts[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            counts,
            row_missing: self.col_missing.clone(),
            col_missing: self.row_missing.clone(),
        }
    }

    /// Complete part only, margin-only counts dropped.
    pub fn complete_part(&self) -> Result<Self> {
        Self::new(self.rows, self.cols, self.counts.clone())
    }

    /// First joint cell with a zero count, if any.
    pub fn first_zero_cell(&self) -> Option<(usize, usize)> {
        self.counts
            .iter()
            .position(|&c| c <= 0.0)
            .map(|k| (k / self.cols, k % self.cols))
    }

    /// Sharp upper bound `min(ln r, ln s)` of the mutual information.
    pub fn i_max(&self) -> f64 {
        (self.rows.min(self.cols) as f64).ln()
    }
}
