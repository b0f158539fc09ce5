//! Feature-selection filters on attribute-vs-class count tables.
//!
//! * `F` includes an attribute when the empirical mutual information exceeds
//!   `epsilon`.
//! * `FF` (forward) includes it when `p(I > epsilon | n) > p_bar`.
//! * `BF` (backward) discards it when `p(I < epsilon | n) > p_bar`.
//!
//! The posterior tail masses come from a moment-matched fit (Beta by
//! default) using the exact mean and the second-order variance, or the
//! leading-order mean and variance when attribute values are missing.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distfit::{self, Family};
use crate::error::{MiError, Result};
use crate::moments::{self, MomentSummary};
use crate::table::{CountTable, PriorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterKind {
    F,
    FF,
    BF,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::F, FilterKind::FF, FilterKind::BF];
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            FilterKind::F => "F",
            FilterKind::FF => "FF",
            FilterKind::BF => "BF",
        })
    }
}

impl FromStr for FilterKind {
    type Err = MiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F" => Ok(FilterKind::F),
            "FF" => Ok(FilterKind::FF),
            "BF" => Ok(FilterKind::BF),
            other => Err(MiError::InvalidArgument(format!("unknown filter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Include,
    Discard,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Include => "include",
            Verdict::Discard => "discard",
        })
    }
}

pub const DEFAULT_EPSILON: f64 = 0.003;
pub const DEFAULT_P_BAR: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Threshold on the mutual information, in nats.
    pub epsilon: f64,
    pub p_bar: f64,
    pub kind: FilterKind,
    pub family: Family,
    /// Pseudo-count added to every cell before any statistic is computed.
    pub prior: PriorSpec,
}

impl FilterConfig {
    pub fn new(kind: FilterKind) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            p_bar: DEFAULT_P_BAR,
            kind,
            family: Family::Beta,
            prior: PriorSpec::uniform(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(MiError::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.p_bar > 0.0 && self.p_bar < 1.0) {
            return Err(MiError::InvalidArgument(format!(
                "p_bar must lie in (0, 1), got {}",
                self.p_bar
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterDecision {
    pub attribute: usize,
    pub kind: FilterKind,
    pub verdict: Verdict,
    /// Empirical MI for `F`, `p(I > eps)` for `FF`, `p(I < eps)` for `BF`.
    pub statistic: f64,
    pub mean: f64,
    pub variance: f64,
    /// Family actually used for the tail mass; `None` for `F` and for a
    /// zero variance, where the posterior is treated as a point mass.
    pub family: Option<Family>,
    /// The requested family was infeasible and another was used.
    pub fallback: bool,
}

/// `p(I > epsilon)` under the fitted family, plus the family used and
/// whether a fallback happened.
fn tail_mass(summary: &MomentSummary, config: &FilterConfig) -> Result<(f64, Option<Family>, bool)> {
    let (mean, var) = (summary.mean(), summary.variance());
    if !(var > 0.0) {
        let above = if mean > config.epsilon { 1.0 } else { 0.0 };
        return Ok((above, None, true));
    }
    let mut fallback = false;
    for family in fallback_chain(config.family) {
        match distfit::fit(mean, var, summary.i_max, family) {
            Ok(d) => return Ok((d.tail_above(config.epsilon), Some(family), fallback)),
            Err(MiError::InfeasibleFit(_)) => fallback = true,
            Err(e) => return Err(e),
        }
    }
    // a nonpositive mean with positive variance: only the Gaussian is left
    let d = distfit::fit(mean, var, summary.i_max, Family::Gaussian)?;
    Ok((d.tail_above(config.epsilon), Some(Family::Gaussian), true))
}

fn fallback_chain(family: Family) -> Vec<Family> {
    match family {
        Family::Beta => vec![Family::Beta, Family::Gamma],
        other => vec![other],
    }
}

/// Applies one filter to one attribute.
pub fn decide(table: &CountTable, config: &FilterConfig) -> Result<FilterDecision> {
    decide_attribute(0, table, config)
}

/// [`decide`] with an attribute id recorded in the decision.
pub fn decide_attribute(attribute: usize, table: &CountTable, config: &FilterConfig) -> Result<FilterDecision> {
    config.validate()?;
    let summary = moments::summarize(table, config.prior)?;
    let (mean, variance) = (summary.mean(), summary.variance());
    let (verdict, statistic, family, fallback) = match config.kind {
        FilterKind::F => {
            let j = summary.empirical_mi;
            (include_if(j > config.epsilon), j, None, false)
        }
        FilterKind::FF => {
            let (above, fam, fb) = tail_mass(&summary, config)?;
            (include_if(above > config.p_bar), above, fam, fb)
        }
        FilterKind::BF => {
            let (above, fam, fb) = tail_mass(&summary, config)?;
            let below = 1.0 - above;
            (include_if(!(below > config.p_bar)), below, fam, fb)
        }
    };
    Ok(FilterDecision {
        attribute,
        kind: config.kind,
        verdict,
        statistic,
        mean,
        variance,
        family,
        fallback,
    })
}

fn include_if(cond: bool) -> Verdict {
    if cond {
        Verdict::Include
    } else {
        Verdict::Discard
    }
}

/// Decides every attribute and returns the ids of the included ones, in
/// input order.
pub fn select(tables: &[CountTable], config: &FilterConfig) -> Result<Vec<usize>> {
    Ok(decide_all(tables, config)?
        .into_iter()
        .filter(|d| d.verdict == Verdict::Include)
        .map(|d| d.attribute)
        .collect())
}

/// All decisions for a collection of attribute tables.
pub fn decide_all(tables: &[CountTable], config: &FilterConfig) -> Result<Vec<FilterDecision>> {
    if let Some(first) = tables.first() {
        if let Some(bad) = tables.iter().position(|t| t.cols() != first.cols()) {
            return Err(MiError::InvalidArgument(format!(
                "attribute {bad} has {} classes, expected {}",
                tables[bad].cols(),
                first.cols()
            )));
        }
    }
    tables
        .iter()
        .enumerate()
        .map(|(a, t)| decide_attribute(a, t, config))
        .collect()
}

/// `epsilon + 2 sd`: the threshold at which plain `F` mimics a Gaussian `FF`
/// with `p_bar` about 0.977. Diagnostic only.
pub fn ff_equivalent_threshold(summary: &MomentSummary, epsilon: f64) -> f64 {
    epsilon + 2.0 * summary.variance().max(0.0).sqrt()
}

/// Writes `attribute,kind,statistic,verdict` rows.
pub fn write_decision_log<W: Write>(mut out: W, decisions: &[FilterDecision]) -> Result<()> {
    writeln!(out, "attribute,kind,statistic,verdict")?;
    for d in decisions {
        writeln!(out, "{},{},{},{}", d.attribute, d.kind, d.statistic, d.verdict)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: FilterKind) -> FilterConfig {
        FilterConfig::new(kind)
    }

    #[test]
    fn perfectly_dependent_attribute_is_included() {
        let t = CountTable::parse_inline("50,0;0,50").unwrap();
        for kind in FilterKind::ALL {
            let d = decide(&t, &cfg(kind)).unwrap();
            assert_eq!(d.verdict, Verdict::Include, "{kind}");
        }
        let ff = decide(&t, &cfg(FilterKind::FF)).unwrap();
        assert!(ff.statistic > 1.0 - 1e-9);
    }

    #[test]
    fn independent_attribute_discarded_by_bf() {
        let t = CountTable::parse_inline("250,250;250,250").unwrap();
        let d = decide(&t, &cfg(FilterKind::BF)).unwrap();
        assert_eq!(d.verdict, Verdict::Discard);
        assert!(d.statistic > 0.95);
    }

    #[test]
    fn f_and_ff_can_disagree_at_small_n() {
        // empirical MI just above epsilon, posterior far too wide for FF
        let t = CountTable::parse_inline("7,5;5,7").unwrap();
        let f = decide(&t, &cfg(FilterKind::F)).unwrap();
        let ff = decide(&t, &cfg(FilterKind::FF)).unwrap();
        assert!(f.statistic > DEFAULT_EPSILON, "{}", f.statistic);
        assert_eq!(f.verdict, Verdict::Include);
        assert_eq!(ff.verdict, Verdict::Discard);
    }

    #[test]
    fn select_preserves_order_and_handles_empty() {
        assert!(select(&[], &cfg(FilterKind::FF)).unwrap().is_empty());
        let tables = vec![
            CountTable::parse_inline("50,0;0,50").unwrap(),
            CountTable::parse_inline("25,25;25,25").unwrap(),
            CountTable::parse_inline("40,5;5,40").unwrap(),
        ];
        assert_eq!(select(&tables, &cfg(FilterKind::FF)).unwrap(), vec![0, 2]);
        let mixed = vec![tables[0].clone(), CountTable::parse_inline("1,2,3;4,5,6;7,8,9").unwrap()];
        assert!(select(&mixed, &cfg(FilterKind::F)).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = CountTable::parse_inline("40,10;20,80").unwrap();
        let mut s = moments::summarize(&t, PriorSpec::none()).unwrap();
        s.var_order2 = Some(0.0);
        assert_eq!(ff_equivalent_threshold(&s, 0.003), 0.003);
        s.var_order2 = Some(2.5e-5);
        assert!((ff_equivalent_threshold(&s, 0.003) - 0.013).abs() < 1e-15);
    }

    #[test]
    fn missing_attribute_values_use_leading_moments() {
        let t = CountTable::with_missing(2, 2, vec![30.0, 5.0, 6.0, 28.0], vec![0.0; 2], vec![4.0, 7.0]).unwrap();
        let d = decide(&t, &cfg(FilterKind::FF)).unwrap();
        assert_eq!(d.verdict, Verdict::Include);
        let s = moments::summarize(&t, PriorSpec::uniform()).unwrap();
        assert!(!s.complete);
        assert_eq!(d.mean, s.mean_exact);
    }

    #[test]
    fn invalid_config_rejected() {
        let t = CountTable::parse_inline("5,5;5,5").unwrap();
        let mut c = cfg(FilterKind::FF);
        c.epsilon = 0.0;
        assert!(decide(&t, &c).is_err());
        c.epsilon = 0.003;
        c.p_bar = 1.0;
        assert!(decide(&t, &c).is_err());
    }

    #[test]
    fn decision_log_format() {
        let t = CountTable::parse_inline("50,0;0,50").unwrap();
        let d = decide(&t, &cfg(FilterKind::F)).unwrap();
        let mut buf = Vec::new();
        write_decision_log(&mut buf, &[d]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("attribute,kind,statistic,verdict\n0,F,"));
        assert!(text.trim_end().ends_with(",include"));
    }
}
