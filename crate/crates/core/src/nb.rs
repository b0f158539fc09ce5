//! Incremental naive Bayes and the sequential filter-evaluation protocol.
//!
//! Instances are read one at a time. Before each prediction every filter
//! decides, from the counts seen so far, which attributes to use; the
//! classifier then predicts, is scored, and absorbs the true class.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataio::Dataset;
use crate::error::{MiError, Result};
use crate::filters::{self, FilterConfig, FilterKind, Verdict};
use crate::table::{CountTable, PriorSpec};

/// Counts behind a naive Bayes classifier with uniform-prior smoothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveBayesState {
    prior: f64,
    class_counts: Vec<f64>,
    /// Per attribute, row-major `value x class` counts.
    tables: Vec<Vec<f64>>,
    domains: Vec<usize>,
    /// Per attribute and class, instances whose value was missing.
    missing: Vec<Vec<f64>>,
    instances: usize,
    /// Set once a value outside the declared domain has been absorbed.
    grown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub class: usize,
    pub posterior: Vec<f64>,
    /// The instance carried a value the classifier had no row for.
    pub unseen_value: bool,
}

impl NaiveBayesState {
    pub fn new(domains: &[usize], classes: usize, prior: f64) -> Result<Self> {
        if classes < 1 {
            return Err(MiError::InvalidArgument("need at least one class".into()));
        }
        if !(prior >= 0.0) || !prior.is_finite() {
            return Err(MiError::InvalidPrior(prior));
        }
        Ok(Self {
            prior,
            class_counts: vec![0.0; classes],
            tables: domains.iter().map(|&v| vec![0.0; v * classes]).collect(),
            domains: domains.to_vec(),
            missing: domains.iter().map(|_| vec![0.0; classes]).collect(),
            instances: 0,
            grown: false,
        })
    }

    pub fn for_dataset(ds: &Dataset, prior: f64) -> Result<Self> {
        Self::new(&ds.domain_sizes(), ds.class.cardinality(), prior)
    }

    pub fn classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_counts(&self) -> &[f64] {
        &self.class_counts
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn domain_grown(&self) -> bool {
        self.grown
    }

    pub fn count(&self, attribute: usize, value: usize, class: usize) -> f64 {
        self.tables[attribute][value * self.classes() + class]
    }

    fn check_width(&self, instance: &[Option<usize>]) -> Result<()> {
        if instance.len() != self.domains.len() {
            return Err(MiError::InvalidArgument(format!(
                "instance has {} values, classifier expects {}",
                instance.len(),
                self.domains.len()
            )));
        }
        Ok(())
    }

    /// Posterior over classes using only the `selected` attributes; missing
    /// values drop out of the product.
    pub fn predict(&self, instance: &[Option<usize>], selected: &[usize]) -> Result<Prediction> {
        self.check_width(instance)?;
        let c = self.classes();
        let a0 = self.prior;
        let mut logp: Vec<f64> = self.class_counts.iter().map(|&n| (n + a0).ln()).collect();
        let mut unseen_value = false;
        for &a in selected {
            let Some(x) = instance.get(a).copied().ok_or_else(|| {
                MiError::InvalidArgument(format!("selected attribute {a} does not exist"))
            })?
            else {
                continue;
            };
            let v = self.domains[a];
            let table = &self.tables[a];
            for (y, lp) in logp.iter_mut().enumerate() {
                let seen: f64 = (0..v).map(|k| table[k * c + y]).sum();
                let (num, dom) = if x < v {
                    (table[x * c + y], v)
                } else {
                    unseen_value = true;
                    (0.0, v + 1)
                };
                *lp += (num + a0).ln() - (seen + a0 * dom as f64).ln();
            }
        }
        let top = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logp.iter().map(|&l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let posterior: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let class = posterior
            .iter()
            .enumerate()
            .fold(0, |best, (k, &p)| if p > posterior[best] { k } else { best });
        Ok(Prediction {
            class,
            posterior,
            unseen_value,
        })
    }

    /// Adds one labelled instance. Values beyond an attribute's domain grow
    /// that attribute's table.
    pub fn update(&mut self, instance: &[Option<usize>], class: usize) -> Result<()> {
        self.check_width(instance)?;
        let c = self.classes();
        if class >= c {
            return Err(MiError::InvalidArgument(format!("class {class} out of range")));
        }
        for (a, value) in instance.iter().enumerate() {
            match *value {
                Some(x) => {
                    if x >= self.domains[a] {
                        self.tables[a].resize((x + 1) * c, 0.0);
                        self.domains[a] = x + 1;
                        self.grown = true;
                    }
                    self.tables[a][x * c + class] += 1.0;
                }
                None => self.missing[a][class] += 1.0,
            }
        }
        self.class_counts[class] += 1.0;
        self.instances += 1;
        Ok(())
    }

    /// Attribute-vs-class table with `prior` added to every joint cell and the
    /// missing-value tallies as class-only margins. `None` when the attribute
    /// has fewer than two values or there is a single class.
    pub fn attribute_table(&self, attribute: usize, prior: PriorSpec) -> Result<Option<CountTable>> {
        let (v, c) = (self.domains[attribute], self.classes());
        if v < 2 || c < 2 {
            return Ok(None);
        }
        let counts = self.tables[attribute]
            .iter()
            .map(|&n| n + prior.pseudo_count_per_cell)
            .collect();
        CountTable::with_missing(v, c, counts, vec![0.0; v], self.missing[attribute].clone()).map(Some)
    }
}

/// Outcome of one sequential pass with one filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialRunResult {
    pub kind: FilterKind,
    pub predictions: Vec<usize>,
    pub correct: Vec<bool>,
    pub selected_counts: Vec<usize>,
    /// Cumulative accuracy after each instance.
    pub accuracy: Vec<f64>,
    pub mean_attributes: f64,
    /// Some prediction met a value outside the classifier's tables.
    pub unseen_values: bool,
}

impl SequentialRunResult {
    pub fn final_accuracy(&self) -> f64 {
        self.accuracy.last().copied().unwrap_or(f64::NAN)
    }
}

/// Runs the sequential protocol for one filter configuration.
pub fn run_sequential(ds: &Dataset, config: &FilterConfig) -> Result<SequentialRunResult> {
    config.validate()?;
    ds.validate()?;
    let prior = config.prior;
    let table_config = FilterConfig {
        prior: PriorSpec::none(),
        ..*config
    };
    let mut state = NaiveBayesState::for_dataset(ds, prior.pseudo_count_per_cell)?;
    let n = ds.len();
    let mut out = SequentialRunResult {
        kind: config.kind,
        predictions: Vec::with_capacity(n),
        correct: Vec::with_capacity(n),
        selected_counts: Vec::with_capacity(n),
        accuracy: Vec::with_capacity(n),
        mean_attributes: 0.0,
        unseen_values: false,
    };
    let mut hits = 0usize;
    let mut selected = Vec::with_capacity(ds.attributes.len());
    for (k, inst) in ds.instances.iter().enumerate() {
        selected.clear();
        for a in 0..ds.attributes.len() {
            let Some(table) = state.attribute_table(a, prior)? else {
                continue;
            };
            let d = filters::decide_attribute(a, &table, &table_config).map_err(|e| {
                MiError::InvalidArgument(format!("instance {k}, attribute {a}: {e}"))
            })?;
            if d.verdict == Verdict::Include {
                selected.push(a);
            }
        }
        let p = state.predict(&inst.values, &selected)?;
        let ok = p.class == inst.class;
        hits += usize::from(ok);
        out.unseen_values |= p.unseen_value;
        out.predictions.push(p.class);
        out.correct.push(ok);
        out.selected_counts.push(selected.len());
        out.accuracy.push(hits as f64 / (k + 1) as f64);
        state.update(&inst.values, inst.class)?;
    }
    if n > 0 {
        out.mean_attributes = out.selected_counts.iter().sum::<usize>() as f64 / n as f64;
    }
    Ok(out)
}

/// Independent runs for several configurations, in parallel.
pub fn run_many(ds: &Dataset, configs: &[FilterConfig]) -> Result<Vec<SequentialRunResult>> {
    configs.par_iter().map(|c| run_sequential(ds, c)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub k: usize,
    /// `NaN` when the differences have zero variance.
    pub t: f64,
    pub p_value: f64,
    pub significant: bool,
    /// All differences were identical.
    pub degenerate: bool,
}

pub const T_TEST_LEVEL: f64 = 0.05;

fn t_from_sums(k: usize, sum: f64, sum_sq: f64) -> TTest {
    let kf = k as f64;
    let mean = sum / kf;
    let var = if k > 1 { ((sum_sq - kf * mean * mean) / (kf - 1.0)).max(0.0) } else { 0.0 };
    // differences are integers in {-1, 0, 1}; tiny variances are rounding
    if var <= 1e-12 {
        let constant_nonzero = mean.abs() > 0.5;
        return TTest {
            k,
            t: f64::NAN,
            p_value: if constant_nonzero { 0.0 } else { 1.0 },
            significant: constant_nonzero && k > 1,
            degenerate: true,
        };
    }
    let t = mean / (var / kf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, kf - 1.0).expect("positive degrees of freedom");
    let p_value = (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0);
    TTest {
        k,
        t,
        p_value,
        significant: p_value < T_TEST_LEVEL,
        degenerate: false,
    }
}

/// Two-tailed paired t-test on per-instance correctness indicators.
pub fn paired_t_test(a: &[bool], b: &[bool]) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(MiError::InvalidArgument(format!(
            "paired t-test needs equal lengths of at least 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(paired_t_curve(a, b)?.pop().expect("nonempty"))
}

/// The test on every prefix `k = 1..=len`.
pub fn paired_t_curve(a: &[bool], b: &[bool]) -> Result<Vec<TTest>> {
    if a.len() != b.len() {
        return Err(MiError::InvalidArgument("sequences differ in length".into()));
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (&x, &y))| {
            let d = f64::from(u8::from(x)) - f64::from(u8::from(y));
            sum += d;
            sum_sq += d * d;
            t_from_sums(k + 1, sum, sum_sq)
        })
        .collect())
}

fn find(runs: &[SequentialRunResult], kind: FilterKind) -> Option<&SequentialRunResult> {
    runs.iter().find(|r| r.kind == kind)
}

/// `k,acc_<kind>...,significant` rows. The flag compares FF with F when both
/// are present, otherwise the first two runs.
pub fn write_accuracy_curve<W: Write>(mut out: W, runs: &[SequentialRunResult]) -> Result<()> {
    let header: Vec<String> = runs.iter().map(|r| format!("acc_{}", r.kind)).collect();
    writeln!(out, "k,{},significant_flag", header.join(","))?;
    let pair = match (find(runs, FilterKind::FF), find(runs, FilterKind::F)) {
        (Some(ff), Some(f)) => Some((ff, f)),
        _ if runs.len() >= 2 => Some((&runs[0], &runs[1])),
        _ => None,
    };
    let tests = match pair {
        Some((a, b)) => Some(paired_t_curve(&a.correct, &b.correct)?),
        None => None,
    };
    let n = runs.first().map_or(0, |r| r.accuracy.len());
    for k in 0..n {
        let acc: Vec<String> = runs.iter().map(|r| r.accuracy[k].to_string()).collect();
        let flag = tests.as_ref().map_or(0, |t| u8::from(t[k].significant));
        writeln!(out, "{},{},{}", k + 1, acc.join(","), flag)?;
    }
    Ok(())
}

/// `k,used_<kind>...` rows: attributes selected before each prediction.
pub fn write_attribute_usage<W: Write>(mut out: W, runs: &[SequentialRunResult]) -> Result<()> {
    let header: Vec<String> = runs.iter().map(|r| format!("used_{}", r.kind)).collect();
    writeln!(out, "k,{}", header.join(","))?;
    let n = runs.first().map_or(0, |r| r.selected_counts.len());
    for k in 0..n {
        let used: Vec<String> = runs.iter().map(|r| r.selected_counts[k].to_string()).collect();
        writeln!(out, "{},{}", k + 1, used.join(","))?;
    }
    Ok(())
}
