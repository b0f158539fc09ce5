//! Command-line front end.
//!
//! JSON goes to stdout, CSV artifacts to `--out` paths. Exit codes: 0 on
//! success, 2 for usage and input errors, 3 for numerical failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::dataio::{self, Dataset, ReadOptions, Schema};
use crate::distfit::{self, Family};
use crate::error::{MiError, Result};
use crate::filters::{self, FilterConfig, FilterKind};
use crate::mc::{self, McConfig};
use crate::missing;
use crate::moments;
use crate::nb;
use crate::table::{CountTable, PriorSpec};

/// Version of the JSON documents printed by every subcommand.
pub const SCHEMA_VERSION: u32 = 1;

/// When set (to anything but `0`), randomized commands refuse to run
/// without an explicit `--seed`.
pub const DETERMINISTIC_ENV: &str = "BAYESMI_DETERMINISTIC";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bayesmi", version, about = "Posterior distribution of mutual information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Posterior mean, variance, skewness and kurtosis of I.
    Moments {
        #[command(flatten)]
        input: TableArgs,
        /// Dirichlet pseudo-count added to every cell.
        #[arg(long, default_value_t = 0.0)]
        prior: f64,
    },
    /// Moment-matched approximation of p(I | n) as a curve.
    Fit {
        #[command(flatten)]
        input: TableArgs,
        #[arg(long, default_value_t = 0.0)]
        prior: f64,
        /// One or more of gaussian, gamma, beta.
        #[arg(long, value_delimiter = ',', default_value = "beta")]
        family: Vec<Family>,
        /// Grid points of the exported curve.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Add Monte Carlo density and cdf columns to the curve.
        #[arg(long)]
        compare_mc: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Curve CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo reference for p(I | n).
    Mc {
        #[command(flatten)]
        input: TableArgs,
        #[arg(long, default_value_t = 0.0)]
        prior: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Worker threads (0 = all cores); results do not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Burn-in of the imputation chain used for incomplete tables.
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        /// Histogram CSV (x,density) destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Empirical cdf CSV (x,cumulative) destination.
        #[arg(long)]
        ecdf_out: Option<PathBuf>,
    },
    /// Maximum-likelihood chances under missing data, by EM.
    Em {
        #[command(flatten)]
        input: TableArgs,
        #[arg(long, default_value_t = 0.0)]
        prior: f64,
        #[arg(long, default_value_t = missing::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = missing::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Apply F, FF and/or BF to every attribute of a dataset.
    Filter {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Decision log CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sequential naive Bayes evaluation of the filters.
    Seqlearn {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Seed of the instance shuffle.
        #[arg(long)]
        seed: u64,
        /// Keep the file order instead of shuffling.
        #[arg(long)]
        no_shuffle: bool,
        /// Drop instances with missing values first.
        #[arg(long)]
        complete_cases: bool,
        /// Accuracy-curve CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Attribute-usage CSV destination.
        #[arg(long)]
        usage_out: Option<PathBuf>,
    },
    /// Print version information.
    Version,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Categorical CSV file.
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, default_value = dataio::DEFAULT_MISSING_TOKEN)]
    missing_token: String,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    /// Zero-based class column (default: last).
    #[arg(long)]
    class_column: Option<usize>,
    /// Sidecar schema with `name: v1,v2,...` lines.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Inline counts, rows separated by `;`, e.g. `40,10;20,80`.
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    counts: Option<String>,
    /// Row-only counts n_i? for inline tables, comma separated.
    #[arg(long, requires = "counts")]
    row_missing: Option<String>,
    /// Column-only counts n_?j for inline tables, comma separated.
    #[arg(long, requires = "counts")]
    col_missing: Option<String>,
    /// Categorical CSV; the table is attribute `--attr` against the class.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, requires = "csv", default_value_t = 0)]
    attr: usize,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, default_value = dataio::DEFAULT_MISSING_TOKEN)]
    missing_token: String,
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    class_column: Option<usize>,
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long, value_delimiter = ',', default_value = "F,FF,BF")]
    filters: Vec<FilterKind>,
    #[arg(long, default_value_t = filters::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = filters::DEFAULT_P_BAR)]
    pbar: f64,
    #[arg(long, default_value = "beta")]
    family: Family,
    /// Pseudo-count for the filters and the classifier.
    #[arg(long, default_value_t = 1.0)]
    prior: f64,
}

impl FilterArgs {
    fn configs(&self) -> Result<Vec<FilterConfig>> {
        let prior = PriorSpec::new(self.prior)?;
        self.filters
            .iter()
            .map(|&kind| {
                let c = FilterConfig {
                    epsilon: self.epsilon,
                    p_bar: self.pbar,
                    kind,
                    family: self.family,
                    prior,
                };
                c.validate().map(|_| c)
            })
            .collect()
    }
}

fn read_options(
    delimiter: char,
    missing_token: &str,
    no_header: bool,
    class_column: Option<usize>,
    schema: Option<&Path>,
) -> Result<ReadOptions> {
    let delimiter = u8::try_from(delimiter)
        .map_err(|_| MiError::InvalidArgument(format!("delimiter {delimiter:?} is not a single byte")))?;
    Ok(ReadOptions {
        delimiter,
        missing_token: missing_token.to_string(),
        has_header: !no_header,
        class_column,
        schema: schema.map(Schema::read).transpose()?,
    })
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let opts = read_options(
            self.delimiter,
            &self.missing_token,
            self.no_header,
            self.class_column,
            self.schema.as_deref(),
        )?;
        dataio::read_csv_path(&self.csv, &opts)
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .enumerate()
        .map(|(k, v)| {
            v.trim().parse::<f64>().map_err(|_| MiError::Parse {
                row: 0,
                col: k,
                msg: format!("{v:?} is not a number"),
            })
        })
        .collect()
}

impl TableArgs {
    fn load(&self) -> Result<CountTable> {
        if let Some(text) = &self.counts {
            let t = CountTable::parse_inline(text)?;
            if self.row_missing.is_none() && self.col_missing.is_none() {
                return Ok(t);
            }
            let rm = match &self.row_missing {
                Some(s) => parse_list(s)?,
                None => vec![0.0; t.rows()],
            };
            let cm = match &self.col_missing {
                Some(s) => parse_list(s)?,
                None => vec![0.0; t.cols()],
            };
            return CountTable::with_missing(t.rows(), t.cols(), t.counts().to_vec(), rm, cm);
        }
        let path = self.csv.as_ref().expect("clap requires --counts or --csv");
        let opts = read_options(
            self.delimiter,
            &self.missing_token,
            self.no_header,
            self.class_column,
            self.schema.as_deref(),
        )?;
        dataio::read_csv_path(path, &opts)?.attribute_class_table(self.attr)
    }

    fn load_with_prior(&self, prior: f64) -> Result<CountTable> {
        self.load()?.with_prior(PriorSpec::new(prior)?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| MiError::Io(format!("{}: {e}", path.display())))
}

fn emit<W: Write + ?Sized>(out: &mut W, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| MiError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn deterministic_mode() -> bool {
    std::env::var_os(DETERMINISTIC_ENV).is_some_and(|v| !v.is_empty() && v != "0")
}

fn resolve_seed(seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None if deterministic_mode() => Err(MiError::InvalidArgument(format!(
            "--seed is required when {DETERMINISTIC_ENV} is set"
        ))),
        None => Ok(rand::random()),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing JSON to `stdout`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            if e.use_stderr() {
                eprint!("{e}");
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

#[derive(Serialize)]
struct Header<T: Serialize> {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

fn document<T: Serialize>(command: &'static str, body: T) -> Result<serde_json::Value> {
    serde_json::to_value(Header {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    })
    .map_err(|e| MiError::Io(e.to_string()))
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Moments { input, prior } => {
            let table = input.load()?;
            let summary = moments::summarize(&table, PriorSpec::new(prior)?)?;
            emit(stdout, &document("moments", json!({ "prior": prior, "summary": summary }))?)
        }
        Command::Fit {
            input,
            prior,
            family,
            points,
            compare_mc,
            samples,
            seed,
            out,
        } => {
            let table = input.load_with_prior(prior)?;
            let summary = moments::summarize(&table, PriorSpec::none())?;
            let (mean, var) = (summary.mean(), summary.variance());
            let fits = family
                .iter()
                .map(|&f| distfit::fit(mean, var, summary.i_max, f))
                .collect::<Result<Vec<_>>>()?;
            let hi = summary.i_max.min(mean + 8.0 * var.sqrt());
            let grid: Vec<f64> = (0..points.max(2))
                .map(|k| hi * k as f64 / (points.max(2) - 1) as f64)
                .collect();
            let reference = if compare_mc {
                let seed = resolve_seed(seed)?;
                Some(mc::mi_posterior_mc(&table, &McConfig::new(samples, seed))?)
            } else {
                None
            };
            let mut ks = Vec::new();
            if let Some(r) = &reference {
                for d in &fits {
                    ks.push(json!({ "family": d.family, "sup_distance": r.ks_distance(|x| d.cdf(x)) }));
                }
            }
            if let Some(path) = &out {
                let mut w = create(path)?;
                let mut header = vec!["x".to_string()];
                for d in &fits {
                    header.push(format!("{}_pdf", d.family));
                    header.push(format!("{}_cdf", d.family));
                }
                if reference.is_some() {
                    header.push("mc_density".into());
                    header.push("mc_cdf".into());
                }
                writeln!(w, "{}", header.join(","))?;
                let h = grid.get(1).copied().unwrap_or(0.0);
                for &x in &grid {
                    let mut row = vec![x.to_string()];
                    for d in &fits {
                        row.push(d.pdf(x).to_string());
                        row.push(d.cdf(x).to_string());
                    }
                    if let Some(r) = &reference {
                        let lo = (x - 0.5 * h).max(0.0);
                        let density = (r.ecdf(x + 0.5 * h) - r.ecdf(lo)) / (x + 0.5 * h - lo);
                        row.push(density.to_string());
                        row.push(r.ecdf(x).to_string());
                    }
                    writeln!(w, "{}", row.join(","))?;
                }
                w.flush()?;
            }
            let body = json!({
                "mean": mean,
                "variance": var,
                "i_max": summary.i_max,
                "fits": fits,
                "mc": reference.as_ref().map(|r| json!({
                    "samples": r.sample_count,
                    "seed": r.seed,
                    "mean": r.mean,
                    "variance": r.variance,
                    "ks": ks,
                })),
            });
            emit(stdout, &document("fit", body)?)
        }
        Command::Mc {
            input,
            prior,
            samples,
            seed,
            workers,
            bins,
            burn_in,
            out,
            ecdf_out,
        } => {
            let table = input.load_with_prior(prior)?;
            let config = McConfig::new(samples, seed).with_workers(workers).with_bins(bins);
            let result = if table.is_complete() {
                mc::mi_posterior_mc(&table, &config)?
            } else {
                mc::incomplete_posterior_mc(&table, &config, burn_in)?
            };
            if let Some(path) = &out {
                let mut w = create(path)?;
                result.histogram.write_csv(&mut w)?;
                w.flush()?;
            }
            if let Some(path) = &ecdf_out {
                let mut w = create(path)?;
                result.write_ecdf_csv(&mut w, 1000)?;
                w.flush()?;
            }
            let mut body = serde_json::to_value(&result).map_err(|e| MiError::Io(e.to_string()))?;
            if let Some(obj) = body.as_object_mut() {
                obj.remove("histogram");
                obj.insert("i_max".into(), json!(table.i_max()));
            }
            emit(stdout, &document("mc", body)?)
        }
        Command::Em {
            input,
            prior,
            tol,
            max_iter,
        } => {
            let table = input.load_with_prior(prior)?;
            let mle = missing::em_mle(&table, tol, max_iter)?;
            let variance = if table.has_row_missing() && table.has_col_missing() {
                let cov = missing::covariance_general(&table, &mle)?;
                missing::variance_general(&table, &mle, &cov)?
            } else {
                missing::variance_one_side(&table, &mle)?
            };
            let body = json!({
                "rows": mle.rows,
                "cols": mle.cols,
                "pi_hat": mle.pi_hat,
                "iterations": mle.iterations,
                "final_residual": mle.final_residual,
                "log_likelihood": mle.loglik_trace.last(),
                "mean_leading": missing::mean_leading(&mle),
                "variance_leading": variance,
            });
            emit(stdout, &document("em", body)?)
        }
        Command::Filter { data, filter, out } => {
            let ds = data.load()?;
            let tables = (0..ds.attributes.len())
                .map(|a| ds.attribute_class_table(a))
                .collect::<Result<Vec<_>>>()?;
            let mut decisions = Vec::new();
            for config in filter.configs()? {
                decisions.extend(filters::decide_all(&tables, &config)?);
            }
            if let Some(path) = &out {
                let mut w = create(path)?;
                filters::write_decision_log(&mut w, &decisions)?;
                w.flush()?;
            }
            let names: Vec<&str> = ds.attributes.iter().map(|a| a.name.as_str()).collect();
            emit(
                stdout,
                &document("filter", json!({ "attributes": names, "decisions": decisions }))?,
            )
        }
        Command::Seqlearn {
            data,
            filter,
            seed,
            no_shuffle,
            complete_cases,
            out,
            usage_out,
        } => {
            let mut ds = data.load()?;
            if complete_cases {
                ds = ds.complete_cases();
            }
            if !no_shuffle {
                ds.instances.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
            let runs = nb::run_many(&ds, &filter.configs()?)?;
            if let Some(path) = &out {
                let mut w = create(path)?;
                nb::write_accuracy_curve(&mut w, &runs)?;
                w.flush()?;
            }
            if let Some(path) = &usage_out {
                let mut w = create(path)?;
                nb::write_attribute_usage(&mut w, &runs)?;
                w.flush()?;
            }
            let summaries: Vec<_> = runs
                .iter()
                .map(|r| {
                    json!({
                        "filter": r.kind,
                        "final_accuracy": r.final_accuracy(),
                        "mean_attributes": r.mean_attributes,
                        "unseen_values": r.unseen_values,
                    })
                })
                .collect();
            let comparison = match (
                runs.iter().find(|r| r.kind == FilterKind::FF),
                runs.iter().find(|r| r.kind == FilterKind::F),
            ) {
                (Some(ff), Some(f)) if ff.correct.len() >= 2 => {
                    Some(nb::paired_t_test(&ff.correct, &f.correct)?)
                }
                _ => None,
            };
            let body = json!({
                "instances": ds.len(),
                "seed": seed,
                "shuffled": !no_shuffle,
                "runs": summaries,
                "ff_vs_f": comparison,
            });
            emit(stdout, &document("seqlearn", body)?)
        }
        Command::Version => emit(
            stdout,
            &document(
                "version",
                json!({ "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") }),
            )?,
        ),
    }
}
