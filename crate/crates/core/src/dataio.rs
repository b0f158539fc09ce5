//! Categorical datasets: CSV ingestion, attribute-vs-class tables and
//! synthetic generators.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{MiError, Result};
use crate::table::CountTable;

pub const DEFAULT_MISSING_TOKEN: &str = "?";

/// A categorical variable and its ordered value labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }
}

/// One row: attribute value indices (`None` = missing) and the class index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub values: Vec<Option<usize>>,
    pub class: usize,
}

/// Categorical data with a never-missing class column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dataset {
    pub attributes: Vec<Variable>,
    pub class: Variable,
    pub instances: Vec<Instance>,
}

impl Dataset {
    /// Checks dimensions and that every index lies in its domain.
    pub fn validate(&self) -> Result<()> {
        for (row, inst) in self.instances.iter().enumerate() {
            if inst.values.len() != self.attributes.len() {
                return Err(MiError::Parse {
                    row,
                    col: inst.values.len(),
                    msg: format!("expected {} attribute values", self.attributes.len()),
                });
            }
            if inst.class >= self.class.cardinality() {
                return Err(MiError::Parse {
                    row,
                    col: self.attributes.len(),
                    msg: format!("class index {} out of range", inst.class),
                });
            }
            for (a, v) in inst.values.iter().enumerate() {
                if let Some(v) = v {
                    if *v >= self.attributes[a].cardinality() {
                        return Err(MiError::Parse {
                            row,
                            col: a,
                            msg: format!("value index {v} out of range"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.attributes.iter().map(Variable::cardinality).collect()
    }

    /// Drops every instance with a missing attribute value.
    pub fn complete_cases(&self) -> Dataset {
        Dataset {
            attributes: self.attributes.clone(),
            class: self.class.clone(),
            instances: self
                .instances
                .iter()
                .filter(|i| i.values.iter().all(Option::is_some))
                .cloned()
                .collect(),
        }
    }

    /// Counts of (attribute value, class); units with the attribute missing
    /// go to the class-only margin.
    pub fn attribute_class_table(&self, attribute: usize) -> Result<CountTable> {
        if self.instances.is_empty() {
            return Err(MiError::InvalidArgument("dataset has no instances".into()));
        }
        let var = self.attributes.get(attribute).ok_or_else(|| {
            MiError::InvalidArgument(format!(
                "attribute {attribute} out of range (dataset has {})",
                self.attributes.len()
            ))
        })?;
        let (r, s) = (var.cardinality(), self.class.cardinality());
        let mut counts = vec![0.0; r * s];
        let mut class_only = vec![0.0; s];
        for inst in &self.instances {
            match inst.values[attribute] {
                Some(v) => counts[v * s + inst.class] += 1.0,
                None => class_only[inst.class] += 1.0,
            }
        }
        CountTable::with_missing(r, s, counts, vec![0.0; r], class_only)
    }

    /// Writes the dataset as delimited text with a header row; the class is
    /// the last column.
    pub fn write_csv<W: Write>(&self, out: W, delimiter: u8, missing_token: &str) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        let header: Vec<&str> = self
            .attributes
            .iter()
            .map(|a| a.name.as_str())
            .chain(std::iter::once(self.class.name.as_str()))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        for inst in &self.instances {
            let record: Vec<&str> = inst
                .values
                .iter()
                .zip(&self.attributes)
                .map(|(v, a)| v.map_or(missing_token, |k| a.values[k].as_str()))
                .chain(std::iter::once(self.class.values[inst.class].as_str()))
                .collect();
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sidecar schema text, one `name: v1,v2,...` line per variable with
    /// the class last.
    pub fn schema(&self) -> Schema {
        Schema {
            variables: self
                .attributes
                .iter()
                .chain(std::iter::once(&self.class))
                .cloned()
                .collect(),
        }
    }
}

fn csv_err(e: csv::Error) -> MiError {
    match e.position() {
        Some(pos) => MiError::Parse {
            row: pos.record() as usize,
            col: 0,
            msg: e.to_string(),
        },
        None => MiError::Io(e.to_string()),
    }
}

/// Fixed value lists per variable, in declared order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub variables: Vec<Variable>,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self> {
        let mut variables = Vec::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, values) = line.split_once(':').ok_or_else(|| MiError::Parse {
                row,
                col: 0,
                msg: "expected `name: v1,v2,...`".into(),
            })?;
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            variables.push(Variable::new(name.trim(), values));
        }
        Ok(Self { variables })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        self.variables
            .iter()
            .map(|v| format!("{}: {}\n", v.name, v.values.join(",")))
            .collect()
    }

    fn get(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadOptions {
    pub delimiter: u8,
    pub missing_token: String,
    pub has_header: bool,
    /// Zero-based class column; `None` means the last column.
    pub class_column: Option<usize>,
    /// Fixed domains; variables absent from it are inferred.
    pub schema: Option<Schema>,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            missing_token: DEFAULT_MISSING_TOKEN.to_string(),
            has_header: true,
            class_column: None,
            schema: None,
        }
    }
}

pub fn read_csv_path(path: &Path, options: &ReadOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| MiError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, options)
}

/// Reads categorical data. Domains are the schema's value lists when given,
/// otherwise the observed values in order of first appearance.
pub fn read_csv<R: Read>(input: R, options: &ReadOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec.map_err(csv_err)?);
    }
    let mut records = records.into_iter();
    let header: Option<Vec<String>> = if options.has_header {
        Some(
            records
                .next()
                .ok_or_else(|| MiError::Parse {
                    row: 0,
                    col: 0,
                    msg: "empty file".into(),
                })?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };
    let first_row = usize::from(options.has_header);
    let body: Vec<csv::StringRecord> = records.collect();
    let width = match (&header, body.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => 0,
    };
    if body.is_empty() {
        return Err(MiError::Parse {
            row: first_row,
            col: 0,
            msg: "no data rows".into(),
        });
    }
    if width < 2 {
        return Err(MiError::Parse {
            row: 0,
            col: 0,
            msg: "need at least one attribute column and a class column".into(),
        });
    }
    let class_col = options.class_column.unwrap_or(width - 1);
    if class_col >= width {
        return Err(MiError::InvalidArgument(format!(
            "class column {class_col} out of range for {width} columns"
        )));
    }
    let names: Vec<String> = header.unwrap_or_else(|| (0..width).map(|c| format!("x{c}")).collect());

    let mut domains: Vec<Domain> = names
        .iter()
        .map(|n| match options.schema.as_ref().and_then(|s| s.get(n)) {
            Some(v) => Domain::fixed(&v.values),
            None => Domain::default(),
        })
        .collect();
    let mut cells: Vec<Vec<Option<usize>>> = Vec::with_capacity(body.len());
    for (k, rec) in body.iter().enumerate() {
        let row = first_row + k;
        if rec.len() != width {
            return Err(MiError::Parse {
                row,
                col: rec.len().min(width),
                msg: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let mut parsed = Vec::with_capacity(width);
        for (col, field) in rec.iter().enumerate() {
            if field == options.missing_token {
                if col == class_col {
                    return Err(MiError::Parse {
                        row,
                        col,
                        msg: "class value is missing".into(),
                    });
                }
                parsed.push(None);
            } else {
                let idx = domains[col].index(field).map_err(|msg| MiError::Parse { row, col, msg })?;
                parsed.push(Some(idx));
            }
        }
        cells.push(parsed);
    }
    for (col, d) in domains.iter().enumerate() {
        if !d.fixed && d.looks_continuous() {
            return Err(MiError::Parse {
                row: first_row,
                col,
                msg: format!(
                    "column {:?} holds fractional numbers; discretize it before loading",
                    names[col]
                ),
            });
        }
    }
    let mut attributes = Vec::with_capacity(width - 1);
    let mut class = None;
    for (col, (name, d)) in names.into_iter().zip(domains).enumerate() {
        let var = Variable::new(name, d.values);
        if col == class_col {
            class = Some(var);
        } else {
            attributes.push(var);
        }
    }
    let instances = cells
        .into_iter()
        .map(|mut row| {
            let class = row.remove(class_col).expect("class checked above");
            Instance { values: row, class }
        })
        .collect();
    let ds = Dataset {
        attributes,
        class: class.expect("class column exists"),
        instances,
    };
    ds.validate()?;
    Ok(ds)
}

#[derive(Debug, Default)]
struct Domain {
    values: Vec<String>,
    lookup: HashMap<String, usize>,
    fixed: bool,
}

impl Domain {
    fn fixed(values: &[String]) -> Self {
        Self {
            values: values.to_vec(),
            lookup: values.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect(),
            fixed: true,
        }
    }

    fn index(&mut self, value: &str) -> std::result::Result<usize, String> {
        if let Some(&k) = self.lookup.get(value) {
            return Ok(k);
        }
        if self.fixed {
            return Err(format!("value {value:?} is not in the declared domain"));
        }
        let k = self.values.len();
        self.values.push(value.to_string());
        self.lookup.insert(value.to_string(), k);
        Ok(k)
    }

    /// Every value parses as a number and at least one is not an integer.
    fn looks_continuous(&self) -> bool {
        let nums: Option<Vec<f64>> = self.values.iter().map(|v| v.parse::<f64>().ok()).collect();
        nums.is_some_and(|xs| xs.iter().any(|x| x.fract() != 0.0))
    }
}

/// Parameters for drawing `(row, col)` pairs from a known joint.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    /// Row-major joint chances.
    pub pi: Vec<f64>,
    /// Probability that a unit loses its row value (only the column is
    /// observed).
    pub row_missing_rate: f64,
    /// Probability that a unit loses its column value.
    pub col_missing_rate: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(rows: usize, cols: usize, n: usize, pi: Vec<f64>, seed: u64) -> Self {
        Self {
            rows,
            cols,
            n,
            pi,
            row_missing_rate: 0.0,
            col_missing_rate: 0.0,
            seed,
        }
    }

    /// Uniform, independent variables.
    pub fn independent(rows: usize, cols: usize, n: usize, seed: u64) -> Self {
        let cells = rows * cols;
        Self::new(rows, cols, n, vec![1.0 / cells as f64; cells], seed)
    }

    pub fn with_missing(mut self, row_rate: f64, col_rate: f64) -> Self {
        self.row_missing_rate = row_rate;
        self.col_missing_rate = col_rate;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 || self.pi.len() != self.rows * self.cols {
            return Err(MiError::InvalidArgument("joint chances do not match the table shape".into()));
        }
        if self.pi.iter().any(|&p| !(p >= 0.0)) || (self.pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(MiError::InvalidArgument("joint chances must lie on the simplex".into()));
        }
        let (a, b) = (self.row_missing_rate, self.col_missing_rate);
        if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) || a + b >= 1.0 {
            return Err(MiError::InvalidArgument(format!(
                "missing rates must be in [0, 1) with sum below 1, got {a} and {b}"
            )));
        }
        Ok(())
    }
}

/// Draws from a [`SyntheticSpec`]; each pair is `(row value, column value)`
/// with at most one side masked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSample {
    pub rows: usize,
    pub cols: usize,
    pub pairs: Vec<(Option<usize>, Option<usize>)>,
}

impl SyntheticSample {
    pub fn to_table(&self) -> Result<CountTable> {
        let (r, s) = (self.rows, self.cols);
        let mut counts = vec![0.0; r * s];
        let mut row_only = vec![0.0; r];
        let mut col_only = vec![0.0; s];
        for &pair in &self.pairs {
            match pair {
                (Some(i), Some(j)) => counts[i * s + j] += 1.0,
                (Some(i), None) => row_only[i] += 1.0,
                (None, Some(j)) => col_only[j] += 1.0,
                (None, None) => {}
            }
        }
        CountTable::with_missing(r, s, counts, row_only, col_only)
    }

    /// Views the row variable as attribute `x` and the column as class `y`.
    /// Fails if any class value was masked.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let labels = |k: usize| (0..k).map(|v| v.to_string()).collect();
        let instances = self
            .pairs
            .iter()
            .enumerate()
            .map(|(row, &(x, y))| {
                let class = y.ok_or(MiError::Parse {
                    row,
                    col: 1,
                    msg: "class value is missing".into(),
                })?;
                Ok(Instance { values: vec![x], class })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            attributes: vec![Variable::new("x", labels(self.rows))],
            class: Variable::new("y", labels(self.cols)),
            instances,
        })
    }
}

fn draw_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// `n` i.i.d. draws from `pi`, then missing-at-random masking of at most one
/// side per unit.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticSample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pairs = (0..spec.n)
        .map(|_| {
            let cell = draw_index(&mut rng, &spec.pi);
            let (i, j) = (cell / spec.cols, cell % spec.cols);
            let u: f64 = rng.random();
            if u < spec.row_missing_rate {
                (None, Some(j))
            } else if u < spec.row_missing_rate + spec.col_missing_rate {
                (Some(i), None)
            } else {
                (Some(i), Some(j))
            }
        })
        .collect();
    Ok(SyntheticSample {
        rows: spec.rows,
        cols: spec.cols,
        pairs,
    })
}

/// A classification stream where a few attributes depend on the class.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub attributes: usize,
    pub informative: usize,
    pub values: usize,
    pub classes: usize,
    pub n: usize,
    /// Extra probability mass an informative attribute puts on the value
    /// paired with the class.
    pub strength: f64,
    /// Per-attribute probability that a value is missing.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for StreamSpec {
    fn default() -> Self {
        Self {
            attributes: 10,
            informative: 3,
            values: 3,
            classes: 2,
            n: 500,
            strength: 0.4,
            missing_rate: 0.0,
            seed: 0,
        }
    }
}

/// Generates a stream: uniform class, informative attribute `a` takes value
/// `(class + a) mod values` with extra probability `strength`, the rest are
/// uniform noise.
pub fn generate_stream(spec: &StreamSpec) -> Result<Dataset> {
    if spec.informative > spec.attributes || spec.values < 2 || spec.classes < 2 {
        return Err(MiError::InvalidArgument("inconsistent stream specification".into()));
    }
    if !(0.0..=1.0).contains(&spec.strength) || !(0.0..1.0).contains(&spec.missing_rate) {
        return Err(MiError::InvalidArgument("strength and missing rate must be probabilities".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let v = spec.values;
    let instances = (0..spec.n)
        .map(|_| {
            let class = rng.random_range(0..spec.classes);
            let values = (0..spec.attributes)
                .map(|a| {
                    let value = if a < spec.informative && rng.random::<f64>() < spec.strength {
                        (class + a) % v
                    } else {
                        rng.random_range(0..v)
                    };
                    let masked = spec.missing_rate > 0.0 && rng.random::<f64>() < spec.missing_rate;
                    (!masked).then_some(value)
                })
                .collect();
            Instance { values, class }
        })
        .collect();
    let labels = |k: usize, p: &str| (0..k).map(|x| format!("{p}{x}")).collect();
    Ok(Dataset {
        attributes: (0..spec.attributes)
            .map(|a| Variable::new(format!("a{a}"), labels(v, "v")))
            .collect(),
        class: Variable::new("class", labels(spec.classes, "c")),
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::empirical_mi;

    const TOY: &str = "color,size,label\nred,small,yes\nblue,?,no\nred,large,yes\n";

    #[test]
    fn toy_file() {
        let ds = read_csv(TOY.as_bytes(), &ReadOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.attributes[0].values, vec!["red", "blue"]);
        assert_eq!(ds.attributes[1].values, vec!["small", "large"]);
        assert_eq!(ds.class.values, vec!["yes", "no"]);
        assert_eq!(ds.instances[1].values, vec![Some(1), None]);
    }

    #[test]
    fn missing_class_is_an_error() {
        let text = "a,c\nx,y\nx,?\n";
        match read_csv(text.as_bytes(), &ReadOptions::default()) {
            Err(MiError::Parse { row, col, .. }) => assert_eq!((row, col), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty_inputs() {
        let ragged = "a,b,c\n1,2,3\n1,2\n";
        assert!(matches!(
            read_csv(ragged.as_bytes(), &ReadOptions::default()),
            Err(MiError::Parse { row: 2, .. })
        ));
        assert!(read_csv("".as_bytes(), &ReadOptions::default()).is_err());
        assert!(read_csv("a,b\n".as_bytes(), &ReadOptions::default()).is_err());
    }

    #[test]
    fn continuous_columns_rejected() {
        let text = "x,c\n0.5,a\n1.25,b\n";
        assert!(matches!(
            read_csv(text.as_bytes(), &ReadOptions::default()),
            Err(MiError::Parse { col: 0, .. })
        ));
        let ints = "x,c\n1,a\n2,b\n";
        assert!(read_csv(ints.as_bytes(), &ReadOptions::default()).is_ok());
    }

    #[test]
    fn schema_fixes_domains() {
        let schema = Schema::parse("color: green,red,blue\nlabel: no,yes\n").unwrap();
        let opts = ReadOptions {
            schema: Some(schema),
            ..ReadOptions::default()
        };
        let ds = read_csv(TOY.as_bytes(), &opts).unwrap();
        assert_eq!(ds.attributes[0].cardinality(), 3);
        assert_eq!(ds.instances[0].values[0], Some(1));
        assert_eq!(ds.instances[0].class, 1);
        let strict = Schema::parse("color: green\n").unwrap();
        let opts = ReadOptions {
            schema: Some(strict),
            ..ReadOptions::default()
        };
        assert!(read_csv(TOY.as_bytes(), &opts).is_err());
    }

    #[test]
    fn class_column_option_and_no_header() {
        let text = "yes,red\nno,blue\n";
        let opts = ReadOptions {
            has_header: false,
            class_column: Some(0),
            ..ReadOptions::default()
        };
        let ds = read_csv(text.as_bytes(), &opts).unwrap();
        assert_eq!(ds.class.values, vec!["yes", "no"]);
        assert_eq!(ds.attributes[0].name, "x1");
    }

    #[test]
    fn attribute_tables() {
        let ds = read_csv(TOY.as_bytes(), &ReadOptions::default()).unwrap();
        let t = ds.attribute_class_table(0).unwrap();
        assert!(t.is_complete());
        assert_eq!(t.counts(), &[2.0, 0.0, 0.0, 1.0]);
        let t = ds.attribute_class_table(1).unwrap();
        assert_eq!(t.col_missing(), &[0.0, 1.0]);
        assert_eq!(t.total(), 3.0);
        assert!(ds.attribute_class_table(5).is_err());
        let empty = Dataset {
            instances: vec![],
            ..ds
        };
        assert!(empty.attribute_class_table(0).is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let ds = generate_stream(&StreamSpec {
            n: 50,
            missing_rate: 0.2,
            seed: 4,
            ..StreamSpec::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf, b',', "?").unwrap();
        let opts = ReadOptions {
            schema: Some(ds.schema()),
            ..ReadOptions::default()
        };
        let back = read_csv(buf.as_slice(), &opts).unwrap();
        assert_eq!(back, ds);
        for a in 0..ds.attributes.len() {
            assert_eq!(back.attribute_class_table(a).unwrap(), ds.attribute_class_table(a).unwrap());
        }
    }

    #[test]
    fn generator_basics() {
        let s = generate(&SyntheticSpec::independent(2, 3, 1000, 1)).unwrap();
        assert!(s.pairs.iter().all(|p| p.0.is_some() && p.1.is_some()));
        assert_eq!(s.to_table().unwrap().total(), 1000.0);
        let diag = SyntheticSpec::new(2, 2, 10_000, vec![0.5, 0.0, 0.0, 0.5], 2);
        let t = generate(&diag).unwrap().to_table().unwrap();
        assert!((empirical_mi(&t).unwrap() - std::f64::consts::LN_2).abs() < 1e-3);
        let masked = SyntheticSpec::independent(3, 2, 5000, 3).with_missing(0.3, 0.0);
        let t = generate(&masked).unwrap().to_table().unwrap();
        let frac = t.col_missing().iter().sum::<f64>() / 5000.0;
        assert!((frac - 0.3).abs() < 0.03);
        assert_eq!(t.row_missing().iter().sum::<f64>(), 0.0);
        assert!(generate(&masked.clone().with_missing(0.6, 0.5)).is_err());
        assert_eq!(generate(&masked).unwrap(), generate(&masked).unwrap());
    }
}
