//! CSV loading and writing, seeded splits and k-fold partitions.
//!
//! Files are comma separated with a mandatory header and purely numeric
//! cells. Columns are located by name through a [`CsvSchema`]; extra columns
//! are ignored.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::scalar::Scalar;

/// Names of the potential-outcome columns of a synthetic export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleColumns {
    pub y0: String,
    pub y1: String,
    pub true_cate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub feature_columns: Vec<String>,
    pub treatment_column: String,
    pub outcome_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propensity_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_propensity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_columns: Option<OracleColumns>,
}

impl CsvSchema {
    /// Schema matching the layout [`write_csv`] emits.
    pub fn for_layout(n_features: usize, propensity: bool, oracle: bool) -> Self {
        CsvSchema {
            feature_columns: (0..n_features).map(|j| format!("f{j}")).collect(),
            treatment_column: "treatment".into(),
            outcome_column: "outcome".into(),
            propensity_column: propensity.then(|| "propensity".into()),
            constant_propensity: None,
            oracle_columns: oracle.then(|| OracleColumns {
                y0: "y0".into(),
                y1: "y1".into(),
                true_cate: "true_cate".into(),
            }),
        }
    }

    fn columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = self.feature_columns.iter().map(String::as_str).collect();
        cols.push(&self.treatment_column);
        cols.push(&self.outcome_column);
        if let Some(p) = &self.propensity_column {
            cols.push(p);
        }
        if let Some(o) = &self.oracle_columns {
            cols.extend([o.y0.as_str(), o.y1.as_str(), o.true_cate.as_str()]);
        }
        cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(CdmError::Config(
                "schema declares no feature columns".into(),
            ));
        }
        let mut seen = HashSet::new();
        for c in self.columns() {
            if !seen.insert(c) {
                return Err(CdmError::Config(format!("column `{c}` declared twice")));
            }
        }
        match (&self.propensity_column, self.constant_propensity) {
            (Some(_), Some(_)) => Err(CdmError::Config(
                "declare either propensity_column or constant_propensity, not both".into(),
            )),
            (None, Some(e)) if !(e > 0.0 && e < 1.0) => Err(CdmError::Config(format!(
                "constant_propensity {e} outside (0, 1)"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Count and skip malformed rows instead of failing on the first one.
    pub skip_bad_rows: bool,
}

#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub dataset: Dataset<T>,
    /// One message per skipped row, in file order.
    pub skipped: Vec<String>,
}

struct Layout {
    features: Vec<usize>,
    treatment: usize,
    outcome: usize,
    propensity: Option<usize>,
    oracle: Option<[usize; 3]>,
}

fn locate(header: &csv::StringRecord, schema: &CsvSchema) -> Result<Layout> {
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CdmError::MissingColumn {
                column: name.to_string(),
            })
    };
    Ok(Layout {
        features: schema
            .feature_columns
            .iter()
            .map(|c| find(c))
            .collect::<Result<_>>()?,
        treatment: find(&schema.treatment_column)?,
        outcome: find(&schema.outcome_column)?,
        propensity: schema.propensity_column.as_deref().map(find).transpose()?,
        oracle: match &schema.oracle_columns {
            Some(o) => Some([find(&o.y0)?, find(&o.y1)?, find(&o.true_cate)?]),
            None => None,
        },
    })
}

fn parse_row<T: Scalar>(
    record: &csv::StringRecord,
    layout: &Layout,
    schema: &CsvSchema,
) -> std::result::Result<Sample<T>, String> {
    let cell = |i: usize, name: &str| -> std::result::Result<T, String> {
        let raw = record.get(i).unwrap_or("").trim();
        match raw.parse::<T>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("column `{name}`: `{raw}` is not a finite number")),
        }
    };
    let features = layout
        .features
        .iter()
        .zip(&schema.feature_columns)
        .map(|(&i, name)| cell(i, name))
        .collect::<std::result::Result<Vec<T>, String>>()?;
    let t_raw = record.get(layout.treatment).unwrap_or("").trim();
    let treatment = match t_raw.parse::<f64>() {
        Ok(0.0) => TreatmentLevel::CONTROL,
        Ok(1.0) => TreatmentLevel::TREATED,
        _ => {
            return Err(format!(
                "column `{}`: treatment `{t_raw}` is not 0 or 1",
                schema.treatment_column
            ))
        }
    };
    let outcome = cell(layout.outcome, &schema.outcome_column)?;
    let mut sample = match (layout.oracle, &schema.oracle_columns) {
        (Some([i0, i1, ic]), Some(names)) => {
            let y = [cell(i0, &names.y0)?, cell(i1, &names.y1)?];
            let s = Sample::synthetic(features, treatment, y, cell(ic, &names.true_cate)?);
            if s.outcome != outcome {
                return Err(
                    "observed outcome differs from the logged arm's potential outcome".into(),
                );
            }
            s
        }
        _ => Sample::new(features, treatment, outcome),
    };
    let propensity = match (layout.propensity, &schema.propensity_column) {
        (Some(i), Some(name)) => Some(cell(i, name)?),
        _ => schema.constant_propensity.map(T::lit),
    };
    if let Some(e) = propensity {
        if !(e > T::zero() && e < T::one()) {
            return Err(format!("propensity {e} outside (0, 1)"));
        }
        sample.propensity = Some(e);
    }
    Ok(sample)
}

/// Schema guessed from a header in the [`write_csv`] layout: `f<j>` feature
/// columns, `treatment`, `outcome`, and optionally `propensity` and the
/// three oracle columns.
pub fn infer_schema(path: &Path) -> Result<CsvSchema> {
    let file = File::open(path).map_err(|e| CdmError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|source| CdmError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let has = |c: &str| names.contains(&c);
    let n_features = (0..).take_while(|j| has(&format!("f{j}"))).count();
    if n_features == 0 {
        return Err(CdmError::MissingColumn {
            column: "f0".into(),
        });
    }
    let oracle = ["y0", "y1", "true_cate"].iter().all(|c| has(c));
    Ok(CsvSchema::for_layout(n_features, has("propensity"), oracle))
}

/// Streams a CSV file into a dataset.
///
/// Row numbers in errors count data rows from 1; line numbers count file
/// lines, header included.
pub fn load_csv<T: Scalar>(
    path: &Path,
    schema: &CsvSchema,
    options: LoadOptions,
) -> Result<Loaded<T>> {
    schema.validate()?;
    let csv_err = |source| CdmError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|e| CdmError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.is_empty() {
        return Err(CdmError::Data(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    let layout = locate(&header, schema)?;

    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    loop {
        let parsed = match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => parse_row::<T>(&record, &layout, schema),
            Err(e) => match e.kind() {
                csv::ErrorKind::UnequalLengths { .. } => Err("wrong number of fields".to_string()),
                _ => return Err(csv_err(e)),
            },
        };
        row += 1;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        match parsed {
            Ok(s) => samples.push(s),
            Err(message) => {
                let err = CdmError::Row { row, line, message };
                if options.skip_bad_rows {
                    skipped.push(err.to_string());
                } else {
                    return Err(err);
                }
            }
        }
    }
    let name = path
        .file_stem()
        .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    if samples.is_empty() {
        return Err(CdmError::Data(format!(
            "{}: no usable data rows",
            path.display()
        )));
    }
    Ok(Loaded {
        dataset: Dataset::new(name, samples)?,
        skipped,
    })
}

/// Writes the dataset in the fixed layout
/// `f0..f{d-1},treatment,outcome[,propensity][,y0,y1,true_cate]`.
///
/// The propensity column appears when every sample carries one. Values use
/// shortest round-trip formatting, so [`load_csv`] reproduces them exactly.
pub fn write_csv_to<T: Scalar, W: Write>(
    dataset: &Dataset<T>,
    out: W,
    include_oracle: bool,
) -> Result<()> {
    write_rows(dataset, out, include_oracle).map_err(|e| match e {
        WriteError::Io(e) => CdmError::io("<writer>", e),
        WriteError::Cdm(e) => e,
    })
}

pub fn write_csv<T: Scalar>(dataset: &Dataset<T>, path: &Path, include_oracle: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| CdmError::io(path, e))?;
    write_rows(dataset, BufWriter::new(file), include_oracle).map_err(|e| match e {
        WriteError::Io(e) => CdmError::io(path, e),
        WriteError::Cdm(e) => e,
    })
}

enum WriteError {
    Io(std::io::Error),
    Cdm(CdmError),
}

impl From<std::io::Error> for WriteError {
    fn from(e: std::io::Error) -> Self {
        WriteError::Io(e)
    }
}

fn write_rows<T: Scalar, W: Write>(
    dataset: &Dataset<T>,
    mut out: W,
    include_oracle: bool,
) -> std::result::Result<(), WriteError> {
    if include_oracle && !dataset.is_synthetic() {
        return Err(WriteError::Cdm(CdmError::NotSynthetic(
            "writing oracle columns",
        )));
    }
    let samples = dataset.samples();
    let with_propensity = samples.iter().all(|s| s.propensity.is_some());
    if !with_propensity && samples.iter().any(|s| s.propensity.is_some()) {
        return Err(WriteError::Cdm(CdmError::Data(
            "some but not all samples carry a propensity".into(),
        )));
    }
    let schema = CsvSchema::for_layout(dataset.n_features(), with_propensity, include_oracle);
    writeln!(out, "{}", schema.columns().join(","))?;
    let mut line = String::new();
    for s in samples {
        line.clear();
        for v in &s.features {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&s.treatment.index().to_string());
        line.push(',');
        line.push_str(&s.outcome.to_string());
        if let Some(e) = s.propensity {
            line.push(',');
            line.push_str(&e.to_string());
        }
        if include_oracle {
            let o = s.oracle.as_ref().expect("checked synthetic");
            for v in [o.y0(), o.y1(), o.true_cate] {
                line.push(',');
                line.push_str(&v.to_string());
            }
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Part sizes proportional to `fractions`, rounding by largest remainder
/// (ties to the earlier part).
fn part_sizes(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut by_remainder: Vec<usize> = (0..fractions.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    for &i in by_remainder.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

fn shuffled(mut idx: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    idx.shuffle(rng);
    idx
}

/// Seeded random partition into parts with the given size fractions.
///
/// With `stratify_by_treatment`, each arm is shuffled and divided separately
/// so every part inherits the parent's treated fraction up to rounding.
/// Samples within a part keep their original order.
pub fn split<T: Scalar>(
    dataset: &Dataset<T>,
    fractions: &[f64],
    seed: u64,
    stratify_by_treatment: bool,
) -> Result<Vec<Dataset<T>>> {
    if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(CdmError::Config("split fractions must be positive".into()));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CdmError::Config(format!(
            "split fractions sum to {total}, not 1"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dataset.len();
    let groups: Vec<Vec<usize>> = if stratify_by_treatment {
        let (treated, control): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| dataset.samples()[i].treatment.is_treated());
        vec![shuffled(treated, &mut rng), shuffled(control, &mut rng)]
    } else {
        vec![shuffled((0..n).collect(), &mut rng)]
    };
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); fractions.len()];
    for group in groups {
        let mut start = 0;
        for (part, size) in parts.iter_mut().zip(part_sizes(group.len(), fractions)) {
            part.extend_from_slice(&group[start..start + size]);
            start += size;
        }
    }
    parts
        .into_iter()
        .enumerate()
        .map(|(i, mut idx)| {
            if idx.is_empty() {
                return Err(CdmError::Precondition(format!(
                    "split part {i} would be empty ({n} samples)"
                )));
            }
            idx.sort_unstable();
            dataset.select(&idx, format!("{}[part {i}]", dataset.name()))
        })
        .collect()
}

/// Test-fold index sets of a seeded k-fold partition of `0..n`; the first
/// `n mod k` folds get one extra index. Each fold is sorted.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(CdmError::Config(format!("k = {k} out of range [2, {n}]")));
    }
    let order = shuffled((0..n).collect(), &mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// `(train, test)` pairs of a seeded k-fold partition.
pub fn kfold<T: Scalar>(
    dataset: &Dataset<T>,
    k: usize,
    seed: u64,
) -> Result<Vec<(Dataset<T>, Dataset<T>)>> {
    let folds = kfold_indices(dataset.len(), k, seed)?;
    folds
        .iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; dataset.len()];
            for &i in test {
                in_test[i] = true;
            }
            let train: Vec<usize> = (0..dataset.len()).filter(|&i| !in_test[i]).collect();
            Ok((
                dataset.select(&train, format!("{}[train {f}]", dataset.name()))?,
                dataset.select(test, format!("{}[test {f}]", dataset.name()))?,
            ))
        })
        .collect()
}
