//! Tabular datasets, CSV loading, fold plans, resampling and label noise.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Code used for categorical values that were not seen when the schema was built.
pub const UNSEEN: u32 = u32::MAX;

const MISSING_TOKENS: [&str; 3] = ["", "?", "NA"];

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn level_count(&self) -> Option<usize> {
        match &self.kind {
            FeatureKind::Numeric => None,
            FeatureKind::Categorical { levels } => Some(levels.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
    pub label_name: String,
}

impl Schema {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    fn gather(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&i| v[i]).collect()),
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Feature columns sharing one schema. May be empty (zero rows).
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    schema: Arc<Schema>,
    columns: Vec<Column>,
    rows: usize,
}

impl Features {
    pub fn new(schema: Arc<Schema>, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!("{} columns for {} features", columns.len(), schema.len())));
        }
        if schema.is_empty() {
            return Err(Error::NoFeatures);
        }
        let rows = columns[0].len();
        for (spec, col) in schema.features.iter().zip(&columns) {
            if col.len() != rows {
                return Err(Error::LengthMismatch { left: rows, right: col.len() });
            }
            match (&spec.kind, col) {
                (FeatureKind::Numeric, Column::Numeric(v)) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::SchemaMismatch(format!("non-finite value in {:?}", spec.name)));
                    }
                }
                (FeatureKind::Categorical { levels }, Column::Categorical(v)) => {
                    if v.iter().any(|&x| x != UNSEEN && x as usize >= levels.len()) {
                        return Err(Error::SchemaMismatch(format!("level code out of range in {:?}", spec.name)));
                    }
                }
                _ => return Err(Error::SchemaMismatch(format!("column type differs for {:?}", spec.name))),
            }
        }
        Ok(Self { schema, columns, rows })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn subset(&self, rows: &[usize]) -> Features {
        Features {
            schema: Arc::clone(&self.schema),
            columns: self.columns.iter().map(|c| c.gather(rows)).collect(),
            rows: rows.len(),
        }
    }

    /// True when both refer to the same schema or to structurally equal ones.
    pub fn schema_matches(&self, other: &Schema) -> bool {
        std::ptr::eq(Arc::as_ptr(&self.schema), other) || *self.schema == *other
    }

    /// Parses rows against an existing schema, matching columns by header name.
    /// The label column may be present or absent; its raw values are returned
    /// when present. Unknown categorical levels become [`UNSEEN`].
    pub fn from_csv_reader<R: Read>(reader: R, schema: &Arc<Schema>) -> Result<(Features, Option<Vec<String>>)> {
        let mut rdr = csv_reader(reader);
        let header = read_header(&mut rdr)?;
        let d = schema.len();
        if header.len() != d && header.len() != d + 1 {
            return Err(Error::SchemaMismatch(format!(
                "input has {} columns, model expects {} features (plus optional label)",
                header.len(),
                d
            )));
        }
        let mut positions = Vec::with_capacity(d);
        for spec in &schema.features {
            let pos = header
                .iter()
                .position(|h| *h == spec.name)
                .ok_or_else(|| Error::SchemaMismatch(format!("column {:?} missing from input", spec.name)))?;
            positions.push(pos);
        }
        let label_pos = if header.len() == d + 1 {
            let pos = (0..header.len())
                .find(|p| !positions.contains(p))
                .ok_or_else(|| Error::SchemaMismatch("duplicate column names in input".into()))?;
            if header[pos] != schema.label_name {
                return Err(Error::SchemaMismatch(format!("unexpected column {:?}", header[pos])));
            }
            Some(pos)
        } else {
            None
        };

        let lookups: Vec<Option<HashMap<&str, u32>>> = schema
            .features
            .iter()
            .map(|s| match &s.kind {
                FeatureKind::Numeric => None,
                FeatureKind::Categorical { levels } => {
                    Some(levels.iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect())
                }
            })
            .collect();
        let mut columns: Vec<Column> = schema
            .features
            .iter()
            .map(|s| match s.kind {
                FeatureKind::Numeric => Column::Numeric(Vec::new()),
                FeatureKind::Categorical { .. } => Column::Categorical(Vec::new()),
            })
            .collect();
        let mut labels = label_pos.map(|_| Vec::new());

        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = r + 1;
            if record.len() != header.len() {
                return Err(Error::RaggedRow { row, expected: header.len(), found: record.len() });
            }
            for (j, &pos) in positions.iter().enumerate() {
                let cell = &record[pos];
                let name = &schema.features[j].name;
                check_missing(cell, row, name)?;
                match (&mut columns[j], &lookups[j]) {
                    (Column::Numeric(v), _) => v.push(parse_number(cell, row, name)?),
                    (Column::Categorical(v), Some(map)) => v.push(map.get(cell).copied().unwrap_or(UNSEEN)),
                    (Column::Categorical(_), None) => unreachable!(),
                }
            }
            if let (Some(pos), Some(labels)) = (label_pos, labels.as_mut()) {
                check_missing(&record[pos], row, &schema.label_name)?;
                labels.push(record[pos].to_string());
            }
        }
        let rows = columns[0].len();
        Ok((Features { schema: Arc::clone(schema), columns, rows }, labels))
    }
}

/// Features plus dense integer labels in `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Features,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Features, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != features.rows() {
            return Err(Error::LengthMismatch { left: features.rows(), right: labels.len() });
        }
        if class_names.len() < 2 {
            return Err(Error::TooFewLabels(class_names.len()));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::LabelOutOfRange { label, classes: class_names.len() });
        }
        Ok(Self { features, labels, class_names })
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.features.schema()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.features.width()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows in the given order; indices may repeat. Panics on out-of-range indices.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.subset(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), labels, self.class_names.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub label: LabelColumn,
    /// Forces a column's type by header name. Unlisted columns are numeric
    /// when every cell parses as a finite number, categorical otherwise.
    pub overrides: BTreeMap<String, ColumnType>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { label: LabelColumn::Last, overrides: BTreeMap::new() }
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader)
}

fn read_header<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Vec<String>> {
    let mut rec = csv::StringRecord::new();
    if !rdr.read_record(&mut rec)? {
        return Err(Error::MissingHeader);
    }
    Ok(rec.iter().map(str::to_string).collect())
}

fn check_missing(cell: &str, row: usize, column: &str) -> Result<()> {
    if MISSING_TOKENS.contains(&cell) {
        return Err(Error::MissingValue { row, column: column.to_string() });
    }
    Ok(())
}

fn parse_number(cell: &str, row: usize, column: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::UnparseableCell { row, column: column.to_string(), value: cell.to_string() }),
    }
}

fn is_number(cell: &str) -> bool {
    cell.parse::<f64>().map(f64::is_finite).unwrap_or(false)
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    from_csv_reader(std::io::BufReader::new(file), options)
}

/// Labels are encoded densely in order of first appearance.
pub fn from_csv_reader<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv_reader(reader);
    let header = read_header(&mut rdr)?;
    if header.is_empty() {
        return Err(Error::MissingHeader);
    }
    let label_pos = match &options.label {
        LabelColumn::Last => header.len() - 1,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => return Err(Error::LabelColumnNotFound(format!("#{i}"))),
        LabelColumn::Name(name) => {
            header.iter().position(|h| h == name).ok_or_else(|| Error::LabelColumnNotFound(format!("{name:?}")))?
        }
    };
    if header.len() < 2 {
        return Err(Error::NoFeatures);
    }
    for (i, h) in header.iter().enumerate() {
        if header[..i].contains(h) {
            return Err(Error::InvalidParameter(format!("duplicate column name {h:?}")));
        }
    }
    for name in options.overrides.keys() {
        if !header.contains(name) {
            return Err(Error::InvalidParameter(format!("type override for unknown column {name:?}")));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != header.len() {
            return Err(Error::RaggedRow { row, expected: header.len(), found: record.len() });
        }
        for (j, cell) in record.iter().enumerate() {
            check_missing(cell, row, &header[j])?;
            cells[j].push(cell.to_string());
        }
    }
    let n = cells[0].len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }

    let mut specs = Vec::with_capacity(header.len() - 1);
    let mut columns = Vec::with_capacity(header.len() - 1);
    for (j, name) in header.iter().enumerate() {
        if j == label_pos {
            continue;
        }
        let kind = match options.overrides.get(name) {
            Some(t) => *t,
            None if cells[j].iter().all(|c| is_number(c)) => ColumnType::Numeric,
            None => ColumnType::Categorical,
        };
        match kind {
            ColumnType::Numeric => {
                let values = cells[j]
                    .iter()
                    .enumerate()
                    .map(|(r, c)| parse_number(c, r + 1, name))
                    .collect::<Result<Vec<_>>>()?;
                specs.push(FeatureSpec { name: name.clone(), kind: FeatureKind::Numeric });
                columns.push(Column::Numeric(values));
            }
            ColumnType::Categorical => {
                let (codes, levels) = encode(&cells[j]);
                specs.push(FeatureSpec { name: name.clone(), kind: FeatureKind::Categorical { levels } });
                columns.push(Column::Categorical(codes.into_iter().map(|c| c as u32).collect()));
            }
        }
    }
    let (labels, class_names) = encode(&cells[label_pos]);
    if class_names.len() < 2 {
        return Err(Error::TooFewLabels(class_names.len()));
    }
    let schema = Arc::new(Schema { features: specs, label_name: header[label_pos].clone() });
    Dataset::new(Features { schema, columns, rows: n }, labels, class_names)
}

fn encode(values: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut levels = Vec::new();
    let codes = values
        .iter()
        .map(|v| {
            *index.entry(v.as_str()).or_insert_with(|| {
                levels.push(v.clone());
                levels.len() - 1
            })
        })
        .collect();
    (codes, levels)
}

/// Fold assignments for repeated k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    folds: usize,
    assignments: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn repeats(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignment(&self, repeat: usize) -> &[usize] {
        &self.assignments[repeat]
    }

    /// (train rows, test rows), both ascending.
    pub fn split(&self, repeat: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (i, &f) in self.assignments[repeat].iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    /// CSV with header `repeat,fold,row_index`, grouped by repeat then fold.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["repeat", "fold", "row_index"])?;
        for r in 0..self.repeats() {
            for f in 0..self.folds {
                for i in self.split(r, f).1 {
                    w.write_record([r.to_string(), f.to_string(), i.to_string()])?;
                }
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

const FOLD_STREAM: u64 = 0x666f_6c64;

/// Each class is shuffled, then dealt round-robin over the folds. The dealing
/// position carries over from one class to the next so fold totals stay
/// balanced as well.
pub fn stratified_kfold(dataset: &Dataset, k: usize, repeats: usize, seed: u64) -> Result<FoldPlan> {
    let n = dataset.rows();
    if k < 2 {
        return Err(Error::InvalidParameter(format!("fold count must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::TooManyFolds { folds: k, rows: n });
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeat count must be positive".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count()];
    for (i, &l) in dataset.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let assignments = (0..repeats)
        .map(|r| {
            let mut rng = rng::stream(seed, &[FOLD_STREAM, r as u64]);
            let mut fold_of = vec![0; n];
            let mut offset = 0;
            for members in &by_class {
                let mut members = members.clone();
                members.shuffle(&mut rng);
                for (j, &i) in members.iter().enumerate() {
                    fold_of[i] = (offset + j) % k;
                }
                offset = (offset + members.len()) % k;
            }
            fold_of
        })
        .collect();
    Ok(FoldPlan { folds: k, assignments })
}

pub fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("empty"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("negative or non-finite entry"));
    }
    if !weights.iter().any(|w| *w > 0.0) {
        return Err(Error::InvalidWeights("all zero"));
    }
    if !weights.iter().sum::<f64>().is_finite() {
        return Err(Error::InvalidWeights("sum overflows"));
    }
    Ok(())
}

/// `weights.len()` i.i.d. draws with replacement, probability proportional to weight.
pub fn resample_indices<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    validate_weights(weights)?;
    let dist = WeightedIndex::new(weights).map_err(|_| Error::InvalidWeights("rejected by sampler"))?;
    Ok((0..weights.len()).map(|_| dist.sample(rng)).collect())
}

pub fn weighted_resample(dataset: &Dataset, weights: &[f64], seed: u64) -> Result<Dataset> {
    if weights.len() != dataset.rows() {
        return Err(Error::WeightLength { weights: weights.len(), rows: dataset.rows() });
    }
    let rows = resample_indices(weights, &mut rng::stream(seed, &[]))?;
    Ok(dataset.subset(&rows))
}

/// round-half-up(p·n)
pub fn noise_count(fraction: f64, n: usize) -> usize {
    (((fraction * n as f64) + 0.5 + 1e-9).floor() as usize).min(n)
}

/// Relabels `noise_count(fraction, n)` distinct rows, each to a class drawn
/// uniformly from the other `c - 1`. Returns the new labels and the changed
/// rows in ascending order.
pub fn noisy_labels<R: Rng + ?Sized>(
    labels: &[usize],
    class_count: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("noise fraction {fraction} outside [0, 1]")));
    }
    if class_count < 2 {
        return Err(Error::TooFewLabels(class_count));
    }
    let n = labels.len();
    let mut changed = rand::seq::index::sample(rng, n, noise_count(fraction, n)).into_vec();
    changed.sort_unstable();
    let mut out = labels.to_vec();
    for &i in &changed {
        let r = rng.random_range(0..class_count - 1);
        out[i] = if r < labels[i] { r } else { r + 1 };
    }
    Ok((out, changed))
}

pub fn inject_label_noise(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    let mut rng = rng::stream(seed, &[]);
    let (labels, changed) = noisy_labels(dataset.labels(), dataset.class_count(), fraction, &mut rng)?;
    Ok((dataset.with_labels(labels)?, changed))
}
