//! Tabular feature space, CSV ingestion and output ranges.
//!
//! Categorical cells are stored as integer-valued `f64` indices into the
//! feature's ordered label list, so an [`Instance`] is a plain row of reals
//! that can be handed to any predictor unchanged. Labels only reappear when
//! rendering.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value domain of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric { min: f64, max: f64 },
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        let spec = FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Numeric { min, max },
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let spec = FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        match &self.kind {
            FeatureKind::Numeric { min, max } => {
                if !min.is_finite() || !max.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "feature '{}': range bounds must be finite",
                        self.name
                    )));
                }
                if min >= max {
                    return Err(Error::InvalidConfig(format!(
                        "feature '{}': range min {min} must be below max {max}",
                        self.name
                    )));
                }
            }
            FeatureKind::Categorical { categories } => {
                if categories.is_empty() {
                    return Err(Error::InvalidConfig(format!(
                        "feature '{}' has no categories",
                        self.name
                    )));
                }
                let mut seen = HashSet::new();
                for c in categories {
                    if !seen.insert(c.as_str()) {
                        return Err(Error::InvalidConfig(format!(
                            "feature '{}': duplicate category '{c}'",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical { .. })
    }

    /// `(min, max)` for numeric features.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self.kind {
            FeatureKind::Numeric { min, max } => Some((min, max)),
            FeatureKind::Categorical { .. } => None,
        }
    }

    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            FeatureKind::Categorical { categories } => Some(categories),
            FeatureKind::Numeric { .. } => None,
        }
    }

    /// Human-readable rendering of a cell of this feature.
    pub fn format_value(&self, value: f64) -> String {
        match &self.kind {
            FeatureKind::Numeric { .. } => format!("{value}"),
            FeatureKind::Categorical { categories } => {
                let idx = value as usize;
                categories
                    .get(idx)
                    .filter(|_| value >= 0.0 && value.fract() == 0.0)
                    .cloned()
                    .unwrap_or_else(|| format!("<invalid {value}>"))
            }
        }
    }

    /// Parse a cell from text: a number for numeric features, a label
    /// (or failing that, an integer index) for categorical ones.
    pub fn parse_value(&self, raw: &str) -> Result<f64> {
        let raw = raw.trim();
        match &self.kind {
            FeatureKind::Numeric { .. } => {
                let v: f64 = raw.parse().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "feature '{}': cannot parse '{raw}' as a number",
                        self.name
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        feature: self.name.clone(),
                        value: v,
                    });
                }
                Ok(v)
            }
            FeatureKind::Categorical { categories } => {
                if let Some(pos) = categories.iter().position(|c| c == raw) {
                    return Ok(pos as f64);
                }
                match raw.parse::<usize>() {
                    Ok(idx) if idx < categories.len() => Ok(idx as f64),
                    _ => Err(Error::InvalidConfig(format!(
                        "feature '{}': '{raw}' is not one of [{}]",
                        self.name,
                        categories.join(", ")
                    ))),
                }
            }
        }
    }
}

/// Ordered feature list. The order is the column order of every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FeatureSpec>", into = "Vec<FeatureSpec>")]
pub struct FeatureSpace {
    features: Vec<FeatureSpec>,
}

impl TryFrom<Vec<FeatureSpec>> for FeatureSpace {
    type Error = Error;

    fn try_from(features: Vec<FeatureSpec>) -> Result<Self> {
        FeatureSpace::new(features)
    }
}

impl From<FeatureSpace> for Vec<FeatureSpec> {
    fn from(space: FeatureSpace) -> Self {
        space.features
    }
}

impl FeatureSpace {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &features {
            f.check()?;
            if !seen.insert(f.name.as_str()) {
                return Err(Error::DuplicateFeature(f.name.clone()));
            }
        }
        Ok(FeatureSpace { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureSpec {
        &self.features[index]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Resolve a feature given by name or by zero-based index.
    pub fn resolve(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.index_of(key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.len() => Ok(i),
            _ => Err(Error::UnknownFeature(key.to_string())),
        }
    }

    /// Build an instance from one text cell per feature.
    pub fn parse_instance<S: AsRef<str>>(&self, cells: &[S]) -> Result<Instance> {
        if cells.len() != self.len() {
            return Err(Error::ArityMismatch {
                expected: self.len(),
                actual: cells.len(),
            });
        }
        let values = self
            .features
            .iter()
            .zip(cells)
            .map(|(f, c)| f.parse_value(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance::new(values))
    }

    /// Replace numeric ranges with explicitly supplied ones.
    pub fn with_ranges(&self, ranges: &BTreeMap<String, (f64, f64)>) -> Result<Self> {
        let mut features = self.features.clone();
        for (name, &(min, max)) in ranges {
            let i = self
                .index_of(name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
            if features[i].is_categorical() {
                return Err(Error::InvalidConfig(format!(
                    "feature '{name}' is categorical and has no numeric range"
                )));
            }
            features[i] = FeatureSpec::numeric(name.clone(), min, max)?;
        }
        FeatureSpace::new(features)
    }
}

/// One row of cell values, ordered like the feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(Vec<f64>);

impl Instance {
    pub fn new(values: Vec<f64>) -> Self {
        Instance(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Instance {
    fn from(values: Vec<f64>) -> Self {
        Instance(values)
    }
}

impl std::ops::Index<usize> for Instance {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// A numeric cell outside the feature's declared range.
#[derive(Debug, Clone, PartialEq)]
pub struct OutOfRange {
    pub feature: usize,
    pub name: String,
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

impl fmt::Display for OutOfRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "feature '{}' = {} lies outside its range [{}, {}]",
            self.name, self.value, self.min, self.max
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub warnings: Vec<OutOfRange>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Check arity, finiteness and category indices. Out-of-range numeric
/// cells are reported as warnings rather than errors.
pub fn validate_instance(space: &FeatureSpace, inst: &Instance) -> Result<ValidationReport> {
    if inst.len() != space.len() {
        return Err(Error::ArityMismatch {
            expected: space.len(),
            actual: inst.len(),
        });
    }
    let mut report = ValidationReport::default();
    for (i, (spec, &v)) in space.features().iter().zip(inst.values()).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                feature: spec.name.clone(),
                value: v,
            });
        }
        match &spec.kind {
            FeatureKind::Numeric { min, max } => {
                if v < *min || v > *max {
                    report.warnings.push(OutOfRange {
                        feature: i,
                        name: spec.name.clone(),
                        value: v,
                        min: *min,
                        max: *max,
                    });
                }
            }
            FeatureKind::Categorical { categories } => {
                if v < 0.0 || v.fract() != 0.0 || v as usize >= categories.len() {
                    return Err(Error::InvalidCategory {
                        feature: spec.name.clone(),
                        value: v,
                        count: categories.len(),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityDirection {
    #[default]
    Increasing,
    Decreasing,
}

/// Reference range and utility orientation of one model output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub direction: UtilityDirection,
}

impl OutputSpec {
    pub fn new(
        name: impl Into<String>,
        min: f64,
        max: f64,
        direction: UtilityDirection,
    ) -> Result<Self> {
        let name = name.into();
        if !min.is_finite() || !max.is_finite() || min >= max {
            return Err(Error::InvalidConfig(format!(
                "output '{name}': range [{min}, {max}] must be finite with min < max"
            )));
        }
        Ok(OutputSpec {
            name,
            min,
            max,
            direction,
        })
    }

    /// Class-probability output with the fixed range [0, 1].
    pub fn probability(name: impl Into<String>) -> Self {
        OutputSpec {
            name: name.into(),
            min: 0.0,
            max: 1.0,
            direction: UtilityDirection::Increasing,
        }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// Affine utility of an output value: 0 at the worst end of the range, 1 at the best.
    pub fn utility(&self, y: f64) -> f64 {
        match self.direction {
            UtilityDirection::Increasing => (y - self.min) / self.span(),
            UtilityDirection::Decreasing => (self.max - y) / self.span(),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        OutputSpec::new(self.name.clone(), self.min, self.max, self.direction).map(|_| ())
    }
}

/// Output range from the observed targets of a training set.
pub fn derive_output_spec(
    targets: &[f64],
    name: impl Into<String>,
    direction: UtilityDirection,
) -> Result<OutputSpec> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    if let Some(bad) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::NonFiniteValue {
            feature: "target".into(),
            value: *bad,
        });
    }
    let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateTarget(min));
    }
    OutputSpec::new(name, min, max, direction)
}

/// An explicit range that replaced a data-derived one and differs from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeOverride {
    pub feature: String,
    pub data_range: Option<(f64, f64)>,
    pub explicit_range: (f64, f64),
}

impl fmt::Display for RangeOverride {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.explicit_range;
        match self.data_range {
            Some((dlo, dhi)) => write!(
                f,
                "feature '{}': explicit range [{lo}, {hi}] overrides data range [{dlo}, {dhi}]",
                self.feature
            ),
            None => write!(
                f,
                "feature '{}': explicit range [{lo}, {hi}] used for a constant column",
                self.feature
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub space: FeatureSpace,
    pub rows: Vec<Instance>,
    pub ids: Option<Vec<String>>,
    /// Explicit ranges that disagreed with the data.
    pub overrides: Vec<RangeOverride>,
}

impl Dataset {
    pub fn new(space: FeatureSpace, rows: Vec<Instance>) -> Result<Self> {
        for r in &rows {
            let report = validate_instance(&space, r)?;
            if let Some(w) = report.warnings.first() {
                return Err(Error::InvalidConfig(format!("dataset row {w}")));
            }
        }
        Ok(Dataset {
            space,
            rows,
            ids: None,
            overrides: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Identifier of a row: the id column when present, else the row index.
    pub fn row_id(&self, row: usize) -> String {
        self.ids
            .as_ref()
            .map(|ids| ids[row].clone())
            .unwrap_or_else(|| row.to_string())
    }

    pub fn column(&self, feature: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[feature])
    }

    /// Remove a numeric column (typically the target) and return its values.
    pub fn split_off_column(&self, name: &str) -> Result<(Dataset, Vec<f64>)> {
        let idx = self
            .space
            .index_of(name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        if self.space.feature(idx).is_categorical() {
            return Err(Error::InvalidConfig(format!(
                "column '{name}' is categorical and cannot be used as a numeric target"
            )));
        }
        let values = self.column(idx).collect();
        let mut features = self.space.features().to_vec();
        features.remove(idx);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v = r.values().to_vec();
                v.remove(idx);
                Instance::new(v)
            })
            .collect();
        Ok((
            Dataset {
                space: FeatureSpace::new(features)?,
                rows,
                ids: self.ids.clone(),
                overrides: self
                    .overrides
                    .iter()
                    .filter(|o| o.feature != name)
                    .cloned()
                    .collect(),
            },
            values,
        ))
    }

    /// Write the dataset back as CSV. Numeric cells use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W, id_column: Option<&str>) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = Vec::new();
        let with_ids = id_column.is_some() && self.ids.is_some();
        if with_ids {
            header.push(id_column.unwrap_or_default().to_string());
        }
        header.extend(self.space.names().map(str::to_string));
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut record = Vec::with_capacity(header.len());
            if with_ids {
                record.push(self.row_id(i));
            }
            for (spec, &v) in self.space.features().iter().zip(row.values()) {
                record.push(spec.format_value(v));
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// How to interpret a CSV file.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Whether the first line holds column names. Without a header, columns
    /// are named `x1`, `x2`, ...
    pub header: bool,
    /// Categorical columns. `None` means the labels are the sorted unique
    /// values found in the column.
    pub category_columns: BTreeMap<String, Option<Vec<String>>>,
    /// Column holding row identifiers; excluded from the feature space.
    pub id_column: Option<String>,
    /// Explicit numeric ranges; these take precedence over data-derived ones.
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            header: true,
            category_columns: BTreeMap::new(),
            id_column: None,
            ranges: BTreeMap::new(),
        }
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_csv_reader(file, opts)
}

pub fn ingest_csv_reader<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::EmptyCsv);
    }

    let (columns, body): (Vec<String>, &[(usize, csv::StringRecord)]) = if opts.header {
        let names = records[0].1.iter().map(|s| s.trim().to_string()).collect();
        (names, &records[1..])
    } else {
        let n = records[0].1.len();
        ((1..=n).map(|i| format!("x{i}")).collect(), &records[..])
    };
    if body.is_empty() {
        return Err(Error::EmptyCsv);
    }
    let width = columns.len();
    for (line, rec) in body {
        if rec.len() != width {
            return Err(Error::CsvShape {
                row: *line,
                message: format!("expected {width} columns, found {}", rec.len()),
            });
        }
    }
    for name in opts.category_columns.keys().chain(opts.ranges.keys()) {
        if !columns.contains(name) {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }

    let id_col = match &opts.id_column {
        Some(name) => Some(
            columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))?,
        ),
        None => None,
    };

    let mut specs = Vec::new();
    let mut overrides = Vec::new();
    let mut cells: Vec<Vec<f64>> = vec![Vec::with_capacity(width); body.len()];

    for (c, name) in columns.iter().enumerate() {
        if Some(c) == id_col {
            continue;
        }
        let raw_cells = body.iter().map(|(line, rec)| (*line, rec[c].trim()));
        if let Some(labels) = opts.category_columns.get(name) {
            let labels = match labels {
                Some(l) => l.clone(),
                None => {
                    let mut uniq: Vec<String> =
                        raw_cells.clone().map(|(_, s)| s.to_string()).collect();
                    uniq.sort();
                    uniq.dedup();
                    uniq.retain(|s| !s.is_empty());
                    uniq
                }
            };
            for (row, (line, raw)) in raw_cells.enumerate() {
                if raw.is_empty() {
                    return Err(Error::MissingValue {
                        row: line,
                        column: name.clone(),
                    });
                }
                let idx = labels
                    .iter()
                    .position(|l| l == raw)
                    .ok_or_else(|| Error::UnknownLabel {
                        row: line,
                        column: name.clone(),
                        label: raw.to_string(),
                    })?;
                cells[row].push(idx as f64);
            }
            specs.push(FeatureSpec::categorical(name.clone(), labels)?);
        } else {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (row, (line, raw)) in raw_cells.enumerate() {
                if raw.is_empty() {
                    return Err(Error::MissingValue {
                        row: line,
                        column: name.clone(),
                    });
                }
                let v: f64 = raw.parse().map_err(|_| Error::CsvParse {
                    row: line,
                    column: name.clone(),
                    raw: raw.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::CsvNonFinite {
                        row: line,
                        column: name.clone(),
                        raw: raw.to_string(),
                    });
                }
                lo = lo.min(v);
                hi = hi.max(v);
                cells[row].push(v);
            }
            let data_range = (lo < hi).then_some((lo, hi));
            let (min, max) = match (opts.ranges.get(name), data_range) {
                (Some(&explicit), data) => {
                    if data != Some(explicit) {
                        overrides.push(RangeOverride {
                            feature: name.clone(),
                            data_range: data,
                            explicit_range: explicit,
                        });
                    }
                    explicit
                }
                (None, Some(r)) => r,
                (None, None) => {
                    return Err(Error::InvalidConfig(format!(
                        "column '{name}' is constant ({lo}); supply an explicit range or declare it categorical"
                    )))
                }
            };
            specs.push(FeatureSpec::numeric(name.clone(), min, max)?);
        }
    }

    let space = FeatureSpace::new(specs)?;
    let ids = id_col.map(|c| body.iter().map(|(_, r)| r[c].trim().to_string()).collect());
    Ok(Dataset {
        space,
        rows: cells.into_iter().map(Instance::new).collect(),
        ids,
        overrides,
    })
}
