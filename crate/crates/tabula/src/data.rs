//! Dataset representation, CSV ingestion, splitting, and feature scaling.
//!
//! A [`Dataset`] is a table of homogeneously typed columns (real-valued or
//! categorical) with an optional label column. Missing values are not
//! representable: ingestion rejects any empty cell outright.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("missing value at data row {row}, column {col:?}")]
    MissingValue { row: usize, col: String },
    #[error("duplicate header {0:?}")]
    DuplicateHeader(String),
    #[error("empty file")]
    EmptyFile,
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("carriage return inside a field at data row {row}")]
    BadCharacter { row: usize },
    #[error("label column {0:?} not found")]
    LabelColumnNotFound(String),
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    FractionOutOfRange(f64),
    #[error("stratified split requested but the dataset has no labels")]
    StratifyWithoutLabels,
    #[error("column {0:?} is constant and cannot be scaled")]
    ConstantColumn(String),
    #[error("scaler was fitted on different columns (expected {expected:?})")]
    ScalerColumnMismatch { expected: Vec<String> },
    #[error("column {0:?} is not numeric")]
    NonNumericFeature(String),
    #[error("labels are not categorical")]
    LabelsNotCategorical,
    #[error("labels are not numeric")]
    LabelsNotNumeric,
    #[error("dataset has no labels")]
    NoLabels,
    #[error("operation requires a non-empty dataset")]
    Empty,
    #[error("columns have unequal lengths")]
    UnequalColumnLengths,
    #[error("io: {0}")]
    Io(String),
}

/// One feature column: every cell is a finite real or every cell is a
/// category string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Column {
    Numeric { name: String, values: Vec<f64> },
    Categorical { name: String, values: Vec<String> },
}

impl Column {
    pub fn name(&self) -> &str {
        match self {
            Column::Numeric { name, .. } | Column::Categorical { name, .. } => name,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numeric { values, .. } => values.len(),
            Column::Categorical { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Column::Numeric { .. })
    }

    fn take(&self, indices: &[usize]) -> Column {
        match self {
            Column::Numeric { name, values } => Column::Numeric {
                name: name.clone(),
                values: indices.iter().map(|&i| values[i]).collect(),
            },
            Column::Categorical { name, values } => Column::Categorical {
                name: name.clone(),
                values: indices.iter().map(|&i| values[i].clone()).collect(),
            },
        }
    }
}

/// Immutable table of feature columns plus an optional label column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Option<Column>,
    n_rows: usize,
}

impl Dataset {
    /// Assemble a dataset from columns, validating the shared invariants:
    /// equal lengths and unique names across features and labels.
    pub fn from_columns(columns: Vec<Column>, labels: Option<Column>) -> Result<Self, DataError> {
        let n_rows = columns
            .first()
            .map(Column::len)
            .or_else(|| labels.as_ref().map(Column::len))
            .unwrap_or(0);
        let mut seen = HashSet::new();
        for col in columns.iter().chain(labels.as_ref()) {
            if col.len() != n_rows {
                return Err(DataError::UnequalColumnLengths);
            }
            if !seen.insert(col.name().to_string()) {
                return Err(DataError::DuplicateHeader(col.name().to_string()));
            }
        }
        Ok(Dataset { columns, labels, n_rows })
    }

    /// Convenience constructor for purely numeric feature matrices.
    pub fn from_rows(
        feature_names: &[&str],
        rows: &[Vec<f64>],
        labels: Option<(&str, Vec<String>)>,
    ) -> Result<Self, DataError> {
        let columns = feature_names
            .iter()
            .enumerate()
            .map(|(j, name)| Column::Numeric {
                name: name.to_string(),
                values: rows.iter().map(|r| r[j]).collect(),
            })
            .collect();
        let labels = labels.map(|(name, values)| Column::Categorical {
            name: name.to_string(),
            values,
        });
        Self::from_columns(columns, labels)
    }

    /// Parse CSV text: UTF-8, comma separator, mandatory header, `.`
    /// decimal point, no quoting. A column is numeric iff every cell
    /// parses as a finite real; otherwise it is categorical.
    pub fn from_csv_str(text: &str, label_column: Option<&str>) -> Result<Self, DataError> {
        let mut lines = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .enumerate()
            .filter(|(_, l)| !l.is_empty());

        let (_, header_line) = lines.next().ok_or(DataError::EmptyFile)?;
        let header: Vec<&str> = header_line.split(',').collect();
        let mut seen = HashSet::new();
        for name in &header {
            if !seen.insert(*name) {
                return Err(DataError::DuplicateHeader(name.to_string()));
            }
        }

        let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        let mut n_rows = 0usize;
        for (_, line) in lines {
            n_rows += 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(DataError::RaggedRow {
                    row: n_rows,
                    found: fields.len(),
                    expected: header.len(),
                });
            }
            for (j, field) in fields.iter().enumerate() {
                if field.is_empty() {
                    return Err(DataError::MissingValue {
                        row: n_rows,
                        col: header[j].to_string(),
                    });
                }
                cells[j].push(field.to_string());
            }
        }

        let mut columns: Vec<Column> = header
            .iter()
            .zip(cells)
            .map(|(name, raw)| build_column(name, raw))
            .collect();

        let labels = match label_column {
            Some(target) => {
                let pos = columns
                    .iter()
                    .position(|c| c.name() == target)
                    .ok_or_else(|| DataError::LabelColumnNotFound(target.to_string()))?;
                Some(columns.remove(pos))
            }
            None => None,
        };

        Self::from_columns(columns, labels)
    }

    /// Read and parse a CSV file.
    pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| DataError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_str(&text, label_column)
    }

    /// Serialize back to CSV. Numeric cells use the shortest decimal
    /// representation that parses back to the identical `f64` (at most 17
    /// significant digits), so `from_csv_str ∘ to_csv_string` is exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let all: Vec<&Column> = self.columns.iter().chain(self.labels.as_ref()).collect();
        out.push_str(&all.iter().map(|c| c.name()).collect::<Vec<_>>().join(","));
        out.push('\n');
        for i in 0..self.n_rows {
            for (j, col) in all.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                match col {
                    Column::Numeric { values, .. } => {
                        let _ = write!(out, "{}", values[i]);
                    }
                    Column::Categorical { values, .. } => out.push_str(&values[i]),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        std::fs::write(path.as_ref(), self.to_csv_string())
            .map_err(|e| DataError::Io(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.columns.iter().map(Column::name).collect()
    }

    pub fn labels(&self) -> Option<&Column> {
        self.labels.as_ref()
    }

    /// Class labels as strings; classification models require this form.
    pub fn label_strings(&self) -> Result<Vec<String>, DataError> {
        match &self.labels {
            Some(Column::Categorical { values, .. }) => Ok(values.clone()),
            Some(Column::Numeric { .. }) => Err(DataError::LabelsNotCategorical),
            None => Err(DataError::NoLabels),
        }
    }

    /// Regression targets.
    pub fn label_numbers(&self) -> Result<Vec<f64>, DataError> {
        match &self.labels {
            Some(Column::Numeric { values, .. }) => Ok(values.clone()),
            Some(Column::Categorical { .. }) => Err(DataError::LabelsNotNumeric),
            None => Err(DataError::NoLabels),
        }
    }

    /// Sorted distinct class labels.
    pub fn classes(&self) -> Result<Vec<String>, DataError> {
        let mut classes = self.label_strings()?;
        classes.sort();
        classes.dedup();
        Ok(classes)
    }

    /// Feature rows as a dense numeric matrix; fails on the first
    /// categorical column.
    pub fn to_matrix(&self) -> Result<Vec<Vec<f64>>, DataError> {
        let numeric: Vec<(&str, &[f64])> = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric { name, values } => Ok((name.as_str(), values.as_slice())),
                Column::Categorical { name, .. } => {
                    Err(DataError::NonNumericFeature(name.clone()))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok((0..self.n_rows)
            .map(|i| numeric.iter().map(|(_, v)| v[i]).collect())
            .collect())
    }

    /// New dataset containing the given rows, in order, duplicates
    /// allowed (bootstrap sampling relies on this).
    pub fn take_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.iter().map(|c| c.take(indices)).collect(),
            labels: self.labels.as_ref().map(|c| c.take(indices)),
            n_rows: indices.len(),
        }
    }

}

fn build_column(name: &str, raw: Vec<String>) -> Column {
    let parsed: Option<Vec<f64>> = raw
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    match parsed {
        Some(values) => Column::Numeric { name: name.to_string(), values },
        None => Column::Categorical { name: name.to_string(), values: raw },
    }
}

/// Seeded hold-out split. `|test| = round(test_fraction · n_rows)`; with
/// `stratified` each class contributes within one row of its exact share
/// (largest-remainder apportionment). Row order is preserved on both
/// sides.
pub fn train_test_split(
    d: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::FractionOutOfRange(test_fraction));
    }
    let n = d.n_rows();
    if n < 2 {
        return Err(DataError::Empty);
    }
    let test_count = (test_fraction * n as f64).round() as usize;
    let shuffled = rng::shuffled_indices(n, seed);

    let mut in_test = vec![false; n];
    if stratified {
        let labels = d.label_strings().map_err(|_| DataError::StratifyWithoutLabels)?;
        let quotas = stratified_quotas(&labels, test_fraction, test_count);
        let mut remaining = quotas;
        for &row in &shuffled {
            let q = remaining.get_mut(&labels[row]).unwrap();
            if *q > 0 {
                *q -= 1;
                in_test[row] = true;
            }
        }
    } else {
        for &row in shuffled.iter().take(test_count) {
            in_test[row] = true;
        }
    }

    let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    let test: Vec<usize> = (0..n).filter(|&i| in_test[i]).collect();
    Ok((d.take_rows(&train), d.take_rows(&test)))
}

/// Per-class test-set quotas by the largest-remainder method: floors of
/// the exact shares, then one extra row to the classes with the largest
/// fractional parts until `total` is reached.
fn stratified_quotas(
    labels: &[String],
    fraction: f64,
    total: usize,
) -> std::collections::BTreeMap<String, usize> {
    use std::collections::BTreeMap;
    let mut sizes: BTreeMap<String, usize> = BTreeMap::new();
    for l in labels {
        *sizes.entry(l.clone()).or_insert(0) += 1;
    }
    let mut quotas: BTreeMap<String, usize> = BTreeMap::new();
    let mut remainders: Vec<(f64, String)> = Vec::new();
    let mut assigned = 0usize;
    for (class, &size) in &sizes {
        let exact = fraction * size as f64;
        let base = exact.floor() as usize;
        quotas.insert(class.clone(), base);
        assigned += base;
        remainders.push((exact - base as f64, class.clone()));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    for (_, class) in remainders.into_iter().take(total.saturating_sub(assigned)) {
        *quotas.get_mut(&class).unwrap() += 1;
    }
    quotas
}

/// Which statistic family a scaler uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalerKind {
    /// `(x − μ)/σ` with the population standard deviation (divide by n).
    Standardize,
    /// `(x − min)/(max − min)`.
    MinMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    /// `(μ, σ)` for standardize, `(min, max)` for min-max.
    pub stats: (f64, f64),
}

/// Fitted per-column scaling statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub kind: ScalerKind,
    pub columns: Vec<ColumnScale>,
}

/// Fit scaling statistics over every numeric column of `d`.
///
/// Standardization uses the population variance so that refitting on
/// already-scaled data reproduces μ = 0, σ = 1 exactly.
pub fn fit_scaler(d: &Dataset, kind: ScalerKind) -> Result<ScalerParams, DataError> {
    if d.n_rows() == 0 {
        return Err(DataError::Empty);
    }
    let mut columns = Vec::new();
    for col in d.columns() {
        let (name, values) = match col {
            Column::Numeric { name, values } => (name, values),
            Column::Categorical { .. } => continue,
        };
        let stats = match kind {
            ScalerKind::Standardize => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd <= 0.0 {
                    return Err(DataError::ConstantColumn(name.clone()));
                }
                (mean, sd)
            }
            ScalerKind::MinMax => {
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max <= min {
                    return Err(DataError::ConstantColumn(name.clone()));
                }
                (min, max)
            }
        };
        columns.push(ColumnScale { name: name.clone(), stats });
    }
    Ok(ScalerParams { kind, columns })
}

/// Apply fitted scaling statistics. The parameter column set must match
/// the dataset's numeric columns exactly.
pub fn apply_scaler(d: &Dataset, params: &ScalerParams) -> Result<Dataset, DataError> {
    let numeric: Vec<&str> = d
        .columns()
        .iter()
        .filter(|c| c.is_numeric())
        .map(Column::name)
        .collect();
    let expected: Vec<&str> = params.columns.iter().map(|c| c.name.as_str()).collect();
    if numeric != expected {
        return Err(DataError::ScalerColumnMismatch {
            expected: expected.iter().map(|s| s.to_string()).collect(),
        });
    }

    let mut scaled = Vec::with_capacity(d.columns().len());
    let mut it = params.columns.iter();
    for col in d.columns() {
        match col {
            Column::Categorical { .. } => scaled.push(col.clone()),
            Column::Numeric { name, values } => {
                let scale = it.next().unwrap();
                let values = values
                    .iter()
                    .map(|&v| match params.kind {
                        ScalerKind::Standardize => (v - scale.stats.0) / scale.stats.1,
                        ScalerKind::MinMax => {
                            (v - scale.stats.0) / (scale.stats.1 - scale.stats.0)
                        }
                    })
                    .collect();
                scaled.push(Column::Numeric { name: name.clone(), values });
            }
        }
    }
    Ok(Dataset { columns: scaled, labels: d.labels.clone(), n_rows: d.n_rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const WATERMELON_3A: &str = "density,sugar\n0.697,0.460\n0.774,0.376\n0.634,0.264\n";

    #[test]
    fn csv_basic_parse() {
        let d = Dataset::from_csv_str(WATERMELON_3A, None).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert!(d.columns().iter().all(Column::is_numeric));
    }

    #[test]
    fn csv_header_only_is_empty_dataset() {
        let d = Dataset::from_csv_str("a,b,c\n", None).unwrap();
        assert_eq!(d.n_rows(), 0);
        assert_eq!(d.n_features(), 3);
    }

    #[test]
    fn csv_rejects_missing_value() {
        let err = Dataset::from_csv_str("a,b\n1,\n", None).unwrap_err();
        assert_eq!(err, DataError::MissingValue { row: 1, col: "b".into() });
    }

    #[test]
    fn csv_rejects_duplicate_header() {
        let err = Dataset::from_csv_str("a,a\n1,2\n", None).unwrap_err();
        assert_eq!(err, DataError::DuplicateHeader("a".into()));
    }

    #[test]
    fn csv_rejects_ragged_row() {
        let err = Dataset::from_csv_str("a,b\n1,2\n3\n", None).unwrap_err();
        assert_eq!(err, DataError::RaggedRow { row: 2, found: 1, expected: 2 });
    }

    #[test]
    fn csv_rejects_empty_file() {
        assert_eq!(Dataset::from_csv_str("", None).unwrap_err(), DataError::EmptyFile);
        assert_eq!(Dataset::from_csv_str("\n\n", None).unwrap_err(), DataError::EmptyFile);
    }

    #[test]
    fn csv_label_column_extracted() {
        let d = Dataset::from_csv_str("x,y,Class\n1,2,a\n3,4,b\n", Some("Class")).unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.label_strings().unwrap(), vec!["a", "b"]);
        let missing = Dataset::from_csv_str("x\n1\n", Some("nope")).unwrap_err();
        assert_eq!(missing, DataError::LabelColumnNotFound("nope".into()));
    }

    #[test]
    fn non_finite_cells_make_column_categorical() {
        let d = Dataset::from_csv_str("a\nNaN\n1.0\n", None).unwrap();
        assert!(!d.columns()[0].is_numeric());
        let d = Dataset::from_csv_str("a\ninf\n1.0\n", None).unwrap();
        assert!(!d.columns()[0].is_numeric());
    }

    #[test]
    fn csv_round_trip_exact() {
        let text = "x,y,Class\n0.1,-7.25e-3,a\n0.30000000000000004,2,b\n";
        let d = Dataset::from_csv_str(text, Some("Class")).unwrap();
        let again = Dataset::from_csv_str(&d.to_csv_string(), Some("Class")).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn split_sizes_match_round() {
        // 150 rows at 0.25 → 38 test / 112 train
        let rows: Vec<Vec<f64>> = (0..150).map(|i| vec![i as f64]).collect();
        let labels: Vec<String> = (0..150).map(|i| format!("c{}", i % 3)).collect();
        let d = Dataset::from_rows(&["x"], &rows, Some(("Class", labels))).unwrap();
        let (train, test) = train_test_split(&d, 0.25, 1, false).unwrap();
        assert_eq!(train.n_rows(), 112);
        assert_eq!(test.n_rows(), 38);
    }

    #[test]
    fn split_stratified_exact_shares() {
        // 500 pos / 500 neg at 0.30 → 150 of each in test
        let rows: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64]).collect();
        let labels: Vec<String> = (0..1000)
            .map(|i| if i < 500 { "pos".into() } else { "neg".into() })
            .collect();
        let d = Dataset::from_rows(&["x"], &rows, Some(("y", labels))).unwrap();
        let (_, test) = train_test_split(&d, 0.30, 9, true).unwrap();
        let test_labels = test.label_strings().unwrap();
        assert_eq!(test.n_rows(), 300);
        assert_eq!(test_labels.iter().filter(|l| *l == "pos").count(), 150);
        assert_eq!(test_labels.iter().filter(|l| *l == "neg").count(), 150);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let d = Dataset::from_rows(&["x"], &[vec![1.0], vec![2.0]], None).unwrap();
        assert!(matches!(
            train_test_split(&d, 0.0, 0, false),
            Err(DataError::FractionOutOfRange(_))
        ));
        assert!(matches!(
            train_test_split(&d, 1.0, 0, false),
            Err(DataError::FractionOutOfRange(_))
        ));
    }

    #[test]
    fn split_stratified_requires_labels() {
        let d = Dataset::from_rows(&["x"], &[vec![1.0], vec![2.0]], None).unwrap();
        assert!(matches!(
            train_test_split(&d, 0.5, 0, true),
            Err(DataError::StratifyWithoutLabels)
        ));
    }

    #[test]
    fn split_same_seed_identical() {
        let rows: Vec<Vec<f64>> = (0..37).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows(&["x"], &rows, None).unwrap();
        let (a_train, a_test) = train_test_split(&d, 0.4, 123, false).unwrap();
        let (b_train, b_test) = train_test_split(&d, 0.4, 123, false).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
    }

    #[test]
    fn standardize_matches_formula() {
        let d = Dataset::from_rows(&["x"], &[vec![1.0], vec![2.0], vec![3.0]], None).unwrap();
        let params = fit_scaler(&d, ScalerKind::Standardize).unwrap();
        let scaled = apply_scaler(&d, &params).unwrap();
        let got = scaled.to_matrix().unwrap();
        // population σ = √(2/3)
        assert_relative_eq!(got[0][0], -1.224744871391589, epsilon = 1e-12);
        assert_relative_eq!(got[1][0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(got[2][0], 1.224744871391589, epsilon = 1e-12);
    }

    #[test]
    fn min_max_maps_endpoints() {
        let d = Dataset::from_rows(&["x"], &[vec![2.0], vec![4.0], vec![6.0]], None).unwrap();
        let params = fit_scaler(&d, ScalerKind::MinMax).unwrap();
        let got = apply_scaler(&d, &params).unwrap().to_matrix().unwrap();
        assert_eq!(got, vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn constant_column_rejected() {
        let d = Dataset::from_rows(&["x"], &[vec![5.0], vec![5.0], vec![5.0]], None).unwrap();
        assert_eq!(
            fit_scaler(&d, ScalerKind::Standardize).unwrap_err(),
            DataError::ConstantColumn("x".into())
        );
        assert_eq!(
            fit_scaler(&d, ScalerKind::MinMax).unwrap_err(),
            DataError::ConstantColumn("x".into())
        );
    }

    #[test]
    fn refit_on_scaled_data_is_identity() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * i) as f64, i as f64 - 3.5]).collect();
        let d = Dataset::from_rows(&["a", "b"], &rows, None).unwrap();
        let scaled = apply_scaler(&d, &fit_scaler(&d, ScalerKind::Standardize).unwrap()).unwrap();
        let refit = fit_scaler(&scaled, ScalerKind::Standardize).unwrap();
        for col in refit.columns {
            assert_relative_eq!(col.stats.0, 0.0, epsilon = 1e-9);
            assert_relative_eq!(col.stats.1, 1.0, epsilon = 1e-9);
        }
    }
}
