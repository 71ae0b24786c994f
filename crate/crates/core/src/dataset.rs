//! The on-disk sample format and its loader: CSV matrices plus a JSON
//! manifest, validated into a [`SampleSet`].
//!
//! The CSV dialect is deliberately narrow so any pipeline that can export
//! logits can produce it: UTF-8, '.' decimal separator, no thousands
//! separators, one sample per line, values comma-separated, and an optional
//! single header line detected by a non-numeric first token. Labels are a
//! single-column CSV of integers. Floats are written with the shortest
//! representation that round-trips, so a write/load cycle is bit-identical.
//!
//! Diagnostics for file contents use 1-based row/column coordinates, counting
//! a header line when present — the numbers match what an editor shows.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// A fully validated dataset: N samples with m-class logits, ground-truth
/// labels, and optionally a feature vector and class names.
#[derive(Debug, Clone)]
pub struct SampleSet {
    /// N×m logit matrix, one row per sample.
    pub logits: Matrix,
    /// N ground-truth class indices, each in [0, m).
    pub labels: Vec<usize>,
    /// Optional N×d feature matrix (the classifier's intermediate
    /// representation of each input).
    pub features: Option<Matrix>,
    /// Optional m class names, index-aligned with logit columns.
    pub class_names: Option<Vec<String>>,
}

impl SampleSet {
    /// Builds and validates a sample set from in-memory parts.
    pub fn new(
        logits: Matrix,
        labels: Vec<usize>,
        features: Option<Matrix>,
        class_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let set = Self {
            logits,
            labels,
            features,
            class_names,
        };
        set.validate()?;
        Ok(set)
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.logits.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of classes m.
    pub fn num_classes(&self) -> usize {
        self.logits.cols()
    }

    /// Feature dimension d, when features are present.
    pub fn feature_dim(&self) -> Option<usize> {
        self.features.as_ref().map(|f| f.cols())
    }

    fn validate(&self) -> Result<()> {
        let n = self.logits.rows();
        let m = self.logits.cols();
        if n < 1 {
            return Err(Error::InvalidArgument(
                "a sample set must contain at least one sample".into(),
            ));
        }
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sample set must have at least two classes, got {m}"
            )));
        }
        if self.labels.len() != n {
            return Err(Error::RowCountMismatch(format!(
                "logits have {n} rows but there are {} labels",
                self.labels.len()
            )));
        }
        for (i, &label) in self.labels.iter().enumerate() {
            if label >= m {
                return Err(Error::LabelOutOfRange {
                    row: i + 1,
                    label: label as i64,
                    classes: m,
                });
            }
        }
        if let Some(features) = &self.features {
            if features.rows() != n {
                return Err(Error::RowCountMismatch(format!(
                    "logits have {n} rows but features have {}",
                    features.rows()
                )));
            }
            if features.cols() < 1 {
                return Err(Error::InvalidArgument(
                    "features must have at least one dimension".into(),
                ));
            }
        }
        if let Some(names) = &self.class_names {
            if names.len() != m {
                return Err(Error::ClassCountMismatch(format!(
                    "manifest lists {} class names but logits have {m} columns",
                    names.len()
                )));
            }
        }
        Ok(())
    }
}

/// The JSON manifest that ties a dataset's files together. Paths are
/// resolved relative to the manifest file itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub logits: String,
    pub labels: String,
    pub features: Option<String>,
    pub class_names: Option<Vec<String>>,
}

/// Loads and fully validates a dataset from its manifest. Row i of every
/// referenced file describes the same sample.
pub fn load_sampleset(manifest_path: &Path) -> Result<SampleSet> {
    let text = fs::read_to_string(manifest_path).map_err(|source| Error::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(strip_bom(&text)).map_err(|e| Error::Json {
        file: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let logits = read_matrix_csv(&base.join(&manifest.logits))?;
    let m = logits.cols();
    let labels = read_labels_csv(&base.join(&manifest.labels), m)?;
    let features = match &manifest.features {
        Some(rel) => Some(read_matrix_csv(&base.join(rel))?),
        None => None,
    };

    if labels.len() != logits.rows() {
        return Err(Error::RowCountMismatch(format!(
            "{} has {} rows but {} has {} rows",
            manifest.logits,
            logits.rows(),
            manifest.labels,
            labels.len()
        )));
    }
    if let Some(f) = &features {
        if f.rows() != logits.rows() {
            return Err(Error::RowCountMismatch(format!(
                "{} has {} rows but {} has {} rows",
                manifest.logits,
                logits.rows(),
                manifest.features.as_deref().unwrap_or(""),
                f.rows()
            )));
        }
    }
    SampleSet::new(logits, labels, features, manifest.class_names)
}

/// Confirms two splits are compatible: same class count, and — when either
/// carries features — same feature dimension on both.
pub fn validate_pair(val: &SampleSet, test: &SampleSet) -> Result<()> {
    if val.num_classes() != test.num_classes() {
        return Err(Error::ClassCountMismatch(format!(
            "validation set has {} classes but test set has {}",
            val.num_classes(),
            test.num_classes()
        )));
    }
    match (val.feature_dim(), test.feature_dim()) {
        (Some(dv), Some(dt)) if dv != dt => Err(Error::FeatureDimMismatch(format!(
            "validation features have dimension {dv} but test features have {dt}"
        ))),
        (Some(dv), None) => Err(Error::FeatureDimMismatch(format!(
            "validation set has features (dimension {dv}) but test set has none"
        ))),
        (None, Some(dt)) => Err(Error::FeatureDimMismatch(format!(
            "test set has features (dimension {dt}) but validation set has none"
        ))),
        _ => Ok(()),
    }
}

fn strip_bom(text: &str) -> &str {
    text.strip_prefix('\u{feff}').unwrap_or(text)
}

/// Splits file text into (line number, line) pairs, skipping an optional
/// header line. The header is detected by a non-numeric first token.
fn data_lines(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    for (idx, raw) in strip_bom(text).lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if idx == 0 {
            let first = line.split(',').next().unwrap_or("").trim();
            if first.parse::<f64>().is_err() {
                continue; // header line
            }
        }
        out.push((idx + 1, line));
    }
    out
}

/// Reads a CSV float matrix, checking that every row has the same number of
/// columns and that every value is finite.
pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line_no, line) in data_lines(&text) {
        let mut these = 0;
        for (col_idx, token) in line.split(',').enumerate() {
            let value: f64 = token.trim().parse().map_err(|_| Error::Parse {
                file: path.to_path_buf(),
                row: line_no,
                col: col_idx + 1,
                message: format!("expected a number, got {:?}", token.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    file: path.to_path_buf(),
                    row: line_no,
                    col: col_idx + 1,
                });
            }
            data.push(value);
            these += 1;
        }
        match cols {
            None => cols = Some(these),
            Some(c) if c != these => {
                return Err(Error::Parse {
                    file: path.to_path_buf(),
                    row: line_no,
                    col: 1,
                    message: format!("row has {these} values, expected {c}"),
                });
            }
            _ => {}
        }
        rows += 1;
    }
    Matrix::from_vec(rows, cols.unwrap_or(0), data)
}

/// Reads a single-column CSV of integer labels and checks each lies in
/// [0, num_classes).
pub fn read_labels_csv(path: &Path, num_classes: usize) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut labels = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let token = line.split(',').next().unwrap_or("").trim();
        if line.contains(',') {
            return Err(Error::Parse {
                file: path.to_path_buf(),
                row: line_no,
                col: 2,
                message: "labels must be a single column".into(),
            });
        }
        let label: i64 = token.parse().map_err(|_| Error::Parse {
            file: path.to_path_buf(),
            row: line_no,
            col: 1,
            message: format!("expected an integer label, got {token:?}"),
        })?;
        if label < 0 || label as usize >= num_classes {
            return Err(Error::LabelOutOfRange {
                row: line_no,
                label,
                classes: num_classes,
            });
        }
        labels.push(label as usize);
    }
    Ok(labels)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a float matrix as header-less CSV with shortest round-trip
/// formatting, so reading it back is bit-identical.
pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes labels as a single integer column.
pub fn write_labels_csv(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes a sample set into `dir` as manifest.json + logits.csv + labels.csv
/// (+ features.csv when present).
pub fn write_sampleset(set: &SampleSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_matrix_csv(&set.logits, &dir.join("logits.csv"))?;
    write_labels_csv(&set.labels, &dir.join("labels.csv"))?;
    if let Some(f) = &set.features {
        write_matrix_csv(f, &dir.join("features.csv"))?;
    }
    let manifest = Manifest {
        logits: "logits.csv".into(),
        labels: "labels.csv".into(),
        features: set.features.as_ref().map(|_| "features.csv".into()),
        class_names: set.class_names.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    write_file(&dir.join("manifest.json"), &(json + "\n"))
}
