//! Calibration metrics: accuracy, expected calibration error, normalized
//! Brier score, NLL, reliability-bin statistics, and per-class breakdowns.
//!
//! ECE quantizes the confidence interval [0,1] into K equal segments
//! [i/K, (i+1)/K) — the last closed at 1.0 so confidence 1 has a home — and
//! weights the per-bin |accuracy − mean confidence| gap by bin occupancy:
//!
//! ```text
//! ECE = Σ_i (N_i / N) · |acc(seg_i) − conf(seg_i)|
//! ```
//!
//! Empty bins contribute 0. The normalized Brier score is
//! `(1/2N) Σ_i Σ_a (C_ai − p_ai)²` against the one-hot truth C, which lands
//! in [0,1] (0 = one-hot on the true class, 1 = one-hot on a wrong class).
//! NLL is always computed from `log_softmax` of the (scaled) logits, never by
//! logging a softmax output, so confident predictions do not round to
//! `ln(0)`.
//!
//! Per-class rows condition on the GROUND-TRUTH class: `support` counts the
//! samples whose true label is the class, and `acc`/`avg_conf`/`ece` are
//! computed over exactly those samples (conditioning on the predicted class
//! is the documented alternative). `delta_acc = avg_conf − acc`, so positive
//! values mean overconfidence.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::{Calibrator, MIN_TEMPERATURE};
use crate::dataset::SampleSet;
use crate::error::{Error, Result};
use crate::numerics::{argmax, log_softmax, Matrix};

/// Default bin count for ECE and reliability diagrams.
pub const DEFAULT_BINS: usize = 10;

/// Occupancy and calibration statistics of one confidence segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean confidence of the samples in the bin; 0 by convention when empty.
    pub avg_conf: f64,
    /// Fraction of correct predictions in the bin; 0 by convention when empty.
    pub acc: f64,
}

/// Ground-truth-conditioned calibration statistics for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClassRow {
    pub index: usize,
    pub name: Option<String>,
    /// Number of samples whose true label is this class.
    pub support: usize,
    pub acc: f64,
    pub avg_conf: f64,
    /// avg_conf − acc; positive means overconfident.
    pub delta_acc: f64,
    /// ECE over only this class's samples.
    pub ece: f64,
}

/// Every calibration metric for one dataset under one calibrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    pub accuracy: f64,
    pub n_total: usize,
    pub bins: Vec<BinStats>,
    pub per_class: Vec<PerClassRow>,
}

/// Predicted class (lowest-index tie rule) and its probability per row.
pub fn predict(probs: &Matrix) -> Result<(Vec<usize>, Vec<f64>)> {
    if probs.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    let mut labels = Vec::with_capacity(probs.rows());
    let mut confidences = Vec::with_capacity(probs.rows());
    for i in 0..probs.rows() {
        let row = probs.row(i);
        let mut sum = 0.0;
        for &p in row {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::ConfidenceOutOfRange { index: i, value: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::RowNotNormalized { row: i, sum });
        }
        let am = argmax(row)?;
        labels.push(am);
        confidences.push(row[am]);
    }
    Ok((labels, confidences))
}

/// Bin for a confidence under left-closed/right-open edges with the last bin
/// closed at 1.0. The floor-based guess is corrected by direct comparison
/// against the true edges, so values are placed by the interval definition
/// rather than by floating-point truncation artifacts.
pub(crate) fn bin_index(c: f64, k: usize) -> usize {
    let kf = k as f64;
    let mut idx = ((c * kf).floor() as usize).min(k - 1);
    while idx > 0 && c < idx as f64 / kf {
        idx -= 1;
    }
    while idx + 1 < k && c >= (idx + 1) as f64 / kf {
        idx += 1;
    }
    idx
}

/// Groups confidences into K equal segments and reports per-bin occupancy,
/// mean confidence, and empirical accuracy.
pub fn reliability_bins(confidences: &[f64], correct: &[bool], k: usize) -> Result<Vec<BinStats>> {
    if k < 1 {
        return Err(Error::InvalidArgument(
            "bin count must be at least 1".into(),
        ));
    }
    if confidences.is_empty() {
        return Err(Error::EmptyInput);
    }
    if confidences.len() != correct.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} confidences but {} correctness flags",
            confidences.len(),
            correct.len()
        )));
    }
    let mut count = vec![0usize; k];
    let mut conf_sum = vec![0.0; k];
    let mut correct_count = vec![0usize; k];
    for (i, (&c, &ok)) in confidences.iter().zip(correct).enumerate() {
        if !c.is_finite() || !(0.0..=1.0).contains(&c) {
            return Err(Error::ConfidenceOutOfRange { index: i, value: c });
        }
        let b = bin_index(c, k);
        count[b] += 1;
        conf_sum[b] += c;
        if ok {
            correct_count[b] += 1;
        }
    }
    let kf = k as f64;
    Ok((0..k)
        .map(|i| BinStats {
            lo: i as f64 / kf,
            hi: (i + 1) as f64 / kf,
            count: count[i],
            avg_conf: if count[i] > 0 {
                conf_sum[i] / count[i] as f64
            } else {
                0.0
            },
            acc: if count[i] > 0 {
                correct_count[i] as f64 / count[i] as f64
            } else {
                0.0
            },
        })
        .collect())
}

/// Expected calibration error from bin statistics; empty bins contribute 0.
pub fn ece(bins: &[BinStats], n_total: usize) -> Result<f64> {
    if n_total == 0 {
        return Err(Error::EmptyInput);
    }
    let counted: usize = bins.iter().map(|b| b.count).sum();
    if counted != n_total {
        return Err(Error::InvalidArgument(format!(
            "bin counts sum to {counted} but n_total is {n_total}"
        )));
    }
    let n = n_total as f64;
    let mut total = 0.0;
    for b in bins {
        if b.count == 0 {
            continue;
        }
        total += (b.count as f64 / n) * (b.acc - b.avg_conf).abs();
    }
    Ok(total)
}

/// Normalized Brier score in [0,1].
pub fn brier(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    if probs.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if labels.len() != probs.rows() {
        return Err(Error::DimensionMismatch(format!(
            "probabilities have {} rows but there are {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    let m = probs.cols();
    let mut total = 0.0;
    for (i, &t) in labels.iter().enumerate() {
        if t >= m {
            return Err(Error::LabelOutOfRange {
                row: i + 1,
                label: t as i64,
                classes: m,
            });
        }
        for (a, &p) in probs.row(i).iter().enumerate() {
            let c = if a == t { 1.0 } else { 0.0 };
            total += (c - p) * (c - p);
        }
    }
    Ok(total / (2.0 * probs.rows() as f64))
}

/// Mean negative log-likelihood of the true class under per-sample
/// temperature scaling, computed in log space throughout.
pub fn nll(logits: &Matrix, temperatures: &[f64], labels: &[usize]) -> Result<f64> {
    if logits.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if temperatures.len() != logits.rows() || labels.len() != logits.rows() {
        return Err(Error::DimensionMismatch(format!(
            "logits have {} rows but there are {} temperatures and {} labels",
            logits.rows(),
            temperatures.len(),
            labels.len()
        )));
    }
    let mut scaled = vec![0.0; logits.cols()];
    let mut sum = 0.0;
    for i in 0..logits.rows() {
        let tau = temperatures[i];
        if !tau.is_finite() || tau < MIN_TEMPERATURE {
            return Err(Error::InvalidArgument(format!(
                "temperature must be a finite value >= {MIN_TEMPERATURE}, got {tau}"
            )));
        }
        let t = labels[i];
        if t >= logits.cols() {
            return Err(Error::LabelOutOfRange {
                row: i + 1,
                label: t as i64,
                classes: logits.cols(),
            });
        }
        for (s, y) in scaled.iter_mut().zip(logits.row(i)) {
            *s = y / tau;
        }
        let lp = log_softmax(&scaled)?;
        sum += -lp[t];
    }
    Ok(sum / logits.rows() as f64)
}

/// Fraction of predictions equal to the true label.
pub fn accuracy(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    if predicted.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions but {} labels",
            predicted.len(),
            labels.len()
        )));
    }
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Applies the calibrator and computes every metric plus per-class rows.
pub fn full_report(
    set: &SampleSet,
    calibrator: &Calibrator,
    k: usize,
) -> Result<CalibrationReport> {
    let probs = calibrator.probabilities(set)?;
    let temps = calibrator.per_sample_temperatures(set)?;
    let (preds, conf) = predict(&probs)?;
    let correct: Vec<bool> = preds.iter().zip(&set.labels).map(|(p, l)| p == l).collect();
    let n = set.len();
    let bins = reliability_bins(&conf, &correct, k)?;
    let report = CalibrationReport {
        ece: ece(&bins, n)?,
        brier: brier(&probs, &set.labels)?,
        nll: nll(&set.logits, &temps, &set.labels)?,
        accuracy: accuracy(&preds, &set.labels)?,
        n_total: n,
        bins,
        per_class: per_class_rows(set, &conf, &correct, k)?,
    };
    Ok(report)
}

fn per_class_rows(
    set: &SampleSet,
    conf: &[f64],
    correct: &[bool],
    k: usize,
) -> Result<Vec<PerClassRow>> {
    let m = set.num_classes();
    let mut rows = Vec::with_capacity(m);
    for class in 0..m {
        let idx: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] == class).collect();
        let name = set.class_names.as_ref().map(|names| names[class].clone());
        if idx.is_empty() {
            rows.push(PerClassRow {
                index: class,
                name,
                support: 0,
                acc: 0.0,
                avg_conf: 0.0,
                delta_acc: 0.0,
                ece: 0.0,
            });
            continue;
        }
        let support = idx.len();
        let class_conf: Vec<f64> = idx.iter().map(|&i| conf[i]).collect();
        let class_correct: Vec<bool> = idx.iter().map(|&i| correct[i]).collect();
        let acc = class_correct.iter().filter(|&&b| b).count() as f64 / support as f64;
        let avg_conf = class_conf.iter().sum::<f64>() / support as f64;
        let class_bins = reliability_bins(&class_conf, &class_correct, k)?;
        rows.push(PerClassRow {
            index: class,
            name,
            support,
            acc,
            avg_conf,
            delta_acc: avg_conf - acc,
            ece: ece(&class_bins, support)?,
        });
    }
    Ok(rows)
}

/// Writes a report as pretty-printed JSON with lossless float encoding.
pub fn write_report_json(report: &CalibrationReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a report written by [`write_report_json`].
pub fn read_report_json(path: &Path) -> Result<CalibrationReport> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(text.trim_start_matches('\u{feff}')).map_err(|e| Error::Json {
        file: path.to_path_buf(),
        message: e.to_string(),
    })
}
