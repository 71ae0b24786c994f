//! The three confidence estimators — raw softmax, global temperature scaling,
//! and the input-conditioned CARING temperature network — plus their NLL-based
//! fitting procedures.
//!
//! # Gradients
//!
//! Both fitters run plain full-batch gradient descent (no momentum, no
//! adaptive steps) on the mean negative log-likelihood, with hand-derived
//! gradients. For one sample with logits y, true class t and temperature τ:
//!
//! ```text
//! L(τ) = −log softmax(y/τ)_t = −y_t/τ + log Σ_a exp(y_a/τ)
//! dL/dτ = y_t/τ² − Σ_a p_a y_a/τ² = (y_t − Σ_a p_a y_a) / τ²,   p = softmax(y/τ)
//! ```
//!
//! The CARING network computes a per-sample temperature
//! `T(z) = 1 + relu(W2 · relu(W1 z + b1) + b2)`, so the same expression with
//! τ ↦ T(z) seeds the chain rule backwards through the network:
//!
//! ```text
//! g_s = dL/dT · 1[s > 0]            where s = W2·relu(W1 z + b1) + b2
//! ∂L/∂W2_j = g_s · h_j,  ∂L/∂b2 = g_s          (h = relu(W1 z + b1))
//! g_h_j = g_s · W2_j · 1[(W1 z + b1)_j > 0]
//! ∂L/∂W1_jk = g_h_j · z_k,  ∂L/∂b1_j = g_h_j
//! ```
//!
//! relu'(0) is taken as 0. Weight decay adds `wd · W` to the weight-matrix
//! gradients only (biases are excluded, the conventional reading), which is
//! the gradient of the penalty `(wd/2)·(‖W1‖² + ‖W2‖²)` in
//! [`caring_objective`].
//!
//! τ is optimized directly (not in log-space) and projected onto
//! [[`MIN_TEMPERATURE`], ∞) after every step; a log-parametrization would
//! avoid the projection but the plain form keeps the update rule transparent.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::SampleSet;
use crate::error::{Error, Result};
use crate::metrics;
use crate::numerics::{argmax, log_softmax, mat_vec, softmax, Matrix, Prng};

/// Floor for every temperature — fitted, loaded, or applied.
pub const MIN_TEMPERATURE: f64 = 1e-3;

/// Bin count for the per-epoch validation ECE recorded in training traces.
const TRACE_ECE_BINS: usize = 10;

fn check_temperature(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau < MIN_TEMPERATURE {
        return Err(Error::InvalidArgument(format!(
            "temperature must be a finite value >= {MIN_TEMPERATURE}, got {tau}"
        )));
    }
    Ok(())
}

/// Parameters of the CARING temperature network
/// `T(z) = 1 + relu(W2 · relu(W1 z + b1) + b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaringModel {
    /// hidden × input_dim.
    pub w1: Matrix,
    /// Length hidden.
    pub b1: Vec<f64>,
    /// 1 × hidden.
    pub w2: Matrix,
    pub b2: f64,
    pub hidden: usize,
    pub input_dim: usize,
}

impl CaringModel {
    /// Builds a model from its parameter tensors, validating shapes and
    /// finiteness.
    pub fn new(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: f64) -> Result<Self> {
        let hidden = w1.rows();
        let input_dim = w1.cols();
        if hidden < 1 || input_dim < 1 {
            return Err(Error::InvalidArgument(format!(
                "caring model needs hidden >= 1 and input_dim >= 1, got {hidden} and {input_dim}"
            )));
        }
        if b1.len() != hidden {
            return Err(Error::DimensionMismatch(format!(
                "b1 has length {} but w1 has {hidden} rows",
                b1.len()
            )));
        }
        if w2.rows() != 1 || w2.cols() != hidden {
            return Err(Error::DimensionMismatch(format!(
                "w2 is {}x{}, expected 1x{hidden}",
                w2.rows(),
                w2.cols()
            )));
        }
        if !w1.is_finite()
            || !w2.is_finite()
            || !b1.iter().all(|v| v.is_finite())
            || !b2.is_finite()
        {
            return Err(Error::InvalidArgument(
                "caring parameters must all be finite".into(),
            ));
        }
        Ok(Self {
            w1,
            b1,
            w2,
            b2,
            hidden,
            input_dim,
        })
    }

    /// All-zero model: T(z) = 1 everywhere, i.e. the identity calibrator.
    pub fn zeros(hidden: usize, input_dim: usize) -> Result<Self> {
        Self::new(
            Matrix::zeros(hidden, input_dim),
            vec![0.0; hidden],
            Matrix::zeros(1, hidden),
            0.0,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite()
            && self.w2.is_finite()
            && self.b1.iter().all(|v| v.is_finite())
            && self.b2.is_finite()
    }
}

/// A fitted (or trivial) confidence estimator.
#[derive(Debug, Clone)]
pub enum Calibrator {
    /// Raw softmax of the logits.
    Identity,
    /// Global temperature scaling: softmax(y / tau).
    Temperature { tau: f64 },
    /// Input-conditioned temperature: softmax(y / T(z)).
    Caring(CaringModel),
}

impl Calibrator {
    /// Temperature calibrator with the floor enforced.
    pub fn temperature(tau: f64) -> Result<Self> {
        check_temperature(tau)?;
        Ok(Self::Temperature { tau })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Temperature { .. } => "temperature",
            Self::Caring(_) => "caring",
        }
    }

    /// Calibrated probabilities for every sample in the set.
    pub fn probabilities(&self, set: &SampleSet) -> Result<Matrix> {
        match self {
            Self::Identity => confidences_identity(&set.logits),
            Self::Temperature { tau } => confidences_temperature(&set.logits, *tau),
            Self::Caring(model) => {
                let features = set.features.as_ref().ok_or_else(features_required)?;
                confidences_caring(&set.logits, features, model)
            }
        }
    }

    /// The temperature applied to each sample: 1 for identity, τ for
    /// temperature scaling, T(z_i) for CARING.
    pub fn per_sample_temperatures(&self, set: &SampleSet) -> Result<Vec<f64>> {
        match self {
            Self::Identity => Ok(vec![1.0; set.len()]),
            Self::Temperature { tau } => {
                check_temperature(*tau)?;
                Ok(vec![*tau; set.len()])
            }
            Self::Caring(model) => {
                let features = set.features.as_ref().ok_or_else(features_required)?;
                (0..set.len())
                    .map(|i| caring_temperature(features.row(i), model))
                    .collect()
            }
        }
    }
}

fn features_required() -> Error {
    Error::FeaturesRequired("the caring calibrator needs a dataset with features".into())
}

/// Raw softmax confidences: one probability row per logit row.
pub fn confidences_identity(logits: &Matrix) -> Result<Matrix> {
    confidences_temperature_unchecked(logits, 1.0)
}

/// Temperature-scaled confidences: softmax(y / tau) per row.
pub fn confidences_temperature(logits: &Matrix, tau: f64) -> Result<Matrix> {
    check_temperature(tau)?;
    confidences_temperature_unchecked(logits, tau)
}

fn confidences_temperature_unchecked(logits: &Matrix, tau: f64) -> Result<Matrix> {
    let mut data = Vec::with_capacity(logits.rows() * logits.cols());
    let mut scaled = vec![0.0; logits.cols()];
    for i in 0..logits.rows() {
        scale_row(logits.row(i), tau, &mut scaled);
        data.extend(softmax(&scaled)?);
    }
    Matrix::from_vec(logits.rows(), logits.cols(), data)
}

fn scale_row(row: &[f64], tau: f64, out: &mut [f64]) {
    for (s, y) in out.iter_mut().zip(row) {
        *s = y / tau;
    }
}

struct CaringForward {
    h_pre: Vec<f64>,
    h: Vec<f64>,
    s_pre: f64,
    t: f64,
}

fn caring_forward(z: &[f64], model: &CaringModel) -> Result<CaringForward> {
    if z.len() != model.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "caring model expects features of dimension {}, got {}",
            model.input_dim,
            z.len()
        )));
    }
    let mut h_pre = mat_vec(&model.w1, z)?;
    for (v, b) in h_pre.iter_mut().zip(&model.b1) {
        *v += b;
    }
    let h: Vec<f64> = h_pre.iter().map(|&v| v.max(0.0)).collect();
    let mut s_pre = model.b2;
    for (w, x) in model.w2.row(0).iter().zip(&h) {
        s_pre += w * x;
    }
    let t = 1.0 + s_pre.max(0.0);
    Ok(CaringForward { h_pre, h, s_pre, t })
}

/// The input-conditioned temperature `1 + relu(W2 · relu(W1 z + b1) + b2)`;
/// always >= 1, so calibrated probabilities are only ever softened.
pub fn caring_temperature(z: &[f64], model: &CaringModel) -> Result<f64> {
    Ok(caring_forward(z, model)?.t)
}

/// CARING confidences: per row i, softmax(y_i / T(z_i)).
pub fn confidences_caring(
    logits: &Matrix,
    features: &Matrix,
    model: &CaringModel,
) -> Result<Matrix> {
    if logits.rows() != features.rows() {
        return Err(Error::RowCountMismatch(format!(
            "logits have {} rows but features have {}",
            logits.rows(),
            features.rows()
        )));
    }
    let mut data = Vec::with_capacity(logits.rows() * logits.cols());
    let mut scaled = vec![0.0; logits.cols()];
    for i in 0..logits.rows() {
        let t = caring_temperature(features.row(i), model)?;
        scale_row(logits.row(i), t, &mut scaled);
        data.extend(softmax(&scaled)?);
    }
    Matrix::from_vec(logits.rows(), logits.cols(), data)
}

/// Mean NLL of temperature-scaled probabilities and its exact derivative in
/// τ (see the module docs for the derivation).
pub fn nll_grad_tau(logits: &Matrix, labels: &[usize], tau: f64) -> Result<(f64, f64)> {
    check_temperature(tau)?;
    if logits.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if labels.len() != logits.rows() {
        return Err(Error::DimensionMismatch(format!(
            "logits have {} rows but there are {} labels",
            logits.rows(),
            labels.len()
        )));
    }
    let mut scaled = vec![0.0; logits.cols()];
    let mut nll_sum = 0.0;
    let mut grad_sum = 0.0;
    for (i, &t) in labels.iter().enumerate() {
        let y = logits.row(i);
        if t >= logits.cols() {
            return Err(Error::LabelOutOfRange {
                row: i + 1,
                label: t as i64,
                classes: logits.cols(),
            });
        }
        scale_row(y, tau, &mut scaled);
        let lp = log_softmax(&scaled)?;
        nll_sum += -lp[t];
        let mut sum_py = 0.0;
        for (l, v) in lp.iter().zip(y) {
            sum_py += l.exp() * v;
        }
        grad_sum += (y[t] - sum_py) / (tau * tau);
    }
    let n = logits.rows() as f64;
    Ok((nll_sum / n, grad_sum / n))
}

/// Hyperparameters shared by both fitters. `fit_temperature` uses only `lr`
/// and `epochs`; the remaining fields drive `fit_caring`.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub lr: f64,
    pub epochs: usize,
    /// L2 coefficient applied to W1 and W2 (never biases).
    pub weight_decay: f64,
    /// Hidden width of the CARING network.
    pub hidden: usize,
    /// Seed for weight initialization and mini-batch shuffling.
    pub seed: u64,
    /// 0 = full batch; otherwise mini-batches of this size with seeded
    /// shuffling each epoch.
    pub batch_size: usize,
}

impl FitConfig {
    /// Defaults for temperature fitting: lr 0.01 for 50 epochs.
    pub fn temperature_defaults() -> Self {
        Self {
            lr: 0.01,
            epochs: 50,
            weight_decay: 0.0,
            hidden: 64,
            seed: 0,
            batch_size: 0,
        }
    }

    /// Defaults for CARING fitting: lr 5e-3, weight decay 1e-6, 300 epochs,
    /// hidden width 64, full batch.
    pub fn caring_defaults() -> Self {
        Self {
            lr: 5e-3,
            epochs: 300,
            weight_decay: 1e-6,
            hidden: 64,
            seed: 0,
            batch_size: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "weight decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// One row of a training trace, capturing the state at the *start* of its
/// epoch, before that epoch's parameter update.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub epoch: usize,
    pub train_nll: f64,
    /// ECE of the validation set at this epoch (10 bins).
    pub val_ece: Option<f64>,
    /// Mean of the per-sample temperatures (for global scaling, τ itself).
    pub mean_t: f64,
    /// Population standard deviation of the per-sample temperatures (0 for
    /// global scaling).
    pub std_t: f64,
}

/// Per-epoch training records.
#[derive(Debug, Clone, Default)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainingTrace {
    /// CSV with columns epoch, train_nll, mean_T, std_T.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_nll,mean_T,std_T\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.epoch, r.train_nll, r.mean_t, r.std_t
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

struct EpochStats {
    nll: f64,
    val_ece: f64,
    mean_t: f64,
    std_t: f64,
}

/// NLL, validation ECE, and temperature statistics for one pass over the
/// data at fixed per-sample temperatures.
fn epoch_stats(logits: &Matrix, labels: &[usize], temps: &[f64]) -> Result<EpochStats> {
    let n = logits.rows();
    let mut scaled = vec![0.0; logits.cols()];
    let mut nll_sum = 0.0;
    let mut conf = Vec::with_capacity(n);
    let mut correct = Vec::with_capacity(n);
    for i in 0..n {
        scale_row(logits.row(i), temps[i], &mut scaled);
        let lp = log_softmax(&scaled)?;
        nll_sum += -lp[labels[i]];
        let am = argmax(&lp)?;
        conf.push(lp[am].exp());
        correct.push(am == labels[i]);
    }
    let bins = metrics::reliability_bins(&conf, &correct, TRACE_ECE_BINS)?;
    let val_ece = metrics::ece(&bins, n)?;
    let mean_t = temps.iter().sum::<f64>() / n as f64;
    let var = temps
        .iter()
        .map(|t| (t - mean_t) * (t - mean_t))
        .sum::<f64>()
        / n as f64;
    Ok(EpochStats {
        nll: nll_sum / n as f64,
        val_ece,
        mean_t,
        std_t: var.sqrt(),
    })
}

/// Fits a global temperature by full-batch gradient descent on NLL, starting
/// from τ = 1 and projecting onto the floor after each step. Returns the
/// fitted τ and the per-epoch trace.
pub fn fit_temperature(val: &SampleSet, cfg: &FitConfig) -> Result<(f64, TrainingTrace)> {
    cfg.validate()?;
    let mut tau = 1.0;
    let mut trace = TrainingTrace::default();
    let mut temps = vec![0.0; val.len()];
    for epoch in 1..=cfg.epochs {
        temps.iter_mut().for_each(|t| *t = tau);
        let stats = epoch_stats(&val.logits, &val.labels, &temps)?;
        if !stats.nll.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        trace.records.push(TraceRecord {
            epoch,
            train_nll: stats.nll,
            val_ece: Some(stats.val_ece),
            mean_t: tau,
            std_t: 0.0,
        });
        let (_, grad) = nll_grad_tau(&val.logits, &val.labels, tau)?;
        tau = (tau - cfg.lr * grad).max(MIN_TEMPERATURE);
    }
    if !tau.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: cfg.epochs });
    }
    Ok((tau, trace))
}

/// Gradients of [`caring_objective`] with respect to every CARING parameter.
#[derive(Debug, Clone)]
pub struct CaringGradients {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: f64,
}

/// The exact objective the CARING fitter descends: mean NLL of the scaled
/// probabilities plus `(weight_decay/2)·(‖W1‖² + ‖W2‖²)`. Exposed so gradient
/// correctness can be verified externally against finite differences.
pub fn caring_objective(
    model: &CaringModel,
    logits: &Matrix,
    features: &Matrix,
    labels: &[usize],
    weight_decay: f64,
) -> Result<f64> {
    let n = logits.rows();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut scaled = vec![0.0; logits.cols()];
    let mut nll_sum = 0.0;
    for i in 0..n {
        let fwd = caring_forward(features.row(i), model)?;
        scale_row(logits.row(i), fwd.t, &mut scaled);
        let lp = log_softmax(&scaled)?;
        nll_sum += -lp[labels[i]];
    }
    let mut penalty = 0.0;
    for v in model.w1.data() {
        penalty += v * v;
    }
    for v in model.w2.data() {
        penalty += v * v;
    }
    Ok(nll_sum / n as f64 + 0.5 * weight_decay * penalty)
}

/// Analytic gradients of [`caring_objective`] over the full batch (mean over
/// samples, plus the weight-decay term on W1 and W2).
pub fn caring_gradients(
    model: &CaringModel,
    logits: &Matrix,
    features: &Matrix,
    labels: &[usize],
    weight_decay: f64,
) -> Result<CaringGradients> {
    let all: Vec<usize> = (0..logits.rows()).collect();
    caring_gradients_over(model, logits, features, labels, &all, weight_decay)
}

fn caring_gradients_over(
    model: &CaringModel,
    logits: &Matrix,
    features: &Matrix,
    labels: &[usize],
    indices: &[usize],
    weight_decay: f64,
) -> Result<CaringGradients> {
    if indices.is_empty() {
        return Err(Error::EmptyInput);
    }
    let h = model.hidden;
    let d = model.input_dim;
    let mut gw1 = Matrix::zeros(h, d);
    let mut gb1 = vec![0.0; h];
    let mut gw2 = Matrix::zeros(1, h);
    let mut gb2 = 0.0;
    let mut scaled = vec![0.0; logits.cols()];
    for &i in indices {
        let z = features.row(i);
        let y = logits.row(i);
        let fwd = caring_forward(z, model)?;
        scale_row(y, fwd.t, &mut scaled);
        let lp = log_softmax(&scaled)?;
        let mut sum_py = 0.0;
        for (l, v) in lp.iter().zip(y) {
            sum_py += l.exp() * v;
        }
        let g_t = (y[labels[i]] - sum_py) / (fwd.t * fwd.t);
        if fwd.s_pre <= 0.0 {
            continue; // relu gate closed: no gradient reaches the network
        }
        let g_s = g_t;
        gb2 += g_s;
        for (j, gb1_j) in gb1.iter_mut().enumerate() {
            gw2.data_mut()[j] += g_s * fwd.h[j];
            if fwd.h_pre[j] > 0.0 {
                let g_hpre = g_s * model.w2.get(0, j);
                *gb1_j += g_hpre;
                for (k, zk) in z.iter().enumerate() {
                    gw1.data_mut()[j * d + k] += g_hpre * zk;
                }
            }
        }
    }
    let count = indices.len() as f64;
    for v in gw1.data_mut() {
        *v /= count;
    }
    for v in gb1.iter_mut() {
        *v /= count;
    }
    for v in gw2.data_mut() {
        *v /= count;
    }
    gb2 /= count;
    for (g, w) in gw1.data_mut().iter_mut().zip(model.w1.data()) {
        *g += weight_decay * w;
    }
    for (g, w) in gw2.data_mut().iter_mut().zip(model.w2.data()) {
        *g += weight_decay * w;
    }
    Ok(CaringGradients {
        w1: gw1,
        b1: gb1,
        w2: gw2,
        b2: gb2,
    })
}

fn apply_gradients(model: &mut CaringModel, g: &CaringGradients, lr: f64) {
    for (w, gw) in model.w1.data_mut().iter_mut().zip(g.w1.data()) {
        *w -= lr * gw;
    }
    for (b, gb) in model.b1.iter_mut().zip(&g.b1) {
        *b -= lr * gb;
    }
    for (w, gw) in model.w2.data_mut().iter_mut().zip(g.w2.data()) {
        *w -= lr * gw;
    }
    model.b2 -= lr * g.b2;
}

fn shuffle(order: &mut [usize], rng: &mut Prng) {
    for i in (1..order.len()).rev() {
        let j = rng.index(i + 1);
        order.swap(i, j);
    }
}

/// Fits the CARING network on a validation set with features.
///
/// W1 and W2 initialize uniform in (−1/√fan_in, +1/√fan_in) from the seeded
/// generator (W1 first, row-major, then W2), biases start at zero, so the
/// initial temperatures sit near 1. Descends [`caring_objective`] — full
/// batch by default, mini-batches with seeded shuffling when
/// `cfg.batch_size > 0`. The classifier's logits are read-only inputs
/// throughout: the backbone stays frozen by construction.
pub fn fit_caring(val: &SampleSet, cfg: &FitConfig) -> Result<(CaringModel, TrainingTrace)> {
    cfg.validate()?;
    if cfg.hidden < 1 {
        return Err(Error::InvalidArgument(
            "hidden width must be at least 1".into(),
        ));
    }
    let features = val.features.as_ref().ok_or_else(|| {
        Error::FeaturesRequired(
            "fitting the caring calibrator needs a validation set with features".into(),
        )
    })?;
    let n = val.len();
    let d = features.cols();
    let h = cfg.hidden;

    let mut rng = Prng::new(cfg.seed);
    let bound = 1.0 / (d as f64).sqrt();
    let mut w1 = Matrix::zeros(h, d);
    for v in w1.data_mut() {
        *v = rng.uniform(-bound, bound)?;
    }
    let bound = 1.0 / (h as f64).sqrt();
    let mut w2 = Matrix::zeros(1, h);
    for v in w2.data_mut() {
        *v = rng.uniform(-bound, bound)?;
    }
    let mut model = CaringModel::new(w1, vec![0.0; h], w2, 0.0)?;

    let all: Vec<usize> = (0..n).collect();
    let mut order = all.clone();
    let mut temps = vec![0.0; n];
    let mut trace = TrainingTrace::default();
    for epoch in 1..=cfg.epochs {
        for (i, t) in temps.iter_mut().enumerate() {
            *t = caring_temperature(features.row(i), &model)?;
        }
        let stats = epoch_stats(&val.logits, &val.labels, &temps)?;
        if !stats.nll.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        trace.records.push(TraceRecord {
            epoch,
            train_nll: stats.nll,
            val_ece: Some(stats.val_ece),
            mean_t: stats.mean_t,
            std_t: stats.std_t,
        });
        if cfg.batch_size == 0 {
            let g = caring_gradients_over(
                &model,
                &val.logits,
                features,
                &val.labels,
                &all,
                cfg.weight_decay,
            )?;
            apply_gradients(&mut model, &g, cfg.lr);
        } else {
            shuffle(&mut order, &mut rng);
            for chunk in order.chunks(cfg.batch_size) {
                let g = caring_gradients_over(
                    &model,
                    &val.logits,
                    features,
                    &val.labels,
                    chunk,
                    cfg.weight_decay,
                )?;
                apply_gradients(&mut model, &g, cfg.lr);
            }
        }
    }
    if !model.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: cfg.epochs });
    }
    Ok((model, trace))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemperatureFile {
    kind: String,
    tau: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaringFile {
    kind: String,
    hidden: usize,
    input_dim: usize,
    /// Row-major hidden × input_dim.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

/// Saves a fitted calibrator as JSON. Floats are written in shortest
/// round-trip form, so loading restores them bit-exactly. The identity
/// calibrator has no file form (omit the model instead).
pub fn save_model(calibrator: &Calibrator, path: &Path) -> Result<()> {
    let json = match calibrator {
        Calibrator::Identity => {
            return Err(Error::InvalidArgument(
                "the identity calibrator has no model file form; only temperature and caring models are saved".into(),
            ))
        }
        Calibrator::Temperature { tau } => serde_json::to_string_pretty(&TemperatureFile {
            kind: "temperature".into(),
            tau: *tau,
        }),
        Calibrator::Caring(m) => serde_json::to_string_pretty(&CaringFile {
            kind: "caring".into(),
            hidden: m.hidden,
            input_dim: m.input_dim,
            w1: m.w1.data().to_vec(),
            b1: m.b1.clone(),
            w2: m.w2.data().to_vec(),
            b2: m.b2,
        }),
    }
    .expect("model serialization cannot fail");
    fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a calibrator saved by [`save_model`], validating kind, shapes, and
/// finiteness.
pub fn load_model(path: &Path) -> Result<Calibrator> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(text.trim_start_matches('\u{feff}'))
        .map_err(|e| Error::Json {
            file: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::ModelFile("missing \"kind\" field".into()))?;
    match kind {
        "temperature" => {
            let file: TemperatureFile =
                serde_json::from_value(value.clone()).map_err(|e| Error::Json {
                    file: path.to_path_buf(),
                    message: e.to_string(),
                })?;
            if !file.tau.is_finite() || file.tau < MIN_TEMPERATURE {
                return Err(Error::ModelFile(format!(
                    "temperature {} is not a finite value >= {MIN_TEMPERATURE}",
                    file.tau
                )));
            }
            Ok(Calibrator::Temperature { tau: file.tau })
        }
        "caring" => {
            let file: CaringFile =
                serde_json::from_value(value.clone()).map_err(|e| Error::Json {
                    file: path.to_path_buf(),
                    message: e.to_string(),
                })?;
            if file.w1.len() != file.hidden * file.input_dim {
                return Err(Error::ModelFile(format!(
                    "w1 has {} values, expected hidden x input_dim = {}",
                    file.w1.len(),
                    file.hidden * file.input_dim
                )));
            }
            if file.b1.len() != file.hidden || file.w2.len() != file.hidden {
                return Err(Error::ModelFile(format!(
                    "b1 and w2 must have length hidden = {}, got {} and {}",
                    file.hidden,
                    file.b1.len(),
                    file.w2.len()
                )));
            }
            let w1 = Matrix::from_vec(file.hidden, file.input_dim, file.w1)
                .map_err(|e| Error::ModelFile(e.to_string()))?;
            let w2 = Matrix::from_vec(1, file.hidden, file.w2)
                .map_err(|e| Error::ModelFile(e.to_string()))?;
            let model = CaringModel::new(w1, file.b1, w2, file.b2)
                .map_err(|e| Error::ModelFile(e.to_string()))?;
            Ok(Calibrator::Caring(model))
        }
        other => Err(Error::UnknownModelKind(other.to_string())),
    }
}
