//! Synthetic classifier outputs with controllable, known miscalibration, so
//! calibration claims are testable against a ground truth.
//!
//! Each sample draws a cluster k, a true label a uniform in [0, m), base
//! scores `u_j ~ Normal(0, √margin_k)` with `u_a += margin_k`, and emits
//! logits `y = s_k · u` plus a feature vector that block-encodes the cluster
//! id with additive noise.
//!
//! The base construction is exactly calibrated: with that noise scale, Bayes'
//! rule for the label given u reduces to
//!
//! ```text
//! P(a | u) ∝ exp(−(u_a − margin)²/(2·margin)) / exp(−u_a²/(2·margin))
//!          ∝ exp(u_a)
//! ```
//!
//! i.e. the posterior is softmax(u) itself. Multiplying by a sharpness
//! s_k ≥ 1 therefore inflates confidence without moving the argmax — the
//! emitted set is overconfident by construction and the corrective
//! temperature that undoes it is s_k exactly. Because features encode the
//! cluster (and thus the sharpness regime) while a global temperature cannot
//! distinguish clusters, input-conditioned calibration has strictly more
//! signal than global scaling on multi-cluster configs.
//!
//! accuracy depends only on margin (the signal-to-noise ratio is √margin_k),
//! so it is monotone in margin and independent of sharpness.

use std::path::Path;

use crate::dataset::{write_sampleset, SampleSet};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Prng};

/// Parameters of the synthetic generator.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_val: usize,
    pub n_test: usize,
    /// Number of classes.
    pub m: usize,
    /// Number of sharpness clusters.
    pub clusters: usize,
    /// Per-cluster logit multiplier s_k ≥ 1 (the known miscalibration).
    pub sharpness: Vec<f64>,
    /// Per-cluster separation between true-class and other scores.
    pub margin: Vec<f64>,
    /// Feature vector length d ≥ clusters.
    pub feature_dim: usize,
    /// Standard deviation of the noise added to the cluster encoding.
    pub feature_noise: f64,
    pub seed: u64,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {}",
                self.m
            )));
        }
        if self.n_val < 1 || self.n_test < 1 {
            return Err(Error::InvalidArgument(format!(
                "both splits need at least 1 sample, got n_val {} and n_test {}",
                self.n_val, self.n_test
            )));
        }
        if self.clusters < 1 {
            return Err(Error::InvalidArgument("need at least 1 cluster".into()));
        }
        if self.sharpness.len() != self.clusters || self.margin.len() != self.clusters {
            return Err(Error::InvalidArgument(format!(
                "sharpness and margin need one value per cluster ({}), got {} and {}",
                self.clusters,
                self.sharpness.len(),
                self.margin.len()
            )));
        }
        for &s in &self.sharpness {
            if !s.is_finite() || s < 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "sharpness values must be finite and >= 1, got {s}"
                )));
            }
        }
        for &g in &self.margin {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "margin values must be finite and >= 0, got {g}"
                )));
            }
        }
        if self.feature_dim < self.clusters {
            return Err(Error::InvalidArgument(format!(
                "feature_dim must be at least the cluster count so every cluster gets a feature block, got {} < {}",
                self.feature_dim, self.clusters
            )));
        }
        if !self.feature_noise.is_finite() || self.feature_noise < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "feature_noise must be finite and >= 0, got {}",
                self.feature_noise
            )));
        }
        Ok(())
    }
}

/// Block one-hot encoding of cluster `k` across `d` feature slots: slot j
/// belongs to the cluster `j·c/d`.
pub fn cluster_prototype(k: usize, clusters: usize, d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| if j * clusters / d == k { 1.0 } else { 0.0 })
        .collect()
}

/// The cluster whose prototype is nearest to `z` in squared distance
/// (lowest index wins ties).
pub fn nearest_prototype(z: &[f64], clusters: usize) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for k in 0..clusters {
        let proto = cluster_prototype(k, clusters, z.len());
        let dist: f64 = z.iter().zip(&proto).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist < best_dist {
            best = k;
            best_dist = dist;
        }
    }
    best
}

fn draw_split(cfg: &SynthConfig, n: usize, rng: &mut Prng) -> Result<(SampleSet, Vec<usize>)> {
    let m = cfg.m;
    let d = cfg.feature_dim;
    let prototypes: Vec<Vec<f64>> = (0..cfg.clusters)
        .map(|k| cluster_prototype(k, cfg.clusters, d))
        .collect();
    let mut logits = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n * d);
    let mut clusters = Vec::with_capacity(n);
    let mut u = vec![0.0; m];
    for _ in 0..n {
        let k = rng.index(cfg.clusters);
        let a = rng.index(m);
        let margin = cfg.margin[k];
        let sigma = margin.sqrt();
        for v in u.iter_mut() {
            *v = rng.normal(0.0, sigma)?;
        }
        u[a] += margin;
        let s = cfg.sharpness[k];
        logits.extend(u.iter().map(|v| s * v));
        labels.push(a);
        for proto in &prototypes[k] {
            features.push(proto + rng.normal(0.0, cfg.feature_noise)?);
        }
        clusters.push(k);
    }
    let set = SampleSet::new(
        Matrix::from_vec(n, m, logits)?,
        labels,
        Some(Matrix::from_vec(n, d, features)?),
        None,
    )?;
    Ok((set, clusters))
}

/// Generates validation and test splits, drawn i.i.d. from the same process
/// on split-distinct substreams of the seed.
pub fn generate(cfg: &SynthConfig) -> Result<(SampleSet, SampleSet)> {
    cfg.validate()?;
    let mut val_rng = Prng::substream(cfg.seed, 0);
    let mut test_rng = Prng::substream(cfg.seed, 1);
    let (val, _) = draw_split(cfg, cfg.n_val, &mut val_rng)?;
    let (test, _) = draw_split(cfg, cfg.n_test, &mut test_rng)?;
    Ok((val, test))
}

/// Generates both splits and writes them under `dir/val` and `dir/test` in
/// the manifest + CSV layout.
pub fn generate_to_dir(cfg: &SynthConfig, dir: &Path) -> Result<()> {
    let (val, test) = generate(cfg)?;
    write_sampleset(&val, &dir.join("val"))?;
    write_sampleset(&test, &dir.join("test"))?;
    Ok(())
}
