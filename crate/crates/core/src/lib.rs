//! Post-hoc confidence calibration for frozen classifiers.
//!
//! A classifier's softmax scores are often systematically overconfident.
//! This crate measures that miscalibration (ECE, normalized Brier score,
//! NLL, reliability bins, per-class breakdowns) and corrects it after the
//! fact, without touching the classifier itself, using two estimators fitted
//! on held-out validation logits:
//!
//! * global temperature scaling — one scalar τ dividing every logit vector;
//! * an input-conditioned temperature network ("CARING") — a one-hidden-layer
//!   relu network regressing a per-sample temperature T(z) ≥ 1 from the
//!   classifier's feature vector z.
//!
//! Both leave each sample's predicted ranking untouched, so accuracy is
//! invariant; only the confidence attached to predictions changes.
//!
//! The [`synth`] module generates datasets whose miscalibration is known by
//! construction, [`report`] renders reliability diagrams and confidence
//! histograms as dependency-free SVG, and [`dataset`] reads and writes the
//! CSV + manifest interchange format. Everything is deterministic: fixed
//! seeds and fixed reduction orders give byte-identical artifacts across
//! runs.

pub mod calibrate;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
