//! The `calib` command line: synthetic dataset generation, calibrator
//! fitting, application, metric computation, and SVG reporting, composed
//! into reproducible pipelines.
//!
//! Exit codes: 0 on success (including `--help`/`--version`), 1 on usage
//! errors, 2 on data or validation errors, 3 on numeric failure
//! (non-finite loss during fitting).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use calib_core::calibrate::{
    fit_caring, fit_temperature, load_model, save_model, Calibrator, FitConfig,
};
use calib_core::dataset::load_sampleset;
use calib_core::metrics::{full_report, read_report_json, write_report_json};
use calib_core::numerics::Matrix;
use calib_core::report::{
    render_class_table, render_histogram_from_counts, render_reliability_svg, DiagramStyle,
    HistogramMarkers,
};
use calib_core::synth::{generate_to_dir, SynthConfig};
use calib_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "calib",
    version,
    about = "Post-hoc confidence calibration toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic classifier outputs with known miscalibration.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n_val: usize,
        #[arg(long)]
        n_test: usize,
        /// Number of classes.
        #[arg(long)]
        classes: usize,
        /// Number of sharpness clusters.
        #[arg(long)]
        clusters: usize,
        /// Per-cluster logit multiplier (comma-separated, one per cluster).
        #[arg(long, value_delimiter = ',')]
        sharpness: Vec<f64>,
        /// Per-cluster class separation (comma-separated, one per cluster).
        #[arg(long, value_delimiter = ',')]
        margin: Vec<f64>,
        #[arg(long)]
        feature_dim: usize,
        /// Standard deviation of the feature noise.
        #[arg(long)]
        feature_noise: f64,
        /// Directory receiving val/ and test/ subdirectories.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Compute calibration metrics for a dataset, optionally under a model.
    Metrics {
        #[arg(long, value_name = "MANIFEST")]
        data: PathBuf,
        /// Saved model JSON; omitted means raw softmax confidences.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Confidence bin count.
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, value_name = "REPORT_JSON")]
        out: PathBuf,
    },
    /// Fit a global temperature on a validation set.
    FitTemp {
        #[arg(long, value_name = "MANIFEST")]
        val: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, value_name = "MODEL_JSON")]
        out: PathBuf,
        /// Optional per-epoch training trace CSV.
        #[arg(long, value_name = "TRACE_CSV")]
        trace: Option<PathBuf>,
    },
    /// Fit the input-conditioned temperature network on a validation set.
    FitCaring {
        #[arg(long, value_name = "MANIFEST")]
        val: PathBuf,
        /// Hidden width of the temperature network.
        #[arg(long, default_value_t = 64)]
        hidden: usize,
        #[arg(long, default_value_t = 0.005)]
        lr: f64,
        /// Weight decay on the weight matrices.
        #[arg(long, default_value_t = 1e-6)]
        wd: f64,
        #[arg(long, default_value_t = 300)]
        epochs: usize,
        /// Mini-batch size; 0 means full batch.
        #[arg(long, default_value_t = 0)]
        batch: usize,
        /// Seed for weight initialization and shuffling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "MODEL_JSON")]
        out: PathBuf,
        /// Optional per-epoch training trace CSV.
        #[arg(long, value_name = "TRACE_CSV")]
        trace: Option<PathBuf>,
    },
    /// Write calibrated probabilities (plus the applied temperature) as CSV.
    Apply {
        #[arg(long, value_name = "MANIFEST")]
        data: PathBuf,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "PROBS_CSV")]
        out: PathBuf,
    },
    /// Render SVG diagrams and a per-class table from a saved report.
    Report {
        /// Report JSON produced by `metrics`.
        #[arg(long, value_name = "REPORT_JSON")]
        metrics: PathBuf,
        /// Output path for the reliability diagram.
        #[arg(long, value_name = "SVG")]
        reliability: PathBuf,
        /// Optional output path for the confidence histogram.
        #[arg(long, value_name = "SVG")]
        histogram: Option<PathBuf>,
        /// Optional output path for the per-class CSV table.
        #[arg(long, value_name = "CSV")]
        classes: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version arrive as "errors" but exit 0.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::NonFiniteLoss { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            seed,
            n_val,
            n_test,
            classes,
            clusters,
            sharpness,
            margin,
            feature_dim,
            feature_noise,
            out,
        } => {
            let cfg = SynthConfig {
                n_val,
                n_test,
                m: classes,
                clusters,
                sharpness,
                margin,
                feature_dim,
                feature_noise,
                seed,
            };
            generate_to_dir(&cfg, &out)
        }
        Command::Metrics {
            data,
            model,
            bins,
            out,
        } => {
            let set = load_sampleset(&data)?;
            let calibrator = match model {
                Some(path) => load_model(&path)?,
                None => Calibrator::Identity,
            };
            let report = full_report(&set, &calibrator, bins)?;
            write_report_json(&report, &out)
        }
        Command::FitTemp {
            val,
            lr,
            epochs,
            out,
            trace,
        } => {
            let set = load_sampleset(&val)?;
            let cfg = FitConfig {
                lr,
                epochs,
                ..FitConfig::temperature_defaults()
            };
            let (tau, fit_trace) = fit_temperature(&set, &cfg)?;
            save_model(&Calibrator::Temperature { tau }, &out)?;
            if let Some(path) = trace {
                fit_trace.write_csv(&path)?;
            }
            Ok(())
        }
        Command::FitCaring {
            val,
            hidden,
            lr,
            wd,
            epochs,
            batch,
            seed,
            out,
            trace,
        } => {
            let set = load_sampleset(&val)?;
            let cfg = FitConfig {
                lr,
                epochs,
                weight_decay: wd,
                hidden,
                seed,
                batch_size: batch,
            };
            let (model, fit_trace) = fit_caring(&set, &cfg)?;
            save_model(&Calibrator::Caring(model), &out)?;
            if let Some(path) = trace {
                fit_trace.write_csv(&path)?;
            }
            Ok(())
        }
        Command::Apply { data, model, out } => {
            let set = load_sampleset(&data)?;
            let calibrator = load_model(&model)?;
            let probs = calibrator.probabilities(&set)?;
            let temps = calibrator.per_sample_temperatures(&set)?;
            write_probs_csv(&out, &probs, &temps)
        }
        Command::Report {
            metrics,
            reliability,
            histogram,
            classes,
        } => {
            let report = read_report_json(&metrics)?;
            let style = DiagramStyle::default();
            write_text(&reliability, &render_reliability_svg(&report, &style))?;
            if let Some(path) = histogram {
                let counts: Vec<usize> = report.bins.iter().map(|b| b.count).collect();
                let markers = HistogramMarkers {
                    mean_confidence: mean_confidence(&report),
                    accuracy: Some(report.accuracy),
                };
                write_text(
                    &path,
                    &render_histogram_from_counts(&counts, &markers, &style),
                )?;
            }
            if let Some(path) = classes {
                write_text(&path, &render_class_table(&report))?;
            }
            Ok(())
        }
    }
}

/// Occupancy-weighted mean confidence recovered from the report's bins.
fn mean_confidence(report: &calib_core::metrics::CalibrationReport) -> Option<f64> {
    if report.n_total == 0 {
        return None;
    }
    let total: f64 = report
        .bins
        .iter()
        .map(|b| b.count as f64 * b.avg_conf)
        .sum();
    Some(total / report.n_total as f64)
}

/// Calibrated probabilities with a trailing per-sample temperature column,
/// under the same CSV conventions as logits files.
fn write_probs_csv(path: &Path, probs: &Matrix, temps: &[f64]) -> Result<()> {
    let mut out = String::new();
    for j in 0..probs.cols() {
        out.push_str(&format!("p{j},"));
    }
    out.push_str("T\n");
    for (i, t) in temps.iter().enumerate() {
        for v in probs.row(i) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{t}\n"));
    }
    write_text(path, &out)
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
