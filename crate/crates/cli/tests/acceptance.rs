//! Acceptance suite: one test per release criterion. Each test prints a
//! `[PASS] criterion N: ...` line (visible with `--nocapture`); the harness
//! itself reports one ok/FAILED line per criterion either way.

use std::fs;
use std::path::Path;
use std::process::Command;

use calib_core::calibrate::{
    caring_gradients, caring_objective, fit_caring, fit_temperature, nll_grad_tau, Calibrator,
    CaringModel, FitConfig,
};
use calib_core::dataset::SampleSet;
use calib_core::metrics::{
    brier, ece, full_report, nll, predict, reliability_bins, BinStats, CalibrationReport,
    DEFAULT_BINS,
};
use calib_core::numerics::{mat_vec, Matrix, Prng};
use calib_core::report::{plot_rect, render_reliability_svg, DiagramStyle};
use calib_core::synth::{generate, nearest_prototype, SynthConfig};

// ---------------------------------------------------------------------------
// Shared fixtures and helpers
// ---------------------------------------------------------------------------

/// The homogeneous dataset: one cluster, every sample oversharpened by the
/// same factor, so a single global temperature can undo the damage.
fn single_cluster_config() -> SynthConfig {
    SynthConfig {
        n_val: 5000,
        n_test: 5000,
        m: 5,
        clusters: 1,
        sharpness: vec![3.0],
        margin: vec![2.0],
        feature_dim: 4,
        feature_noise: 0.05,
        seed: 11,
    }
}

/// The heterogeneous dataset: two clusters whose sharpness differs, so no
/// single temperature fits both and the features carry the signal.
fn two_cluster_config() -> SynthConfig {
    SynthConfig {
        n_val: 5000,
        n_test: 5000,
        m: 5,
        clusters: 2,
        sharpness: vec![1.5, 4.0],
        margin: vec![2.0, 2.0],
        feature_dim: 8,
        feature_noise: 0.05,
        seed: 7,
    }
}

fn random_matrix(rng: &mut Prng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.uniform(lo, hi).unwrap())
        .collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn random_labels(rng: &mut Prng, n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|_| rng.index(m)).collect()
}

fn random_caring_model(rng: &mut Prng, hidden: usize, input_dim: usize) -> CaringModel {
    let w1 = random_matrix(rng, hidden, input_dim, -0.8, 0.8);
    let b1: Vec<f64> = (0..hidden)
        .map(|_| rng.uniform(-0.5, 0.5).unwrap())
        .collect();
    let w2 = random_matrix(rng, 1, hidden, -0.8, 0.8);
    let b2 = rng.uniform(-0.5, 0.8).unwrap();
    CaringModel::new(w1, b1, w2, b2).unwrap()
}

/// Indices sorted by descending value; ties (which the generators make
/// measure-zero) keep ascending index order.
fn ranking(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    order
}

// ---------------------------------------------------------------------------
// Criterion 1 — ECE equals a brute-force binning oracle
// ---------------------------------------------------------------------------

/// Independent re-statement of the binning rule: scan every segment and test
/// membership by direct comparison, closing only the last segment at 1.
fn oracle_ece(confidences: &[f64], correct: &[bool], k: usize) -> f64 {
    let n = confidences.len() as f64;
    let mut total = 0.0;
    for bin in 0..k {
        let lo = bin as f64 / k as f64;
        let hi = (bin + 1) as f64 / k as f64;
        let mut count = 0usize;
        let mut conf_sum = 0.0;
        let mut hits = 0usize;
        for (c, &ok) in confidences.iter().zip(correct) {
            let inside = *c >= lo && if bin + 1 == k { *c <= hi } else { *c < hi };
            if inside {
                count += 1;
                conf_sum += *c;
                hits += usize::from(ok);
            }
        }
        if count > 0 {
            let acc = hits as f64 / count as f64;
            let avg = conf_sum / count as f64;
            total += count as f64 / n * (acc - avg).abs();
        }
    }
    total
}

#[test]
fn criterion_1_ece_matches_brute_force_oracle() {
    let mut rng = Prng::new(0xACCE_0001);
    let bin_choices = [1usize, 5, 10, 15];
    for instance in 0..1000 {
        let k = bin_choices[rng.index(bin_choices.len())];
        let n = 1 + rng.index(50);
        let (confidences, correct): (Vec<f64>, Vec<bool>) = if instance % 2 == 0 {
            // Real pipeline confidences: scaled softmax of random logits.
            let m = 2 + rng.index(5);
            let logits = random_matrix(&mut rng, n, m, -4.0, 4.0);
            let labels = random_labels(&mut rng, n, m);
            let tau = rng.uniform(0.5, 3.0).unwrap();
            let set = SampleSet::new(logits, labels.clone(), None, None).unwrap();
            let probs = Calibrator::temperature(tau)
                .unwrap()
                .probabilities(&set)
                .unwrap();
            let (preds, conf) = predict(&probs).unwrap();
            let flags = preds.iter().zip(&labels).map(|(p, l)| p == l).collect();
            (conf, flags)
        } else {
            // Adversarial confidences aimed at the bin edges: exact 0, exact
            // 1, values exactly on a boundary, and values a hair off one.
            let conf: Vec<f64> = (0..n)
                .map(|_| match rng.index(5) {
                    0 => 0.0,
                    1 => 1.0,
                    2 => rng.index(k + 1) as f64 / k as f64,
                    3 => {
                        let edge = rng.index(k + 1) as f64 / k as f64;
                        let nudged = edge + if rng.index(2) == 0 { 1e-9 } else { -1e-9 };
                        nudged.clamp(0.0, 1.0)
                    }
                    _ => rng.uniform(0.0, 1.0).unwrap(),
                })
                .collect();
            let flags = (0..n).map(|_| rng.index(2) == 0).collect();
            (conf, flags)
        };
        let bins = reliability_bins(&confidences, &correct, k).unwrap();
        let lib = ece(&bins, n).unwrap();
        let oracle = oracle_ece(&confidences, &correct, k);
        assert!(
            (lib - oracle).abs() <= 1e-12,
            "instance {instance} (n={n}, k={k}): library {lib} vs oracle {oracle}"
        );
    }
    println!(
        "[PASS] criterion 1: ECE matched the brute-force oracle within 1e-12 on 1000 instances"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 — analytic gradients match central finite differences
// ---------------------------------------------------------------------------

const FD_STEP: f64 = 1e-5;
const FD_TOLERANCE: f64 = 1e-4;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// True when any hidden or output pre-activation sits within `margin` of a
/// relu kink, where finite differences are meaningless.
fn near_kink(model: &CaringModel, features: &Matrix, margin: f64) -> bool {
    for i in 0..features.rows() {
        let mut h_pre = mat_vec(&model.w1, features.row(i)).unwrap();
        for (v, b) in h_pre.iter_mut().zip(&model.b1) {
            *v += b;
        }
        if h_pre.iter().any(|v| v.abs() < margin) {
            return true;
        }
        let h: Vec<f64> = h_pre.iter().map(|v| v.max(0.0)).collect();
        let s_pre = model
            .w2
            .row(0)
            .iter()
            .zip(&h)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + model.b2;
        if s_pre.abs() < margin {
            return true;
        }
    }
    false
}

#[test]
fn criterion_2_gradients_match_finite_differences() {
    // Part 1: d(mean NLL)/dτ on 20 seeded random instances.
    let mut rng = Prng::new(0xACCE_0002);
    for instance in 0..20 {
        let n = 3 + rng.index(48);
        let m = 2 + rng.index(5);
        let logits = random_matrix(&mut rng, n, m, -4.0, 4.0);
        let labels = random_labels(&mut rng, n, m);
        let tau = rng.uniform(0.3, 3.5).unwrap();
        let (_, analytic) = nll_grad_tau(&logits, &labels, tau).unwrap();
        let plus = nll(&logits, &vec![tau + FD_STEP; n], &labels).unwrap();
        let minus = nll(&logits, &vec![tau - FD_STEP; n], &labels).unwrap();
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let err = relative_error(analytic, numeric);
        assert!(
            err < FD_TOLERANCE,
            "temperature instance {instance}: analytic {analytic} vs FD {numeric} (rel {err})"
        );
    }

    // Part 2: every network parameter on 20 seeded random instances,
    // resampling any instance that lands near a relu kink.
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 {
        attempts += 1;
        assert!(
            attempts < 500,
            "could not sample enough kink-free instances"
        );
        let n = 3 + rng.index(8);
        let m = 2 + rng.index(4);
        let d = 2 + rng.index(4);
        let hidden = 2 + rng.index(3);
        let logits = random_matrix(&mut rng, n, m, -3.0, 3.0);
        let features = random_matrix(&mut rng, n, d, -1.5, 1.5);
        let labels = random_labels(&mut rng, n, m);
        let weight_decay = [0.0, 1e-4, 1e-2][checked % 3];
        let model = random_caring_model(&mut rng, hidden, d);
        if near_kink(&model, &features, 1e-3) {
            continue;
        }

        let grads = caring_gradients(&model, &logits, &features, &labels, weight_decay).unwrap();
        let objective = |m: &CaringModel| {
            caring_objective(m, &logits, &features, &labels, weight_decay).unwrap()
        };
        let check = |analytic: f64, plus: &CaringModel, minus: &CaringModel, what: &str| {
            let numeric = (objective(plus) - objective(minus)) / (2.0 * FD_STEP);
            let err = relative_error(analytic, numeric);
            assert!(
                err < FD_TOLERANCE,
                "instance {checked}, {what}: analytic {analytic} vs FD {numeric} (rel {err})"
            );
        };

        for r in 0..hidden {
            for c in 0..d {
                let mut plus = model.clone();
                let mut minus = model.clone();
                plus.w1.set(r, c, model.w1.get(r, c) + FD_STEP);
                minus.w1.set(r, c, model.w1.get(r, c) - FD_STEP);
                check(grads.w1.get(r, c), &plus, &minus, &format!("w1[{r},{c}]"));
            }
            let mut plus = model.clone();
            let mut minus = model.clone();
            plus.b1[r] += FD_STEP;
            minus.b1[r] -= FD_STEP;
            check(grads.b1[r], &plus, &minus, &format!("b1[{r}]"));

            let mut plus = model.clone();
            let mut minus = model.clone();
            plus.w2.set(0, r, model.w2.get(0, r) + FD_STEP);
            minus.w2.set(0, r, model.w2.get(0, r) - FD_STEP);
            check(grads.w2.get(0, r), &plus, &minus, &format!("w2[{r}]"));
        }
        let mut plus = model.clone();
        let mut minus = model.clone();
        plus.b2 += FD_STEP;
        minus.b2 -= FD_STEP;
        check(grads.b2, &plus, &minus, "b2");

        checked += 1;
    }
    println!("[PASS] criterion 2: analytic gradients matched central differences (rel < 1e-4) on 20 + 20 instances");
}

// ---------------------------------------------------------------------------
// Criterion 3 — calibration never reorders predictions
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_accuracy_and_rankings_survive_calibration() {
    let mut rng = Prng::new(0xACCE_0003);
    let mut datasets = Vec::new();
    for cfg in [single_cluster_config(), two_cluster_config()] {
        let (val, test) = generate(&cfg).unwrap();
        datasets.push(val);
        datasets.push(test);
    }
    for (which, set) in datasets.iter().enumerate() {
        let d = set.feature_dim().unwrap();
        let calibrators = [
            Calibrator::temperature(2.5).unwrap(),
            Calibrator::Caring(random_caring_model(&mut rng, 6, d)),
        ];
        let base_probs = Calibrator::Identity.probabilities(set).unwrap();
        let (base_preds, _) = predict(&base_probs).unwrap();
        let base_accuracy = calib_core::metrics::accuracy(&base_preds, &set.labels).unwrap();
        for calibrator in &calibrators {
            let probs = calibrator.probabilities(set).unwrap();
            let (preds, _) = predict(&probs).unwrap();
            let accuracy = calib_core::metrics::accuracy(&preds, &set.labels).unwrap();
            assert_eq!(
                base_accuracy.to_bits(),
                accuracy.to_bits(),
                "dataset {which}, {}: accuracy changed",
                calibrator.kind()
            );
            for i in 0..set.len() {
                assert_eq!(
                    ranking(set.logits.row(i)),
                    ranking(probs.row(i)),
                    "dataset {which}, {}: ranking changed at sample {i}",
                    calibrator.kind()
                );
            }
        }
    }
    println!("[PASS] criterion 3: accuracy bit-identical and per-sample rankings preserved under both calibrators");
}

// ---------------------------------------------------------------------------
// Criterion 4 — a global temperature is recovered on homogeneous data
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_global_temperature_recovery() {
    let (val, test) = generate(&single_cluster_config()).unwrap();
    let mut cfg = FitConfig::temperature_defaults();
    cfg.lr = 0.05;
    cfg.epochs = 1500;
    let (tau, _) = fit_temperature(&val, &cfg).unwrap();
    assert!(
        (2.25..=3.75).contains(&tau),
        "fitted temperature {tau} outside [2.25, 3.75]"
    );

    let identity = full_report(&test, &Calibrator::Identity, DEFAULT_BINS).unwrap();
    let scaled = full_report(&test, &Calibrator::temperature(tau).unwrap(), DEFAULT_BINS).unwrap();
    let drop = (identity.ece - scaled.ece) / identity.ece;
    assert!(
        drop >= 0.60,
        "test ECE only dropped {:.1}% ({} -> {})",
        drop * 100.0,
        identity.ece,
        scaled.ece
    );
    println!(
        "[PASS] criterion 4: fitted tau = {tau:.4} in [2.25, 3.75]; test ECE {:.4} -> {:.4} ({:.0}% drop >= 60%)",
        identity.ece,
        scaled.ece,
        drop * 100.0
    );
}

// ---------------------------------------------------------------------------
// Criterion 5 — input-conditioned temperatures beat a global one on
// heterogeneous data
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_input_conditioned_beats_global_on_mixed_data() {
    let (val, test) = generate(&two_cluster_config()).unwrap();

    let mut temp_cfg = FitConfig::temperature_defaults();
    temp_cfg.lr = 0.05;
    temp_cfg.epochs = 1500;
    let (tau, _) = fit_temperature(&val, &temp_cfg).unwrap();

    let mut caring_cfg = FitConfig::caring_defaults();
    caring_cfg.hidden = 16;
    caring_cfg.lr = 0.01;
    caring_cfg.epochs = 600;
    let (model, _) = fit_caring(&val, &caring_cfg).unwrap();

    let identity_ece = full_report(&test, &Calibrator::Identity, DEFAULT_BINS)
        .unwrap()
        .ece;
    let temp_ece = full_report(&test, &Calibrator::temperature(tau).unwrap(), DEFAULT_BINS)
        .unwrap()
        .ece;
    let caring = Calibrator::Caring(model);
    let caring_ece = full_report(&test, &caring, DEFAULT_BINS).unwrap().ece;
    assert!(
        caring_ece <= temp_ece && temp_ece < identity_ece && caring_ece < identity_ece,
        "expected caring <= temperature < identity, got {caring_ece} / {temp_ece} / {identity_ece}"
    );

    // The fitted temperatures must actually vary with the input...
    let temps = caring.per_sample_temperatures(&val).unwrap();
    let mean = temps.iter().sum::<f64>() / temps.len() as f64;
    let var = temps.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / temps.len() as f64;
    let std = var.sqrt();
    assert!(std > 0.1, "temperature spread {std} too small");

    // ...and vary in the right direction: the sharper cluster needs more
    // cooling, so its mean temperature must be the larger one.
    let features = val.features.as_ref().unwrap();
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (i, t) in temps.iter().enumerate() {
        let cluster = nearest_prototype(features.row(i), 2);
        sums[cluster] += t;
        counts[cluster] += 1;
    }
    assert!(counts[0] > 0 && counts[1] > 0, "a cluster is empty");
    let mean_mild = sums[0] / counts[0] as f64;
    let mean_sharp = sums[1] / counts[1] as f64;
    assert!(
        mean_sharp > mean_mild,
        "cluster mean temperatures not ordered with sharpness: {mean_mild} vs {mean_sharp}"
    );
    println!(
        "[PASS] criterion 5: test ECE caring {caring_ece:.4} <= temperature {temp_ece:.4} < identity {identity_ece:.4}; std_T = {std:.4} > 0.1; cluster means {mean_mild:.3} < {mean_sharp:.3}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 6 — limit behavior of the two calibrators
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_limit_behavior() {
    let mut rng = Prng::new(0xACCE_0006);

    // τ → ∞ flattens bounded logits to the uniform distribution.
    for m in [2usize, 5, 8] {
        let logits = random_matrix(&mut rng, 50, m, -50.0, 50.0);
        let labels = random_labels(&mut rng, 50, m);
        let set = SampleSet::new(logits, labels, None, None).unwrap();
        let probs = Calibrator::temperature(1e6)
            .unwrap()
            .probabilities(&set)
            .unwrap();
        let uniform = 1.0 / m as f64;
        for r in 0..probs.rows() {
            for c in 0..probs.cols() {
                let p = probs.get(r, c);
                assert!(
                    (p - uniform).abs() <= 1e-4,
                    "m={m}: probability {p} not within 1e-4 of {uniform}"
                );
            }
        }
    }

    // An all-zero network is the identity calibrator.
    let logits = random_matrix(&mut rng, 40, 4, -6.0, 6.0);
    let features = random_matrix(&mut rng, 40, 3, -2.0, 2.0);
    let labels = random_labels(&mut rng, 40, 4);
    let set = SampleSet::new(logits, labels, Some(features), None).unwrap();
    let identity = Calibrator::Identity.probabilities(&set).unwrap();
    let zero = Calibrator::Caring(CaringModel::zeros(5, 3).unwrap())
        .probabilities(&set)
        .unwrap();
    for r in 0..set.len() {
        for c in 0..set.num_classes() {
            assert!(
                (identity.get(r, c) - zero.get(r, c)).abs() <= 1e-12,
                "zero network differs from identity at ({r},{c})"
            );
        }
    }

    // A network that only has an output bias is a constant temperature 1 + c.
    let c_bias = 0.8;
    let mut biased = CaringModel::zeros(5, 3).unwrap();
    biased.b2 = c_bias;
    let via_network = Calibrator::Caring(biased).probabilities(&set).unwrap();
    let via_temperature = Calibrator::temperature(1.0 + c_bias)
        .unwrap()
        .probabilities(&set)
        .unwrap();
    for r in 0..set.len() {
        for c in 0..set.num_classes() {
            assert!(
                (via_network.get(r, c) - via_temperature.get(r, c)).abs() <= 1e-12,
                "bias-only network differs from temperature {} at ({r},{c})",
                1.0 + c_bias
            );
        }
    }
    println!("[PASS] criterion 6: tau=1e6 flattens to uniform within 1e-4; zero network == identity and bias-only network == temperature within 1e-12");
}

// ---------------------------------------------------------------------------
// Criterion 7 — metric ranges and exact values
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_metric_bounds_and_exact_values() {
    let mut rng = Prng::new(0xACCE_0007);
    let bin_choices = [1usize, 5, 10, 15];
    for instance in 0..1000 {
        let n = 1 + rng.index(50);
        let m = 2 + rng.index(5);
        let k = bin_choices[rng.index(bin_choices.len())];
        let logits = random_matrix(&mut rng, n, m, -5.0, 5.0);
        let labels = random_labels(&mut rng, n, m);
        let set = SampleSet::new(logits, labels, None, None).unwrap();
        let tau = rng.uniform(0.5, 3.0).unwrap();
        let report = full_report(&set, &Calibrator::temperature(tau).unwrap(), k).unwrap();
        assert!(
            (0.0..=1.0).contains(&report.ece),
            "instance {instance}: ECE {} out of range",
            report.ece
        );
        assert!(
            (0.0..=1.0).contains(&report.brier),
            "instance {instance}: Brier {} out of range",
            report.brier
        );
        assert!(
            report.nll >= 0.0,
            "instance {instance}: NLL {} negative",
            report.nll
        );
    }

    // One-hot probability rows give the exact Brier extremes.
    let one_hot = Matrix::from_vec(2, 3, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(brier(&one_hot, &[0, 2]).unwrap(), 0.0);
    assert_eq!(brier(&one_hot, &[1, 0]).unwrap(), 1.0);

    // A single bin collapses ECE to |accuracy - mean confidence| exactly.
    for _ in 0..50 {
        let n = 1 + rng.index(40);
        let confidences: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0).unwrap()).collect();
        let correct: Vec<bool> = (0..n).map(|_| rng.index(2) == 0).collect();
        let bins = reliability_bins(&confidences, &correct, 1).unwrap();
        let collapsed = ece(&bins, n).unwrap();
        let acc = correct.iter().filter(|&&c| c).count() as f64 / n as f64;
        let mean_conf = confidences.iter().sum::<f64>() / n as f64;
        assert_eq!(collapsed.to_bits(), (acc - mean_conf).abs().to_bits());
    }
    println!("[PASS] criterion 7: ECE/Brier in [0,1] and NLL >= 0 on 1000 instances; Brier extremes and K=1 collapse exact");
}

// ---------------------------------------------------------------------------
// Criterion 8 — the full pipeline is byte-for-byte deterministic
// ---------------------------------------------------------------------------

fn run_pipeline(dir: &Path) {
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_calib"))
            .args(args)
            .output()
            .expect("binary should run");
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let path = |name: &str| dir.join(name).to_str().unwrap().to_owned();
    run(&[
        "synth",
        "--seed",
        "13",
        "--n-val",
        "800",
        "--n-test",
        "800",
        "--classes",
        "4",
        "--clusters",
        "2",
        "--sharpness",
        "1.5,4.0",
        "--margin",
        "2.0,2.0",
        "--feature-dim",
        "4",
        "--feature-noise",
        "0.05",
        "--out",
        &path("data"),
    ]);
    run(&[
        "fit-caring",
        "--val",
        &path("data/val/manifest.json"),
        "--hidden",
        "8",
        "--lr",
        "0.01",
        "--epochs",
        "60",
        "--seed",
        "3",
        "--out",
        &path("caring.json"),
        "--trace",
        &path("trace.csv"),
    ]);
    run(&[
        "metrics",
        "--data",
        &path("data/test/manifest.json"),
        "--model",
        &path("caring.json"),
        "--out",
        &path("report.json"),
    ]);
    run(&[
        "report",
        "--metrics",
        &path("report.json"),
        "--reliability",
        &path("reliability.svg"),
        "--histogram",
        &path("histogram.svg"),
        "--classes",
        &path("classes.csv"),
    ]);
}

#[test]
fn criterion_8_pipeline_is_byte_identical_across_runs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_pipeline(dir_a.path());
    run_pipeline(dir_b.path());
    for name in [
        "caring.json",
        "trace.csv",
        "report.json",
        "reliability.svg",
        "histogram.svg",
        "classes.csv",
    ] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert!(a == b, "{name} differs between identically seeded runs");
        assert!(!a.is_empty(), "{name} is empty");
    }
    println!("[PASS] criterion 8: synth -> fit-caring -> metrics -> report produced byte-identical artifacts twice");
}

// ---------------------------------------------------------------------------
// Criterion 9 — reliability diagram geometry
// ---------------------------------------------------------------------------

fn rects_with_class<'a>(svg: &'a str, class: &str) -> Vec<&'a str> {
    let needle = format!("class=\"{class}\"");
    svg.split('<')
        .filter(|tag| tag.starts_with("rect") && tag.contains(&needle))
        .collect()
}

fn attr(tag: &str, name: &str) -> f64 {
    let needle = format!("{name}=\"");
    let start = tag
        .find(&needle)
        .unwrap_or_else(|| panic!("no {name} in <{tag}"))
        + needle.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

#[test]
fn criterion_9_reliability_bars_match_the_report() {
    let accuracies = [0.2, 0.9];
    let report = CalibrationReport {
        ece: 0.05,
        brier: 0.1,
        nll: 0.3,
        accuracy: 0.55,
        n_total: 20,
        bins: vec![
            BinStats {
                lo: 0.0,
                hi: 0.5,
                count: 10,
                avg_conf: 0.45,
                acc: accuracies[0],
            },
            BinStats {
                lo: 0.5,
                hi: 1.0,
                count: 10,
                avg_conf: 0.80,
                acc: accuracies[1],
            },
        ],
        per_class: Vec::new(),
    };
    let style = DiagramStyle::default();
    let svg = render_reliability_svg(&report, &style);
    let (_, plot_y, _, plot_h) = plot_rect(&style);

    let bars = rects_with_class(&svg, "bar");
    assert_eq!(bars.len(), 2, "expected one bar per bin");
    for (bar, acc) in bars.iter().zip(accuracies) {
        let height = attr(bar, "height");
        assert!(
            (height - acc * plot_h).abs() <= 1.0,
            "bar height {height} not within 1 px of {}",
            acc * plot_h
        );
    }

    // The first bin is overconfident (accuracy 0.2 below its midpoint 0.25),
    // so its bar top must sit below the diagonal there. SVG y grows downward.
    let bar_top = attr(bars[0], "y");
    let diagonal_y = plot_y + (1.0 - 0.25) * plot_h;
    assert!(
        bar_top > diagonal_y,
        "overconfident bar top {bar_top} is not below the diagonal at {diagonal_y}"
    );
    println!("[PASS] criterion 9: bar heights within 1 px of accuracy * plot height; overconfident bar sits below the diagonal");
}
