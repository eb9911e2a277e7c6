//! Acceptance suite. Each test prints one `criterion N ... PASS|FAIL` line to stderr
//! (written directly, so it shows up even when output is captured) and then asserts.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use bci_featsel::cli::{cmd_gen_synthetic, cmd_pipeline, saliency_file_name, GenArgs, RESULTS_FILE};
use bci_featsel::config::PipelineConfig;
use bci_featsel::data::{FeatureFamily, FeatureMatrix, TaskId, TaskSpec};
use bci_featsel::evaluation::{
    loso_folds, run_task, run_variants, EvalConfig, FoldClassifier, LeakageGuard, MlpClassifier, TaskReport, Variant,
};
use bci_featsel::features::{extract_features, FeatureConfig};
use bci_featsel::mlp::{bce_loss, train, Activation, HiddenLayer, MlpConfig, MlpModel, OptimizerKind};
use bci_featsel::pca::pca_fit;
use bci_featsel::selection::{estimate_mi, sffs, sfs, SffsConfig};
use bci_featsel::spectral::{welch_psd, WelchConfig};
use bci_featsel::stats::stat_features;
use bci_featsel::svm::{svm_predict, svm_train, SvmConfig};
use bci_featsel::synthetic::{generate, SyntheticSpec};
use bci_featsel::wavelet::{cwt, morlet, MorletParams, ScaleGrid};

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2} {name:<22} {verdict}  {detail}");
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

// ---------------------------------------------------------------- 1

fn welch_direct(x: &[f64], l: usize, step: usize, w: &[f64]) -> Vec<f64> {
    let k = (x.len() - l) / step + 1;
    let energy: f64 = w.iter().map(|v| v * v).sum();
    let mut out = vec![0.0; l / 2 + 1];
    for seg in 0..k {
        for (f, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..l {
                let phase = -2.0 * PI * (f * n) as f64 / l as f64;
                acc += Complex64::from_polar(x[seg * step + n] * w[n], phase);
            }
            *o += acc.norm_sqr() / (l as f64 * energy);
        }
    }
    out.iter().map(|v| v / k as f64).collect()
}

#[test]
fn criterion_01_welch_oracle() {
    let start = Instant::now();
    let cfg = WelchConfig::default();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = normal_vec(&mut r, 175);
        let psd = welch_psd(&x, &cfg, 250.0).unwrap();
        let direct = welch_direct(&x, cfg.segment_len, cfg.step, &cfg.window);
        for (a, b) in psd.power.iter().zip(&direct) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "welch_oracle",
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        &format!("max rel err {worst:.2e}, {elapsed:.2?}"),
    );
}

// ---------------------------------------------------------------- 2

/// Untruncated sum over every sample.
fn cwt_dense(x: &[f64], a: f64, p: MorletParams, fs: f64) -> Vec<Complex64> {
    (0..x.len())
        .map(|b| {
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(t, &v)| morlet((t as f64 - b as f64) / a, p).conj() * v)
                .sum();
            acc / (fs * a.sqrt())
        })
        .collect()
}

#[test]
fn criterion_02_cwt_oracle() {
    let p = MorletParams::default();
    let fs = 250.0;
    let grid = ScaleGrid::default();
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = normal_vec(&mut r, 175);
        let w = cwt(&x, &grid, p, fs).unwrap();
        for (row, &a) in w.outer_iter().zip(&grid.scales) {
            let dense = cwt_dense(&x, a, p, fs);
            let row_max = dense.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (z, d) in row.iter().zip(&dense) {
                worst = worst.max((z - d).norm() / row_max);
            }
        }
    }

    // a sinusoid peaks at the scale whose centre frequency matches it
    let fine = ScaleGrid::log2(2.0, 128.0, 60).unwrap();
    let mut localized = Vec::new();
    for f in [5.0, 10.0, 20.0] {
        let x: Vec<f64> = (0..1000).map(|t| (2.0 * PI * f * t as f64 / fs).sin()).collect();
        let w = cwt(&x, &fine, p, fs).unwrap();
        let energy: Vec<f64> = w
            .outer_iter()
            .map(|row| row.iter().skip(300).take(400).map(|z| z.norm()).sum::<f64>())
            .collect();
        let best = (0..energy.len()).max_by(|&a, &b| energy[a].total_cmp(&energy[b])).unwrap();
        localized.push(p.frequency_at(fine.scales[best], fs));
    }
    let loc_ok = [5.0, 10.0, 20.0]
        .iter()
        .zip(&localized)
        .all(|(f, g)| (g - f).abs() / f < 0.05);
    report(
        2,
        "cwt_oracle",
        worst <= 1e-8 && loc_ok,
        &format!("max rel err {worst:.2e}, peak freqs {localized:.2?} for 5/10/20 Hz"),
    );
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_03_morlet_point_value() {
    let v = morlet(0.0, MorletParams::default());
    let err = (v.re - PI.powf(-0.25)).abs() + v.im.abs();
    report(3, "morlet_point_value", err <= 1e-12, &format!("psi(0) = {v}, err {err:.1e}"));
}

// ---------------------------------------------------------------- 4

/// Two-pass reference with explicit power sums.
fn stats_reference(x: &[f64]) -> [f64; 7] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let moment = |k: i32| dev.iter().map(|d| d.powi(k)).sum::<f64>() / n;
    let var = moment(2);
    let std = var.sqrt();
    let rms = (x.iter().map(|v| v.powi(2)).sum::<f64>() / n).sqrt();
    let abs_diff = (1..x.len()).map(|i| (x[i] - x[i - 1]).abs()).sum::<f64>() / (n - 1.0);
    [mean, std, var, rms, abs_diff, moment(3) / std.powi(3), moment(4) / var.powi(2)]
}

#[test]
fn criterion_04_statistics_oracle() {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let mut affine_ok = true;
    for _ in 0..1000 {
        let len = r.random_range(10..400);
        let loc: f64 = r.random_range(-5.0..5.0);
        let scale: f64 = r.random_range(0.1..5.0);
        let x: Vec<f64> = normal_vec(&mut r, len).iter().map(|v| loc + scale * v.powi(3)).collect();
        let got = stat_features(&x).unwrap();
        let want = stats_reference(&x);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs() / w.abs().max(1.0));
        }

        let (a, c) = (r.random_range(-3.0..3.0_f64), r.random_range(-10.0..10.0));
        if a.abs() < 0.1 {
            continue;
        }
        let y: Vec<f64> = x.iter().map(|v| a * v + c).collect();
        let t = stat_features(&y).unwrap();
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-9 * v.abs().max(1.0);
        affine_ok &= close(t[0], a * got[0] + c)
            && close(t[1], a.abs() * got[1])
            && close(t[2], a * a * got[2])
            && close(t[3] * t[3], t[2] + t[0] * t[0])
            && close(t[4], a.abs() * got[4])
            && close(t[5], a.signum() * got[5])
            && close(t[6], got[6]);
    }
    report(
        4,
        "statistics_oracle",
        worst <= 1e-12 && affine_ok,
        &format!("max rel err {worst:.2e}, affine symmetry {affine_ok}"),
    );
}

// ---------------------------------------------------------------- 5

/// Cyclic Jacobi eigendecomposition of a symmetric matrix: (eigenvalues, eigenvectors as columns).
fn jacobi_eigen(mut a: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut v = Array2::<f64>::eye(n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

#[test]
fn criterion_05_pca_oracle() {
    let mut r = rng(5);
    let mut worst_var: f64 = 0.0;
    let mut worst_proj: f64 = 0.0;
    for trial in 0..10 {
        let (n, dim, k) = (60, 7, 3);
        let mix = Array2::from_shape_fn((dim, dim), |_| r.sample::<f64, _>(StandardNormal));
        let z = Array2::from_shape_fn((n, dim), |(_, j)| r.sample::<f64, _>(StandardNormal) * (1.0 + j as f64));
        let x = z.dot(&mix) + trial as f64;
        let model = pca_fit(&x, k).unwrap();

        let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
        let c = &x - &mean;
        let cov = c.t().dot(&c) / n as f64;
        let (vals, vecs) = jacobi_eigen(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let top: Vec<usize> = order[..k].to_vec();

        for (i, &j) in top.iter().enumerate() {
            worst_var = worst_var.max((model.explained_variance[i] - vals[j]).abs() / vals[j]);
        }
        let basis = Array2::from_shape_fn((dim, k), |(row, col)| vecs[[row, top[col]]]);
        let p_ref = basis.dot(&basis.t());
        let p_got = model.components.t().dot(&model.components);
        let diff = (&p_ref - &p_got).mapv(|v| v * v).sum().sqrt();
        worst_proj = worst_proj.max(diff);
    }
    report(
        5,
        "pca_oracle",
        worst_var <= 1e-8 && worst_proj <= 1e-8,
        &format!("variance rel err {worst_var:.2e}, projector diff {worst_proj:.2e}"),
    );
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_mutual_information() {
    let n = 10_000;
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let constant = estimate_mi(&vec![3.5; n], &labels, 16).unwrap();
    let identical: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let ln2_err = (estimate_mi(&identical, &labels, 16).unwrap() - 2f64.ln()).abs();

    let mut r = rng(6);
    let noise = normal_vec(&mut r, n);
    let independent = estimate_mi(&noise, &labels, 16).unwrap();

    let informative: Vec<f64> = noise.iter().zip(&labels).map(|(v, &l)| v + l as f64).collect();
    let base = estimate_mi(&informative, &labels, 16).unwrap();
    let transforms: [fn(f64) -> f64; 3] = [|v| v.exp(), |v| 3.0 * v - 7.0, |v| v.powi(3)];
    let invariant = transforms.iter().all(|t| {
        let tx: Vec<f64> = informative.iter().map(|&v| t(v)).collect();
        estimate_mi(&tx, &labels, 16).unwrap() == base
    });
    report(
        6,
        "mutual_information",
        constant == 0.0 && ln2_err <= 1e-12 && independent < 0.01 && invariant,
        &format!(
            "constant {constant}, ln2 err {ln2_err:.1e}, independent {independent:.4} nats, monotone invariant {invariant}"
        ),
    );
}

// ---------------------------------------------------------------- 7

fn exhaustive_best(weights: &[f64], k_max: usize) -> f64 {
    let d = weights.len();
    (1u32..1 << d)
        .filter(|m| m.count_ones() as usize <= k_max)
        .map(|m| (0..d).filter(|i| m >> i & 1 == 1).map(|i| weights[i]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_07_sffs_oracle() {
    let mut r = rng(7);
    let mut optimal = 0;
    let mut dominant = 0;
    for _ in 0..50 {
        let d = r.random_range(3..=8);
        let k_max = r.random_range(1..=4usize).min(d);
        let w = normal_vec(&mut r, d);
        let j = |s: &[usize]| -> bci_featsel::Result<f64> { Ok(s.iter().map(|&i| w[i]).sum()) };
        let cfg = SffsConfig {
            k_max,
            patience: d,
            k_min: 1,
            seed: 0,
        };
        let candidates: Vec<usize> = (0..d).collect();
        let floating = sffs(&candidates, j, &cfg).unwrap();
        let greedy = sfs(&candidates, j, &cfg).unwrap();
        if (floating.j_final - exhaustive_best(&w, k_max)).abs() <= 1e-12 {
            optimal += 1;
        }
        if floating.j_final >= greedy.j_final {
            dominant += 1;
        }
    }

    let planted: BTreeSet<usize> = [1, 4, 6].into();
    let j = |s: &[usize]| -> bci_featsel::Result<f64> {
        Ok(s.iter().map(|i| if planted.contains(i) { 1.0 } else { -0.5 }).sum())
    };
    let cfg = SffsConfig {
        k_max: 5,
        patience: 8,
        k_min: 1,
        seed: 0,
    };
    let out = sffs(&(0..8).collect::<Vec<_>>(), j, &cfg).unwrap();
    let recovered = out.final_subset == planted.iter().copied().collect::<Vec<_>>();
    report(
        7,
        "sffs_oracle",
        optimal == 50 && dominant == 50 && recovered,
        &format!("optimal {optimal}/50, dominates sfs {dominant}/50, planted {:?}", out.final_subset),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_svm() {
    let mut r = rng(8);
    let n = 200;
    let mut x = Array2::<f64>::zeros((n, 3));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..3 {
            x[[i, j]] = 3.0 * label + 0.5 * r.sample::<f64, _>(StandardNormal);
        }
        y.push(label);
    }
    let cfg = SvmConfig::default();
    let m = svm_train(x.view(), &y, cfg).unwrap();
    let pred = svm_predict(&m, x.view()).unwrap();
    let correct = pred.iter().zip(&y).filter(|(p, t)| **p as f64 == **t).count();

    let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
    let mf = svm_train(x.view(), &flipped, cfg).unwrap();
    let flip_err = m
        .weights
        .iter()
        .zip(&mf.weights)
        .map(|(a, b)| (a + b).abs())
        .fold((m.bias + mf.bias).abs(), f64::max);

    let again = svm_train(x.view(), &y, cfg).unwrap();
    let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    let reproducible = bits(&m.weights) == bits(&again.weights) && m.bias.to_bits() == again.bias.to_bits();
    report(
        8,
        "svm",
        correct == n && flip_err <= 1e-9 && reproducible,
        &format!("train acc {correct}/{n}, flip err {flip_err:.1e}, bit-reproducible {reproducible}"),
    );
}

// ---------------------------------------------------------------- 9

fn fd_worst(hidden: Vec<HiddenLayer>, seed: u64) -> f64 {
    let cfg = MlpConfig {
        hidden,
        l2_lambda: 0.01,
        ..MlpConfig::default()
    };
    let mut r = rng(seed);
    let model = MlpModel::new(5, cfg, &mut r).unwrap();
    let x = Array2::from_shape_fn((12, 5), |_| r.sample::<f64, _>(StandardNormal));
    let y: Vec<f64> = (0..12).map(|i| (i % 2) as f64).collect();
    let cache = model.forward_batch(x.view(), false, &mut r).unwrap();
    let grads = model.backward(&cache, &y);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (i, &g) in grads.iter().enumerate() {
        let mut plus = model.clone();
        plus.params[i] += h;
        let mut minus = model.clone();
        minus.params[i] -= h;
        let numeric = (plus.objective(x.view(), &y).unwrap() - minus.objective(x.view(), &y).unwrap()) / (2.0 * h);
        let err = (numeric - g).abs() / numeric.abs().max(g.abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

#[test]
fn criterion_09_mlp_gradients() {
    let acts = [Activation::Relu, Activation::LeakyRelu];
    let layer = |units, activation| HiddenLayer {
        units,
        dropout: 0.3,
        activation,
    };
    let mut worst: f64 = 0.0;
    let mut combos = 0;
    for (s, &a) in acts.iter().enumerate() {
        worst = worst.max(fd_worst(vec![layer(7, a)], 10 + s as u64));
        combos += 1;
        for (t, &b) in acts.iter().enumerate() {
            worst = worst.max(fd_worst(vec![layer(7, a), layer(4, b)], 20 + 2 * s as u64 + t as u64));
            combos += 1;
        }
    }

    let x = ndarray::array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
    let y = [0u8, 1, 1, 0];
    let xor = MlpConfig {
        hidden: vec![HiddenLayer {
            units: 8,
            dropout: 0.0,
            activation: Activation::LeakyRelu,
        }],
        optimizer: OptimizerKind::Adam,
        learning_rate: 0.01,
        l2_lambda: 0.0,
        epochs: 2000,
        batch_size: 4,
        seed: 1,
    };
    let model = train(x.view(), &y, &xor).unwrap().model;
    let xor_ok = model.predict(x.view()).unwrap() == y;
    let bce_err = (bce_loss(1.0, 0.5) - 2f64.ln()).abs().max((bce_loss(0.0, 0.5) - 2f64.ln()).abs());
    report(
        9,
        "mlp_gradients",
        worst < 1e-4 && xor_ok && bce_err <= 1e-12,
        &format!("fd rel err {worst:.2e} over {combos} combos, xor solved {xor_ok}, bce(0.5) err {bce_err:.1e}"),
    );
}

// ---------------------------------------------------------------- 10, 11

struct Benchmark {
    signal: Vec<TaskReport>,
    null: TaskReport,
    elapsed: Duration,
}

fn benchmark() -> &'static Benchmark {
    static BENCH: OnceLock<Benchmark> = OnceLock::new();
    BENCH.get_or_init(|| {
        let start = Instant::now();
        let spec = SyntheticSpec::default();
        let task = TaskSpec::new(TaskId::I);
        let classifier = MlpClassifier::table2(TaskId::I);
        let epochs = generate(&spec, false).unwrap();
        let signal = run_variants(&epochs, task, &Variant::ALL, &EvalConfig::default(), &classifier, spec.seed).unwrap();
        let null_spec = SyntheticSpec {
            effect_size: 1.0,
            ..spec
        };
        let null_epochs = generate(&null_spec, true).unwrap();
        let null = run_task(&null_epochs, task, Variant::Hybrid, &EvalConfig::default(), &classifier, null_spec.seed).unwrap();
        Benchmark {
            signal,
            null,
            elapsed: start.elapsed(),
        }
    })
}

fn mean_of(reports: &[TaskReport], v: Variant) -> f64 {
    reports.iter().find(|r| r.result.variant == v).and_then(|r| r.result.mean).unwrap_or(f64::NAN)
}

#[test]
fn criterion_10_synthetic_benchmark() {
    let b = benchmark();
    let hybrid = b.signal.iter().find(|r| r.result.variant == Variant::Hybrid).unwrap();
    let mean = hybrid.result.mean.unwrap_or(f64::NAN);
    let top3: Vec<usize> = hybrid.saliency.ranking().into_iter().take(3).collect();
    let planted_top = top3.contains(&2) && top3.contains(&5);
    let null = b.null.result.mean.unwrap_or(f64::NAN);
    let ok = mean >= 90.0 && planted_top && (null - 50.0).abs() <= 8.0 && b.elapsed < Duration::from_secs(600);
    report(
        10,
        "synthetic_benchmark",
        ok,
        &format!(
            "hybrid {mean:.2}%, top-3 channels {top3:?}, null control {null:.2}%, {:.1?}",
            b.elapsed
        ),
    );
}

#[test]
fn criterion_11_variant_ordering() {
    let b = benchmark();
    let all = mean_of(&b.signal, Variant::AllFeatures);
    let mi = mean_of(&b.signal, Variant::MiOnly);
    let hybrid = mean_of(&b.signal, Variant::Hybrid);
    report(
        11,
        "variant_ordering",
        hybrid >= mi && mi >= all - 2.0,
        &format!("hybrid {hybrid:.2} >= mi_only {mi:.2} >= all_features {all:.2} - 2"),
    );
}

// ---------------------------------------------------------------- 12

/// Predicts the class whose training centroid is closest.
struct NearestCentroid;

impl FoldClassifier for NearestCentroid {
    fn fit_predict(
        &self,
        train: &FeatureMatrix,
        test: &FeatureMatrix,
        _seed: u64,
        _guard: &mut LeakageGuard,
    ) -> bci_featsel::Result<Vec<u8>> {
        let centroid = |class: u8| {
            let rows: Vec<usize> = (0..train.n_rows()).filter(|&i| train.labels()[i] == class).collect();
            train.select_rows(&rows).values().mean_axis(ndarray::Axis(0)).unwrap()
        };
        let (c0, c1) = (centroid(0), centroid(1));
        Ok(test
            .values()
            .outer_iter()
            .map(|row| {
                let d0: f64 = row.iter().zip(&c0).map(|(a, b)| (a - b).powi(2)).sum();
                let d1: f64 = row.iter().zip(&c1).map(|(a, b)| (a - b).powi(2)).sum();
                u8::from(d1 < d0)
            })
            .collect())
    }
}

#[test]
fn criterion_12_structural_counts() {
    let wide = generate(
        &SyntheticSpec {
            n_subjects: 2,
            epochs_per_class: 4,
            n_channels: 22,
            planted_channels: vec![7, 11],
            ..SyntheticSpec::default()
        },
        false,
    )
    .unwrap();
    let (features, _) = extract_features(&wide, &FeatureConfig::default(), None).unwrap();
    let count = |f: FeatureFamily| features.descriptors().iter().filter(|d| d.family == f).count();
    let (spectral, wavelet, statistical) = (
        count(FeatureFamily::Spectral),
        count(FeatureFamily::Wavelet),
        count(FeatureFamily::Statistical),
    );

    let nine = generate(
        &SyntheticSpec {
            n_subjects: 9,
            epochs_per_class: 10,
            n_channels: 4,
            planted_channels: vec![1],
            ..SyntheticSpec::default()
        },
        false,
    )
    .unwrap();
    let folds = loso_folds(nine.subjects()).unwrap().len();
    let run = run_task(&nine, TaskSpec::new(TaskId::I), Variant::Hybrid, &EvalConfig::default(), &NearestCentroid, 3);
    let (run_folds, checks, guard_quiet) = match &run {
        Ok(r) => (r.folds.len(), r.leakage_checks, true),
        Err(_) => (0, 0, false),
    };
    let bench_checks: usize = benchmark().signal[0].leakage_checks + benchmark().null.leakage_checks;
    let ok = features.n_features() == 418
        && (spectral, wavelet, statistical) == (132, 132, 154)
        && folds == 9
        && run_folds == 9
        && guard_quiet
        && checks == 9 * 4
        && bench_checks > 0;
    report(
        12,
        "structural_counts",
        ok,
        &format!(
            "{} columns ({spectral}+{wavelet}+{statistical}), {folds} folds, leakage checks {checks} + {bench_checks} passed",
            features.n_features()
        ),
    );
}

// ---------------------------------------------------------------- 13

#[test]
fn criterion_13_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    cmd_gen_synthetic(&GenArgs {
        out: bundle.clone(),
        seed: Some(11),
        subjects: 3,
        epochs_per_class: 30,
        channels: 6,
        samples: 175,
        fs: 250.0,
        planted: vec![1, 4],
        band: vec![8.0, 13.0],
        effect_size: 2.0,
        noise: 1.0,
        gain_jitter: 1.25,
        force: false,
    })
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let cfg = PipelineConfig {
            bundle: Some(bundle.clone()),
            out: Some(out.clone()),
            seed: Some(5),
            ..PipelineConfig::default()
        };
        cmd_pipeline(&cfg).unwrap();
        let results = std::fs::read(out.join(RESULTS_FILE)).unwrap();
        let csv = std::fs::read(out.join(saliency_file_name(TaskId::I, Variant::Hybrid))).unwrap();
        (results, csv)
    };
    let first = run("a");
    let second = run("b");
    report(
        13,
        "determinism",
        first == second,
        &format!(
            "results.json {} bytes identical {}, saliency csv identical {}",
            first.0.len(),
            first.0 == second.0,
            first.1 == second.1
        ),
    );
}
