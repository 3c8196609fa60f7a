//! Acceptance gate for the toolkit: one test per release criterion.
//!
//! Each test prints a single `PASS criterion N` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and enforces the runtime
//! budgets where the criterion carries one. Criteria 1–3 share one enrollment
//! over a synthetic 5-speaker corpus, built once behind a [`OnceLock`].

mod common;

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use tempfile::TempDir;
use voxid_core::audio_io::{corpus_speaker_profiles, synthesize_utterance, Utterance};
use voxid_core::features::{
    delta, lpc, lpcc, mfcc, real_cepstrum, FeatureConfig, FeatureMatrix, FeatureMethod,
};
use voxid_core::identify::{enroll, evaluate, identify, parameter_sweep, SweepParameter};
use voxid_core::neurogenetic::{decode_weights, ga_evolve, GaConfig, LabeledDataset, MlpConfig};
use voxid_core::preprocess::{
    detect_endpoints, frame_blocks, hamming_window, pre_emphasize, PreprocessConfig,
};
use voxid_core::SpeakerModel;

/// Seed for every synthetic corpus in this suite.
const CORPUS_SEED: u64 = 2024;
/// Seed for the genetic search in the shared enrollment.
const ENROLL_SEED: u64 = 11;

/// The clean-corpus enrollment shared by criteria 1–3.
struct CleanRun {
    _dir: TempDir,
    train_root: PathBuf,
    model: SpeakerModel,
    training_rate: f64,
    held_out_rate: f64,
    /// Wall time for synthesis + enrollment + both evaluations.
    build_time: Duration,
}

static CLEAN_RUN: OnceLock<CleanRun> = OnceLock::new();
static NOISY_HELD: OnceLock<(TempDir, PathBuf)> = OnceLock::new();

/// Stock settings: defaults everywhere, with only the search seed pinned.
fn default_configs() -> (PreprocessConfig, FeatureConfig, MlpConfig, GaConfig) {
    (
        PreprocessConfig::default(),
        FeatureConfig::default(),
        MlpConfig::default(),
        GaConfig {
            rng_seed: ENROLL_SEED,
            ..GaConfig::default()
        },
    )
}

/// Enrolls 5 speakers × 10 clean utterances with stock settings and scores
/// the training set plus 5 held-out utterances per speaker.
fn clean_run() -> &'static CleanRun {
    CLEAN_RUN.get_or_init(|| {
        let started = Instant::now();
        let dir = TempDir::new().unwrap();
        let train_root =
            common::write_synth_corpus(&dir.path().join("train"), 5, 10, 0, CORPUS_SEED, None);
        let held_root =
            common::write_synth_corpus(&dir.path().join("held"), 5, 5, 10, CORPUS_SEED, None);
        let (pre, feat, mlp, ga) = default_configs();
        let (model, _) = enroll(&train_root, &pre, &feat, &mlp, &ga).unwrap();
        let training_rate = evaluate(&model, &train_root).unwrap().identification_rate;
        let held_out_rate = evaluate(&model, &held_root).unwrap().identification_rate;
        CleanRun {
            _dir: dir,
            train_root,
            model,
            training_rate,
            held_out_rate,
            build_time: started.elapsed(),
        }
    })
}

/// The same held-out phrases re-synthesized at 10 dB SNR.
fn noisy_held_root() -> &'static PathBuf {
    let (_, root) = NOISY_HELD.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let root = common::write_synth_corpus(
            &dir.path().join("held_noisy"),
            5,
            5,
            10,
            CORPUS_SEED,
            Some(10.0),
        );
        (dir, root)
    });
    root
}

/// Criterion 1 — clean-corpus identification: with stock settings the model
/// reproduces its training set perfectly and stays ≥ 90% on held-out
/// phrases, all inside a two-minute budget.
#[test]
fn criterion_1_clean_corpus_identification() {
    let run = clean_run();
    assert_eq!(
        run.training_rate, 100.0,
        "training-set identification rate must be exact, got {:.2}%",
        run.training_rate
    );
    assert!(
        run.held_out_rate >= 90.0,
        "held-out identification rate {:.2}% fell below 90%",
        run.held_out_rate
    );
    assert!(
        run.build_time < Duration::from_secs(120),
        "enrollment + evaluation took {:.1}s, budget is 120s",
        run.build_time.as_secs_f64()
    );
    println!(
        "PASS criterion 1: clean corpus — training 100.00%, held-out {:.2}% in {:.1}s",
        run.held_out_rate,
        run.build_time.as_secs_f64()
    );
}

/// Criterion 2 — noise degrades but does not destroy: at 10 dB SNR the rate
/// drops strictly below the clean rate yet stays strictly above the 20%
/// chance level for five speakers, inside a one-minute budget.
#[test]
fn criterion_2_noisy_corpus_beats_chance() {
    let run = clean_run();
    let started = Instant::now();
    let noisy_rate = evaluate(&run.model, noisy_held_root())
        .unwrap()
        .identification_rate;
    let elapsed = started.elapsed();
    assert!(
        noisy_rate < run.held_out_rate,
        "10 dB rate {noisy_rate:.2}% did not degrade from the clean {:.2}%",
        run.held_out_rate
    );
    assert!(
        noisy_rate > 20.0,
        "10 dB rate {noisy_rate:.2}% is not above chance"
    );
    assert!(
        elapsed < Duration::from_secs(60),
        "noisy evaluation took {:.1}s, budget is 60s",
        elapsed.as_secs_f64()
    );
    println!(
        "PASS criterion 2: 10 dB SNR — {noisy_rate:.2}% (clean {:.2}%) in {:.1}s",
        run.held_out_rate,
        elapsed.as_secs_f64()
    );
}

/// Criterion 3 — feature ranking: every front end in the comparison set
/// completes an enroll/evaluate round on the noisy test set and lands one
/// CSV row; the noise ranking itself is corpus-dependent and not asserted.
#[test]
fn criterion_3_all_feature_methods_complete() {
    let run = clean_run();
    let noisy = noisy_held_root();
    let methods = [
        FeatureMethod::Mfcc,
        FeatureMethod::Dmfcc,
        FeatureMethod::Ddmfcc,
        FeatureMethod::Rcc,
        FeatureMethod::Lpcc,
    ];
    let mut csv = String::from("feature,identification_rate\n");
    let mut summary = Vec::new();
    for method in methods {
        let (pre, _, mlp, ga) = default_configs();
        let feat = FeatureConfig {
            method,
            ..FeatureConfig::default()
        };
        let (model, _) = enroll(&run.train_root, &pre, &feat, &mlp, &ga).unwrap();
        let rate = evaluate(&model, noisy).unwrap().identification_rate;
        assert!(
            rate.is_finite() && (0.0..=100.0).contains(&rate),
            "{method}: rate {rate} out of range"
        );
        csv.push_str(&format!("{method},{rate:.2}\n"));
        summary.push(format!("{method} {rate:.2}%"));
    }
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("feature_ranking.csv");
    std::fs::write(&csv_path, &csv).unwrap();
    let written = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(
        written.lines().count(),
        6,
        "expected a header plus five rows"
    );
    assert!(written.starts_with("feature,identification_rate\n"));
    println!("PASS criterion 3: noisy-set rates — {}", summary.join(", "));
}

/// Criterion 4 — gradient correctness: analytic backprop gradients agree
/// with central finite differences on 20 random 3-4-2 networks and
/// instances.
#[test]
fn criterion_4_gradients_match_finite_differences() {
    let config = MlpConfig {
        input_dim: 3,
        hidden_dim: 4,
        output_dim: 2,
        ..MlpConfig::default()
    };
    let mut worst = 0.0f64;
    for seed in 0..20 {
        worst = worst.max(common::gradient_check(&config, seed, 1e-5));
    }
    assert!(
        worst < 1e-4,
        "max relative gradient error {worst:.3e} exceeds 1e-4"
    );
    println!("PASS criterion 4: gradient check max relative error {worst:.3e} over 20 networks");
}

/// Criterion 5 — genetic-search sanity: on XOR (2-4-2, population 50,
/// 200 generations, fixed seed) the best chromosome reaches RMS < 0.25 and
/// classifies all four patterns; the best-fitness history is non-increasing
/// across 100 seeded runs.
#[test]
fn criterion_5_ga_solves_xor_with_monotone_history() {
    let patterns = vec![
        (vec![0.0, 0.0], 0),
        (vec![0.0, 1.0], 1),
        (vec![1.0, 0.0], 1),
        (vec![1.0, 1.0], 0),
    ];
    let dataset = LabeledDataset::one_hot(patterns.clone(), 2).unwrap();
    // Unit-slope sigmoids and a wide, aggressive search make XOR reliably
    // solvable at this budget.
    let mlp = MlpConfig {
        input_dim: 2,
        hidden_dim: 4,
        output_dim: 2,
        speed_hidden: 1.0,
        speed_output: 1.0,
        ..MlpConfig::default()
    };
    let ga = |seed: u64| GaConfig {
        population_size: 50,
        generations: 200,
        init_range: 5.0,
        mutation_rate: 0.15,
        mutation_sigma: 0.5,
        elite_count: 2,
        rng_seed: seed,
        ..GaConfig::default()
    };

    let (best, history) = ga_evolve(&dataset, &mlp, &ga(7)).unwrap();
    let fitness = best
        .fitness
        .expect("evolved chromosome carries its fitness");
    assert!(
        fitness < 0.25,
        "best XOR fitness {fitness:.4} is not below 0.25"
    );
    // One entry for the initial population plus one per generation run; the
    // search may stop early once the tolerable RMS is reached.
    assert!(
        history.len() == 201 || *history.last().unwrap() <= mlp.tolerable_rms,
        "search stopped after {} generations without reaching the tolerance",
        history.len() - 1
    );
    let network = decode_weights(&best, &mlp).unwrap();
    for (input, class) in &patterns {
        let output = network.forward(input).unwrap();
        let argmax = if output[1] > output[0] { 1 } else { 0 };
        assert_eq!(
            argmax, *class,
            "XOR pattern {input:?} misclassified: {output:?}"
        );
    }

    let violations: usize = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let (_, history) = ga_evolve(&dataset, &mlp, &ga(seed)).unwrap();
            history.windows(2).filter(|w| w[1] > w[0]).count()
        })
        .sum();
    assert_eq!(
        violations, 0,
        "best-fitness history increased somewhere in 100 runs"
    );
    println!("PASS criterion 5: XOR fitness {fitness:.4}, 4/4 patterns, 100 monotone histories");
}

/// Criterion 6 — oracle equivalence: the fast transforms agree with naive
/// direct-sum references on 100 random frames, LPC recovers known
/// autoregressive coefficients, and the cepstrum recursion matches the
/// log-spectrum route.
#[test]
fn criterion_6_dsp_matches_naive_oracles() {
    let config = FeatureConfig {
        fft_size: 256,
        num_coefficients: 12,
        num_mel_filters: 20,
        ..FeatureConfig::default()
    };
    let rate = 11025;
    let mut mfcc_rows = Vec::new();
    for seed in 0..100 {
        let frame = common::random_frame(200, 1000 + seed);
        let fast_rcc = real_cepstrum(&frame, &config).unwrap();
        let slow_rcc = common::naive_rcc(&frame, &config);
        for (q, (a, b)) in fast_rcc.iter().zip(&slow_rcc).enumerate() {
            assert!(
                (a - b).abs() < 1e-6,
                "RCC seed {seed} c{}: {a} vs {b}",
                q + 1
            );
        }
        let fast_mfcc = mfcc(&frame, rate, &config).unwrap();
        let slow_mfcc = common::naive_mfcc(&frame, rate, &config);
        for (q, (a, b)) in fast_mfcc.iter().zip(&slow_mfcc).enumerate() {
            assert!(
                (a - b).abs() < 1e-6,
                "MFCC seed {seed} c{}: {a} vs {b}",
                q + 1
            );
        }
        mfcc_rows.push(fast_mfcc);
    }

    let matrix = FeatureMatrix {
        rows: mfcc_rows.clone(),
        method: FeatureMethod::Mfcc,
        dim: 12,
    };
    let fast_delta = delta(&matrix, config.delta_window);
    let slow_delta = common::naive_delta(&mfcc_rows, config.delta_window);
    for (fast_row, slow_row) in fast_delta.rows.iter().zip(&slow_delta) {
        for (a, b) in fast_row.iter().zip(slow_row) {
            assert!((a - b).abs() < 1e-6, "delta: {a} vs {b}");
        }
    }

    let signal = common::ar_signal(&[0.9, -0.2], 8192, 77);
    let recovered = lpc(&signal, 2).unwrap();
    assert!(
        (recovered[0] - 0.9).abs() < 1e-2 && (recovered[1] + 0.2).abs() < 1e-2,
        "LPC recovered {recovered:?}, expected [0.9, -0.2]"
    );

    let models: [&[f64]; 3] = [&[0.5], &[0.9, -0.2], &[1.2, -0.8, 0.3, -0.05]];
    for coeffs in models {
        let fast = lpcc(coeffs, 8);
        let slow = common::lpcc_spectrum_oracle(coeffs, 8, 8192);
        for (n, (a, b)) in fast.iter().zip(&slow).enumerate() {
            assert!(
                (a - b).abs() < 1e-4,
                "LPCC {coeffs:?} c{}: {a} vs {b}",
                n + 1
            );
        }
    }
    println!(
        "PASS criterion 6: RCC/MFCC/delta on 100 frames, LPC {:.3}/{:.3}, LPCC recursion",
        recovered[0], recovered[1]
    );
}

/// Criterion 7 — pipeline invariants: identification ignores utterance gain
/// for spectral-shape features, endpointing lands within ±25 ms on
/// constructed bursts, the analysis window is symmetric, zero pre-emphasis
/// is the identity, and frame counts match an enumeration oracle. Budget:
/// three minutes.
#[test]
fn criterion_7_pipeline_invariants() {
    let started = Instant::now();

    // Gain invariance: a noisy probe keeps every frame above the energy
    // floor, so scaling shifts all log energies uniformly and the endpoint
    // crop is identical for both versions.
    let dir = TempDir::new().unwrap();
    let root = common::write_synth_corpus(&dir.path().join("train"), 2, 2, 0, 41, Some(25.0));
    let probe = {
        let profiles = corpus_speaker_profiles(2, 41);
        synthesize_utterance(&profiles[1], 977, 1.1, Some(25.0)).unwrap()
    };
    let faint = Utterance::new(
        probe.samples.iter().map(|s| s * 0.25).collect(),
        probe.sample_rate,
    )
    .unwrap();
    let tiny_mlp = MlpConfig {
        hidden_dim: 6,
        max_epochs: 25,
        ..MlpConfig::default()
    };
    let tiny_ga = GaConfig {
        population_size: 10,
        generations: 3,
        ..GaConfig::default()
    };
    for method in [
        FeatureMethod::Mfcc,
        FeatureMethod::Dmfcc,
        FeatureMethod::Ddmfcc,
        FeatureMethod::Rcc,
    ] {
        let feat = FeatureConfig {
            method,
            ..FeatureConfig::default()
        };
        let (model, _) = enroll(
            &root,
            &PreprocessConfig::default(),
            &feat,
            &tiny_mlp,
            &tiny_ga,
        )
        .unwrap();
        let (label_loud, scores_loud) = identify(&model, &probe).unwrap();
        let (label_faint, scores_faint) = identify(&model, &faint).unwrap();
        assert_eq!(
            label_loud, label_faint,
            "{method}: winner changed with gain"
        );
        for (a, b) in scores_loud.iter().zip(&scores_faint) {
            assert!(
                (a - b).abs() < 1e-6,
                "{method}: scores {a} vs {b} differ with gain"
            );
        }
    }

    // Endpointing on constructed bursts: a strong tone over a faint noise
    // floor must be located within ±25 ms on both edges. Hangover padding is
    // disabled since it widens the region by design.
    let rate = 11025u32;
    let endpoint_config = PreprocessConfig {
        hangover_frames: 0,
        ..PreprocessConfig::default()
    };
    for (t_on, t_off) in [(0.30, 0.90), (0.70, 1.40), (1.25, 2.05)] {
        let n = (2.2 * rate as f64) as usize;
        let mut samples: Vec<f64> = (0..n)
            .map(|i| 5e-5 * ((i * 2_654_435_761 % 2048) as f64 / 1024.0 - 1.0))
            .collect();
        let (on, off) = (
            (t_on * rate as f64) as usize,
            (t_off * rate as f64) as usize,
        );
        for (i, s) in samples[on..off].iter_mut().enumerate() {
            *s += 0.3 * (2.0 * std::f64::consts::PI * 800.0 * i as f64 / rate as f64).sin();
        }
        let utterance = Utterance::new(samples, rate).unwrap();
        let (start, end) = detect_endpoints(&utterance, &endpoint_config).unwrap();
        let start_err = (start as f64 / rate as f64 - t_on).abs();
        let end_err = (end as f64 / rate as f64 - t_off).abs();
        assert!(
            start_err <= 0.025 && end_err <= 0.025,
            "burst [{t_on}, {t_off}]s located as [{start}, {end}] — errors {:.1}/{:.1} ms",
            start_err * 1e3,
            end_err * 1e3
        );
    }

    // Window symmetry.
    for len in [64usize, 200, 221, 256] {
        let window = hamming_window(&vec![1.0; len]).unwrap();
        for i in 0..len / 2 {
            let (a, b) = (window[i], window[len - 1 - i]);
            assert!(
                (a - b).abs() < 1e-12,
                "window length {len} asymmetric at {i}"
            );
        }
    }

    // Pre-emphasis with a zero coefficient is the identity.
    let identity = pre_emphasize(&probe, 0.0).unwrap();
    assert_eq!(identity.samples, probe.samples);

    // Frame-count formula against explicit enumeration.
    let frame_config = PreprocessConfig::default();
    for len in [600usize, 1000, 1777, 4410, 22050] {
        let samples: Vec<f64> = (0..len).map(|i| (i as f64 * 0.01).sin()).collect();
        let utterance = Utterance::new(samples.clone(), rate).unwrap();
        let matrix = frame_blocks(&utterance, &frame_config).unwrap();
        let expected = (len - matrix.frame_len) / matrix.hop + 1;
        assert_eq!(
            matrix.num_frames(),
            expected,
            "frame count for length {len}"
        );
        for (k, frame) in matrix.frames.iter().enumerate() {
            let window = &samples[k * matrix.hop..k * matrix.hop + matrix.frame_len];
            assert_eq!(
                frame.as_slice(),
                window,
                "frame {k} is not the expected slice"
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(180),
        "property suite took {:.1}s, budget is 180s",
        elapsed.as_secs_f64()
    );
    println!(
        "PASS criterion 7: gain invariance, ±25 ms endpoints, window/pre-emphasis/framing in {:.1}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 8 — determinism: repeating an enrollment with the same seed
/// writes byte-identical model files, and repeating a sweep writes
/// byte-identical CSVs.
#[test]
fn criterion_8_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let train = common::write_synth_corpus(&dir.path().join("train"), 2, 2, 0, 83, None);
    let test = common::write_synth_corpus(&dir.path().join("test"), 2, 1, 2, 83, None);
    let pre = PreprocessConfig::default();
    let feat = FeatureConfig::default();
    let mlp = MlpConfig {
        hidden_dim: 6,
        max_epochs: 25,
        ..MlpConfig::default()
    };
    let ga = GaConfig {
        population_size: 10,
        generations: 2,
        rng_seed: 5,
        ..GaConfig::default()
    };

    let mut model_paths = Vec::new();
    for pass in 0..2 {
        let path = dir.path().join(format!("model_{pass}.json"));
        let (model, _) = enroll(&train, &pre, &feat, &mlp, &ga).unwrap();
        model.save(&path).unwrap();
        model_paths.push(path);
    }
    let first_model = std::fs::read(&model_paths[0]).unwrap();
    let second_model = std::fs::read(&model_paths[1]).unwrap();
    assert_eq!(
        first_model, second_model,
        "repeated enrollments wrote different model files"
    );

    let mut sweep_paths = Vec::new();
    for pass in 0..2 {
        let path = dir.path().join(format!("sweep_{pass}.csv"));
        parameter_sweep(
            &train,
            &test,
            &pre,
            &feat,
            &mlp,
            &ga,
            SweepParameter::Gain,
            &[0.3, 0.6],
            2,
            &path,
        )
        .unwrap();
        sweep_paths.push(path);
    }
    let first_sweep = std::fs::read(&sweep_paths[0]).unwrap();
    let second_sweep = std::fs::read(&sweep_paths[1]).unwrap();
    assert_eq!(
        first_sweep, second_sweep,
        "repeated sweeps wrote different CSVs"
    );
    println!(
        "PASS criterion 8: {}-byte models and {}-byte sweep CSVs byte-identical across reruns",
        first_model.len(),
        first_sweep.len()
    );
}
