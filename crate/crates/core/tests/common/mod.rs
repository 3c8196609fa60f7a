//! Shared fixtures and independently implemented reference oracles.
//!
//! Every oracle here recomputes its result from the mathematical definition
//! with direct summation — no FFTs, no shared code paths with the library —
//! so an agreement between the two is meaningful evidence.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use voxid_core::audio_io::{synthesize_corpus, write_corpus};
use voxid_core::features::FeatureConfig;
use voxid_core::neurogenetic::{
    decode_weights, gradients, instance_error, Chromosome, MlpConfig, MlpNetwork,
};

// ---------------------------------------------------------------------------
// Direct-sum spectral oracles
// ---------------------------------------------------------------------------

/// O(N²) DFT of a real signal zero-padded to `size`, as (re, im) pairs.
pub fn naive_dft(signal: &[f64], size: usize) -> Vec<(f64, f64)> {
    (0..size)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (n, &x) in signal.iter().enumerate().take(size) {
                let angle = -2.0 * PI * (k * n) as f64 / size as f64;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            (re, im)
        })
        .collect()
}

/// Power spectrum |X(k)|² of the non-negative bins, by direct summation.
pub fn naive_power_half(signal: &[f64], size: usize) -> Vec<f64> {
    naive_dft(signal, size)[..size / 2 + 1]
        .iter()
        .map(|(re, im)| re * re + im * im)
        .collect()
}

/// Real cepstral coefficients c₁..c_Q by direct summation: log-magnitude
/// spectrum, then an O(N²) inverse DFT taking the real part.
pub fn naive_rcc(frame: &[f64], config: &FeatureConfig) -> Vec<f64> {
    let size = config.fft_size;
    let log_mag: Vec<f64> = naive_dft(frame, size)
        .iter()
        .map(|(re, im)| (re * re + im * im).sqrt().max(config.log_floor).ln())
        .collect();
    (1..=config.num_coefficients)
        .map(|n| {
            let sum: f64 = log_mag
                .iter()
                .enumerate()
                .map(|(k, &l)| l * (2.0 * PI * (k * n) as f64 / size as f64).cos())
                .sum();
            sum / size as f64
        })
        .collect()
}

/// Mel scale in its textbook form.
fn mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_inv(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// MFCC c₁..c_Q by direct summation: naive power spectrum, triangular mel
/// filters evaluated pointwise from their Hz corner frequencies, log with
/// floor, and a direct type-II cosine transform.
pub fn naive_mfcc(frame: &[f64], sample_rate: u32, config: &FeatureConfig) -> Vec<f64> {
    let size = config.fft_size;
    let num_filters = config.num_mel_filters;
    let power = naive_power_half(frame, size);
    let mel_max = mel(sample_rate as f64 / 2.0);
    let corners: Vec<f64> = (0..num_filters + 2)
        .map(|i| mel_inv(mel_max * i as f64 / (num_filters + 1) as f64))
        .collect();

    let mut log_energies = Vec::with_capacity(num_filters);
    for f in 0..num_filters {
        let (lo, center, hi) = (corners[f], corners[f + 1], corners[f + 2]);
        let mut energy = 0.0;
        for (bin, &p) in power.iter().enumerate() {
            let freq = bin as f64 * sample_rate as f64 / size as f64;
            let weight = if freq <= lo || freq >= hi {
                0.0
            } else if freq <= center {
                (freq - lo) / (center - lo)
            } else {
                (hi - freq) / (hi - center)
            };
            energy += weight * p;
        }
        log_energies.push(energy.max(config.log_floor).ln());
    }

    (1..=config.num_coefficients)
        .map(|q| {
            log_energies
                .iter()
                .enumerate()
                .map(|(k, &v)| v * (PI * q as f64 * (k as f64 + 0.5) / num_filters as f64).cos())
                .sum()
        })
        .collect()
}

/// Delta features by the regression definition, replicating edge frames:
/// `d_t = Σ_τ τ·(c_{t+τ} − c_{t−τ}) / (2·Σ_τ τ²)` with clamped indices.
pub fn naive_delta(rows: &[Vec<f64>], window: usize) -> Vec<Vec<f64>> {
    let t_max = rows.len() as isize;
    let denom: f64 = 2.0 * (1..=window).map(|t| (t * t) as f64).sum::<f64>();
    (0..t_max)
        .map(|t| {
            let dim = rows[t as usize].len();
            (0..dim)
                .map(|j| {
                    let mut acc = 0.0;
                    for tau in 1..=window as isize {
                        let ahead = &rows[(t + tau).clamp(0, t_max - 1) as usize];
                        let behind = &rows[(t - tau).clamp(0, t_max - 1) as usize];
                        acc += tau as f64 * (ahead[j] - behind[j]);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect()
}

/// Cepstrum of an all-pole model by its log spectrum: evaluates
/// `ln|1/A(e^{jω})|` on a dense grid, inverts with a direct DFT sum, and
/// doubles the one-sided coefficients (the model is minimum-phase, so the
/// even real cepstrum folds the causal cepstrum in half).
pub fn lpcc_spectrum_oracle(lpc_coeffs: &[f64], count: usize, grid: usize) -> Vec<f64> {
    let log_h: Vec<f64> = (0..grid)
        .map(|k| {
            let omega = 2.0 * PI * k as f64 / grid as f64;
            // A(e^{jω}) = 1 − Σ_m a_m e^{−jωm}
            let mut re = 1.0;
            let mut im = 0.0;
            for (m, &a) in lpc_coeffs.iter().enumerate() {
                re -= a * (omega * (m + 1) as f64).cos();
                im += a * (omega * (m + 1) as f64).sin();
            }
            -0.5 * (re * re + im * im).ln()
        })
        .collect();
    (1..=count)
        .map(|n| {
            let sum: f64 = log_h
                .iter()
                .enumerate()
                .map(|(k, &l)| l * (2.0 * PI * (k * n) as f64 / grid as f64).cos())
                .sum();
            2.0 * sum / grid as f64
        })
        .collect()
}

/// A synthetic autoregressive signal `s[n] = Σ_k a_k s[n−k] + e[n]` with
/// white Gaussian innovation, burn-in discarded.
pub fn ar_signal(coeffs: &[f64], len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn = 200;
    let mut s = Vec::with_capacity(len + burn);
    for _ in 0..len + burn {
        let mut v = 0.01 * (rng.random::<f64>() - 0.5);
        for (k, &a) in coeffs.iter().enumerate() {
            if s.len() > k {
                v += a * s[s.len() - 1 - k];
            }
        }
        s.push(v);
    }
    s.split_off(burn)
}

// ---------------------------------------------------------------------------
// Random fixtures
// ---------------------------------------------------------------------------

/// A reproducible random frame with samples in [−1, 1].
pub fn random_frame(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// A random network of the given shape with weights in [−1, 1].
pub fn random_network(config: &MlpConfig, seed: u64) -> MlpNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let genes = (0..config.gene_count())
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    decode_weights(
        &Chromosome {
            genes,
            fitness: None,
        },
        config,
    )
    .expect("gene count matches")
}

/// Compares analytic gradients against central finite differences on one
/// random network and instance; returns the maximum relative error.
pub fn gradient_check(config: &MlpConfig, seed: u64, step: f64) -> f64 {
    let network = random_network(config, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let input: Vec<f64> = (0..config.input_dim)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    let target: Vec<f64> = (0..config.output_dim)
        .map(|_| rng.random_range(0.0..=1.0))
        .collect();

    let analytic = gradients(&network, &input, &target).unwrap();
    let loss = |net: &MlpNetwork| -> f64 {
        instance_error(&target, &net.forward(&input).unwrap()).unwrap()
    };

    let mut max_rel = 0.0f64;
    let mut check = |a: f64, plus: &MlpNetwork, minus: &MlpNetwork| {
        let numeric = (loss(plus) - loss(minus)) / (2.0 * step);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    };
    for i in 0..config.hidden_dim {
        for j in 0..config.input_dim {
            let mut plus = network.clone();
            let mut minus = network.clone();
            plus.hidden_weights[i][j] += step;
            minus.hidden_weights[i][j] -= step;
            check(analytic.hidden_weights[i][j], &plus, &minus);
        }
        let mut plus = network.clone();
        let mut minus = network.clone();
        plus.hidden_biases[i] += step;
        minus.hidden_biases[i] -= step;
        check(analytic.hidden_biases[i], &plus, &minus);
    }
    for i in 0..config.output_dim {
        for j in 0..config.hidden_dim {
            let mut plus = network.clone();
            let mut minus = network.clone();
            plus.output_weights[i][j] += step;
            minus.output_weights[i][j] -= step;
            check(analytic.output_weights[i][j], &plus, &minus);
        }
        let mut plus = network.clone();
        let mut minus = network.clone();
        plus.output_biases[i] += step;
        minus.output_biases[i] -= step;
        check(analytic.output_biases[i], &plus, &minus);
    }
    max_rel
}

// ---------------------------------------------------------------------------
// Corpus fixtures
// ---------------------------------------------------------------------------

/// Synthesizes and writes a corpus under `root`, returning `root`.
pub fn write_synth_corpus(
    root: &Path,
    speakers: usize,
    utterances: usize,
    start_index: usize,
    seed: u64,
    noise_snr_db: Option<f64>,
) -> PathBuf {
    let corpus = synthesize_corpus(speakers, utterances, start_index, seed, noise_snr_db).unwrap();
    write_corpus(root, &corpus, start_index).unwrap();
    root.to_path_buf()
}
