//! Mel filterbank construction and MFCC extraction.

use crate::spectrum;

use super::{FeatureConfig, FeatureError};

/// Maps a frequency in Hz onto the mel scale: `2595·log10(1 + f/700)`.
pub fn mel_scale(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

/// Inverse of [`mel_scale`].
fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank as dense rows over the non-negative bins.
///
/// The `num_filters + 2` boundary frequencies are equally spaced in mel
/// between 0 and the Nyquist frequency; filter k rises linearly in Hz from
/// boundary k−1 to its unit peak at boundary k and falls to zero at
/// boundary k+1, sampled at the bin frequencies of an `fft_size` transform.
pub fn mel_filterbank(num_filters: usize, fft_size: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let nyquist = sample_rate as f64 / 2.0;
    let mel_max = mel_scale(nyquist);
    let hz_points: Vec<f64> = (0..num_filters + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (num_filters + 1) as f64))
        .collect();
    let num_bins = fft_size / 2 + 1;
    let bin_hz = sample_rate as f64 / fft_size as f64;
    (0..num_filters)
        .map(|k| {
            let (lower, center, upper) = (hz_points[k], hz_points[k + 1], hz_points[k + 2]);
            (0..num_bins)
                .map(|b| {
                    let f = b as f64 * bin_hz;
                    let rising = (f - lower) / (center - lower);
                    let falling = (upper - f) / (upper - center);
                    rising.min(falling).max(0.0)
                })
                .collect()
        })
        .collect()
}

/// Mel-frequency cepstral coefficients c₁..c_Q of one windowed frame.
///
/// The frame's power spectrum passes through the triangular filterbank, the
/// filter energies are log-compressed with the configured floor, and an
/// unnormalized type-II cosine transform decorrelates them. The 0th
/// coefficient — the log-energy / gain term — is excluded, so positive
/// scaling of the frame leaves the result unchanged.
pub fn mfcc(
    frame: &[f64],
    sample_rate: u32,
    config: &FeatureConfig,
) -> Result<Vec<f64>, FeatureError> {
    config.validate_for_frames(frame.len())?;
    if frame.is_empty() {
        return Err(FeatureError::ConfigError("frame must be non-empty".into()));
    }
    let power = spectrum::power_half(frame, config.fft_size);
    let filterbank = mel_filterbank(config.num_mel_filters, config.fft_size, sample_rate);
    let log_energies: Vec<f64> = filterbank
        .iter()
        .map(|filter| {
            let e: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
            e.max(config.log_floor).ln()
        })
        .collect();
    Ok(dct_ii(&log_energies, config.num_coefficients))
}

/// Unnormalized DCT-II terms 1..Q of `values`:
/// `c_q = Σ_k values[k] · cos(π·q·(k + ½)/K)`.
fn dct_ii(values: &[f64], num_coefficients: usize) -> Vec<f64> {
    let k_total = values.len() as f64;
    (1..=num_coefficients)
        .map(|q| {
            values
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    v * (std::f64::consts::PI * q as f64 * (k as f64 + 0.5) / k_total).cos()
                })
                .sum()
        })
        .collect()
}
