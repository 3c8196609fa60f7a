//! Front-end conditioning: denoising, endpoint detection, pre-emphasis,
//! frame blocking and windowing.
//!
//! The stages run in a fixed order — Wiener denoising, silence removal by
//! short-term log-energy endpointing, a first-order pre-emphasis filter,
//! segmentation into overlapping frames, and a Hamming taper per frame —
//! and [`preprocess_pipeline`] composes them exactly that way. Every
//! operation is a pure function of its inputs, so the whole chain is safe to
//! run concurrently over different utterances.

mod wiener;

pub use wiener::wiener_denoise;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::Utterance;

/// Errors raised by the preprocessing stages.
#[derive(Debug, Error)]
pub enum PreprocessError {
    /// Input signal shorter than the operation's minimum length.
    #[error("input too short: {0}")]
    TooShort(String),
    /// Endpoint detection found no frame above the adaptive threshold.
    #[error("no speech detected")]
    NoSpeechDetected,
    /// Parameter outside its documented range.
    #[error("invalid configuration: {0}")]
    ConfigError(String),
}

/// Tuning knobs for the whole front end.
///
/// Serialized alongside trained models so that inference always runs with
/// the exact settings used during enrollment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// First-order pre-emphasis coefficient, in [0, 1].
    pub pre_emphasis_alpha: f64,
    /// Analysis frame length in milliseconds, in [10, 30].
    pub frame_len_ms: f64,
    /// Overlap between consecutive frames as a percentage, in [25, 75].
    pub overlap_pct: f64,
    /// Lower bound for short-term log energy, absorbing all-zero frames.
    pub energy_floor_db: f64,
    /// Position of the endpoint threshold between the noise-lead mean energy
    /// and the maximum frame energy, in (0, 1).
    pub endpoint_margin_fraction: f64,
    /// Frames the detected speech run is extended by on each side.
    pub hangover_frames: usize,
    /// Leading span assumed to hold no speech, used to estimate noise,
    /// in milliseconds.
    pub noise_lead_ms: f64,
    /// Spectral gain floor of the Wiener filter, in (0, 1]. A floor of 1
    /// makes the filter an identity, which is useful for bypassing it.
    pub wiener_gain_floor: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            pre_emphasis_alpha: 0.97,
            frame_len_ms: 20.0,
            overlap_pct: 50.0,
            energy_floor_db: -120.0,
            endpoint_margin_fraction: 0.25,
            hangover_frames: 5,
            noise_lead_ms: 100.0,
            wiener_gain_floor: 0.1,
        }
    }
}

impl PreprocessConfig {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let err = |msg: String| Err(PreprocessError::ConfigError(msg));
        if !(0.0..=1.0).contains(&self.pre_emphasis_alpha) {
            return err(format!(
                "pre_emphasis_alpha {} outside [0, 1]",
                self.pre_emphasis_alpha
            ));
        }
        if !(10.0..=30.0).contains(&self.frame_len_ms) {
            return err(format!(
                "frame_len_ms {} outside [10, 30]",
                self.frame_len_ms
            ));
        }
        if !(25.0..=75.0).contains(&self.overlap_pct) {
            return err(format!("overlap_pct {} outside [25, 75]", self.overlap_pct));
        }
        if !self.energy_floor_db.is_finite() {
            return err("energy_floor_db must be finite".into());
        }
        if !(self.endpoint_margin_fraction > 0.0 && self.endpoint_margin_fraction < 1.0) {
            return err(format!(
                "endpoint_margin_fraction {} outside (0, 1)",
                self.endpoint_margin_fraction
            ));
        }
        if !(self.noise_lead_ms > 0.0 && self.noise_lead_ms.is_finite()) {
            return err(format!(
                "noise_lead_ms {} must be positive",
                self.noise_lead_ms
            ));
        }
        if !(self.wiener_gain_floor > 0.0 && self.wiener_gain_floor <= 1.0) {
            return err(format!(
                "wiener_gain_floor {} outside (0, 1]",
                self.wiener_gain_floor
            ));
        }
        Ok(())
    }

    /// Frame length in samples at the given rate: `floor(ms · rate / 1000)`.
    pub fn frame_len_samples(&self, sample_rate: u32) -> usize {
        (self.frame_len_ms * sample_rate as f64 / 1000.0).floor() as usize
    }

    /// Hop between frame starts: `round(frame_len · (1 − overlap/100))`.
    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        let frame_len = self.frame_len_samples(sample_rate) as f64;
        (frame_len * (1.0 - self.overlap_pct / 100.0)).round() as usize
    }

    /// Number of leading samples treated as the noise estimate.
    pub fn noise_lead_samples(&self, sample_rate: u32) -> usize {
        (self.noise_lead_ms * sample_rate as f64 / 1000.0).round() as usize
    }
}

/// Overlapping analysis frames cut from one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    /// Per-frame sample rows, each `frame_len` long.
    pub frames: Vec<Vec<f64>>,
    pub frame_len: usize,
    pub hop: usize,
    pub source_rate: u32,
}

impl FrameMatrix {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

/// Short-term log energy of one frame in dB: `10·log10(Σ s²)`, floored.
///
/// The floor absorbs the all-zero frame, where the logarithm would diverge.
pub fn short_term_log_energy(frame: &[f64], floor_db: f64) -> f64 {
    let energy: f64 = frame.iter().map(|s| s * s).sum();
    // log10(0) is −∞, which max() correctly replaces with the floor.
    (10.0 * energy.log10()).max(floor_db)
}

/// First-order high-pass pre-emphasis: `y(t) = s(t) − α·s(t−1)`, with the
/// sample before the signal taken as zero so `y(0) = s(0)`.
pub fn pre_emphasize(utterance: &Utterance, alpha: f64) -> Result<Utterance, PreprocessError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(PreprocessError::ConfigError(format!(
            "alpha {alpha} outside [0, 1]"
        )));
    }
    let s = &utterance.samples;
    let mut out = Vec::with_capacity(s.len());
    let mut prev = 0.0;
    for &x in s {
        out.push(x - alpha * prev);
        prev = x;
    }
    Ok(Utterance {
        samples: out,
        sample_rate: utterance.sample_rate,
    })
}

/// Cuts the signal into overlapping frames.
///
/// Frame length and hop come from [`PreprocessConfig::frame_len_samples`]
/// and [`PreprocessConfig::hop_samples`]; trailing samples that do not fill
/// a whole frame are dropped so every frame is statistically homogeneous.
pub fn frame_blocks(
    utterance: &Utterance,
    config: &PreprocessConfig,
) -> Result<FrameMatrix, PreprocessError> {
    config.validate()?;
    let frame_len = config.frame_len_samples(utterance.sample_rate);
    let hop = config.hop_samples(utterance.sample_rate);
    if frame_len < 2 {
        return Err(PreprocessError::ConfigError(format!(
            "frame length of {frame_len} samples is too small at {} Hz",
            utterance.sample_rate
        )));
    }
    if utterance.len() < frame_len {
        return Err(PreprocessError::TooShort(format!(
            "{} samples cannot fill one {frame_len}-sample frame",
            utterance.len()
        )));
    }
    debug_assert!(hop >= 1 && hop <= frame_len);
    let num_frames = (utterance.len() - frame_len) / hop + 1;
    let frames = (0..num_frames)
        .map(|i| utterance.samples[i * hop..i * hop + frame_len].to_vec())
        .collect();
    Ok(FrameMatrix {
        frames,
        frame_len,
        hop,
        source_rate: utterance.sample_rate,
    })
}

/// Applies the standard symmetric Hamming taper
/// `w(n) = 0.54 − 0.46·cos(2πn/(N−1))` to a frame of length N ≥ 2.
pub fn hamming_window(frame: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    if frame.len() < 2 {
        return Err(PreprocessError::TooShort(
            "window needs at least two samples".into(),
        ));
    }
    let n_minus_1 = (frame.len() - 1) as f64;
    Ok(frame
        .iter()
        .enumerate()
        .map(|(n, &s)| {
            let w = 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / n_minus_1).cos();
            s * w
        })
        .collect())
}

/// Finds the speech region as inclusive sample bounds `(start, end)`.
///
/// Per-frame log energies are thresholded at
/// `T = E_noise + margin·(E_max − E_noise)`, where `E_noise` is the mean
/// energy of the frames lying entirely inside the leading noise span and
/// `E_max` the maximum over all frames. The longest run of frames above `T`
/// (earliest on ties) is extended by the hangover on both sides and clamped
/// to the signal.
pub fn detect_endpoints(
    utterance: &Utterance,
    config: &PreprocessConfig,
) -> Result<(usize, usize), PreprocessError> {
    let matrix = frame_blocks(utterance, config)?;
    let energies: Vec<f64> = matrix
        .frames
        .iter()
        .map(|f| short_term_log_energy(f, config.energy_floor_db))
        .collect();

    let noise_lead = config.noise_lead_samples(utterance.sample_rate);
    // Frames fully inside the noise lead; the first frame alone if the lead
    // is shorter than one frame.
    let noise_frame_count = energies
        .len()
        .min(if noise_lead >= matrix.frame_len {
            (noise_lead - matrix.frame_len) / matrix.hop + 1
        } else {
            1
        })
        .max(1);
    let e_noise: f64 = energies[..noise_frame_count].iter().sum::<f64>() / noise_frame_count as f64;
    let e_max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if e_max <= e_noise {
        return Err(PreprocessError::NoSpeechDetected);
    }
    let threshold = e_noise + config.endpoint_margin_fraction * (e_max - e_noise);

    // Longest run of frames above the threshold, earliest on ties.
    let mut best: Option<(usize, usize)> = None; // inclusive frame span
    let mut run_start: Option<usize> = None;
    for i in 0..=energies.len() {
        let above = i < energies.len() && energies[i] > threshold;
        match (above, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let len = i - s;
                if best.is_none_or(|(bs, be)| len > be - bs + 1) {
                    best = Some((s, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    let (first, last) = best.ok_or(PreprocessError::NoSpeechDetected)?;

    let first = first.saturating_sub(config.hangover_frames);
    let last = (last + config.hangover_frames).min(matrix.num_frames() - 1);
    let start = first * matrix.hop;
    let end = (last * matrix.hop + matrix.frame_len - 1).min(utterance.len() - 1);
    debug_assert!(start < end);
    Ok((start, end))
}

/// Runs the full front end: denoise, crop to the detected speech region,
/// pre-emphasize, cut into frames, and taper each frame.
pub fn preprocess_pipeline(
    utterance: &Utterance,
    config: &PreprocessConfig,
) -> Result<FrameMatrix, PreprocessError> {
    config.validate()?;
    let denoised = wiener_denoise(utterance, config)?;
    let (start, end) = detect_endpoints(&denoised, config)?;
    let cropped = Utterance {
        samples: denoised.samples[start..=end].to_vec(),
        sample_rate: denoised.sample_rate,
    };
    let emphasized = pre_emphasize(&cropped, config.pre_emphasis_alpha)?;
    let mut matrix = frame_blocks(&emphasized, config)?;
    for frame in &mut matrix.frames {
        *frame = hamming_window(frame)?;
    }
    Ok(matrix)
}
