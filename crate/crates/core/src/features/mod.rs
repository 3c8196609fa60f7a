//! Frame-level feature extraction: cepstral and predictive parameterizations
//! plus their dynamic (delta) variants, and pooling into a fixed-length
//! vector for the classifier.
//!
//! Six methods are exposed: the real cepstrum (RCC), mel-frequency cepstra
//! (MFCC) with first and second time derivatives (DMFCC, DDMFCC), linear
//! prediction coefficients (LPC), and LPC-derived cepstra (LPCC). All
//! extractors operate on frames that have already been windowed by the
//! preprocessing stage.

mod lpc;
mod mel;

pub use lpc::{lpc, lpcc};
pub use mel::{mel_filterbank, mel_scale, mfcc};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as IoWrite;
use thiserror::Error;

use crate::preprocess::FrameMatrix;
use crate::spectrum;

/// Errors raised during feature extraction.
#[derive(Debug, Error)]
pub enum FeatureError {
    /// Parameter outside its documented range.
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    /// A frame with no energy cannot be modeled by linear prediction.
    #[error("degenerate frame: zero autocorrelation")]
    DegenerateFrame,
    /// Every frame of the utterance was degenerate.
    #[error("degenerate utterance: no frame survived extraction")]
    DegenerateUtterance,
    /// The Levinson-Durbin recursion left its stability region.
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    /// Pooling over an empty feature matrix.
    #[error("empty feature matrix")]
    EmptyFeatures,
}

/// The feature families the toolkit can extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMethod {
    /// Real cepstral coefficients of the windowed frame.
    Rcc,
    /// Mel-frequency cepstral coefficients.
    Mfcc,
    /// First time derivative of MFCC.
    Dmfcc,
    /// Second time derivative of MFCC.
    Ddmfcc,
    /// Linear prediction coefficients.
    Lpc,
    /// Cepstral coefficients derived from LPC.
    Lpcc,
}

impl FeatureMethod {
    pub const ALL: [FeatureMethod; 6] = [
        FeatureMethod::Rcc,
        FeatureMethod::Mfcc,
        FeatureMethod::Dmfcc,
        FeatureMethod::Ddmfcc,
        FeatureMethod::Lpc,
        FeatureMethod::Lpcc,
    ];

    fn is_mel_family(self) -> bool {
        matches!(
            self,
            FeatureMethod::Mfcc | FeatureMethod::Dmfcc | FeatureMethod::Ddmfcc
        )
    }
}

impl std::fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FeatureMethod::Rcc => "rcc",
            FeatureMethod::Mfcc => "mfcc",
            FeatureMethod::Dmfcc => "dmfcc",
            FeatureMethod::Ddmfcc => "ddmfcc",
            FeatureMethod::Lpc => "lpc",
            FeatureMethod::Lpcc => "lpcc",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for FeatureMethod {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rcc" => Ok(FeatureMethod::Rcc),
            "mfcc" => Ok(FeatureMethod::Mfcc),
            "dmfcc" => Ok(FeatureMethod::Dmfcc),
            "ddmfcc" => Ok(FeatureMethod::Ddmfcc),
            "lpc" => Ok(FeatureMethod::Lpc),
            "lpcc" => Ok(FeatureMethod::Lpcc),
            other => Err(FeatureError::ConfigError(format!(
                "unknown feature method '{other}'"
            ))),
        }
    }
}

/// How per-frame rows are condensed into one fixed-length vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Per-coefficient mean over frames.
    Mean,
    /// Means concatenated with per-coefficient population standard
    /// deviations.
    MeanStd,
}

impl std::fmt::Display for Pooling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pooling::Mean => "mean",
            Pooling::MeanStd => "mean_std",
        })
    }
}

impl std::str::FromStr for Pooling {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(Pooling::Mean),
            "mean_std" => Ok(Pooling::MeanStd),
            other => Err(FeatureError::ConfigError(format!(
                "unknown pooling '{other}'"
            ))),
        }
    }
}

/// Extractor hyperparameters.
///
/// Serialized alongside trained models so inference reuses the training
/// settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub method: FeatureMethod,
    /// Cepstral coefficients returned per frame (the 0th is never included).
    pub num_coefficients: usize,
    /// Triangular filters in the mel filterbank.
    pub num_mel_filters: usize,
    /// Transform size, a power of two at least as large as the frame.
    pub fft_size: usize,
    /// Predictor order for LPC and LPCC.
    pub lpc_order: usize,
    /// Half-width M of the delta regression window.
    pub delta_window: usize,
    /// Lower bound applied inside logarithms to absorb zero spectra.
    pub log_floor: f64,
    pub pooling: Pooling,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            method: FeatureMethod::Mfcc,
            num_coefficients: 12,
            num_mel_filters: 26,
            fft_size: 512,
            lpc_order: 12,
            delta_window: 2,
            log_floor: 1e-10,
            pooling: Pooling::Mean,
        }
    }
}

impl FeatureConfig {
    /// Checks the rate-independent field constraints.
    pub fn validate(&self) -> Result<(), FeatureError> {
        let err = |msg: String| Err(FeatureError::ConfigError(msg));
        if self.num_coefficients == 0 {
            return err("num_coefficients must be at least 1".into());
        }
        if !self.fft_size.is_power_of_two() {
            return err(format!("fft_size {} is not a power of two", self.fft_size));
        }
        if self.method.is_mel_family() && self.num_coefficients >= self.num_mel_filters {
            // The cosine transform of K filter energies carries K usable
            // coefficients including the excluded 0th, so at most K − 1 can
            // be returned.
            return err(format!(
                "num_coefficients {} must be below num_mel_filters {}",
                self.num_coefficients, self.num_mel_filters
            ));
        }
        if self.lpc_order == 0 {
            return err("lpc_order must be at least 1".into());
        }
        if self.delta_window == 0 {
            return err("delta_window must be at least 1".into());
        }
        if !(self.log_floor > 0.0 && self.log_floor.is_finite()) {
            return err(format!(
                "log_floor {} must be a small positive real",
                self.log_floor
            ));
        }
        Ok(())
    }

    /// Checks constraints that depend on the frame length.
    fn validate_for_frames(&self, frame_len: usize) -> Result<(), FeatureError> {
        self.validate()?;
        if self.fft_size < frame_len {
            return Err(FeatureError::ConfigError(format!(
                "fft_size {} is below the frame length {frame_len}",
                self.fft_size
            )));
        }
        if matches!(self.method, FeatureMethod::Lpc | FeatureMethod::Lpcc)
            && self.lpc_order >= frame_len
        {
            return Err(FeatureError::ConfigError(format!(
                "lpc_order {} must be below the frame length {frame_len}",
                self.lpc_order
            )));
        }
        Ok(())
    }

    /// Coefficients per row produced by the configured method.
    pub fn row_dim(&self) -> usize {
        match self.method {
            FeatureMethod::Lpc => self.lpc_order,
            _ => self.num_coefficients,
        }
    }

    /// Length of the pooled vector handed to the classifier.
    pub fn pooled_dim(&self) -> usize {
        match self.pooling {
            Pooling::Mean => self.row_dim(),
            Pooling::MeanStd => 2 * self.row_dim(),
        }
    }
}

/// Per-frame feature rows of one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// One coefficient vector per frame, all of length `dim`.
    pub rows: Vec<Vec<f64>>,
    pub method: FeatureMethod,
    pub dim: usize,
}

impl FeatureMatrix {
    pub fn num_frames(&self) -> usize {
        self.rows.len()
    }
}

/// A fixed-length vector pooled from a [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub dim: usize,
}

/// Real cepstral coefficients c₁..c_Q of one windowed frame.
///
/// The frame is transformed at `fft_size`, the log magnitude spectrum is
/// floored at `log_floor` to absorb exact zeros, and the inverse transform's
/// real part yields the cepstrum. The 0th coefficient — which carries the
/// overall gain — is excluded, making the result invariant to positive
/// scaling of the frame.
pub fn real_cepstrum(frame: &[f64], config: &FeatureConfig) -> Result<Vec<f64>, FeatureError> {
    config.validate_for_frames(frame.len())?;
    if frame.is_empty() {
        return Err(FeatureError::ConfigError("frame must be non-empty".into()));
    }
    let spec = spectrum::forward(frame, config.fft_size);
    let log_mag: Vec<_> = spec
        .iter()
        .map(|c| spectrum::Complex::new(c.norm().max(config.log_floor).ln(), 0.0))
        .collect();
    let cepstrum = spectrum::inverse_real(&log_mag);
    Ok(cepstrum[1..=config.num_coefficients].to_vec())
}

/// First-order dynamic features over time.
///
/// Each output row is the regression slope over a ±M frame window,
/// `Δc_t = Σ_{τ=1..M} τ·(c_{t+τ} − c_{t−τ}) / (2·Σ τ²)`, with frames beyond
/// either edge replicated from the nearest existing frame so the output has
/// the same shape as the input.
pub fn delta(features: &FeatureMatrix, window: usize) -> FeatureMatrix {
    assert!(window >= 1, "delta window must be at least 1");
    let t_max = features.num_frames();
    let denom: f64 = 2.0 * (1..=window).map(|t| (t * t) as f64).sum::<f64>();
    let clamp = |i: isize| -> usize { i.clamp(0, t_max as isize - 1) as usize };
    let rows = (0..t_max)
        .map(|t| {
            (0..features.dim)
                .map(|d| {
                    let mut acc = 0.0;
                    for tau in 1..=window {
                        let ahead = features.rows[clamp(t as isize + tau as isize)][d];
                        let behind = features.rows[clamp(t as isize - tau as isize)][d];
                        acc += tau as f64 * (ahead - behind);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect();
    FeatureMatrix {
        rows,
        method: features.method,
        dim: features.dim,
    }
}

/// Second-order dynamic features: [`delta`] applied twice.
pub fn delta_delta(features: &FeatureMatrix, window: usize) -> FeatureMatrix {
    delta(&delta(features, window), window)
}

/// Extracts the configured feature family from every frame.
///
/// Rows are computed in parallel and assembled in frame order, so the result
/// does not depend on scheduling. For the LPC-based methods, frames with no
/// energy are dropped; if every frame drops, the utterance is degenerate.
pub fn extract_features(
    frames: &FrameMatrix,
    config: &FeatureConfig,
) -> Result<FeatureMatrix, FeatureError> {
    config.validate_for_frames(frames.frame_len)?;
    if frames.num_frames() == 0 {
        return Err(FeatureError::EmptyFeatures);
    }
    let rate = frames.source_rate;
    let method = config.method;

    let rows: Vec<Vec<f64>> = match method {
        FeatureMethod::Rcc => frames
            .frames
            .par_iter()
            .map(|f| real_cepstrum(f, config))
            .collect::<Result<_, _>>()?,
        FeatureMethod::Mfcc | FeatureMethod::Dmfcc | FeatureMethod::Ddmfcc => frames
            .frames
            .par_iter()
            .map(|f| mfcc(f, rate, config))
            .collect::<Result<_, _>>()?,
        FeatureMethod::Lpc | FeatureMethod::Lpcc => {
            // Degenerate frames drop out; anything else propagates.
            let maybe_rows: Vec<Option<Vec<f64>>> = frames
                .frames
                .par_iter()
                .map(|f| match lpc(f, config.lpc_order) {
                    Ok(a) => {
                        if method == FeatureMethod::Lpcc {
                            Ok(Some(lpcc(&a, config.num_coefficients)))
                        } else {
                            Ok(Some(a))
                        }
                    }
                    Err(FeatureError::DegenerateFrame) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_, _>>()?;
            let rows: Vec<Vec<f64>> = maybe_rows.into_iter().flatten().collect();
            if rows.is_empty() {
                return Err(FeatureError::DegenerateUtterance);
            }
            rows
        }
    };

    let matrix = FeatureMatrix {
        rows,
        method,
        dim: config.row_dim(),
    };
    debug_assert!(matrix.rows.iter().all(|r| r.len() == matrix.dim));
    debug_assert!(matrix.rows.iter().flatten().all(|v| v.is_finite()));
    Ok(match method {
        FeatureMethod::Dmfcc => delta(&matrix, config.delta_window),
        FeatureMethod::Ddmfcc => delta_delta(&matrix, config.delta_window),
        _ => matrix,
    })
}

/// Condenses per-frame rows into one fixed-length vector.
///
/// Standard deviations use the population form (divide by the frame count),
/// so a single-frame matrix pools to zero deviations rather than an error.
pub fn pool(features: &FeatureMatrix, pooling: Pooling) -> Result<FeatureVector, FeatureError> {
    let n = features.num_frames();
    if n == 0 {
        return Err(FeatureError::EmptyFeatures);
    }
    let dim = features.dim;
    let mut means = vec![0.0f64; dim];
    for row in &features.rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let values = match pooling {
        Pooling::Mean => means,
        Pooling::MeanStd => {
            let mut vars = vec![0.0f64; dim];
            for row in &features.rows {
                for ((v, x), m) in vars.iter_mut().zip(row).zip(&means) {
                    let d = x - m;
                    *v += d * d;
                }
            }
            let stds = vars.iter().map(|v| (v / n as f64).sqrt());
            means.iter().cloned().chain(stds).collect()
        }
    };
    let dim = values.len();
    Ok(FeatureVector { values, dim })
}

/// Writes a feature matrix as CSV with header `frame_index,c1,...,cQ`.
pub fn write_features_csv<W: IoWrite>(
    features: &FeatureMatrix,
    writer: &mut W,
) -> std::io::Result<()> {
    write!(writer, "frame_index")?;
    for i in 1..=features.dim {
        write!(writer, ",c{i}")?;
    }
    writeln!(writer)?;
    for (t, row) in features.rows.iter().enumerate() {
        write!(writer, "{t}")?;
        for v in row {
            write!(writer, ",{v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
