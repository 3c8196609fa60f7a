//! Single-pass spectral Wiener denoising.
//!
//! The noise power spectrum is estimated once from the leading span of the
//! signal (assumed to hold no speech) and a per-frame, per-bin gain
//! `max(1 − P_noise/P_frame, floor)` is applied in the frequency domain.
//! Frames are windowed on analysis and again on synthesis, and the
//! overlap-add is divided by the accumulated squared window, so a gain of
//! one reconstructs the input exactly — no COLA constraint on the hop is
//! needed. Samples past the last whole frame pass through untouched.
//!
//! The internal framing is fixed at 20 ms frames with 50% overlap under a
//! Hamming window, independent of the analysis framing used downstream; the
//! config contributes only the noise-lead span and the gain floor.

use crate::audio_io::Utterance;
use crate::spectrum;

use super::{hamming_window, PreprocessConfig, PreprocessError};

/// Internal analysis frame length, seconds.
const WIENER_FRAME_S: f64 = 0.020;
/// Hop as a fraction of the frame (50% overlap).
const WIENER_HOP_FRACTION: f64 = 0.5;
/// Below this accumulated window weight a sample is copied from the input
/// instead of divided — only edge samples ever get near it.
const MIN_WINDOW_WEIGHT: f64 = 1e-8;
/// Guard against dividing by an all-zero frame spectrum.
const MIN_FRAME_POWER: f64 = 1e-30;

/// Suppresses stationary background noise, preserving signal length.
///
/// The noise estimate comes from the first `noise_lead_ms` of the signal;
/// output samples are clamped to [−1, 1]. Fails with
/// [`PreprocessError::TooShort`] when the signal cannot hold the noise lead
/// plus one analysis frame.
pub fn wiener_denoise(
    utterance: &Utterance,
    config: &PreprocessConfig,
) -> Result<Utterance, PreprocessError> {
    config.validate()?;
    let rate = utterance.sample_rate;
    let frame_len = ((WIENER_FRAME_S * rate as f64).floor() as usize).max(2);
    let hop = ((frame_len as f64 * WIENER_HOP_FRACTION).round() as usize).max(1);
    let noise_lead = config.noise_lead_samples(rate);
    let len = utterance.len();
    if len < noise_lead + frame_len {
        return Err(PreprocessError::TooShort(format!(
            "{len} samples cannot hold the {noise_lead}-sample noise lead plus one \
             {frame_len}-sample frame"
        )));
    }

    let window = hamming_window(&vec![1.0; frame_len])?;
    let num_frames = (len - frame_len) / hop + 1;

    // Windowed frame spectra, reused for both the noise estimate and the
    // filtering pass.
    let spectra: Vec<Vec<_>> = (0..num_frames)
        .map(|i| {
            let frame: Vec<f64> = utterance.samples[i * hop..i * hop + frame_len]
                .iter()
                .zip(&window)
                .map(|(s, w)| s * w)
                .collect();
            spectrum::forward(&frame, frame_len)
        })
        .collect();

    // Mean power spectrum over the frames lying entirely inside the noise
    // lead; the first frame alone if the lead is shorter than one frame.
    let noise_frames = num_frames
        .min(if noise_lead >= frame_len {
            (noise_lead - frame_len) / hop + 1
        } else {
            1
        })
        .max(1);
    let mut noise_power = vec![0.0f64; frame_len];
    for s in &spectra[..noise_frames] {
        for (p, c) in noise_power.iter_mut().zip(s) {
            *p += c.norm_sqr();
        }
    }
    for p in &mut noise_power {
        *p /= noise_frames as f64;
    }

    // Filter each frame and overlap-add with a synthesis window, tracking
    // the accumulated squared window for exact normalization.
    let mut out = vec![0.0f64; len];
    let mut weight = vec![0.0f64; len];
    for (i, spec) in spectra.iter().enumerate() {
        let filtered: Vec<_> = spec
            .iter()
            .zip(&noise_power)
            .map(|(c, &n)| {
                let p = c.norm_sqr().max(MIN_FRAME_POWER);
                let gain = (1.0 - n / p).max(config.wiener_gain_floor);
                c * gain
            })
            .collect();
        let frame = spectrum::inverse_real(&filtered);
        for (n, (&y, &w)) in frame.iter().zip(&window).enumerate() {
            out[i * hop + n] += y * w;
            weight[i * hop + n] += w * w;
        }
    }
    for t in 0..len {
        out[t] = if weight[t] > MIN_WINDOW_WEIGHT {
            (out[t] / weight[t]).clamp(-1.0, 1.0)
        } else {
            utterance.samples[t]
        };
    }
    Ok(Utterance {
        samples: out,
        sample_rate: rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn zero_input_gives_zero_output() {
        let utt = Utterance {
            samples: vec![0.0; 11025],
            sample_rate: 11025,
        };
        let out = wiener_denoise(&utt, &PreprocessConfig::default()).unwrap();
        assert_eq!(out.len(), utt.len());
        assert!(out.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn clean_tone_passes_through_a_silent_noise_estimate() {
        // Digital silence in the lead forces a zero noise spectrum, so the
        // gain is one everywhere and the tone must survive unchanged.
        let rate = 11025u32;
        let mut samples = vec![0.0; 1150];
        samples
            .extend((0..8000).map(|n| {
                0.5 * (2.0 * std::f64::consts::PI * 440.0 * n as f64 / rate as f64).sin()
            }));
        let utt = Utterance {
            samples,
            sample_rate: rate,
        };
        let out = wiener_denoise(&utt, &PreprocessConfig::default()).unwrap();
        assert_eq!(out.len(), utt.len());
        for (a, b) in utt.samples.iter().zip(&out.samples) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn noisy_tone_gains_at_least_5db_snr() {
        let rate = 11025u32;
        let lead = 1200usize;
        let tone_len = 11025usize;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let clean_tone: Vec<f64> = (0..tone_len)
            .map(|n| 0.4 * (2.0 * std::f64::consts::PI * 500.0 * n as f64 / rate as f64).sin())
            .collect();
        // White noise at 0 dB SNR over the tone region, spanning the lead too.
        let tone_power: f64 = clean_tone.iter().map(|s| s * s).sum::<f64>() / tone_len as f64;
        let normal = Normal::new(0.0, tone_power.sqrt()).unwrap();
        let noise: Vec<f64> = (0..lead + tone_len)
            .map(|_| normal.sample(&mut rng))
            .collect();
        let mut samples = vec![0.0; lead + tone_len];
        for t in 0..lead + tone_len {
            let speech = if t >= lead { clean_tone[t - lead] } else { 0.0 };
            samples[t] = (speech + noise[t]).clamp(-1.0, 1.0);
        }
        let utt = Utterance {
            samples,
            sample_rate: rate,
        };

        let out = wiener_denoise(&utt, &PreprocessConfig::default()).unwrap();

        let snr = |signal: &[f64]| {
            let mut p_err = 0.0;
            let mut p_ref = 0.0;
            for t in 0..tone_len {
                let c = clean_tone[t];
                let e = signal[lead + t] - c;
                p_ref += c * c;
                p_err += e * e;
            }
            10.0 * (p_ref / p_err).log10()
        };
        let snr_in = snr(&utt.samples);
        let snr_out = snr(&out.samples);
        assert!(
            snr_in.abs() < 1.0,
            "input SNR should sit near 0 dB, got {snr_in}"
        );
        assert!(
            snr_out - snr_in >= 5.0,
            "improvement {:.2} dB below 5 dB",
            snr_out - snr_in
        );
    }

    #[test]
    fn never_amplifies_frame_energy() {
        let rate = 11025u32;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 0.1).unwrap();
        let samples: Vec<f64> = (0..6000)
            .map(|n| {
                let tone = if n > 2000 {
                    0.3 * (2.0 * std::f64::consts::PI * 700.0 * n as f64 / rate as f64).sin()
                } else {
                    0.0
                };
                (tone + normal.sample(&mut rng)).clamp(-1.0, 1.0)
            })
            .collect();
        let utt = Utterance {
            samples,
            sample_rate: rate,
        };
        let out = wiener_denoise(&utt, &PreprocessConfig::default()).unwrap();
        for start in (0..utt.len() - 220).step_by(220) {
            let e_in: f64 = utt.samples[start..start + 220].iter().map(|s| s * s).sum();
            let e_out: f64 = out.samples[start..start + 220].iter().map(|s| s * s).sum();
            assert!(e_out <= e_in + 1e-9, "frame at {start}: {e_out} > {e_in}");
        }
    }

    #[test]
    fn rejects_signals_shorter_than_lead_plus_frame() {
        // 100 ms lead (1103 samples) + 220-sample frame needs 1323 samples.
        let utt = Utterance {
            samples: vec![0.1; 1300],
            sample_rate: 11025,
        };
        assert!(matches!(
            wiener_denoise(&utt, &PreprocessConfig::default()),
            Err(PreprocessError::TooShort(_))
        ));
    }
}
