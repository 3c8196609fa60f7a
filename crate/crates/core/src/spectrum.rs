//! Thin FFT wrappers shared by the denoiser and the feature extractors.
//!
//! All transforms accept an arbitrary length; the caller zero-pads when a
//! specific analysis size is wanted. Inverse transforms are normalized so
//! `inverse(forward(x))` reproduces `x`.

pub use rustfft::num_complex::Complex;

use rustfft::FftPlanner;

/// Forward DFT of a real signal, zero-padded (or truncated) to `size` bins.
pub fn forward(signal: &[f64], size: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
    for (slot, &s) in buf.iter_mut().zip(signal.iter()) {
        slot.re = s;
    }
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    buf
}

/// Inverse DFT scaled by `1/N`, returning the real part.
pub fn inverse_real(spectrum: &[Complex<f64>]) -> Vec<f64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Magnitudes of the non-negative frequency bins (`size/2 + 1` values).
pub fn magnitude_half(signal: &[f64], size: usize) -> Vec<f64> {
    forward(signal, size)[..size / 2 + 1]
        .iter()
        .map(|c| c.norm())
        .collect()
}

/// Power spectrum (`|X(k)|^2`) of the non-negative frequency bins.
pub fn power_half(signal: &[f64], size: usize) -> Vec<f64> {
    forward(signal, size)[..size / 2 + 1]
        .iter()
        .map(|c| c.norm_sqr())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_roundtrip() {
        let signal: Vec<f64> = (0..64)
            .map(|i| ((i * 7 + 3) % 13) as f64 / 13.0 - 0.5)
            .collect();
        let back = inverse_real(&forward(&signal, 64));
        for (a, b) in signal.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12, "roundtrip error {a} vs {b}");
        }
    }

    #[test]
    fn dc_signal_concentrates_in_bin_zero() {
        let spec = forward(&[1.0; 32], 32);
        assert!((spec[0].re - 32.0).abs() < 1e-12);
        for bin in &spec[1..] {
            assert!(bin.norm() < 1e-12);
        }
    }

    #[test]
    fn zero_padding_matches_manual_pad() {
        let signal = [0.3, -0.7, 0.2];
        let padded = [0.3, -0.7, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0];
        let a = forward(&signal, 8);
        let b = forward(&padded, 8);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
