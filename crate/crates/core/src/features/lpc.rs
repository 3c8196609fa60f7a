//! Linear prediction analysis and LPC-derived cepstra.

use super::FeatureError;

/// Stability tolerance for reflection coefficients. The autocorrelation
/// method keeps them inside the unit circle mathematically; anything past
/// this margin signals a numerical breakdown rather than a modeling issue.
const REFLECTION_TOLERANCE: f64 = 1e-9;

/// Linear prediction coefficients a₁..a_p of one windowed frame.
///
/// Uses the autocorrelation method solved by the Levinson-Durbin recursion,
/// in the convention `s[n] ≈ Σ_k a_k·s[n−k]`, so a signal generated by
/// `s[n] = 0.9·s[n−1] − 0.2·s[n−2] + noise` yields coefficients near
/// `[0.9, −0.2]`.
pub fn lpc(frame: &[f64], order: usize) -> Result<Vec<f64>, FeatureError> {
    if order == 0 {
        return Err(FeatureError::ConfigError(
            "lpc order must be at least 1".into(),
        ));
    }
    if order >= frame.len() {
        return Err(FeatureError::ConfigError(format!(
            "lpc order {order} must be below the frame length {}",
            frame.len()
        )));
    }

    // Autocorrelation lags 0..=order.
    let r: Vec<f64> = (0..=order)
        .map(|lag| frame[lag..].iter().zip(frame).map(|(a, b)| a * b).sum())
        .collect();
    if r[0] <= 0.0 {
        return Err(FeatureError::DegenerateFrame);
    }

    let mut a = vec![0.0f64; order];
    let mut error = r[0];
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j - 1] * r[i - j]).sum();
        let reflection = (r[i] - acc) / error;
        if reflection.abs() >= 1.0 + REFLECTION_TOLERANCE {
            return Err(FeatureError::NumericalInstability(format!(
                "reflection coefficient {reflection} at order {i}"
            )));
        }
        // Order-i coefficients combine mirrored pairs of the order-(i−1)
        // set, so update from a snapshot rather than in place.
        let prev = a.clone();
        a[i - 1] = reflection;
        for j in 1..i {
            a[j - 1] = prev[j - 1] - reflection * prev[i - j - 1];
        }
        error *= 1.0 - reflection * reflection;
        if error <= 0.0 {
            return Err(FeatureError::NumericalInstability(format!(
                "prediction error collapsed to {error} at order {i}"
            )));
        }
    }
    Ok(a)
}

/// Cepstral coefficients c₁..c_Q from LPC coefficients a₁..a_p, via the
/// standard recursion:
///
/// - c₁ = a₁
/// - for 1 < n ≤ p:  c_n = a_n + Σ_{k=1..n−1} (k/n)·c_k·a_{n−k}
/// - for n > p:      c_n = Σ_{k=n−p..n−1} (k/n)·c_k·a_{n−k}
pub fn lpcc(lpc_coeffs: &[f64], num_coefficients: usize) -> Vec<f64> {
    let p = lpc_coeffs.len();
    let mut c = Vec::with_capacity(num_coefficients);
    for n in 1..=num_coefficients {
        let direct = if n <= p { lpc_coeffs[n - 1] } else { 0.0 };
        let lower = n.saturating_sub(p).max(1);
        let acc: f64 = (lower..n)
            .map(|k| (k as f64 / n as f64) * c[k - 1] * lpc_coeffs[n - k - 1])
            .sum();
        c.push(direct + acc);
    }
    c
}
