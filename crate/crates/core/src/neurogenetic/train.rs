//! Backpropagation refinement and the combined two-stage trainer.

use std::io::Write as IoWrite;

use super::{
    decode_weights, ga_evolve, instance_error, rms_error, GaConfig, LabeledDataset, MlpConfig,
    MlpNetwork, NetworkError,
};

/// Loss gradients for every weight and bias of the network.
#[derive(Debug, Clone)]
pub struct NetworkGradients {
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_biases: Vec<f64>,
    pub output_weights: Vec<Vec<f64>>,
    pub output_biases: Vec<f64>,
}

/// Analytic gradients of the squared-error loss `Σ_j (T_j − O_j)²` for one
/// instance, with the layer slopes entering through the chain rule: a
/// sigmoid with slope k has derivative `k·σ·(1−σ)`.
pub fn gradients(
    network: &MlpNetwork,
    input: &[f64],
    target: &[f64],
) -> Result<NetworkGradients, NetworkError> {
    if input.len() != network.config.input_dim {
        return Err(NetworkError::DimMismatch(format!(
            "input dim {} vs network input {}",
            input.len(),
            network.config.input_dim
        )));
    }
    if target.len() != network.config.output_dim {
        return Err(NetworkError::DimMismatch(format!(
            "target dim {} vs network output {}",
            target.len(),
            network.config.output_dim
        )));
    }
    let (k1, k2) = (network.config.speed_hidden, network.config.speed_output);
    let (hidden, output) = network.forward_trace(input);

    // Output layer: δ_j = ∂E/∂z_j for pre-gain activation z_j = V_j·h + c_j.
    let delta_out: Vec<f64> = output
        .iter()
        .zip(target)
        .map(|(o, t)| 2.0 * (o - t) * k2 * o * (1.0 - o))
        .collect();
    let output_weights: Vec<Vec<f64>> = delta_out
        .iter()
        .map(|d| hidden.iter().map(|h| d * h).collect())
        .collect();
    let output_biases = delta_out.clone();

    // Hidden layer: fold the output deltas back through V.
    let delta_hidden: Vec<f64> = (0..hidden.len())
        .map(|i| {
            let back: f64 = delta_out
                .iter()
                .zip(&network.output_weights)
                .map(|(d, row)| d * row[i])
                .sum();
            back * k1 * hidden[i] * (1.0 - hidden[i])
        })
        .collect();
    let hidden_weights: Vec<Vec<f64>> = delta_hidden
        .iter()
        .map(|d| input.iter().map(|x| d * x).collect())
        .collect();
    let hidden_biases = delta_hidden;

    Ok(NetworkGradients {
        hidden_weights,
        hidden_biases,
        output_weights,
        output_biases,
    })
}

/// One epoch of per-instance stochastic gradient descent, visiting the
/// instances in dataset order; the hidden layer steps by `gain_hidden`, the
/// output layer by `gain_output`.
///
/// Returns the updated network and its RMS error over the whole dataset
/// measured after the epoch's updates.
pub fn backprop_epoch(
    network: &MlpNetwork,
    dataset: &LabeledDataset,
) -> Result<(MlpNetwork, f64), NetworkError> {
    dataset.validate()?;
    let mut net = network.clone();
    let (eta1, eta2) = (net.config.gain_hidden, net.config.gain_output);
    for (input, target) in dataset.inputs.iter().zip(&dataset.targets) {
        let g = gradients(&net, input, target)?;
        for (row, grad_row) in net.hidden_weights.iter_mut().zip(&g.hidden_weights) {
            for (w, gw) in row.iter_mut().zip(grad_row) {
                *w -= eta1 * gw;
            }
        }
        for (b, gb) in net.hidden_biases.iter_mut().zip(&g.hidden_biases) {
            *b -= eta1 * gb;
        }
        for (row, grad_row) in net.output_weights.iter_mut().zip(&g.output_weights) {
            for (v, gv) in row.iter_mut().zip(grad_row) {
                *v -= eta2 * gv;
            }
        }
        for (c, gc) in net.output_biases.iter_mut().zip(&g.output_biases) {
            *c -= eta2 * gc;
        }
    }
    let rms = network_rms(&net, dataset)?;
    Ok((net, rms))
}

/// RMS error of a network over a dataset.
pub(crate) fn network_rms(
    network: &MlpNetwork,
    dataset: &LabeledDataset,
) -> Result<f64, NetworkError> {
    let errors = dataset
        .inputs
        .iter()
        .zip(&dataset.targets)
        .map(|(x, t)| instance_error(t, &network.forward(x)?))
        .collect::<Result<Vec<_>, _>>()?;
    rms_error(&errors)
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// RMS error reached the tolerable level.
    ToleranceReached,
    /// The epoch budget ran out first.
    MaxEpochs,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::ToleranceReached => "tolerance_reached",
            StopReason::MaxEpochs => "max_epochs",
        })
    }
}

/// Record of one hybrid training run.
#[derive(Debug, Clone)]
pub struct TrainingReport {
    /// Best fitness after initialization and after each GA generation.
    pub ga_history: Vec<f64>,
    /// RMS after each backpropagation epoch.
    pub bpn_history: Vec<f64>,
    pub stop_reason: StopReason,
    /// Set when backpropagation ended worse than the GA result and the
    /// GA-stage weights were kept.
    pub reverted_to_ga: bool,
    /// RMS of the returned network over the training set.
    pub final_rms: f64,
}

impl TrainingReport {
    /// Serializes the two training curves as CSV rows `stage,iteration,rms`,
    /// GA generations first, then backpropagation epochs.
    pub fn write_csv<W: IoWrite>(&self, writer: &mut W) -> std::io::Result<()> {
        writeln!(writer, "stage,iteration,rms")?;
        for (i, rms) in self.ga_history.iter().enumerate() {
            writeln!(writer, "ga,{i},{rms}")?;
        }
        for (i, rms) in self.bpn_history.iter().enumerate() {
            writeln!(writer, "bpn,{i},{rms}")?;
        }
        Ok(())
    }
}

/// Two-stage training: genetic weight search, then backpropagation from the
/// best chromosome until the tolerable RMS or the epoch budget is reached.
///
/// If backpropagation ends with a worse RMS than the GA stage delivered,
/// the GA weights are kept and the report says so. The whole run is a pure
/// function of (dataset, configs, seed).
pub fn train_hybrid(
    dataset: &LabeledDataset,
    mlp_config: &MlpConfig,
    ga_config: &GaConfig,
) -> Result<(MlpNetwork, TrainingReport), NetworkError> {
    let (best, ga_history) = ga_evolve(dataset, mlp_config, ga_config)?;
    let ga_rms = best.fitness.expect("ga_evolve always scores its result");
    let ga_network = decode_weights(&best, mlp_config)?;

    let mut net = ga_network.clone();
    let mut bpn_history = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;
    if ga_rms <= mlp_config.tolerable_rms {
        stop_reason = StopReason::ToleranceReached;
    } else {
        for _ in 0..mlp_config.max_epochs {
            let (updated, rms) = backprop_epoch(&net, dataset)?;
            net = updated;
            bpn_history.push(rms);
            if rms <= mlp_config.tolerable_rms {
                stop_reason = StopReason::ToleranceReached;
                break;
            }
        }
    }

    let mut final_rms = bpn_history.last().copied().unwrap_or(ga_rms);
    let mut reverted_to_ga = false;
    if final_rms > ga_rms {
        net = ga_network;
        final_rms = ga_rms;
        reverted_to_ga = true;
    }

    let report = TrainingReport {
        ga_history,
        bpn_history,
        stop_reason,
        reverted_to_ga,
        final_rms,
    };
    Ok((net, report))
}
