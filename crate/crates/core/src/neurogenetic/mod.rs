//! Hybrid neuro-genetic training of a single-hidden-layer MLP classifier.
//!
//! A real-coded genetic algorithm searches the space of complete weight
//! assignments — each chromosome flattens every weight and bias to a fixed
//! gene position — scoring candidates by the network's root-mean-square
//! error over the training set with weights held fixed. The best chromosome
//! then seeds plain per-instance backpropagation for fine refinement. Both
//! layers use sigmoid activations with a configurable pre-activation slope
//! (the "speed factor") and their own gradient-descent gain.

mod ga;
mod train;

pub use ga::{fitgen, ga_evolve};
pub use train::{backprop_epoch, gradients, train_hybrid, StopReason, TrainingReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by network construction, evaluation and training.
#[derive(Debug, Error)]
pub enum NetworkError {
    /// Vector or matrix dimensions disagree with the configuration.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    /// Chromosome length does not match the configuration's gene count.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    /// An operation that needs at least one element received none.
    #[error("empty input")]
    EmptyInput,
    /// Parameter outside its documented range.
    #[error("invalid configuration: {0}")]
    ConfigError(String),
}

/// Architecture and training hyperparameters of the MLP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    /// Input dimension l.
    pub input_dim: usize,
    /// Hidden-layer width m.
    pub hidden_dim: usize,
    /// Output dimension n (one node per class).
    pub output_dim: usize,
    /// Gradient-descent gain of the hidden layer, η₁.
    pub gain_hidden: f64,
    /// Gradient-descent gain of the output layer, η₂.
    pub gain_output: f64,
    /// Sigmoid slope of the hidden layer, k₁.
    pub speed_hidden: f64,
    /// Sigmoid slope of the output layer, k₂.
    pub speed_output: f64,
    /// Upper bound on backpropagation epochs.
    pub max_epochs: usize,
    /// Training stops once the RMS error falls to this level.
    pub tolerable_rms: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            input_dim: 12,
            hidden_dim: 30,
            output_dim: 2,
            gain_hidden: 0.4,
            gain_output: 0.4,
            speed_hidden: 0.15,
            speed_output: 0.15,
            max_epochs: 2000,
            tolerable_rms: 1e-5,
        }
    }
}

impl MlpConfig {
    /// Checks every field against its documented range.
    ///
    /// Gains may be exactly zero — a zero step size freezes the network,
    /// which is a legitimate (if degenerate) setting; the slopes must stay
    /// strictly positive or the sigmoids collapse to a constant.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let err = |msg: String| Err(NetworkError::ConfigError(msg));
        if self.input_dim == 0 || self.hidden_dim == 0 || self.output_dim == 0 {
            return err("layer dimensions must all be at least 1".into());
        }
        for (name, v) in [
            ("gain_hidden", self.gain_hidden),
            ("gain_output", self.gain_output),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return err(format!("{name} {v} must be finite and non-negative"));
            }
        }
        for (name, v) in [
            ("speed_hidden", self.speed_hidden),
            ("speed_output", self.speed_output),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return err(format!("{name} {v} must be positive"));
            }
        }
        if !(self.tolerable_rms > 0.0 && self.tolerable_rms.is_finite()) {
            return err(format!(
                "tolerable_rms {} must be positive",
                self.tolerable_rms
            ));
        }
        Ok(())
    }

    /// Genes needed to describe a network of this shape:
    /// `l·m + m + m·n + n`.
    pub fn gene_count(&self) -> usize {
        self.input_dim * self.hidden_dim
            + self.hidden_dim
            + self.hidden_dim * self.output_dim
            + self.output_dim
    }
}

/// Knobs of the genetic weight search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Population size P.
    pub population_size: usize,
    /// Generation budget G.
    pub generations: usize,
    /// Cut points per crossover.
    pub crossover_points: usize,
    /// Per-gene probability of Gaussian mutation.
    pub mutation_rate: f64,
    /// Standard deviation of a mutation step.
    pub mutation_sigma: f64,
    /// Contestants per tournament-selection draw.
    pub tournament_size: usize,
    /// Best chromosomes copied unchanged into the next generation.
    pub elite_count: usize,
    /// Initial genes are drawn uniformly from [−init_range, init_range].
    pub init_range: f64,
    /// Seed of the single generator that drives every stochastic step.
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 15,
            crossover_points: 5,
            mutation_rate: 0.05,
            mutation_sigma: 0.1,
            tournament_size: 3,
            elite_count: 1,
            init_range: 1.0,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    /// Checks every field against its documented range. The crossover-point
    /// bound depends on the gene count and is checked where it is known.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let err = |msg: String| Err(NetworkError::ConfigError(msg));
        if self.population_size < 2 {
            return err(format!(
                "population_size {} must be at least 2",
                self.population_size
            ));
        }
        // At least one elite keeps the best-fitness history monotone.
        if self.elite_count == 0 || self.elite_count >= self.population_size {
            return err(format!(
                "elite_count {} must be in [1, population_size)",
                self.elite_count
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return err(format!(
                "tournament_size {} must be in [1, population_size]",
                self.tournament_size
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return err(format!(
                "mutation_rate {} outside [0, 1]",
                self.mutation_rate
            ));
        }
        if !(self.mutation_sigma > 0.0 && self.mutation_sigma.is_finite()) {
            return err(format!(
                "mutation_sigma {} must be positive",
                self.mutation_sigma
            ));
        }
        if self.crossover_points == 0 {
            return err("crossover_points must be at least 1".into());
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return err(format!("init_range {} must be positive", self.init_range));
        }
        Ok(())
    }
}

/// A complete weight assignment flattened to a fixed gene order.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<f64>,
    /// RMS fitness, filled in once evaluated; lower is better.
    pub fitness: Option<f64>,
}

/// Training instances: feature vectors paired with target output vectors.
///
/// Classification targets are one-hot (see [`LabeledDataset::one_hot`]);
/// arbitrary targets in [0, 1] are accepted so the fitness machinery can be
/// exercised directly.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl LabeledDataset {
    /// Builds a classification dataset with one-hot targets of width
    /// `num_classes` from `(input, class index)` pairs.
    pub fn one_hot(
        pairs: Vec<(Vec<f64>, usize)>,
        num_classes: usize,
    ) -> Result<Self, NetworkError> {
        let mut inputs = Vec::with_capacity(pairs.len());
        let mut targets = Vec::with_capacity(pairs.len());
        for (input, class) in pairs {
            if class >= num_classes {
                return Err(NetworkError::DimMismatch(format!(
                    "class index {class} outside 0..{num_classes}"
                )));
            }
            let mut target = vec![0.0; num_classes];
            target[class] = 1.0;
            inputs.push(input);
            targets.push(target);
        }
        let dataset = Self { inputs, targets };
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Checks pairing, consistent dimensions and finiteness.
    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.inputs.is_empty() {
            return Err(NetworkError::EmptyInput);
        }
        if self.inputs.len() != self.targets.len() {
            return Err(NetworkError::DimMismatch(format!(
                "{} inputs vs {} targets",
                self.inputs.len(),
                self.targets.len()
            )));
        }
        let in_dim = self.inputs[0].len();
        let out_dim = self.targets[0].len();
        for (i, (x, t)) in self.inputs.iter().zip(&self.targets).enumerate() {
            if x.len() != in_dim || t.len() != out_dim {
                return Err(NetworkError::DimMismatch(format!(
                    "instance {i} has dims {}→{}, expected {in_dim}→{out_dim}",
                    x.len(),
                    t.len()
                )));
            }
            if x.iter().chain(t.iter()).any(|v| !v.is_finite()) {
                return Err(NetworkError::DimMismatch(format!(
                    "instance {i} is not finite"
                )));
            }
        }
        Ok(())
    }

    /// Dimensions as (input, target).
    pub fn dims(&self) -> (usize, usize) {
        (self.inputs[0].len(), self.targets[0].len())
    }
}

/// A single-hidden-layer MLP with per-layer sigmoid slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    pub config: MlpConfig,
    /// m×l matrix, row i feeding hidden node i.
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_biases: Vec<f64>,
    /// n×m matrix, row j feeding output node j.
    pub output_weights: Vec<Vec<f64>>,
    pub output_biases: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    let s = 1.0 / (1.0 + (-z).exp());
    // Doubles saturate to exactly 0 or 1 once |z| ≳ 37; pin such results to
    // the nearest representable values inside (0, 1) so activations honor
    // the open-interval contract for any finite weights.
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl MlpNetwork {
    /// An all-zero network of the configured shape.
    pub fn zeros(config: MlpConfig) -> Self {
        let (l, m, n) = (config.input_dim, config.hidden_dim, config.output_dim);
        Self {
            config,
            hidden_weights: vec![vec![0.0; l]; m],
            hidden_biases: vec![0.0; m],
            output_weights: vec![vec![0.0; m]; n],
            output_biases: vec![0.0; n],
        }
    }

    /// Hidden activations `h = σ(k₁·(W·x + b))` for one input.
    fn hidden_activations(&self, input: &[f64]) -> Vec<f64> {
        let k1 = self.config.speed_hidden;
        self.hidden_weights
            .iter()
            .zip(&self.hidden_biases)
            .map(|(row, b)| {
                let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
                sigmoid(k1 * z)
            })
            .collect()
    }

    /// Output activations `o = σ(k₂·(V·h + c))` for given hidden values.
    fn output_activations(&self, hidden: &[f64]) -> Vec<f64> {
        let k2 = self.config.speed_output;
        self.output_weights
            .iter()
            .zip(&self.output_biases)
            .map(|(row, c)| {
                let z: f64 = row.iter().zip(hidden).map(|(v, h)| v * h).sum::<f64>() + c;
                sigmoid(k2 * z)
            })
            .collect()
    }

    /// Forward pass; every output lies strictly in (0, 1).
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if input.len() != self.config.input_dim {
            return Err(NetworkError::DimMismatch(format!(
                "input has {} components, network expects {}",
                input.len(),
                self.config.input_dim
            )));
        }
        Ok(self.output_activations(&self.hidden_activations(input)))
    }

    /// Forward pass keeping the hidden activations, for training.
    pub(crate) fn forward_trace(&self, input: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hidden = self.hidden_activations(input);
        let output = self.output_activations(&hidden);
        (hidden, output)
    }
}

/// Flattens a network into a chromosome: hidden weights row-major, hidden
/// biases, output weights row-major, output biases. Each weight owns a
/// fixed gene position, so the mapping is a bijection.
pub fn encode_weights(network: &MlpNetwork) -> Chromosome {
    let mut genes = Vec::with_capacity(network.config.gene_count());
    for row in &network.hidden_weights {
        genes.extend_from_slice(row);
    }
    genes.extend_from_slice(&network.hidden_biases);
    for row in &network.output_weights {
        genes.extend_from_slice(row);
    }
    genes.extend_from_slice(&network.output_biases);
    Chromosome {
        genes,
        fitness: None,
    }
}

/// Rebuilds the network a chromosome describes; inverse of
/// [`encode_weights`].
pub fn decode_weights(
    chromosome: &Chromosome,
    config: &MlpConfig,
) -> Result<MlpNetwork, NetworkError> {
    let expected = config.gene_count();
    if chromosome.genes.len() != expected {
        return Err(NetworkError::LengthMismatch(format!(
            "chromosome has {} genes, configuration needs {expected}",
            chromosome.genes.len()
        )));
    }
    let (l, m, n) = (config.input_dim, config.hidden_dim, config.output_dim);
    let genes = &chromosome.genes;
    let mut at = 0;
    let take_rows = |rows: usize, cols: usize, at: &mut usize| -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| {
                let row = genes[*at..*at + cols].to_vec();
                *at += cols;
                row
            })
            .collect()
    };
    let hidden_weights = take_rows(m, l, &mut at);
    let hidden_biases = genes[at..at + m].to_vec();
    at += m;
    let output_weights = take_rows(n, m, &mut at);
    let output_biases = genes[at..at + n].to_vec();
    Ok(MlpNetwork {
        config: config.clone(),
        hidden_weights,
        hidden_biases,
        output_weights,
        output_biases,
    })
}

/// Squared-error of one instance: `Σ_j (T_j − O_j)²`.
pub fn instance_error(target: &[f64], output: &[f64]) -> Result<f64, NetworkError> {
    if target.len() != output.len() {
        return Err(NetworkError::DimMismatch(format!(
            "target dim {} vs output dim {}",
            target.len(),
            output.len()
        )));
    }
    Ok(target
        .iter()
        .zip(output)
        .map(|(t, o)| (t - o) * (t - o))
        .sum())
}

/// Root-mean-square over per-instance errors: `sqrt(Σ Eᵢ / N)`.
pub fn rms_error(instance_errors: &[f64]) -> Result<f64, NetworkError> {
    if instance_errors.is_empty() {
        return Err(NetworkError::EmptyInput);
    }
    let n = instance_errors.len() as f64;
    Ok((instance_errors.iter().sum::<f64>() / n).sqrt())
}
