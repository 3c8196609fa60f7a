//! Model persistence: a versioned JSON file.
//!
//! The file stores exactly what inference needs — labels, front-end
//! configuration, normalization statistics, network dimensions, sigmoid
//! slopes and the weight arrays (row-major). Training-only settings such as
//! learning gains and epoch budgets are not part of a model. Serialization
//! is deterministic, so identical models produce byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::identify::{IdentifyError, Normalization, SpeakerModel};
use crate::neurogenetic::{MlpConfig, MlpNetwork};

/// Version tag written into every model file; loading any other value is
/// refused rather than guessed at.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    speaker_labels: Vec<String>,
    preprocess_config: crate::preprocess::PreprocessConfig,
    feature_config: crate::features::FeatureConfig,
    normalization: Normalization,
    network: NetworkFile,
}

/// The inference-relevant slice of an [`MlpNetwork`], with weight matrices
/// flattened row-major.
#[derive(Serialize, Deserialize)]
struct NetworkFile {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    speed_hidden: f64,
    speed_output: f64,
    hidden_weights: Vec<f64>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<f64>,
    output_biases: Vec<f64>,
}

fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn unflatten(
    flat: Vec<f64>,
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<Vec<Vec<f64>>, IdentifyError> {
    if flat.len() != rows * cols {
        return Err(IdentifyError::ModelFormat(format!(
            "{what} holds {} weights, expected {rows}×{cols}",
            flat.len()
        )));
    }
    Ok(flat.chunks(cols.max(1)).map(|c| c.to_vec()).collect())
}

impl SpeakerModel {
    /// Serializes the model as pretty-printed JSON.
    pub fn to_json(&self) -> Result<String, IdentifyError> {
        self.validate()?;
        let network = &self.network;
        let file = ModelFile {
            format_version: self.format_version,
            speaker_labels: self.speaker_labels.clone(),
            preprocess_config: self.preprocess_config.clone(),
            feature_config: self.feature_config.clone(),
            normalization: self.normalization.clone(),
            network: NetworkFile {
                input_dim: network.config.input_dim,
                hidden_dim: network.config.hidden_dim,
                output_dim: network.config.output_dim,
                speed_hidden: network.config.speed_hidden,
                speed_output: network.config.speed_output,
                hidden_weights: flatten(&network.hidden_weights),
                hidden_biases: network.hidden_biases.clone(),
                output_weights: flatten(&network.output_weights),
                output_biases: network.output_biases.clone(),
            },
        };
        let mut json = serde_json::to_string_pretty(&file)
            .map_err(|e| IdentifyError::ModelFormat(e.to_string()))?;
        json.push('\n');
        Ok(json)
    }

    /// Writes the model file at `path`.
    pub fn save(&self, path: &Path) -> Result<(), IdentifyError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Parses a model from JSON, refusing unknown format versions.
    pub fn from_json(json: &str) -> Result<Self, IdentifyError> {
        // Check the version before insisting on the rest of the schema, so
        // a file from a future version fails with the right message.
        let value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| IdentifyError::ModelFormat(e.to_string()))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(IdentifyError::ModelFormat(format!(
                    "unsupported format_version {v}; this build reads version {MODEL_FORMAT_VERSION}"
                )));
            }
            None => {
                return Err(IdentifyError::ModelFormat(
                    "missing or non-integer format_version".into(),
                ));
            }
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| IdentifyError::ModelFormat(e.to_string()))?;

        let n = file.network;
        // Training-only settings are not stored; defaults fill them in. They
        // never influence inference.
        let config = MlpConfig {
            input_dim: n.input_dim,
            hidden_dim: n.hidden_dim,
            output_dim: n.output_dim,
            speed_hidden: n.speed_hidden,
            speed_output: n.speed_output,
            ..MlpConfig::default()
        };
        config
            .validate()
            .map_err(|e| IdentifyError::ModelFormat(e.to_string()))?;
        if n.hidden_biases.len() != n.hidden_dim || n.output_biases.len() != n.output_dim {
            return Err(IdentifyError::ModelFormat(format!(
                "bias lengths {}/{} do not match dimensions {}/{}",
                n.hidden_biases.len(),
                n.output_biases.len(),
                n.hidden_dim,
                n.output_dim
            )));
        }
        let network = MlpNetwork {
            hidden_weights: unflatten(
                n.hidden_weights,
                n.hidden_dim,
                n.input_dim,
                "hidden_weights",
            )?,
            hidden_biases: n.hidden_biases,
            output_weights: unflatten(
                n.output_weights,
                n.output_dim,
                n.hidden_dim,
                "output_weights",
            )?,
            output_biases: n.output_biases,
            config,
        };
        let model = SpeakerModel {
            network,
            speaker_labels: file.speaker_labels,
            feature_config: file.feature_config,
            preprocess_config: file.preprocess_config,
            normalization: file.normalization,
            format_version: MODEL_FORMAT_VERSION,
        };
        model.validate()?;
        model.preprocess_config.validate()?;
        model.feature_config.validate()?;
        Ok(model)
    }

    /// Reads a model file written by [`SpeakerModel::save`].
    pub fn load(path: &Path) -> Result<Self, IdentifyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
