//! Model checkpoints as self-describing JSON.

use std::path::Path;

use factnli_core::encoding::{VocabError, Vocabulary};
use factnli_core::model::{Model, ModelConfig, ModelError, Params, Variant};
use factnli_core::train::TrainConfig;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "factnli-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("not a factnli checkpoint (format {0:?})")]
    WrongFormat(String),
    #[error("unsupported checkpoint version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("tensor {name}: {message}")]
    Tensor { name: String, message: String },
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub format_version: u32,
    pub variant: Variant,
    pub model_config: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_config: Option<TrainConfig>,
    pub vocab: Vec<String>,
    pub tensors: Vec<TensorRecord>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    format_version: u32,
}

impl Checkpoint {
    pub fn from_model(model: &Model, train_config: Option<TrainConfig>) -> Self {
        let params = model.params();
        let tensors = params
            .tensor_names()
            .into_iter()
            .zip(params.tensor_shapes())
            .zip(params.tensors())
            .map(|((name, shape), data)| TensorRecord {
                name: name.to_string(),
                shape,
                data: data.to_vec(),
            })
            .collect();
        Checkpoint {
            format: FORMAT.to_string(),
            format_version: FORMAT_VERSION,
            variant: model.variant(),
            model_config: *model.config(),
            train_config,
            vocab: model.vocab().tokens().to_vec(),
            tensors,
        }
    }

    pub fn to_model(&self) -> Result<Model, CheckpointError> {
        let vocab = Vocabulary::from_tokens(self.vocab.clone())?;
        let mut params = Params::zeros(self.variant, vocab.len(), &self.model_config);
        let names = params.tensor_names();
        let shapes = params.tensor_shapes();
        if self.tensors.len() != names.len() {
            return Err(CheckpointError::Corrupt(format!(
                "expected {} tensors for a {} model, found {}",
                names.len(),
                self.variant,
                self.tensors.len()
            )));
        }
        for (((slot, name), shape), record) in params
            .tensors_mut()
            .into_iter()
            .zip(&names)
            .zip(&shapes)
            .zip(&self.tensors)
        {
            let fail = |message: String| CheckpointError::Tensor {
                name: record.name.clone(),
                message,
            };
            if record.name != *name {
                return Err(fail(format!("expected tensor {name}")));
            }
            if record.shape != *shape {
                return Err(fail(format!(
                    "shape {:?}, expected {:?}",
                    record.shape, shape
                )));
            }
            if record.data.len() != slot.len() {
                return Err(fail(format!(
                    "{} values, expected {}",
                    record.data.len(),
                    slot.len()
                )));
            }
            slot.copy_from_slice(&record.data);
        }
        Ok(Model::new(self.variant, self.model_config, vocab, params)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let header: Header =
            serde_json::from_str(text).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        if header.format != FORMAT {
            return Err(CheckpointError::WrongFormat(header.format));
        }
        if header.format_version != FORMAT_VERSION {
            return Err(CheckpointError::UnsupportedVersion {
                found: header.format_version,
            });
        }
        serde_json::from_str(text).map_err(|e| CheckpointError::Corrupt(e.to_string()))
    }
}

pub fn save_model(
    path: &Path,
    model: &Model,
    train_config: Option<TrainConfig>,
) -> crate::Result<()> {
    crate::io::write_text(path, &Checkpoint::from_model(model, train_config).to_json())
}

pub fn load_checkpoint(path: &Path) -> crate::Result<Checkpoint> {
    let text = crate::io::read_text(path)?;
    Checkpoint::from_json(&text).map_err(|source| crate::Error::Checkpoint {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> crate::Result<Model> {
    load_checkpoint(path)?
        .to_model()
        .map_err(|source| crate::Error::Checkpoint {
            path: path.to_path_buf(),
            source,
        })
}
