use std::path::PathBuf;

use factnli_core::dataset::{GenerateError, SplitError};
use factnli_core::encoding::VocabError;
use factnli_core::kg::KgError;
use factnli_core::model::ModelError;
use factnli_core::prompt::TemplateError;
use factnli_core::text::StopwordError;
use factnli_core::train::TrainError;

use crate::checkpoint::CheckpointError;
use crate::remote::RemoteError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Kg { path: PathBuf, source: KgError },
    #[error("{}: {source}", path.display())]
    Stopwords {
        path: PathBuf,
        source: StopwordError,
    },
    #[error("{}: line {line}: {message}", path.display())]
    Dataset {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Checkpoint {
        path: PathBuf,
        source: CheckpointError,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

impl Error {
    /// 1 for invalid input (malformed files, bad config), 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Kg { .. }
            | Error::Stopwords { .. }
            | Error::Dataset { .. }
            | Error::Checkpoint { .. }
            | Error::Config(_)
            | Error::Template(_)
            | Error::Split(_)
            | Error::Generate(_)
            | Error::Vocab(_) => 1,
            Error::Train(TrainError::InvalidConfig(_) | TrainError::EmptyDataset(_)) => 1,
            Error::Remote(RemoteError::MissingApiKey(_)) => 1,
            Error::Io { .. } | Error::Model(_) | Error::Train(_) | Error::Remote(_) => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
