use alloc::boxed::Box;
use alloc::string::String;

use crate::model::CellularNetwork;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model field `{field}`: {reason}")]
    InvalidModel { field: &'static str, reason: String },

    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperParam { name: &'static str, reason: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("target not in {{0,1}}: row {row} has target {value}")]
    NonBinaryTarget { row: usize, value: f64 },

    #[error("model is not a classifier")]
    NotClassifier,

    #[error("model is not a regression model")]
    NotRegression,

    #[error("degenerate ray: point coincides with seed {cell}")]
    DegenerateRay { cell: usize },

    #[error("too few distinct points: need {needed}, found {found}")]
    TooFewDistinctPoints { needed: usize, found: usize },

    #[error("seeding plan references class {label}, which has no points")]
    AbsentClass { label: u32 },

    #[error("non-finite gradient in {block}[{index}]")]
    NonFiniteGradient { block: &'static str, index: usize },

    #[error("objective diverged at epoch {epoch}")]
    Diverged {
        epoch: usize,
        last_finite: Box<CellularNetwork>,
    },
}

impl Error {
    pub(crate) fn model(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidModel {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn hyper(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidHyperParam {
            name,
            reason: reason.into(),
        }
    }
}
