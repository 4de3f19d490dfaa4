//! File formats, data loading, training drivers and the `cellnet` command
//! line on top of `cellnet-core`.

pub mod cli;
pub mod error;
pub mod format;
pub mod grid;
pub mod idx;
pub mod run;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};
pub use format::{load_model, save_model, Model};
pub use idx::load_mnist;
pub use synth::{synth, SynthKind};
pub use tabular::load_csv;
