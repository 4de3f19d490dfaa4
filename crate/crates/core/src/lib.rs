//! Cellular networks: scattered-data regression and binary classification by
//! blending one linear function per Voronoi cell.
//!
//! A network holds `k` seed vertices in `d` dimensions. Each seed owns an
//! affine function and a blending parameter. At a query point every cell gets
//! a relative weight of 1 on and inside its Voronoi cell, decaying linearly
//! outside it along the ray from the seed; the normalized weights blend the
//! affine functions into a continuous, piecewise-smooth approximation. The
//! Voronoi diagram itself is never built: the boundary crossing along the ray
//! has a closed form against every bisecting hyperplane.
//!
//! # Modules
//!
//! - [`model`]: parameters, datasets, hyperparameters
//! - [`geometry`]: ray/bisector crossings and relative weights
//! - [`evaluation`]: blended value and class probability
//! - [`objective`]: losses, regularizers and analytic gradients
//! - [`init`]: k-means seeding
//! - [`optim`]: the Adam update
//! - [`trainer`]: minibatch training and one-vs-rest classification
//! - [`gradcheck`]: finite-difference validation of the analytic gradient
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. With `std`, minibatch gradients and k-means assignment run on
//! rayon.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod gradcheck;
pub mod init;
mod math;
pub mod model;
pub mod objective;
pub mod optim;
mod par;
pub mod trainer;

pub use error::{Error, Result};
pub use evaluation::{evaluate, linear_value, probability, EvalBreakdown, Evaluator};
pub use geometry::{boundary_crossing, relative_weight, BoundaryCrossing, PairwiseDistances};
pub use init::{initialize_network, kmeans, KMeansResult, SeedingPlan};
pub use model::{parameter_count, CellularNetwork, Dataset, HyperParams, Mode, ALPHA_FLOOR};
pub use objective::{
    gradient, log_likelihood, regression_loss, regularized_objective, regularizers,
    GradientBuffer, Reduction,
};
pub use optim::{AdamConfig, AdamState};
pub use trainer::{
    evaluate_accuracy, predict_ovr, train, train_from, train_ovr, EpochStats, OvrModel,
    OvrSeeding, TrainReport,
};
