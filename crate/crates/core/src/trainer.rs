//! Minibatch training and one-vs-rest classification.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evaluation::{Evaluator, PointState};
use crate::init::{initialize_network, seed_centers, SeedingPlan};
use crate::model::{CellularNetwork, Dataset, HyperParams, Mode, ALPHA_FLOOR};
use crate::objective::{self, Reduction};
use crate::optim::AdamState;
use crate::par;

/// RNG stream used for minibatch shuffling; k-means uses streams `0..`.
const SHUFFLE_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Full-training-set objective after the epoch, in its natural
    /// orientation; NaN when tracking is disabled.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub steps: u64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub reduction: Reduction,
    /// Evaluate the full objective after every epoch.
    pub track_objective: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            reduction: Reduction::Unordered,
            track_objective: true,
        }
    }
}

impl TrainOptions {
    pub fn deterministic() -> Self {
        TrainOptions {
            reduction: Reduction::Ordered,
            ..Self::default()
        }
    }
}

/// Seeds a network for `plan` and trains it.
pub fn train(
    data: &Dataset,
    mode: Mode,
    hp: &HyperParams,
    plan: &SeedingPlan,
    opts: &TrainOptions,
) -> Result<(CellularNetwork, TrainReport)> {
    if mode == Mode::Binary {
        data.check_binary()?;
    }
    let net = initialize_network(data, hp, plan, mode)?;
    train_from(net, data, hp, opts, &mut |_| {})
}

/// Trains an already seeded network.
///
/// Every epoch shuffles the training set and walks it in minibatches of
/// `ceil(batch_fraction * n)` points. Each minibatch gives one gradient of
/// the summed data term plus the penalty scaled by the minibatch's share of
/// the data, followed by one Adam step and the blending-parameter floor.
pub fn train_from(
    mut net: CellularNetwork,
    data: &Dataset,
    hp: &HyperParams,
    opts: &TrainOptions,
    observer: &mut dyn FnMut(&EpochStats),
) -> Result<(CellularNetwork, TrainReport)> {
    hp.validate()?;
    if data.dimensions() != net.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: net.dimensions(),
            found: data.dimensions(),
        });
    }
    if net.mode() == Mode::Binary {
        data.check_binary()?;
    }
    let n = data.len();
    let batch = hp.batch_len(n);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.rng_seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut adam = AdamState::new(&net);
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport {
        epochs: Vec::with_capacity(hp.epochs),
        steps: 0,
        rng_seed: hp.rng_seed,
    };
    for epoch in 1..=hp.epochs {
        let last_finite = net.clone();
        let diverged = || Error::Diverged {
            epoch,
            last_finite: alloc::boxed::Box::new(last_finite.clone()),
        };
        order.shuffle(&mut rng);
        for rows in order.chunks(batch) {
            let scale = rows.len() as f64 / n as f64;
            let grad = objective::gradient_rows(&net, data, rows, hp, scale, opts.reduction)?;
            if grad.first_non_finite().is_some() {
                return Err(diverged());
            }
            adam.step(&mut net, &grad, &hp.optimizer)?;
            net.clamp_alphas(ALPHA_FLOOR);
            report.steps += 1;
        }
        if net.validate().is_err() {
            return Err(diverged());
        }
        let objective = if opts.track_objective {
            let v = objective::regularized_objective(&net, data, hp)?;
            if !v.is_finite() {
                return Err(diverged());
            }
            v
        } else {
            f64::NAN
        };
        let stats = EpochStats { epoch, objective };
        observer(&stats);
        report.epochs.push(stats);
    }
    Ok((net, report))
}

/// Ten (or however many classes) binary networks, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrModel {
    classes: Vec<u32>,
    networks: Vec<CellularNetwork>,
}

impl OvrModel {
    pub fn new(classes: Vec<u32>, networks: Vec<CellularNetwork>) -> Result<Self> {
        if classes.is_empty() || classes.len() != networks.len() {
            return Err(Error::model("classes", "need one network per class"));
        }
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::model("classes", "labels must be strictly increasing"));
        }
        let d = networks[0].dimensions();
        for net in &networks {
            if net.mode() != Mode::Binary {
                return Err(Error::NotClassifier);
            }
            if net.dimensions() != d {
                return Err(Error::model("dimensions", "networks disagree on dimensions"));
            }
        }
        Ok(OvrModel { classes, networks })
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn networks(&self) -> &[CellularNetwork] {
        &self.networks
    }

    pub fn dimensions(&self) -> usize {
        self.networks[0].dimensions()
    }

    pub fn parameter_count(&self) -> usize {
        self.networks.iter().map(|n| n.parameter_count()).sum()
    }

    fn evaluators(&self) -> Vec<Evaluator<'_>> {
        self.networks.iter().map(Evaluator::new).collect()
    }
}

/// Seeding for one-vs-rest training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OvrSeeding {
    /// One k-means over all points, shared by every classifier.
    Uniform,
    /// Per classifier: `target` seeds from its own class and `other` seeds
    /// from each remaining class.
    Stratified { target: usize, other: usize },
}

/// Trains one binary network per class in `classes`. Dataset targets are the
/// class labels. `observer` sees `(class, epoch stats)`.
pub fn train_ovr(
    data: &Dataset,
    classes: &[u32],
    hp: &HyperParams,
    seeding: OvrSeeding,
    opts: &TrainOptions,
    observer: &mut dyn FnMut(u32, &EpochStats),
) -> Result<(OvrModel, Vec<TrainReport>)> {
    let labels = data.labels()?;
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&l) = labels.iter().find(|l| sorted.binary_search(l).is_err()) {
        return Err(Error::InvalidDataset(alloc::format!("label {l} is not one of the classes")));
    }
    let shared = match seeding {
        OvrSeeding::Uniform => Some(seed_centers(data, hp, &SeedingPlan::Uniform)?),
        OvrSeeding::Stratified { .. } => None,
    };
    let mut networks = Vec::with_capacity(sorted.len());
    let mut reports = Vec::with_capacity(sorted.len());
    for &class in &sorted {
        let centers = match (&shared, seeding) {
            (Some(c), _) => c.clone(),
            (None, OvrSeeding::Stratified { target, other }) => {
                let plan = SeedingPlan::one_vs_rest(class, &sorted, target, other);
                seed_centers(data, hp, &plan)?
            }
            (None, OvrSeeding::Uniform) => unreachable!(),
        };
        let net = CellularNetwork::from_centers(Mode::Binary, data.dimensions(), centers, hp.alpha_init)?;
        let binary = data.with_targets(
            labels
                .iter()
                .map(|&l| if l == class { 1.0 } else { 0.0 })
                .collect(),
        )?;
        let (net, report) = train_from(net, &binary, hp, opts, &mut |s| observer(class, s))?;
        networks.push(net);
        reports.push(report);
    }
    Ok((OvrModel::new(sorted, networks)?, reports))
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Predicted label and per-class probabilities. The label is the argmax of
/// the blended values, which is the argmax of the probabilities without the
/// ties that saturation would introduce; remaining ties go to the lowest
/// label.
pub fn predict_ovr(model: &OvrModel, p: &[f64]) -> Result<(u32, Vec<f64>)> {
    if p.len() != model.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: model.dimensions(),
            found: p.len(),
        });
    }
    let raw: Vec<f64> = model.evaluators().iter().map(|ev| ev.value(p)).collect();
    let probs = raw.iter().map(|&v| crate::math::sigmoid(v)).collect();
    Ok((model.classes[argmax_lowest(&raw)], probs))
}

/// Predicted label for every row.
pub fn predict_ovr_batch(model: &OvrModel, data: &Dataset) -> Result<Vec<u32>> {
    if data.dimensions() != model.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: model.dimensions(),
            found: data.dimensions(),
        });
    }
    let evs = model.evaluators();
    Ok(par::map_chunks(data.features(), data.dimensions(), |p, st: &mut PointState| {
        let raw: Vec<f64> = evs
            .iter()
            .map(|ev| {
                ev.forward(p, st);
                st.value
            })
            .collect();
        model.classes[argmax_lowest(&raw)]
    }))
}

/// Share of rows whose predicted label equals the target label.
pub fn evaluate_accuracy(model: &OvrModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let labels = data.labels()?;
    let predicted = predict_ovr_batch(model, data)?;
    let hits = predicted.iter().zip(&labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / data.len() as f64)
}
