//! Training and evaluation drivers shared by the command line and tests.
//! Progress goes to stderr as `epoch=<i> objective=<v> elapsed_s=<t>`.

use std::io::Write;
use std::time::{Duration, Instant};

use cellnet_core::objective::{self, Reduction};
use cellnet_core::trainer::{train_from, TrainOptions};
use cellnet_core::{
    evaluate_accuracy, initialize_network, train_ovr, Dataset, EpochStats,
    Evaluator, HyperParams, Mode, OvrSeeding, SeedingPlan,
};

use crate::error::{Error, Result};
use crate::format::Model;

/// Where seeds come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    /// k-means over all points with `HyperParams::cells` seeds.
    Uniform,
    /// `target` seeds from the positive class and `other` from each other
    /// class.
    Stratified { target: usize, other: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub deterministic: bool,
    /// Print per-epoch lines to stderr.
    pub progress: bool,
}

impl RunOptions {
    pub fn quiet(deterministic: bool) -> Self {
        RunOptions {
            deterministic,
            progress: false,
        }
    }

    fn train_options(&self) -> TrainOptions {
        TrainOptions {
            reduction: if self.deterministic {
                Reduction::Ordered
            } else {
                Reduction::Unordered
            },
            track_objective: self.progress,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: Model,
    /// Final full-data objective in its natural orientation, summed over
    /// classifiers for a bundle.
    pub objective: f64,
    pub elapsed: Duration,
}

fn progress_line(start: Instant, s: &EpochStats) {
    let _ = writeln!(
        std::io::stderr(),
        "epoch={} objective={} elapsed_s={:.3}",
        s.epoch,
        s.objective,
        start.elapsed().as_secs_f64()
    );
}

/// Distinct labels in ascending order.
pub fn classes(data: &Dataset) -> Result<Vec<u32>> {
    let mut labels = data.labels()?;
    labels.sort_unstable();
    labels.dedup();
    Ok(labels)
}

/// Maps labels to 1 for `positive` and 0 otherwise.
pub fn binarize(data: &Dataset, positive: u32) -> Result<Dataset> {
    let targets = data
        .labels()?
        .into_iter()
        .map(|l| f64::from(u8::from(l == positive)))
        .collect();
    Ok(data.with_targets(targets)?)
}

/// Trains one network. Stratified seeding needs binary targets.
pub fn train_network(
    data: &Dataset,
    mode: Mode,
    hp: &HyperParams,
    seeding: Seeding,
    opts: RunOptions,
) -> Result<Trained> {
    let start = Instant::now();
    if mode == Mode::Binary {
        data.check_binary()?;
    }
    let plan = match seeding {
        Seeding::Uniform => SeedingPlan::Uniform,
        Seeding::Stratified { target, other } => {
            if mode != Mode::Binary {
                return Err(Error::Usage("stratified seeding needs binary mode".into()));
            }
            SeedingPlan::one_vs_rest(1, &classes(data)?, target, other)
        }
    };
    let net = initialize_network(data, hp, &plan, mode)?;
    let (net, _) = train_from(net, data, hp, &opts.train_options(), &mut |s| {
        if opts.progress {
            progress_line(start, s)
        }
    })?;
    let objective = objective::regularized_objective(&net, data, hp)?;
    Ok(Trained {
        model: Model::Single(net),
        objective,
        elapsed: start.elapsed(),
    })
}

/// One binary network per distinct label.
pub fn train_bundle(data: &Dataset, hp: &HyperParams, seeding: Seeding, opts: RunOptions) -> Result<Trained> {
    let start = Instant::now();
    let classes = classes(data)?;
    let ovr_seeding = match seeding {
        Seeding::Uniform => OvrSeeding::Uniform,
        Seeding::Stratified { target, other } => OvrSeeding::Stratified { target, other },
    };
    let mut current = None;
    let (model, _) = train_ovr(data, &classes, hp, ovr_seeding, &opts.train_options(), &mut |c, s| {
        if opts.progress {
            if current != Some(c) {
                current = Some(c);
                let _ = writeln!(std::io::stderr(), "class={c}");
            }
            progress_line(start, s);
        }
    })?;
    let mut objective = 0.0;
    for (&c, net) in model.classes().iter().zip(model.networks()) {
        objective += objective::regularized_objective(net, &binarize(data, c)?, hp)?;
    }
    Ok(Trained {
        model: Model::Ovr(model),
        objective,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Accuracy { value: f64, n: usize },
    Mse(f64),
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Accuracy { value, n } => write!(f, "accuracy={value} n={n}"),
            Metric::Mse(v) => write!(f, "mse={v}"),
        }
    }
}

fn check_dimensions(model: &Model, data: &Dataset) -> Result<()> {
    if model.dimensions() != data.dimensions() {
        return Err(Error::format(
            "dimensions",
            format!(
                "model `dimensions` is {} but the data has {} features",
                model.dimensions(),
                data.dimensions()
            ),
        ));
    }
    Ok(())
}

/// Accuracy for classifiers (a single binary network predicts 1 where its
/// value is positive), mean squared error for regression.
pub fn evaluate(model: &Model, data: &Dataset) -> Result<Metric> {
    check_dimensions(model, data)?;
    let n = data.len();
    match model {
        Model::Ovr(m) => Ok(Metric::Accuracy {
            value: evaluate_accuracy(m, data)?,
            n,
        }),
        Model::Single(net) => match net.mode() {
            Mode::Regression => Ok(Metric::Mse(objective::regression_loss(net, data)? / n as f64)),
            Mode::Binary => {
                data.check_binary()?;
                let values = Evaluator::new(net).values(data.features());
                let hits = values
                    .iter()
                    .zip(data.targets())
                    .filter(|(v, t)| (**v > 0.0) == (**t == 1.0))
                    .count();
                Ok(Metric::Accuracy {
                    value: hits as f64 / n as f64,
                    n,
                })
            }
        },
    }
}

/// Per-row predictions as CSV text: `value` for regression, `probability`
/// for a binary network, `label,p_<class>...` for a bundle.
pub fn predict_csv(model: &Model, data: &Dataset) -> Result<String> {
    check_dimensions(model, data)?;
    let mut out = String::new();
    match model {
        Model::Single(net) => {
            let ev = Evaluator::new(net);
            out.push_str(if net.mode() == Mode::Binary { "probability\n" } else { "value\n" });
            for p in data.points() {
                let v = match net.mode() {
                    Mode::Binary => ev.probability(p)?,
                    Mode::Regression => ev.value(p),
                };
                out.push_str(&format!("{v}\n"));
            }
        }
        Model::Ovr(m) => {
            out.push_str("label");
            for c in m.classes() {
                out.push_str(&format!(",p_{c}"));
            }
            out.push('\n');
            for p in data.points() {
                let (label, probs) = cellnet_core::predict_ovr(m, p)?;
                out.push_str(&label.to_string());
                for q in probs {
                    out.push_str(&format!(",{q}"));
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Usage("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
