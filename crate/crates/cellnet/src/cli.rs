//! The `cellnet` command line. Metrics go to stdout as single
//! `key=value` lines, logs to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use cellnet_core::gradcheck::{run_trials, BlockErrors};
use cellnet_core::objective;
use cellnet_core::{AdamConfig, CellularNetwork, Dataset, GradientBuffer, HyperParams, Mode};

use crate::error::{Error, Result};
use crate::format::{load_model, save_model};
use crate::grid::{run_grid, GridSpec};
use crate::run::{self, binarize, with_threads, RunOptions, Seeding};
use crate::synth::{synth, SynthKind};
use crate::tabular::{load_csv, write_csv};

/// Largest relative gradient error `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "cellnet", version, about = "Cellular networks: train, evaluate, sweep")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a single network.
    Train(TrainArgs),
    /// Train one binary network per class.
    TrainOvr(TrainOvrArgs),
    /// Print `accuracy=<v> n=<count>` or `mse=<v>`.
    Evaluate(ModelDataArgs),
    /// Write per-row predictions as CSV.
    Predict(PredictArgs),
    /// Sweep both penalties and write a CSV table of test accuracies.
    Grid(GridArgs),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Generate a synthetic dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// IDX image file (optionally gzipped).
    #[arg(long, conflicts_with = "csv")]
    pub data: Option<PathBuf>,
    /// IDX label file paired with --data.
    #[arg(long, requires = "data")]
    pub labels: Option<PathBuf>,
    /// CSV file with a header row.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Target column of --csv.
    #[arg(long, default_value = "y")]
    pub label_col: String,
}

impl DataArgs {
    pub fn load(&self) -> Result<Dataset> {
        load_data(self.data.as_deref(), self.labels.as_deref(), self.csv.as_deref(), &self.label_col, "")
    }
}

fn load_data(
    images: Option<&Path>,
    labels: Option<&Path>,
    csv: Option<&Path>,
    label_col: &str,
    prefix: &str,
) -> Result<Dataset> {
    match (images, labels, csv) {
        (Some(i), Some(l), None) => crate::idx::load_mnist(i, l),
        (Some(_), None, None) => Err(Error::Usage(format!("--{prefix}data needs --{prefix}labels"))),
        (None, None, Some(c)) => load_csv(c, label_col),
        (None, _, None) => Err(Error::Usage(format!(
            "give --{prefix}data with --{prefix}labels, or --{prefix}csv"
        ))),
        _ => Err(Error::Usage(format!("--{prefix}data and --{prefix}csv conflict"))),
    }
}

fn parse_stratified(s: &str) -> std::result::Result<(usize, usize), String> {
    let (t, o) = s.split_once(',').ok_or("expected T,O")?;
    let t = t.trim().parse().map_err(|e| format!("T: {e}"))?;
    let o = o.trim().parse().map_err(|e| format!("O: {e}"))?;
    Ok((t, o))
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    /// Number of cells, seeded by k-means over all points.
    #[arg(long, conflicts_with = "stratified")]
    pub cells: Option<usize>,
    /// T seeds from the target class and O from every other class.
    #[arg(long, value_name = "T,O", value_parser = parse_stratified)]
    pub stratified: Option<(usize, usize)>,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub batch_fraction: f64,
    #[arg(long, default_value_t = 0.3)]
    pub alpha_init: f64,
    /// Adam step size.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub adam_beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub adam_beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub adam_epsilon: f64,
    #[arg(long, default_value_t = 100)]
    pub kmeans_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fixed-order reductions, so results depend only on the seed.
    #[arg(long)]
    pub deterministic: bool,
    /// Suppress per-epoch progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

impl HyperArgs {
    fn hyper(&self, lambda_alpha: f64, lambda_beta: f64) -> HyperParams {
        let d = HyperParams::default();
        HyperParams {
            cells: self.cells.unwrap_or(d.cells),
            lambda_alpha,
            lambda_beta,
            epochs: self.epochs,
            batch_fraction: self.batch_fraction,
            alpha_init: self.alpha_init,
            rng_seed: self.seed,
            kmeans_max_iters: self.kmeans_iters,
            optimizer: AdamConfig {
                learning_rate: self.lr,
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                epsilon: self.adam_epsilon,
            },
        }
    }

    fn seeding(&self) -> Seeding {
        match self.stratified {
            Some((target, other)) => Seeding::Stratified { target, other },
            None => Seeding::Uniform,
        }
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            deterministic: self.deterministic,
            progress: !self.quiet,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PenaltyArgs {
    #[arg(long, default_value_t = 0.0)]
    pub lambda_alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_beta: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Regression,
    Binary,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long, value_enum, default_value = "regression")]
    pub mode: ModeArg,
    /// Binary mode: label treated as 1, all others as 0.
    #[arg(long)]
    pub positive_class: Option<u32>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainOvrArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelDataArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// For a single binary network on multi-class labels.
    #[arg(long)]
    pub positive_class: Option<u32>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub inner: ModelDataArgs,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, conflicts_with = "test_csv")]
    pub test_data: Option<PathBuf>,
    #[arg(long, requires = "test_data")]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_csv: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Comma-separated λ_α values, one table row each.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub lambda_alphas: Vec<f64>,
    /// Comma-separated λ_β values, one table column each.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub lambda_betas: Vec<f64>,
    /// CSV table; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Random configurations per mode.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Linear,
    PiecewiseLinear,
    TwoGaussians,
    XorBlobs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Regions for piecewise-linear.
    #[arg(long, default_value_t = 3)]
    pub regions: usize,
    /// Regression noise, or blob spread for the classification kinds.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn report(trained: &run::Trained, out: &Path) -> Result<()> {
    save_model(out, &trained.model)?;
    println!(
        "objective={} elapsed_s={:.3} parameters={}",
        trained.objective,
        trained.elapsed.as_secs_f64(),
        trained.model.parameter_count()
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let hp = a.hyper.hyper(a.penalty.lambda_alpha, a.penalty.lambda_beta);
    let mode = match (a.mode, a.positive_class) {
        (ModeArg::Regression, Some(_)) => {
            return Err(Error::Usage("--positive-class needs --mode binary".into()))
        }
        (ModeArg::Regression, None) => Mode::Regression,
        (ModeArg::Binary, _) => Mode::Binary,
    };
    let mut data = a.data.load()?;
    if let Some(c) = a.positive_class {
        data = binarize(&data, c)?;
    }
    let trained = with_threads(a.hyper.threads, || {
        run::train_network(&data, mode, &hp, a.hyper.seeding(), a.hyper.options())
    })??;
    report(&trained, &a.out)
}

fn cmd_train_ovr(a: &TrainOvrArgs) -> Result<()> {
    let hp = a.hyper.hyper(a.penalty.lambda_alpha, a.penalty.lambda_beta);
    let data = a.data.load()?;
    let trained = with_threads(a.hyper.threads, || {
        run::train_bundle(&data, &hp, a.hyper.seeding(), a.hyper.options())
    })??;
    report(&trained, &a.out)
}

fn model_and_data(a: &ModelDataArgs) -> Result<(crate::Model, Dataset)> {
    let model = load_model(&a.model)?;
    let mut data = a.data.load()?;
    if let Some(c) = a.positive_class {
        data = binarize(&data, c)?;
    }
    Ok((model, data))
}

fn cmd_evaluate(a: &ModelDataArgs) -> Result<()> {
    let (model, data) = model_and_data(a)?;
    let metric = with_threads(a.threads, || run::evaluate(&model, &data))??;
    println!("{metric}");
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let (model, data) = model_and_data(&a.inner)?;
    let text = with_threads(a.inner.threads, || run::predict_csv(&model, &data))??;
    emit(a.out.as_deref(), &text)
}

fn cmd_grid(a: &GridArgs) -> Result<()> {
    let train = a.data.load()?;
    let test = load_data(
        a.test_data.as_deref(),
        a.test_labels.as_deref(),
        a.test_csv.as_deref(),
        &a.data.label_col,
        "test-",
    )?;
    let spec = GridSpec {
        lambda_alphas: a.lambda_alphas.clone(),
        lambda_betas: a.lambda_betas.clone(),
        base: a.hyper.hyper(0.0, 0.0),
        seeding: a.hyper.seeding(),
        deterministic: a.hyper.deterministic,
    };
    let table = with_threads(a.hyper.threads, || run_grid(&spec, &train, &test, !a.hyper.quiet))??;
    emit(a.out.as_deref(), &table.to_csv())
}

/// Runs the finite-difference comparison with `grad` as the analytic
/// gradient. Fails with a numerical error above [`GRADCHECK_TOLERANCE`].
pub fn gradcheck_with<G>(trials: usize, seed: u64, grad: G) -> Result<BlockErrors>
where
    G: FnMut(&CellularNetwork, &Dataset, &HyperParams) -> cellnet_core::Result<GradientBuffer>,
{
    let errors = run_trials(trials, seed, grad)?;
    if errors.max() >= GRADCHECK_TOLERANCE {
        return Err(Error::Numerical(format!(
            "gradient check failed: betas={} centers={} alphas={} (tolerance {GRADCHECK_TOLERANCE})",
            errors.betas, errors.centers, errors.alphas
        )));
    }
    Ok(errors)
}

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<()> {
    let e = gradcheck_with(a.trials, a.seed, objective::gradient)?;
    println!(
        "betas={} centers={} alphas={} checked={} skipped={}",
        e.betas, e.centers, e.alphas, e.checked, e.skipped
    );
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    if a.n == 0 || a.d == 0 {
        return Err(Error::Usage("--n and --d must be positive".into()));
    }
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(Error::Usage("--noise must be finite and >= 0".into()));
    }
    let kind = match a.kind {
        KindArg::Linear => SynthKind::Linear,
        KindArg::PiecewiseLinear => SynthKind::PiecewiseLinear { regions: a.regions },
        KindArg::TwoGaussians => SynthKind::TwoGaussians,
        KindArg::XorBlobs => SynthKind::XorBlobs,
    };
    let data = synth(kind, a.n, a.d, a.noise, a.seed);
    let mut buf = Vec::new();
    write_csv(&mut buf, &data, "y").map_err(|e| Error::Usage(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::TrainOvr(a) => cmd_train_ovr(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parses the process arguments, runs the command and returns the exit
/// status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
