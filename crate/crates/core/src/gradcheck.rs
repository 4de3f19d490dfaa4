//! Central finite-difference check of the analytic gradient.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::evaluation::{Evaluator, PointState};
use crate::geometry::Piece;
use crate::model::{CellularNetwork, Dataset, HyperParams, Mode};
use crate::objective::{self, GradientBuffer};

/// Relative error floor: partials smaller than this are compared in
/// absolute terms.
pub const ABS_FLOOR: f64 = 1e-4;

/// Worst relative error per parameter block, plus how many partials were
/// skipped because a perturbation changed the piece.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockErrors {
    pub betas: f64,
    pub centers: f64,
    pub alphas: f64,
    pub checked: usize,
    pub skipped: usize,
}

impl BlockErrors {
    pub fn max(&self) -> f64 {
        self.betas.max(self.centers).max(self.alphas)
    }

    pub fn merge(&mut self, other: &BlockErrors) {
        self.betas = self.betas.max(other.betas);
        self.centers = self.centers.max(other.centers);
        self.alphas = self.alphas.max(other.alphas);
        self.checked += other.checked;
        self.skipped += other.skipped;
    }
}

/// `|a - n| / max(|a|, |n|, ABS_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(ABS_FLOOR)
}

/// Perturbation for a parameter of value `theta`.
pub fn step_for(theta: f64) -> f64 {
    1e-5 * theta.abs().max(1.0)
}

/// Piece and active neighbor of every `(point, cell)` pair.
pub fn piece_signature(net: &CellularNetwork, batch: &Dataset) -> Vec<Piece> {
    let ev = Evaluator::new(net);
    let mut st = PointState::default();
    let mut out = Vec::with_capacity(batch.len() * net.cells());
    for p in batch.points() {
        ev.forward(p, &mut st);
        out.extend(st.pieces.iter().map(|piece| match *piece {
            // ratio changes continuously; only the discrete part matters
            Piece::Blend { neighbor, .. } => Piece::Blend { neighbor, ratio: 0.0 },
            other => other,
        }));
    }
    out
}

/// How close the forward pass of any `(point, cell)` pair sits to a piece
/// boundary: the smallest of the interior margin, the clamp margin and the
/// gap between the two best neighbor crossings, all in ratio units.
pub fn piece_margin(net: &CellularNetwork, p: &[f64]) -> f64 {
    let ev = Evaluator::new(net);
    let mut st = PointState::default();
    ev.forward(p, &mut st);
    let k = net.cells();
    let mut margin = f64::INFINITY;
    for i in 0..k {
        let mut ratios: Vec<f64> = (0..k)
            .filter(|&j| j != i)
            .map(|j| (st.sq[i] - st.sq[j]) / ev.pairwise().get(i, j))
            .collect();
        ratios.sort_by(|a, b| b.total_cmp(a));
        let Some(&top) = ratios.first() else { continue };
        margin = margin.min(top.abs());
        margin = margin.min((top - net.alpha(i)).abs());
        if let Some(&second) = ratios.get(1) {
            if top > 0.0 {
                margin = margin.min(top - second);
            }
        }
    }
    margin
}

/// Compares `analytic` with central differences of [`objective::loss`].
/// Partials whose `±step` perturbation changes any piece are skipped.
pub fn compare(
    net: &CellularNetwork,
    batch: &Dataset,
    hp: &HyperParams,
    analytic: &GradientBuffer,
) -> Result<BlockErrors> {
    let base = piece_signature(net, batch);
    let mut errs = BlockErrors::default();
    for block in 0..3 {
        let len = [net.betas().len(), net.centers().len(), net.alphas().len()][block];
        for idx in 0..len {
            let theta = params(net, block)[idx];
            let h = step_for(theta);
            let mut plus = net.clone();
            params_mut(&mut plus, block)[idx] = theta + h;
            let mut minus = net.clone();
            params_mut(&mut minus, block)[idx] = theta - h;
            if block == 2 && theta - h <= 0.0 {
                errs.skipped += 1;
                continue;
            }
            if piece_signature(&plus, batch) != base || piece_signature(&minus, batch) != base {
                errs.skipped += 1;
                continue;
            }
            let numeric = (objective::loss(&plus, batch, hp)? - objective::loss(&minus, batch, hp)?)
                / ((theta + h) - (theta - h));
            let a = [&analytic.d_betas, &analytic.d_centers, &analytic.d_alphas][block][idx];
            let e = relative_error(a, numeric);
            let slot = match block {
                0 => &mut errs.betas,
                1 => &mut errs.centers,
                _ => &mut errs.alphas,
            };
            *slot = slot.max(e);
            errs.checked += 1;
        }
    }
    Ok(errs)
}

fn params(net: &CellularNetwork, block: usize) -> &[f64] {
    match block {
        0 => net.betas(),
        1 => net.centers(),
        _ => net.alphas(),
    }
}

fn params_mut(net: &mut CellularNetwork, block: usize) -> &mut [f64] {
    let (b, c, a) = net.params_mut();
    match block {
        0 => b,
        1 => c,
        _ => a,
    }
}

/// A random network and batch for gradient checking: up to 5 cells, up to
/// 8 dimensions, 16 points placed so that blend zones are populated and no
/// point sits within `1e-6` (ratio units) of a piece boundary.
pub fn random_case(rng: &mut ChaCha8Rng, mode: Mode) -> (CellularNetwork, Dataset, HyperParams) {
    let k = rng.random_range(1..=5);
    let d = rng.random_range(1..=8);
    loop {
        let centers: Vec<f64> = (0..k * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let betas: Vec<f64> = (0..k * (d + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let alphas: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.5)).collect();
        let Ok(net) = CellularNetwork::new(mode, d, centers, betas, alphas) else {
            continue;
        };
        let mut features = Vec::with_capacity(16 * d);
        let mut targets = Vec::with_capacity(16);
        let mut attempts = 0;
        while targets.len() < 16 && attempts < 10_000 {
            attempts += 1;
            let p: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            if piece_margin(&net, &p) < 1e-6 {
                continue;
            }
            features.extend_from_slice(&p);
            targets.push(match mode {
                Mode::Regression => rng.random_range(-2.0..2.0),
                Mode::Binary => f64::from(rng.random_bool(0.5) as u8),
            });
        }
        if targets.len() < 16 {
            continue;
        }
        let batch = Dataset::new(d, features, targets).expect("shape");
        let hp = HyperParams {
            lambda_alpha: rng.random_range(0.0..0.2),
            lambda_beta: rng.random_range(0.0..0.01),
            ..HyperParams::default()
        };
        return (net, batch, hp);
    }
}

/// Runs `trials` random cases per mode with the supplied gradient routine.
pub fn run_trials<G>(trials: usize, seed: u64, mut grad: G) -> Result<BlockErrors>
where
    G: FnMut(&CellularNetwork, &Dataset, &HyperParams) -> Result<GradientBuffer>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = BlockErrors::default();
    for mode in [Mode::Regression, Mode::Binary] {
        for _ in 0..trials {
            let (net, batch, hp) = random_case(&mut rng, mode);
            let analytic = grad(&net, &batch, &hp)?;
            total.merge(&compare(&net, &batch, &hp, &analytic)?);
        }
    }
    Ok(total)
}
