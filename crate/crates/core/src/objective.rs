//! Training objectives and their analytic gradients.
//!
//! Regression minimizes the squared error; binary classification maximizes
//! the logistic log-likelihood. Both carry an L2 penalty on the affine
//! coefficients (constant term included) and a reciprocal penalty on the
//! blending parameters.
//!
//! Internally everything is a minimization: [`loss`] is the regression
//! objective as is and the negated binary objective, and [`gradient`]
//! differentiates [`loss`].
//!
//! The weights are only piecewise smooth. Gradients hold the piece of every
//! `(point, cell)` pair fixed at its forward-pass value: interior and clamped
//! cells contribute nothing to seeds or blending parameters, and a blending
//! cell differentiates through its active neighbor only.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evaluation::{Evaluator, PointState};
use crate::geometry::Piece;
use crate::math::{sigmoid, softplus};
use crate::model::{CellularNetwork, Dataset, HyperParams, Mode};
use crate::par;

/// How per-point gradient contributions are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Fixed chunking and merge order; bit-reproducible.
    #[default]
    Ordered,
    /// Whatever order the thread pool produces.
    Unordered,
}

/// Partial derivatives with the same layout as [`CellularNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub d_betas: Vec<f64>,
    pub d_centers: Vec<f64>,
    pub d_alphas: Vec<f64>,
}

impl GradientBuffer {
    pub fn zeros(cells: usize, dimensions: usize) -> Self {
        GradientBuffer {
            d_betas: vec![0.0; cells * (dimensions + 1)],
            d_centers: vec![0.0; cells * dimensions],
            d_alphas: vec![0.0; cells],
        }
    }

    pub fn zeros_like(net: &CellularNetwork) -> Self {
        Self::zeros(net.cells(), net.dimensions())
    }

    pub fn add_assign(&mut self, other: &GradientBuffer) {
        for (a, b) in [
            (&mut self.d_betas, &other.d_betas),
            (&mut self.d_centers, &other.d_centers),
            (&mut self.d_alphas, &other.d_alphas),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for x in self.blocks_mut().into_iter().flat_map(|(_, b)| b.iter_mut()) {
            *x *= s;
        }
    }

    /// `(name, values)` for each parameter block.
    pub fn blocks(&self) -> [(&'static str, &[f64]); 3] {
        [
            ("betas", &self.d_betas),
            ("centers", &self.d_centers),
            ("alphas", &self.d_alphas),
        ]
    }

    fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 3] {
        [
            ("betas", &mut self.d_betas),
            ("centers", &mut self.d_centers),
            ("alphas", &mut self.d_alphas),
        ]
    }

    /// First non-finite entry, as `(block, index)`.
    pub fn first_non_finite(&self) -> Option<(&'static str, usize)> {
        self.blocks()
            .into_iter()
            .find_map(|(name, b)| b.iter().position(|v| !v.is_finite()).map(|i| (name, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|(_, b)| b.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_batch(net: &CellularNetwork, batch: &Dataset) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.dimensions() != net.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: net.dimensions(),
            found: batch.dimensions(),
        });
    }
    if net.mode() == Mode::Binary {
        batch.check_binary()?;
    }
    Ok(())
}

/// Per-point data term in minimization orientation and its derivative with
/// respect to the blended value.
#[inline]
fn data_term(mode: Mode, value: f64, target: f64) -> (f64, f64) {
    match mode {
        Mode::Regression => {
            let r = value - target;
            (r * r, 2.0 * r)
        }
        Mode::Binary => (softplus(value) - target * value, sigmoid(value) - target),
    }
}

fn sum_data_term(net: &CellularNetwork, batch: &Dataset) -> f64 {
    let ev = Evaluator::new(net);
    let mode = net.mode();
    par::fold_range(
        batch.len(),
        true,
        || (0.0, PointState::default()),
        |(acc, st), i| {
            ev.forward(batch.point(i), st);
            *acc += data_term(mode, st.value, batch.target(i)).0;
        },
        |a, b| a.0 += b.0,
    )
    .0
}

/// Sum of squared residuals over the batch.
pub fn regression_loss(net: &CellularNetwork, batch: &Dataset) -> Result<f64> {
    if net.mode() != Mode::Regression {
        return Err(Error::NotRegression);
    }
    check_batch(net, batch)?;
    Ok(sum_data_term(net, batch))
}

/// Logistic log-likelihood `sum b f - ln(1 + e^f)` over the batch.
pub fn log_likelihood(net: &CellularNetwork, batch: &Dataset) -> Result<f64> {
    if net.mode() != Mode::Binary {
        return Err(Error::NotClassifier);
    }
    check_batch(net, batch)?;
    Ok(-sum_data_term(net, batch))
}

/// `(R_beta, R_alpha)`: squared L2 norm of all coefficients and the sum of
/// reciprocal blending parameters.
pub fn regularizers(net: &CellularNetwork) -> (f64, f64) {
    let r_beta = net.betas().iter().map(|b| b * b).sum();
    let r_alpha = net.alphas().iter().map(|a| 1.0 / a).sum();
    (r_beta, r_alpha)
}

fn penalty(net: &CellularNetwork, hp: &HyperParams) -> f64 {
    let (r_beta, r_alpha) = regularizers(net);
    hp.lambda_alpha * r_alpha + hp.lambda_beta * r_beta
}

/// Objective in its natural orientation: the penalized squared error
/// (minimized) for regression, the penalized log-likelihood (maximized)
/// for binary classification.
pub fn regularized_objective(
    net: &CellularNetwork,
    batch: &Dataset,
    hp: &HyperParams,
) -> Result<f64> {
    match net.mode() {
        Mode::Regression => Ok(regression_loss(net, batch)? + penalty(net, hp)),
        Mode::Binary => Ok(log_likelihood(net, batch)? - penalty(net, hp)),
    }
}

/// Objective in minimization orientation with the penalty scaled by
/// `penalty_scale`.
pub fn loss_scaled(
    net: &CellularNetwork,
    batch: &Dataset,
    hp: &HyperParams,
    penalty_scale: f64,
) -> Result<f64> {
    check_batch(net, batch)?;
    Ok(sum_data_term(net, batch) + penalty_scale * penalty(net, hp))
}

/// Objective in minimization orientation.
pub fn loss(net: &CellularNetwork, batch: &Dataset, hp: &HyperParams) -> Result<f64> {
    loss_scaled(net, batch, hp, 1.0)
}

/// Accumulates `upstream * d f(p) / d theta` into `grad`, using the forward
/// state of `p`.
pub(crate) fn backward(
    ev: &Evaluator<'_>,
    p: &[f64],
    st: &PointState,
    upstream: f64,
    grad: &mut GradientBuffer,
) {
    let net = ev.network();
    let d = net.dimensions();
    let inv_total = 1.0 / st.total;
    for i in 0..net.cells() {
        let w = st.raw[i];
        if w <= 0.0 {
            continue;
        }
        let scale = upstream * w * inv_total;
        let db = &mut grad.d_betas[i * (d + 1)..(i + 1) * (d + 1)];
        db[0] += scale;
        for (g, x) in db[1..].iter_mut().zip(p) {
            *g += scale * x;
        }
        let Piece::Blend { neighbor: j, ratio } = st.pieces[i] else {
            continue;
        };
        // d f / d w_i
        let dw = upstream * (st.values[i] - st.value) * inv_total;
        let alpha = net.alpha(i);
        grad.d_alphas[i] += dw * ratio / (alpha * alpha);
        // ratio = (D_i - D_j) / G_ij
        let ci = net.center(i);
        let cj = net.center(j);
        let g = ev.pairwise().get(i, j);
        let dr = -dw / alpha * 2.0 / g;
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (head, tail) = grad.d_centers.split_at_mut(hi * d);
        let (gi, gj) = if i < j {
            (&mut head[lo * d..(lo + 1) * d], &mut tail[..d])
        } else {
            (&mut tail[..d], &mut head[lo * d..(lo + 1) * d])
        };
        for m in 0..d {
            let u = cj[m] - ci[m];
            gi[m] += dr * (-(p[m] - ci[m]) + ratio * u);
            gj[m] += dr * ((p[m] - cj[m]) - ratio * u);
        }
    }
}

/// Gradient of the blended value itself at one point.
pub fn value_gradient(net: &CellularNetwork, p: &[f64]) -> Result<GradientBuffer> {
    if p.len() != net.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: net.dimensions(),
            found: p.len(),
        });
    }
    let ev = Evaluator::new(net);
    let mut st = PointState::default();
    ev.forward(p, &mut st);
    let mut grad = GradientBuffer::zeros_like(net);
    backward(&ev, p, &st, 1.0, &mut grad);
    Ok(grad)
}

/// Gradient of [`loss_scaled`].
pub fn gradient_scaled(
    net: &CellularNetwork,
    batch: &Dataset,
    hp: &HyperParams,
    penalty_scale: f64,
    reduction: Reduction,
) -> Result<GradientBuffer> {
    check_batch(net, batch)?;
    Ok(accumulate(net, batch, batch.len(), |i| i, hp, penalty_scale, reduction))
}

/// Gradient over the listed rows of `data`, as if they formed the batch.
pub fn gradient_rows(
    net: &CellularNetwork,
    data: &Dataset,
    rows: &[usize],
    hp: &HyperParams,
    penalty_scale: f64,
    reduction: Reduction,
) -> Result<GradientBuffer> {
    check_batch(net, data)?;
    if rows.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(accumulate(net, data, rows.len(), |i| rows[i], hp, penalty_scale, reduction))
}

fn accumulate(
    net: &CellularNetwork,
    data: &Dataset,
    count: usize,
    row: impl Fn(usize) -> usize + Sync + Send,
    hp: &HyperParams,
    penalty_scale: f64,
    reduction: Reduction,
) -> GradientBuffer {
    let ev = Evaluator::new(net);
    let mode = net.mode();
    let (mut grad, _) = par::fold_range(
        count,
        reduction == Reduction::Ordered,
        || (GradientBuffer::zeros_like(net), PointState::default()),
        |(grad, st), i| {
            let r = row(i);
            let p = data.point(r);
            ev.forward(p, st);
            let (_, upstream) = data_term(mode, st.value, data.target(r));
            backward(&ev, p, st, upstream, grad);
        },
        |a, b| a.0.add_assign(&b.0),
    );
    let lb = 2.0 * hp.lambda_beta * penalty_scale;
    if lb != 0.0 {
        for (g, b) in grad.d_betas.iter_mut().zip(net.betas()) {
            *g += lb * b;
        }
    }
    let la = hp.lambda_alpha * penalty_scale;
    if la != 0.0 {
        for (g, a) in grad.d_alphas.iter_mut().zip(net.alphas()) {
            *g -= la / (a * a);
        }
    }
    grad
}

/// Gradient of [`loss`] with respect to every coefficient, seed coordinate
/// and blending parameter, reduced in a fixed order.
pub fn gradient(net: &CellularNetwork, batch: &Dataset, hp: &HyperParams) -> Result<GradientBuffer> {
    gradient_scaled(net, batch, hp, 1.0, Reduction::Ordered)
}
