//! Blending the per-cell affine functions into one approximation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{cell_weight, point_sq_distances, PairwiseDistances, Piece};
use crate::math::{dot, sigmoid};
use crate::model::{CellularNetwork, Mode};

/// Per-cell detail of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBreakdown {
    pub raw_weights: Vec<f64>,
    pub weights: Vec<f64>,
    pub cell_values: Vec<f64>,
    pub value: f64,
}

/// Affine function of cell `i`: `beta_i0 + sum_j beta_ij p_j`.
#[inline]
pub fn linear_value(net: &CellularNetwork, cell: usize, p: &[f64]) -> f64 {
    let b = net.beta(cell);
    b[0] + dot(&b[1..], p)
}

/// Forward-pass state for one point, kept for the gradient.
#[derive(Debug, Clone, Default)]
pub(crate) struct PointState {
    pub sq: Vec<f64>,
    pub raw: Vec<f64>,
    pub pieces: Vec<Piece>,
    /// Affine values; only meaningful where `raw > 0`.
    pub values: Vec<f64>,
    pub total: f64,
    pub value: f64,
}

/// A network paired with its point-independent pairwise seed distances.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    net: &'a CellularNetwork,
    pairwise: PairwiseDistances,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a CellularNetwork) -> Self {
        Evaluator {
            net,
            pairwise: PairwiseDistances::new(net),
        }
    }

    pub fn network(&self) -> &'a CellularNetwork {
        self.net
    }

    pub(crate) fn pairwise(&self) -> &PairwiseDistances {
        &self.pairwise
    }

    pub(crate) fn forward(&self, p: &[f64], st: &mut PointState) {
        let net = self.net;
        let k = net.cells();
        point_sq_distances(net, p, &mut st.sq);
        st.raw.clear();
        st.pieces.clear();
        st.values.clear();
        let mut total = 0.0;
        let mut acc = 0.0;
        for i in 0..k {
            let (w, piece) = cell_weight(i, net.alpha(i), &st.sq, &self.pairwise);
            let v = if w > 0.0 { linear_value(net, i, p) } else { 0.0 };
            st.raw.push(w);
            st.pieces.push(piece);
            st.values.push(v);
            total += w;
            acc += w * v;
        }
        debug_assert!(total >= 1.0 - 1e-12, "nearest cell must have weight 1");
        st.total = total;
        st.value = acc / total;
    }

    /// Blended value at `p`. Panics on dimension mismatch.
    pub fn value(&self, p: &[f64]) -> f64 {
        assert_eq!(p.len(), self.net.dimensions(), "dimension mismatch");
        let mut st = PointState::default();
        self.forward(p, &mut st);
        st.value
    }

    pub fn breakdown(&self, p: &[f64]) -> Result<EvalBreakdown> {
        check_dims(self.net, p)?;
        let mut st = PointState::default();
        self.forward(p, &mut st);
        let weights = st.raw.iter().map(|w| w / st.total).collect();
        Ok(EvalBreakdown {
            raw_weights: st.raw,
            weights,
            cell_values: (0..self.net.cells())
                .map(|i| linear_value(self.net, i, p))
                .collect(),
            value: st.value,
        })
    }

    /// Class-1 probability. Requires a binary network.
    pub fn probability(&self, p: &[f64]) -> Result<f64> {
        if self.net.mode() != Mode::Binary {
            return Err(Error::NotClassifier);
        }
        check_dims(self.net, p)?;
        Ok(sigmoid(self.value(p)))
    }

    /// Values at every row of a flat feature matrix.
    pub fn values(&self, features: &[f64]) -> Vec<f64> {
        let d = self.net.dimensions();
        assert_eq!(features.len() % d, 0, "feature matrix width");
        crate::par::map_chunks(features, d, |p, st: &mut PointState| {
            self.forward(p, st);
            st.value
        })
    }
}

fn check_dims(net: &CellularNetwork, p: &[f64]) -> Result<()> {
    if p.len() != net.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: net.dimensions(),
            found: p.len(),
        });
    }
    Ok(())
}

/// Full breakdown of the blended approximation at `p`.
pub fn evaluate(net: &CellularNetwork, p: &[f64]) -> Result<EvalBreakdown> {
    Evaluator::new(net).breakdown(p)
}

/// `1 / (1 + exp(-f(p)))` for a binary network.
pub fn probability(net: &CellularNetwork, p: &[f64]) -> Result<f64> {
    Evaluator::new(net).probability(p)
}
