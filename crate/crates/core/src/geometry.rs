//! Distance from a point to a Voronoi cell boundary, measured along the ray
//! from the cell's seed, and the relative weight derived from it.
//!
//! For seed `c_i`, neighbor `c_j` and point `p`, the ray
//! `x(t) = c_i + t (p - c_i)` meets the bisecting hyperplane of `c_i c_j` at
//!
//! ```text
//! t_j = |c_j - c_i|^2 / (2 (c_j - c_i) . (p - c_i))
//!     = G_ij / (D_i - D_j + G_ij)
//! ```
//!
//! with `D_i = |p - c_i|^2` and `G_ij = |c_j - c_i|^2`. Only crossings in the
//! positive direction count; the smallest one is the cell boundary. The point
//! is on or inside the cell exactly when that smallest `t` is at least 1,
//! which in the second form is `D_i <= D_j` for every neighbor. Past the
//! boundary the distance ratio `|p - q| / |c_i - q|` equals
//! `(1 - t) / t = (D_i - D_j) / G_ij`, which is affine in `p`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::squared_distance;
use crate::model::CellularNetwork;

/// Seeds closer than this are treated as coincident and never act as
/// neighbors of each other.
pub const COINCIDENT_SEED_DISTANCE: f64 = 1e-12;
const COINCIDENT_SQ: f64 = COINCIDENT_SEED_DISTANCE * COINCIDENT_SEED_DISTANCE;

/// Where the ray from a seed through a point leaves the seed's cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCrossing {
    /// Ray parameter of the crossing; `f64::INFINITY` when no bisector is
    /// crossed in the positive direction.
    pub t_star: f64,
    /// Neighbor whose bisector realizes `t_star`.
    pub active_neighbor: Option<usize>,
}

/// Squared distances between every pair of seeds. Point independent, so it
/// is computed once per parameter state.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    cells: usize,
    sq: Vec<f64>,
}

impl PairwiseDistances {
    pub fn new(net: &CellularNetwork) -> Self {
        let k = net.cells();
        let mut sq = alloc::vec![0.0; k * k];
        for i in 0..k {
            for j in (i + 1)..k {
                let g = squared_distance(net.center(i), net.center(j));
                sq[i * k + j] = g;
                sq[j * k + i] = g;
            }
        }
        PairwiseDistances { cells: k, sq }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sq[i * self.cells + j]
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.sq[i * self.cells..(i + 1) * self.cells]
    }
}

/// Piece of the piecewise definition a `(point, cell)` pair falls in.
/// Gradients are taken with the piece held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// On or inside the cell: weight 1.
    Interior,
    /// In the blend zone: weight `1 - ratio / alpha` in `(0, 1)`.
    Blend { neighbor: usize, ratio: f64 },
    /// Beyond the blend zone: weight 0.
    Clamped { neighbor: usize },
}

/// Closest positive bisector crossing for cell `i`, given squared distances
/// from the point to every seed. Returns `(neighbor, t, ratio)`.
#[inline]
pub(crate) fn nearest_crossing(
    i: usize,
    point_sq: &[f64],
    pairwise_row: &[f64],
) -> Option<(usize, f64, f64)> {
    let di = point_sq[i];
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, (&dj, &g)) in point_sq.iter().zip(pairwise_row).enumerate() {
        if j == i || g < COINCIDENT_SQ {
            continue;
        }
        let gap = di - dj;
        let denom = gap + g;
        if denom <= 0.0 {
            continue;
        }
        let t = g / denom;
        // strict comparison keeps the lowest index on ties
        if best.is_none_or(|(_, bt, _)| t < bt) {
            best = Some((j, t, gap / g));
        }
    }
    best
}

/// Relative weight and piece of cell `i`.
#[inline]
pub(crate) fn cell_weight(
    i: usize,
    alpha: f64,
    point_sq: &[f64],
    pairwise: &PairwiseDistances,
) -> (f64, Piece) {
    match nearest_crossing(i, point_sq, pairwise.row(i)) {
        Some((neighbor, t, ratio)) if t < 1.0 && ratio > 0.0 => {
            let w = 1.0 - ratio / alpha;
            if w > 0.0 {
                (w, Piece::Blend { neighbor, ratio })
            } else {
                (0.0, Piece::Clamped { neighbor })
            }
        }
        _ => (1.0, Piece::Interior),
    }
}

pub(crate) fn point_sq_distances(net: &CellularNetwork, p: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..net.cells()).map(|i| squared_distance(p, net.center(i))));
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

fn pairwise_row(net: &CellularNetwork, i: usize) -> Vec<f64> {
    let ci = net.center(i);
    (0..net.cells())
        .map(|j| squared_distance(ci, net.center(j)))
        .collect()
}

/// Boundary crossing of the ray from seed `cell` through `p`.
///
/// Fails with [`Error::DegenerateRay`] when `p` is the seed itself.
pub fn boundary_crossing(net: &CellularNetwork, cell: usize, p: &[f64]) -> Result<BoundaryCrossing> {
    check_dims(net, p)?;
    if p == net.center(cell) {
        return Err(Error::DegenerateRay { cell });
    }
    let mut sq = Vec::with_capacity(net.cells());
    point_sq_distances(net, p, &mut sq);
    let row = pairwise_row(net, cell);
    Ok(match nearest_crossing(cell, &sq, &row) {
        Some((j, t, _)) => BoundaryCrossing {
            t_star: t,
            active_neighbor: Some(j),
        },
        None => BoundaryCrossing {
            t_star: f64::INFINITY,
            active_neighbor: None,
        },
    })
}

/// Relative weight of cell `cell` at `p`: 1 on and inside the cell, falling
/// linearly to 0 where the distance ratio past the boundary reaches the
/// cell's blending parameter.
pub fn relative_weight(net: &CellularNetwork, cell: usize, p: &[f64]) -> Result<f64> {
    check_dims(net, p)?;
    let mut sq = Vec::with_capacity(net.cells());
    point_sq_distances(net, p, &mut sq);
    let row = pairwise_row(net, cell);
    let alpha = net.alpha(cell);
    Ok(match nearest_crossing(cell, &sq, &row) {
        Some((_, t, ratio)) if t < 1.0 && ratio > 0.0 => (1.0 - ratio / alpha).max(0.0),
        _ => 1.0,
    })
}
