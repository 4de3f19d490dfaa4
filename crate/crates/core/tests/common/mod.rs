//! Test-only oracles, written directly from the defining formulas and kept
//! independent of the library's evaluation path.
#![allow(dead_code)]

use cellnet_core::{CellularNetwork, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn random_net(rng: &mut ChaCha8Rng, mode: Mode, k: usize, d: usize) -> CellularNetwork {
    let centers = (0..k * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let betas = (0..k * (d + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
    let alphas = (0..k).map(|_| rng.random_range(0.05..2.0)).collect();
    CellularNetwork::new(mode, d, centers, betas, alphas).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-spread..spread)).collect()
}

/// Ray crossing with the bisector of `c_i c_j`, straight from the linear
/// equation `(x - (c_i + c_j)/2) . (c_j - c_i) = 0`, `x = c_i + t (p - c_i)`.
pub fn literal_crossing(ci: &[f64], cj: &[f64], p: &[f64]) -> Option<f64> {
    let u: Vec<f64> = cj.iter().zip(ci).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = p.iter().zip(ci).map(|(a, b)| a - b).collect();
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    if uu.sqrt() < 1e-12 || uv <= 0.0 {
        return None;
    }
    Some(uu / (2.0 * uv))
}

/// Relative weight computed by constructing the boundary point `q` and
/// taking the ratio of Euclidean lengths.
pub fn literal_relative_weight(net: &CellularNetwork, i: usize, p: &[f64]) -> f64 {
    let ci = net.center(i);
    if p == ci {
        return 1.0;
    }
    let t = (0..net.cells())
        .filter(|&j| j != i)
        .filter_map(|j| literal_crossing(ci, net.center(j), p))
        .fold(f64::INFINITY, f64::min);
    if t >= 1.0 {
        return 1.0;
    }
    let q: Vec<f64> = ci.iter().zip(p).map(|(c, x)| c + t * (x - c)).collect();
    let ratio = dist(p, &q) / dist(ci, &q);
    (1.0 - ratio / net.alpha(i)).max(0.0)
}

pub fn literal_affine(net: &CellularNetwork, i: usize, p: &[f64]) -> f64 {
    let b = net.beta(i);
    let mut v = b[0];
    for j in 0..p.len() {
        v += b[j + 1] * p[j];
    }
    v
}

/// Blended value from the literal weights.
pub fn literal_value(net: &CellularNetwork, p: &[f64]) -> f64 {
    let raw: Vec<f64> = (0..net.cells()).map(|i| literal_relative_weight(net, i, p)).collect();
    let total: f64 = raw.iter().sum();
    (0..net.cells())
        .map(|i| raw[i] / total * literal_affine(net, i, p))
        .sum()
}

/// Index set of the seeds nearest to `p`, with absolute tie tolerance.
pub fn nearest_seeds(net: &CellularNetwork, p: &[f64], tol: f64) -> Vec<usize> {
    let d: Vec<f64> = (0..net.cells()).map(|i| dist(p, net.center(i))).collect();
    let best = d.iter().copied().fold(f64::INFINITY, f64::min);
    (0..net.cells()).filter(|&i| d[i] <= best + tol).collect()
}

/// First ray parameter in `(0, t_max]` at which some other seed becomes
/// strictly nearer than `c_i`, scanning with a fixed step. Squared
/// distances along the ray are quadratics in `t`, evaluated per step.
pub fn dense_scan_crossing(net: &CellularNetwork, i: usize, p: &[f64], step: f64, t_max: f64) -> Option<f64> {
    let ci = net.center(i);
    let v: Vec<f64> = p.iter().zip(ci).map(|(a, b)| a - b).collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    // |c_i - c_j + t v|^2 = a_j + 2 b_j t + t^2 vv
    let coeffs: Vec<(f64, f64)> = (0..net.cells())
        .map(|j| {
            let w: Vec<f64> = ci.iter().zip(net.center(j)).map(|(a, b)| a - b).collect();
            (w.iter().map(|x| x * x).sum(), w.iter().zip(&v).map(|(a, b)| a * b).sum())
        })
        .collect();
    let steps = (t_max / step).ceil() as usize;
    for s in 1..=steps {
        let t = s as f64 * step;
        let own = t * t * vv;
        for (j, &(a, b)) in coeffs.iter().enumerate() {
            if j != i && a > 1e-24 && a + 2.0 * b * t + t * t * vv < own {
                return Some(t);
            }
        }
    }
    None
}
