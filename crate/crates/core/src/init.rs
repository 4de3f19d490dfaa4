//! Seed placement: random distinct data points refined by Lloyd's k-means.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::squared_distance;
use crate::model::{CellularNetwork, Dataset, HyperParams, Mode};
use crate::par;

/// How seeds are distributed over the training data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedingPlan {
    /// One k-means run over all points with `HyperParams::cells` seeds.
    Uniform,
    /// Independent k-means per class label, `(label, seeds)`, concatenated
    /// in the listed order.
    Stratified(Vec<(u32, usize)>),
}

impl SeedingPlan {
    /// `target` seeds for class `target` and `other` seeds for every other
    /// class in `classes`.
    pub fn one_vs_rest(target: u32, classes: &[u32], target_seeds: usize, other_seeds: usize) -> Self {
        SeedingPlan::Stratified(
            classes
                .iter()
                .map(|&c| (c, if c == target { target_seeds } else { other_seeds }))
                .collect(),
        )
    }

    /// Number of cells this plan produces.
    pub fn cells(&self, hp: &HyperParams) -> usize {
        match self {
            SeedingPlan::Uniform => hp.cells,
            SeedingPlan::Stratified(counts) => counts.iter().map(|(_, n)| n).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// `k × d`, row-major.
    pub centers: Vec<f64>,
    pub assignments: Vec<usize>,
    /// Lloyd iterations performed.
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squared distances to the assigned center, once after the
    /// initial assignment and once after every iteration.
    pub inertia: Vec<f64>,
}

/// Number of distinct rows.
fn distinct_rows(points: &[f64], d: usize) -> usize {
    let n = points.len() / d;
    let mut order: Vec<usize> = (0..n).collect();
    let row = |i: usize| &points[i * d..(i + 1) * d];
    let cmp = |a: &usize, b: &usize| {
        row(*a)
            .iter()
            .zip(row(*b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    };
    order.sort_unstable_by(cmp);
    1 + order.windows(2).filter(|w| cmp(&w[0], &w[1]).is_ne()).count()
}

fn assign(points: &[f64], d: usize, centers: &[f64]) -> Vec<(usize, f64)> {
    par::map_chunks(points, d, |p, _: &mut ()| {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.chunks_exact(d).enumerate() {
            let dist = squared_distance(p, center);
            if dist < best.1 {
                best = (c, dist);
            }
        }
        best
    })
}

/// Lloyd's k-means seeded with `k` distinct points drawn uniformly at random.
///
/// Iterates until the assignment stops changing or `max_iters` is reached.
/// Ties go to the lower center index. A center left without points moves to
/// the point farthest from its own center.
pub fn kmeans(points: &[f64], dim: usize, k: usize, rng_seed: u64, max_iters: usize) -> Result<KMeansResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    kmeans_with_rng(points, dim, k, &mut rng, max_iters)
}

pub(crate) fn kmeans_with_rng(
    points: &[f64],
    d: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
    max_iters: usize,
) -> Result<KMeansResult> {
    if d == 0 || !points.len().is_multiple_of(d) {
        return Err(Error::InvalidDataset("point matrix width".into()));
    }
    let n = points.len() / d;
    if k == 0 {
        return Err(Error::hyper("cells", "must be positive"));
    }
    let distinct = if n == 0 { 0 } else { distinct_rows(points, d) };
    if k > distinct {
        return Err(Error::TooFewDistinctPoints {
            needed: k,
            found: distinct,
        });
    }
    let row = |i: usize| &points[i * d..(i + 1) * d];

    let mut centers: Vec<f64> = Vec::with_capacity(k * d);
    for i in index::sample(rng, n, n) {
        let p = row(i);
        if centers.chunks_exact(d).all(|c| c != p) {
            centers.extend_from_slice(p);
            if centers.len() == k * d {
                break;
            }
        }
    }

    let mut nearest = assign(points, d, &centers);
    let mut inertia = vec![nearest.iter().map(|x| x.1).sum::<f64>()];
    let mut iterations = 0;
    let mut converged = false;
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    while iterations < max_iters {
        iterations += 1;
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, &(c, _)) in nearest.iter().enumerate() {
            counts[c] += 1;
            for (s, x) in sums[c * d..(c + 1) * d].iter_mut().zip(row(i)) {
                *s += x;
            }
        }
        let mut dist: Vec<f64> = nearest.iter().map(|x| x.1).collect();
        for c in 0..k {
            let center = &mut centers[c * d..(c + 1) * d];
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (x, s) in center.iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                    *x = s * inv;
                }
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("points are nonempty");
                center.copy_from_slice(row(far));
                dist[far] = 0.0;
            }
        }
        let next = assign(points, d, &centers);
        inertia.push(next.iter().map(|x| x.1).sum());
        let unchanged = next.iter().zip(&nearest).all(|(a, b)| a.0 == b.0);
        nearest = next;
        if unchanged {
            converged = true;
            break;
        }
    }
    Ok(KMeansResult {
        centers,
        assignments: nearest.into_iter().map(|x| x.0).collect(),
        iterations,
        converged,
        inertia,
    })
}

fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed positions for `plan`, concatenated row-major.
pub fn seed_centers(data: &Dataset, hp: &HyperParams, plan: &SeedingPlan) -> Result<Vec<f64>> {
    let d = data.dimensions();
    match plan {
        SeedingPlan::Uniform => {
            let mut rng = seeded_rng(hp.rng_seed, 0);
            Ok(kmeans_with_rng(data.features(), d, hp.cells, &mut rng, hp.kmeans_max_iters)?.centers)
        }
        SeedingPlan::Stratified(counts) => {
            let labels = data.labels()?;
            let mut centers = Vec::new();
            for &(label, seeds) in counts {
                if seeds == 0 {
                    return Err(Error::hyper("seeding plan", "every class needs at least one seed"));
                }
                let mut subset = Vec::new();
                for (i, _) in labels.iter().enumerate().filter(|(_, &l)| l == label) {
                    subset.extend_from_slice(data.point(i));
                }
                if subset.is_empty() {
                    return Err(Error::AbsentClass { label });
                }
                let mut rng = seeded_rng(hp.rng_seed, 1 + u64::from(label));
                let result = kmeans_with_rng(&subset, d, seeds, &mut rng, hp.kmeans_max_iters)?;
                centers.extend(result.centers);
            }
            Ok(centers)
        }
    }
}

/// Initial network: k-means seeds, zero coefficients and every blending
/// parameter at `hp.alpha_init`. For a stratified plan the dataset targets
/// are read as class labels.
pub fn initialize_network(
    data: &Dataset,
    hp: &HyperParams,
    plan: &SeedingPlan,
    mode: Mode,
) -> Result<CellularNetwork> {
    hp.validate()?;
    let centers = seed_centers(data, hp, plan)?;
    CellularNetwork::from_centers(mode, data.dimensions(), centers, hp.alpha_init)
}
