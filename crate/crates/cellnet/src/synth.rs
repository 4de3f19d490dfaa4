//! Synthetic fixtures.

use cellnet_core::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// `b = β·[1,a] + noise` for one random β, inputs uniform on `[-1,1]^d`.
    Linear,
    /// A distinct random linear function on each region of the Voronoi
    /// diagram of `regions` random seeds.
    PiecewiseLinear { regions: usize },
    /// Labels 0 and 1 around means `-(5,…,5)` and `(5,…,5)`; `noise` is the
    /// per-coordinate standard deviation.
    TwoGaussians,
    /// Four blobs at `(±2,±2,0,…)`, label 1 where the first two coordinates
    /// differ in sign.
    XorBlobs,
}

const GAUSSIAN_OFFSET: f64 = 5.0;
const XOR_OFFSET: f64 = 2.0;

/// Generating parameters of a regression fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// Region seeds, `m × d`. A single seed for `Linear`.
    pub seeds: Vec<f64>,
    /// One `[β0, β1..βd]` row per seed.
    pub betas: Vec<f64>,
}

impl Generator {
    pub fn value(&self, p: &[f64]) -> f64 {
        let d = p.len();
        let region = self
            .seeds
            .chunks(d)
            .map(|c| c.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
            .0;
        let beta = &self.betas[region * (d + 1)..(region + 1) * (d + 1)];
        beta[0] + beta[1..].iter().zip(p).map(|(b, x)| b * x).sum::<f64>()
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn noise(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

/// The dataset and, for the regression kinds, its generating function.
pub fn synth_with_generator(
    kind: SynthKind,
    n: usize,
    d: usize,
    noise_sigma: f64,
    rng_seed: u64,
) -> (Dataset, Option<Generator>) {
    assert!(n >= 1 && d >= 1, "synth needs n, d >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut features = Vec::with_capacity(n * d);
    let mut targets = Vec::with_capacity(n);
    let generator = match kind {
        SynthKind::Linear | SynthKind::PiecewiseLinear { .. } => {
            let m = match kind {
                SynthKind::PiecewiseLinear { regions } => regions.max(1),
                _ => 1,
            };
            let seeds: Vec<f64> = (0..m).flat_map(|_| uniform_point(&mut rng, d)).collect();
            let betas = normals(&mut rng, m * (d + 1));
            let g = Generator { seeds, betas };
            for _ in 0..n {
                let p = uniform_point(&mut rng, d);
                targets.push(g.value(&p) + noise(&mut rng, noise_sigma));
                features.extend(p);
            }
            Some(g)
        }
        SynthKind::TwoGaussians => {
            for _ in 0..n {
                let label = rng.random_bool(0.5);
                let mean = if label { GAUSSIAN_OFFSET } else { -GAUSSIAN_OFFSET };
                for _ in 0..d {
                    features.push(mean + noise(&mut rng, noise_sigma));
                }
                targets.push(f64::from(u8::from(label)));
            }
            None
        }
        SynthKind::XorBlobs => {
            for _ in 0..n {
                let (a, b) = (rng.random_bool(0.5), rng.random_bool(0.5));
                let sign = |s: bool| if s { XOR_OFFSET } else { -XOR_OFFSET };
                for j in 0..d {
                    let mean = match j {
                        0 => sign(a),
                        1 => sign(b),
                        _ => 0.0,
                    };
                    features.push(mean + noise(&mut rng, noise_sigma));
                }
                targets.push(f64::from(u8::from(a != b)));
            }
            None
        }
    };
    let data = Dataset::new(d, features, targets).expect("synthetic data is well formed");
    (data, generator)
}

pub fn synth(kind: SynthKind, n: usize, d: usize, noise_sigma: f64, rng_seed: u64) -> Dataset {
    synth_with_generator(kind, n, d, noise_sigma, rng_seed).0
}
