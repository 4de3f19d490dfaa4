//! Network parameters, datasets and hyperparameters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::AdamConfig;

/// Lower bound applied to every blending parameter after each optimizer step.
pub const ALPHA_FLOOR: f64 = 0.01;

/// Default initial blending parameter.
pub const DEFAULT_ALPHA_INIT: f64 = 0.3;

/// Which objective family a network is trained with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Regression,
    Binary,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Regression => "regression",
            Mode::Binary => "binary",
        }
    }
}

/// The learned model: `k` seeds in `d` dimensions, one affine function and
/// one blending parameter per seed.
///
/// Storage is row-major and flat: `centers` is `k × d`, `betas` is
/// `k × (d + 1)` with the constant term first in each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CellularNetwork {
    dimensions: usize,
    centers: Vec<f64>,
    betas: Vec<f64>,
    alphas: Vec<f64>,
    mode: Mode,
}

impl CellularNetwork {
    /// Builds a network and checks every invariant.
    pub fn new(
        mode: Mode,
        dimensions: usize,
        centers: Vec<f64>,
        betas: Vec<f64>,
        alphas: Vec<f64>,
    ) -> Result<Self> {
        let net = CellularNetwork {
            dimensions,
            centers,
            betas,
            alphas,
            mode,
        };
        net.validate()?;
        Ok(net)
    }

    /// A network with the given seeds, zero coefficients and a uniform
    /// blending parameter.
    pub fn from_centers(
        mode: Mode,
        dimensions: usize,
        centers: Vec<f64>,
        alpha_init: f64,
    ) -> Result<Self> {
        if dimensions == 0 || !centers.len().is_multiple_of(dimensions) {
            return Err(Error::model("centers", "length is not a multiple of dimensions"));
        }
        let k = centers.len() / dimensions;
        Self::new(
            mode,
            dimensions,
            centers,
            vec![0.0; k * (dimensions + 1)],
            vec![alpha_init; k],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimensions;
        if d == 0 {
            return Err(Error::model("dimensions", "must be positive"));
        }
        let k = self.alphas.len();
        if k == 0 {
            return Err(Error::model("cells", "must be positive"));
        }
        if self.centers.len() != k * d {
            return Err(Error::model(
                "centers",
                format!("shape mismatch: expected {k} rows of {d}"),
            ));
        }
        if self.betas.len() != k * (d + 1) {
            return Err(Error::model(
                "betas",
                format!("shape mismatch: expected {k} rows of {}", d + 1),
            ));
        }
        if let Some(i) = self.alphas.iter().position(|a| a.is_nan() || *a <= 0.0) {
            return Err(Error::model(
                "alphas",
                format!("alpha must be positive (cell {i} has {})", self.alphas[i]),
            ));
        }
        for (field, values) in [
            ("centers", &self.centers),
            ("betas", &self.betas),
            ("alphas", &self.alphas),
        ] {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::model(field, format!("non-finite value at index {i}")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dimensions(&self) -> usize {
        self.dimensions
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.alphas.len()
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        let d = self.dimensions;
        &self.centers[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn beta(&self, i: usize) -> &[f64] {
        let w = self.dimensions + 1;
        &self.betas[i * w..(i + 1) * w]
    }

    #[inline]
    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i]
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Mutable access to the three parameter blocks `(betas, centers, alphas)`.
    ///
    /// Callers are responsible for keeping alphas positive; see
    /// [`CellularNetwork::clamp_alphas`].
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64]) {
        (&mut self.betas, &mut self.centers, &mut self.alphas)
    }

    pub fn clamp_alphas(&mut self, floor: f64) {
        for a in &mut self.alphas {
            if *a < floor {
                *a = floor;
            }
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn parameter_count(&self) -> usize {
        parameter_count(self.cells(), self.dimensions)
    }
}

/// Degrees of freedom of a network with `cells` seeds in `dimensions`
/// dimensions: `d + 1` coefficients, `d` coordinates and one blending
/// parameter per cell.
pub const fn parameter_count(cells: usize, dimensions: usize) -> usize {
    cells * 2 * (dimensions + 1)
}

/// Scattered data: `n` feature rows of width `d` with one scalar target each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dimensions: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dimensions: usize, features: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if dimensions == 0 {
            return Err(Error::InvalidDataset("dimensions must be positive".into()));
        }
        if targets.is_empty() {
            return Err(Error::InvalidDataset("empty dataset".into()));
        }
        if features.len() != targets.len() * dimensions {
            return Err(Error::InvalidDataset(format!(
                "{} feature values do not form {} rows of {dimensions}",
                features.len(),
                targets.len()
            )));
        }
        Ok(Dataset {
            dimensions,
            features,
            targets,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn dimensions(&self) -> usize {
        self.dimensions
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dimensions;
        &self.features[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.features.chunks_exact(self.dimensions)
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dimensions);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.point(i));
            targets.push(self.targets[i]);
        }
        Dataset {
            dimensions: self.dimensions,
            features,
            targets,
        }
    }

    /// Same features with replaced targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Dataset> {
        Dataset::new(self.dimensions, self.features.clone(), targets)
    }

    pub fn check_binary(&self) -> Result<()> {
        match self
            .targets
            .iter()
            .position(|&b| b != 0.0 && b != 1.0)
        {
            Some(row) => Err(Error::NonBinaryTarget {
                row,
                value: self.targets[row],
            }),
            None => Ok(()),
        }
    }

    /// Interprets targets as class labels.
    pub fn labels(&self) -> Result<Vec<u32>> {
        self.targets
            .iter()
            .enumerate()
            .map(|(row, &t)| {
                if t >= 0.0 && libm::trunc(t) == t && t <= u32::MAX as f64 {
                    Ok(t as u32)
                } else {
                    Err(Error::InvalidDataset(format!(
                        "row {row}: target {t} is not a class label"
                    )))
                }
            })
            .collect()
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Number of cells for uniform seeding.
    pub cells: usize,
    pub lambda_alpha: f64,
    pub lambda_beta: f64,
    pub epochs: usize,
    /// Share of the training set per minibatch, in `(0, 1]`.
    pub batch_fraction: f64,
    pub alpha_init: f64,
    pub rng_seed: u64,
    pub kmeans_max_iters: usize,
    pub optimizer: AdamConfig,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            cells: 40,
            lambda_alpha: 0.0,
            lambda_beta: 0.0,
            epochs: 30,
            batch_fraction: 0.05,
            alpha_init: DEFAULT_ALPHA_INIT,
            rng_seed: 0,
            kmeans_max_iters: 100,
            optimizer: AdamConfig::default(),
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 {
            return Err(Error::hyper("cells", "must be positive"));
        }
        if !(self.lambda_alpha >= 0.0 && self.lambda_alpha.is_finite()) {
            return Err(Error::hyper("lambda_alpha", "must be finite and >= 0"));
        }
        if !(self.lambda_beta >= 0.0 && self.lambda_beta.is_finite()) {
            return Err(Error::hyper("lambda_beta", "must be finite and >= 0"));
        }
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return Err(Error::hyper("batch_fraction", "must lie in (0, 1]"));
        }
        if !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return Err(Error::hyper("alpha_init", "must be positive"));
        }
        self.optimizer.validate()
    }

    /// Minibatch length for a training set of `n` points: `ceil(fraction * n)`.
    pub fn batch_len(&self, n: usize) -> usize {
        let m = libm::ceil(self.batch_fraction * n as f64) as usize;
        m.clamp(1, n.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parameter_counts() {
        assert_eq!(parameter_count(46, 784), 72_220);
        assert_eq!(10 * parameter_count(46, 784), 722_200);
        assert_eq!(parameter_count(40, 784), 62_800);
        assert_eq!(10 * parameter_count(40, 784), 628_000);
        assert_eq!(parameter_count(1, 1), 4);
    }

    #[test]
    fn parameter_count_is_linear_in_cells() {
        for d in [1, 3, 784] {
            let step = parameter_count(1, d);
            for k in 1..=10 {
                assert_eq!(parameter_count(k, d), k * step);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let err = CellularNetwork::new(Mode::Binary, 1, vec![0.0], vec![0.0, 0.0], vec![0.0])
            .unwrap_err();
        assert!(err.to_string().contains("alpha must be positive"), "{err}");
    }

    #[test]
    fn rejects_shape_mismatch() {
        let err = CellularNetwork::new(
            Mode::Regression,
            1,
            vec![0.0, 1.0],
            vec![0.0; 6],
            vec![0.3, 0.3],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidModel { field: "betas", .. }));
    }

    #[test]
    fn rejects_non_finite() {
        let err = CellularNetwork::new(Mode::Regression, 1, vec![f64::NAN], vec![0.0; 2], vec![0.3])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidModel { field: "centers", .. }));
    }

    #[test]
    fn batch_len_rounds_up() {
        let hp = HyperParams::default();
        assert_eq!(hp.batch_len(60_000), 3_000);
        assert_eq!(hp.batch_len(101), 6);
        assert_eq!(hp.batch_len(1), 1);
    }

    #[test]
    fn dataset_checks() {
        assert!(Dataset::new(2, vec![], vec![]).is_err());
        assert!(Dataset::new(2, vec![1.0; 3], vec![0.0, 1.0]).is_err());
        let ds = Dataset::new(1, vec![1.0, 2.0], vec![0.0, 2.0]).unwrap();
        assert!(matches!(ds.check_binary(), Err(Error::NonBinaryTarget { row: 1, .. })));
        assert_eq!(ds.labels().unwrap(), vec![0, 2]);
    }
}
