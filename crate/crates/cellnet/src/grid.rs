//! Regularization sweeps: one one-vs-rest model per `(λ_α, λ_β)` pair,
//! scored by test accuracy.

use std::io::Write;

use cellnet_core::{Dataset, HyperParams};

use crate::error::{Error, Result};
use crate::run::{evaluate, train_bundle, Metric, RunOptions, Seeding};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lambda_alphas: Vec<f64>,
    pub lambda_betas: Vec<f64>,
    /// Everything but the two penalties.
    pub base: HyperParams,
    pub seeding: Seeding,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub lambda_alphas: Vec<f64>,
    pub lambda_betas: Vec<f64>,
    /// `accuracy[row][col]`, row per λ_α. NaN marks a failed cell.
    pub accuracy: Vec<Vec<f64>>,
}

pub const CORNER: &str = "lambda_alpha\\lambda_beta";

impl GridTable {
    /// RFC-4180 text: header of λ_β values, then one row per λ_α.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![CORNER.to_string()];
        header.extend(self.lambda_betas.iter().map(f64::to_string));
        w.write_record(&header)?;
        for (a, row) in self.lambda_alphas.iter().zip(&self.accuracy) {
            w.write_record(std::iter::once(a).chain(row).map(f64::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Trains the cells sequentially. A cell whose training or evaluation fails
/// is logged to stderr and recorded as NaN.
pub fn run_grid(spec: &GridSpec, train: &Dataset, test: &Dataset, progress: bool) -> Result<GridTable> {
    if spec.lambda_alphas.is_empty() || spec.lambda_betas.is_empty() {
        return Err(Error::Usage("grid needs at least one value per axis".into()));
    }
    let opts = RunOptions {
        deterministic: spec.deterministic,
        progress,
    };
    let mut accuracy = Vec::with_capacity(spec.lambda_alphas.len());
    for &la in &spec.lambda_alphas {
        let mut row = Vec::with_capacity(spec.lambda_betas.len());
        for &lb in &spec.lambda_betas {
            let hp = HyperParams {
                lambda_alpha: la,
                lambda_beta: lb,
                ..spec.base.clone()
            };
            let cell = train_bundle(train, &hp, spec.seeding, opts).and_then(|t| evaluate(&t.model, test));
            let value = match cell {
                Ok(Metric::Accuracy { value, .. }) => value,
                Ok(Metric::Mse(_)) => unreachable!("bundles are classifiers"),
                Err(e) => {
                    eprintln!("lambda_alpha={la} lambda_beta={lb} failed: {e}");
                    f64::NAN
                }
            };
            if progress {
                eprintln!("lambda_alpha={la} lambda_beta={lb} accuracy={value}");
            }
            row.push(value);
        }
        accuracy.push(row);
    }
    Ok(GridTable {
        lambda_alphas: spec.lambda_alphas.clone(),
        lambda_betas: spec.lambda_betas.clone(),
        accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let t = GridTable {
            lambda_alphas: vec![0.25, 0.2],
            lambda_betas: vec![5e-5, 1e-5, 5e-7],
            accuracy: vec![vec![0.5, 0.75, f64::NAN], vec![1.0, 0.0, 0.125]],
        };
        assert_eq!(
            t.to_csv(),
            "lambda_alpha\\lambda_beta,0.00005,0.00001,0.0000005\n0.25,0.5,0.75,NaN\n0.2,1,0,0.125\n"
        );
    }
}
