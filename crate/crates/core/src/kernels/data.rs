//! Regression data for the loss-based kernels.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standardized design matrix plus response.
///
/// Design columns have mean 0 and unit sample standard deviation; the
/// response is left on its original scale.
#[derive(Debug, Clone)]
pub struct RegressionData {
    design: Vec<f64>, // row-major, n_obs x n_pred
    response: Vec<f64>,
    n_obs: usize,
    n_pred: usize,
    names: Vec<String>,
}

impl RegressionData {
    /// Standardizes `columns` and pairs them with `response`.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        let n = response.len();
        if n < 2 {
            return Err(Error::Data(format!("need at least 2 observations, got {n}")));
        }
        if columns.is_empty() {
            return Err(Error::Data("no predictor columns".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::Data("column names and columns differ in length".into()));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("response contains non-finite values".into()));
        }
        let p = columns.len();
        let mut design = vec![0.0; n * p];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Data(format!(
                    "column `{}` has {} rows, expected {n}",
                    names[j],
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("column `{}` contains non-finite values", names[j])));
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            let sd = var.sqrt();
            if !(sd > 1e-12 * mean.abs().max(1.0)) {
                return Err(Error::Data(format!(
                    "column `{}` has zero variance and cannot be standardized",
                    names[j]
                )));
            }
            let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
            // re-center after scaling so rounding in `mean` does not leak through
            let resid_mean = centered.iter().sum::<f64>() / n as f64;
            for (i, v) in centered.iter().enumerate() {
                design[i * p + j] = (v - resid_mean) / sd;
            }
        }
        Ok(Self {
            design,
            response,
            n_obs: n,
            n_pred: p,
            names,
        })
    }

    /// Reads a comma-separated file with a header row. The column named `y`
    /// is the response; every other column is a predictor.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let y_idx = headers
            .iter()
            .position(|h| h == "y")
            .ok_or_else(|| Error::Data(format!("{}: no `y` column in header", path.display())))?;
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            for (j, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: non-numeric cell {cell:?} in column `{}`, data row {}",
                        path.display(),
                        headers[j],
                        row + 1
                    ))
                })?;
                columns[j].push(v);
            }
        }
        let response = columns.remove(y_idx);
        let mut names = headers;
        names.remove(y_idx);
        Self::from_columns(names, columns, response)
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_pred(&self) -> usize {
        self.n_pred
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Row `i` of the standardized design.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.design[i * self.n_pred..(i + 1) * self.n_pred]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_obs).map(|i| self.design[i * self.n_pred + j]).collect()
    }
}

/// Recipe for a synthetic sparse regression problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_obs: usize,
    pub n_pred: usize,
    pub sparsity: usize,
    pub noise_sd: f64,
    /// Magnitude of the nonzero coefficients (signs are random).
    pub amplitude: f64,
    pub intercept: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_obs: 100,
            n_pred: 20,
            sparsity: 5,
            noise_sd: 1.0,
            amplitude: 2.0,
            intercept: 1.0,
            seed: 42,
        }
    }
}

/// Synthetic data together with the coefficients that generated it.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub data: RegressionData,
    /// `[intercept, beta_1, .., beta_p]` on the raw (unstandardized) design.
    pub true_coefficients: Vec<f64>,
}

impl SyntheticSpec {
    /// Draws an i.i.d. standard-normal design, a coefficient vector with
    /// `sparsity` entries at `±amplitude`, and Gaussian noise.
    pub fn generate(&self) -> Result<SyntheticData> {
        if self.n_pred < 1 || self.n_obs <= self.n_pred {
            return Err(Error::Data(format!(
                "synthetic spec needs n_obs > n_pred >= 1, got n_obs={} n_pred={}",
                self.n_obs, self.n_pred
            )));
        }
        if self.sparsity > self.n_pred {
            return Err(Error::Data("sparsity exceeds the number of predictors".into()));
        }
        if !(self.noise_sd >= 0.0) || !self.amplitude.is_finite() || !self.intercept.is_finite() {
            return Err(Error::Data("noise_sd, amplitude and intercept must be finite, noise_sd >= 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (n, p) = (self.n_obs, self.n_pred);
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut idx: Vec<usize> = (0..p).collect();
        idx.shuffle(&mut rng);
        let mut beta = vec![0.0; p];
        for &j in &idx[..self.sparsity] {
            beta[j] = if rng.random::<bool>() { self.amplitude } else { -self.amplitude };
        }
        let response: Vec<f64> = (0..n)
            .map(|i| {
                let noise: f64 = rng.sample(StandardNormal);
                self.intercept + (0..p).map(|j| columns[j][i] * beta[j]).sum::<f64>() + self.noise_sd * noise
            })
            .collect();
        let names = (1..=p).map(|j| format!("z{j}")).collect();
        let mut true_coefficients = vec![self.intercept];
        true_coefficients.extend(beta);
        Ok(SyntheticData {
            data: RegressionData::from_columns(names, columns, response)?,
            true_coefficients,
        })
    }
}
