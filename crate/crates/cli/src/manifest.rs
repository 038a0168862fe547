//! Run manifests: everything needed to replay a run bit for bit.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use asg_core::asg::{ChainConfig, SamplerKind};
use asg_core::baseline::DEFAULT_PROPOSAL_SD;
use asg_core::kernels::{resolve_kernel, LogKernel, Params, RegressionData, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where regression data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf },
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self) -> CliResult<RegressionData> {
        Ok(match self {
            DataSource::Csv { path } => RegressionData::from_csv(path)?,
            DataSource::Synthetic(spec) => spec.generate()?.data,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSource>,
}

impl KernelSpec {
    pub fn new(name: &str, params: Params) -> Self {
        Self {
            name: name.to_string(),
            params,
            data: None,
        }
    }

    pub fn build(&self) -> CliResult<LogKernel> {
        let data = self.data.as_ref().map(DataSource::load).transpose()?.map(Arc::new);
        Ok(resolve_kernel(&self.name, &self.params, data)?)
    }

    /// Column names for sample files: predictor names for regression
    /// kernels, `x1..xm` otherwise.
    pub fn column_names(&self, dim: usize) -> CliResult<Vec<String>> {
        match &self.data {
            Some(src) => {
                let data = src.load()?;
                let mut names = vec!["intercept".to_string()];
                names.extend(data.names().iter().cloned());
                Ok(names)
            }
            None => Ok(crate::output::default_header(dim)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kernel: KernelSpec,
    pub sampler: SamplerKind,
    pub config: ChainConfig,
    /// RW-MH proposal scales (one value broadcasts).
    #[serde(default = "default_proposal_sd")]
    pub proposal_sd: Vec<f64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    /// Seconds since the Unix epoch when the manifest was created.
    pub timestamp: u64,
    pub library_version: String,
    pub seed: u64,
}

fn default_proposal_sd() -> Vec<f64> {
    vec![DEFAULT_PROPOSAL_SD]
}

impl RunManifest {
    pub fn new(kernel: KernelSpec, sampler: SamplerKind, config: ChainConfig, output_dir: &Path) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Self {
            kernel,
            sampler,
            seed: config.seed,
            config,
            proposal_sd: default_proposal_sd(),
            x0: None,
            output_dir: output_dir.to_path_buf(),
            timestamp,
            library_version: LIBRARY_VERSION.to_string(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.seed != self.config.seed {
            return Err(CliError::Usage(format!(
                "manifest seed {} disagrees with config seed {}",
                self.seed, self.config.seed
            )));
        }
        self.config.validate()?;
        Ok(())
    }
}
