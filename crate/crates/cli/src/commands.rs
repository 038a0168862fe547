//! `list-kernels`, `sample`, `support` and `lasso`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use asg_core::asg::{ChainConfig, SamplerKind};
use asg_core::kernels::{kernel_catalog, make_kernel, Conditional1D, Params};
use asg_core::posterior::{posterior_summary, PosteriorSummary};
use asg_core::support::{effective_support_1d, SupportEstimate, SupportMethod, SupportOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{DataSource, KernelSpec, RunManifest};
use crate::output::write_json;
use crate::run::{execute, RunOutcome};

/// One row of `list-kernels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub name: String,
    /// `null` when the dimension follows from data.
    pub dim: Option<usize>,
    pub params: Params,
    pub requires_data: bool,
    pub description: String,
}

pub fn cmd_list_kernels() -> Vec<KernelRow> {
    kernel_catalog()
        .into_iter()
        .map(|k| KernelRow {
            name: k.name.to_string(),
            dim: k.dim,
            params: k.params.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
            requires_data: k.requires_data,
            description: k.description.to_string(),
        })
        .collect()
}

pub fn kernel_rows_csv(rows: &[KernelRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "dim", "params", "requires_data", "description"])?;
    for r in rows {
        let params = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        let dim = r.dim.map_or_else(|| "data".to_string(), |d| d.to_string());
        w.write_record([r.name.as_str(), &dim, &params, &r.requires_data.to_string(), &r.description])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn cmd_sample(manifest: &RunManifest) -> CliResult<RunOutcome> {
    execute(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub kernel: String,
    /// 1-based coordinate.
    pub coord: usize,
    pub fixed: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub norm_const: f64,
    pub log_norm_const: f64,
    pub method: SupportMethod,
    pub epsilon: f64,
    pub s0: f64,
    pub evaluations: usize,
}

impl SupportReport {
    fn new(kernel: &str, coord: usize, fixed: &[f64], est: SupportEstimate) -> Self {
        Self {
            kernel: kernel.to_string(),
            coord,
            fixed: fixed.to_vec(),
            lower: est.lower,
            upper: est.upper,
            norm_const: est.norm_const,
            log_norm_const: est.log_norm_const,
            method: est.method,
            epsilon: est.epsilon,
            s0: est.s0,
            evaluations: est.evaluations,
        }
    }
}

/// Effective support of coordinate `coord` (1-based) with the other
/// coordinates held at `fixed`.
pub fn cmd_support(spec: &KernelSpec, coord: usize, fixed: &[f64], opts: &SupportOptions) -> CliResult<SupportReport> {
    let kernel = spec.build()?;
    let m = kernel.dim();
    if coord == 0 || coord > m {
        return Err(CliError::Usage(format!("--coord must be in 1..={m}, got {coord}")));
    }
    if fixed.len() != m - 1 {
        return Err(CliError::Usage(format!(
            "--fixed needs {} value(s) for a {m}-dimensional kernel, got {}",
            m - 1,
            fixed.len()
        )));
    }
    let g = Conditional1D::new(&kernel, coord - 1, fixed)?;
    let est = effective_support_1d(&g, opts)?;
    Ok(SupportReport::new(kernel.name(), coord, fixed, est))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoJob {
    pub data: DataSource,
    pub lambda: f64,
    pub alpha: f64,
    pub config: ChainConfig,
    pub output_dir: PathBuf,
}

/// Contents of `posterior_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoReport {
    pub lambda: f64,
    pub alpha: f64,
    pub data: DataSource,
    pub n_obs: usize,
    pub n_pred: usize,
    /// How `mode` was obtained.
    pub mode_estimator: String,
    pub summary: PosteriorSummary,
    pub min_ess: f64,
    pub wall_time_seconds: f64,
    /// Generating coefficients, for synthetic data.
    pub true_coefficients: Option<Vec<f64>>,
}

pub const MODE_ESTIMATOR: &str =
    "highest-log-K retained draw (best_draw), refined by coordinate-wise maximization of log K (mode)";

pub fn lasso_manifest(job: &LassoJob) -> RunManifest {
    let params: Params = [("lambda".to_string(), job.lambda), ("alpha".to_string(), job.alpha)].into();
    let spec = KernelSpec {
        name: "lasso_bridge".into(),
        params,
        data: Some(job.data.clone()),
    };
    RunManifest::new(spec, SamplerKind::Asg, job.config.clone(), &job.output_dir)
}

pub fn cmd_lasso(job: &LassoJob) -> CliResult<(RunOutcome, LassoReport)> {
    if job.lambda < 0.0 || !job.lambda.is_finite() {
        return Err(CliError::Usage(format!("--lambda must be >= 0, got {}", job.lambda)));
    }
    if !(job.alpha > 0.0 && job.alpha.is_finite()) {
        return Err(CliError::Usage(format!("--alpha must be > 0, got {}", job.alpha)));
    }
    let data = job.data.load()?;
    if data.n_pred() < 2 {
        return Err(CliError::Usage(format!("lasso needs at least 2 predictors, got {}", data.n_pred())));
    }
    let manifest = lasso_manifest(job);
    let outcome = execute(&manifest)?;
    let kernel = make_kernel("lasso_bridge", &manifest.kernel.params, Some(Arc::new(data.clone())))?;
    let summary = posterior_summary(&kernel, &outcome.output.samples, &outcome.columns)?;
    let true_coefficients = match &job.data {
        DataSource::Synthetic(spec) => Some(spec.generate()?.true_coefficients),
        DataSource::Csv { .. } => None,
    };
    let report = LassoReport {
        lambda: job.lambda,
        alpha: job.alpha,
        data: job.data.clone(),
        n_obs: data.n_obs(),
        n_pred: data.n_pred(),
        mode_estimator: MODE_ESTIMATOR.to_string(),
        summary,
        min_ess: outcome.report.ess.min_ess,
        wall_time_seconds: outcome.output.wall_time_seconds,
        true_coefficients,
    };
    write_json(&posterior_path(&job.output_dir), &report)?;
    Ok((outcome, report))
}

pub fn posterior_path(dir: &Path) -> PathBuf {
    dir.join("posterior_summary.json")
}
