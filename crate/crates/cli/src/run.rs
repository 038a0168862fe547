//! Executing a manifest and writing its artifacts.

use std::path::Path;

use asg_core::asg::{run_asg, ChainOutput, SamplerKind};
use asg_core::baseline::{run_rwmh, RwmhConfig};
use asg_core::diagnostics::{ess_report, logk_stationarity, EssReport, StationaritySummary};
use asg_core::kernels::LogKernel;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::manifest::RunManifest;
use crate::output::{ensure_dir, write_json, write_matrix_csv, write_series_csv, RunFiles};

/// Contents of `ess_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub kernel: String,
    pub sampler: SamplerKind,
    pub dim: usize,
    pub n_retained: usize,
    pub wall_time_seconds: f64,
    pub ess: EssReport,
    pub acceptance_rate: Option<f64>,
    pub proposals: usize,
    pub cap_hits: usize,
    pub cap_hit_rate: f64,
    pub fallback_uses: usize,
    /// Split-half check of the post-burn-in `log K` trace; absent when the
    /// trace is too short.
    pub stationarity: Option<StationaritySummary>,
    pub warnings: Vec<String>,
}

impl SampleReport {
    pub fn from_output(kernel: &str, out: &ChainOutput) -> CliResult<Self> {
        let ess = ess_report(&out.samples, out.wall_time_seconds)?;
        let stationarity = logk_stationarity(&out.log_k_trace, out.config.burn_in).ok();
        Ok(Self {
            kernel: kernel.to_string(),
            sampler: out.sampler,
            dim: out.dim,
            n_retained: out.samples.len(),
            wall_time_seconds: out.wall_time_seconds,
            ess,
            acceptance_rate: out.acceptance_rate,
            proposals: out.proposals,
            cap_hits: out.cap_hits,
            cap_hit_rate: out.cap_hit_rate(),
            fallback_uses: out.fallback_uses,
            stationarity,
            warnings: out.warnings.clone(),
        })
    }
}

/// Runs the sampler named in the manifest. Timing covers the sampler only.
pub fn run_chain(manifest: &RunManifest, kernel: &LogKernel) -> CliResult<ChainOutput> {
    manifest.validate()?;
    let x0 = manifest.x0.as_deref();
    Ok(match manifest.sampler {
        SamplerKind::Asg => run_asg(kernel, x0, &manifest.config)?,
        SamplerKind::Rwmh => {
            let cfg = RwmhConfig {
                chain: manifest.config.clone(),
                proposal_sd: manifest.proposal_sd.clone(),
            };
            run_rwmh(kernel, x0, &cfg)?
        }
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output: ChainOutput,
    pub report: SampleReport,
    pub files: RunFiles,
    pub columns: Vec<String>,
}

/// Runs the manifest and writes samples, trace, report and manifest into
/// `manifest.output_dir`.
pub fn execute(manifest: &RunManifest) -> CliResult<RunOutcome> {
    let kernel = manifest.kernel.build()?;
    let output = run_chain(manifest, &kernel)?;
    let report = SampleReport::from_output(kernel.name(), &output)?;
    let columns = manifest.kernel.column_names(kernel.dim())?;
    let files = write_run(&manifest.output_dir, manifest, &output, &report, &columns)?;
    Ok(RunOutcome {
        output,
        report,
        files,
        columns,
    })
}

pub fn write_run(
    dir: &Path,
    manifest: &RunManifest,
    output: &ChainOutput,
    report: &SampleReport,
    columns: &[String],
) -> CliResult<RunFiles> {
    ensure_dir(dir)?;
    let files = RunFiles::in_dir(dir);
    write_matrix_csv(&files.samples, columns, &output.samples)?;
    write_series_csv(&files.logk_trace, "log_k", &output.log_k_trace)?;
    write_json(&files.ess_report, report)?;
    write_json(&files.manifest, manifest)?;
    Ok(files)
}
