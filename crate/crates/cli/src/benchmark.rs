//! Benchmark suites: kernels x samplers x replicates, run in a worker pool.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use asg_core::asg::{ChainConfig, SamplerKind};
use asg_core::baseline::DEFAULT_PROPOSAL_SD;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{KernelSpec, RunManifest};
use crate::output::{ensure_dir, write_json};
use crate::run::{run_chain, write_run, SampleReport};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "ASG_THREADS";

/// First chain length of a fixed-time cell; lengths then double.
const FIXED_TIME_START: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Budget {
    FixedSamples { n_samples: usize },
    /// Chains of doubling length until the wall-clock budget is spent.
    FixedTime { seconds: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub kernels: Vec<KernelSpec>,
    pub samplers: Vec<SamplerKind>,
    pub budget: Budget,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Burn-in, thinning, ε, etc.; `n_samples`, `seed` and `stream` are
    /// set per cell.
    #[serde(default)]
    pub config: ChainConfig,
    #[serde(default = "default_proposal_sd")]
    pub proposal_sd: Vec<f64>,
}

fn default_replicates() -> usize {
    1
}

fn default_proposal_sd() -> Vec<f64> {
    vec![DEFAULT_PROPOSAL_SD]
}

impl SuiteSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.kernels.is_empty() || self.samplers.is_empty() {
            return Err(CliError::Usage("benchmark suite needs at least one kernel and one sampler".into()));
        }
        if self.replicates == 0 {
            return Err(CliError::Usage("replicates must be at least 1".into()));
        }
        match self.budget {
            Budget::FixedSamples { n_samples } if n_samples == 0 => {
                Err(CliError::Usage("fixed_samples budget must be positive".into()))
            }
            Budget::FixedTime { seconds } if !(seconds > 0.0 && seconds.is_finite()) => {
                Err(CliError::Usage("fixed_time budget must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Cells in report order; the index doubles as the RNG stream.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for kernel in &self.kernels {
            for &sampler in &self.samplers {
                for replicate in 0..self.replicates {
                    out.push(Cell {
                        index: out.len(),
                        kernel: kernel.clone(),
                        sampler,
                        replicate,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub kernel: KernelSpec,
    pub sampler: SamplerKind,
    pub replicate: usize,
}

impl Cell {
    fn dir_name(&self) -> String {
        format!(
            "{:03}_{}_{}_r{}",
            self.index,
            self.kernel.name,
            sampler_name(self.sampler),
            self.replicate
        )
    }
}

pub fn sampler_name(s: SamplerKind) -> &'static str {
    match s {
        SamplerKind::Asg => "asg",
        SamplerKind::Rwmh => "rwmh",
    }
}

/// One point of a fixed-time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub n_samples: usize,
    pub log10_n: f64,
    pub wall_time_seconds: f64,
    pub min_ess: f64,
    pub ess_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub kernel: String,
    pub sampler: SamplerKind,
    pub replicate: usize,
    pub seed: u64,
    pub stream: u64,
    pub ok: bool,
    pub error: Option<String>,
    pub n_samples: usize,
    pub wall_time_seconds: f64,
    pub per_dim_ess: Vec<f64>,
    pub min_ess: f64,
    pub ess_per_second: f64,
    pub acceptance_rate: Option<f64>,
    pub cap_hits: usize,
    pub warnings: Vec<String>,
    /// Artifacts of the (last) run of this cell.
    pub run_dir: Option<PathBuf>,
    /// Fixed-time budgets only.
    pub series: Vec<TimePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn of(v: &[f64]) -> Option<Self> {
        let n = v.len() as f64;
        if v.is_empty() {
            return None;
        }
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub kernel: String,
    pub sampler: SamplerKind,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Over successful replicates; absent when every replicate failed.
    pub wall_time_seconds: Option<MeanSd>,
    pub per_dim_ess: Vec<MeanSd>,
    pub min_ess: Option<MeanSd>,
    pub ess_per_second: Option<MeanSd>,
    pub median_ess_per_second: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub suite: SuiteSpec,
    pub threads: usize,
    pub cells: Vec<CellResult>,
    pub summary: Vec<CellSummary>,
    pub table: String,
}

/// Worker count: explicit value, else `ASG_THREADS`, else the available
/// parallelism.
pub fn resolve_threads(explicit: Option<usize>) -> CliResult<usize> {
    if let Some(n) = explicit {
        return if n > 0 {
            Ok(n)
        } else {
            Err(CliError::Usage("thread count must be positive".into()))
        };
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn cell_manifest(suite: &SuiteSpec, cell: &Cell, n_samples: usize, dir: &Path) -> RunManifest {
    let config = ChainConfig {
        n_samples,
        seed: suite.seed,
        stream: cell.index as u64,
        ..suite.config.clone()
    };
    let mut m = RunManifest::new(cell.kernel.clone(), cell.sampler, config, dir);
    m.proposal_sd = suite.proposal_sd.clone();
    m
}

fn failed(cell: &Cell, suite: &SuiteSpec, e: CliError, series: Vec<TimePoint>) -> CellResult {
    CellResult {
        index: cell.index,
        kernel: cell.kernel.name.clone(),
        sampler: cell.sampler,
        replicate: cell.replicate,
        seed: suite.seed,
        stream: cell.index as u64,
        ok: false,
        error: Some(e.to_string()),
        n_samples: 0,
        wall_time_seconds: 0.0,
        per_dim_ess: Vec::new(),
        min_ess: 0.0,
        ess_per_second: 0.0,
        acceptance_rate: None,
        cap_hits: 0,
        warnings: Vec::new(),
        run_dir: None,
        series,
    }
}

/// One run of a cell, artifacts written to `dir`.
fn run_once(suite: &SuiteSpec, cell: &Cell, n_samples: usize, dir: &Path) -> CliResult<SampleReport> {
    let manifest = cell_manifest(suite, cell, n_samples, dir);
    let kernel = cell.kernel.build()?;
    let output = run_chain(&manifest, &kernel)?;
    let report = SampleReport::from_output(kernel.name(), &output)?;
    let columns = cell.kernel.column_names(kernel.dim())?;
    write_run(dir, &manifest, &output, &report, &columns)?;
    Ok(report)
}

fn run_cell(suite: &SuiteSpec, cell: &Cell, runs_dir: &Path) -> CellResult {
    let dir = runs_dir.join(cell.dir_name());
    let mut series = Vec::new();
    let last = match suite.budget {
        Budget::FixedSamples { n_samples } => run_once(suite, cell, n_samples, &dir),
        Budget::FixedTime { seconds } => {
            // the budget is real time for the cell, diagnostics and I/O
            // included, so cheap samplers cannot grow chains without bound
            let start = Instant::now();
            let mut n = FIXED_TIME_START;
            loop {
                match run_once(suite, cell, n, &dir) {
                    Ok(r) => {
                        let spent = start.elapsed().as_secs_f64();
                        series.push(TimePoint {
                            n_samples: n,
                            log10_n: (n as f64).log10(),
                            wall_time_seconds: r.wall_time_seconds,
                            min_ess: r.ess.min_ess,
                            ess_per_second: r.ess.ess_per_second,
                        });
                        if spent >= seconds || n > usize::MAX / 4 {
                            break Ok(r);
                        }
                        n *= 2;
                    }
                    Err(e) => break Err(e),
                }
            }
        }
    };
    match last {
        Ok(r) => CellResult {
            index: cell.index,
            kernel: cell.kernel.name.clone(),
            sampler: cell.sampler,
            replicate: cell.replicate,
            seed: suite.seed,
            stream: cell.index as u64,
            ok: true,
            error: None,
            n_samples: r.n_retained,
            wall_time_seconds: r.wall_time_seconds,
            per_dim_ess: r.ess.per_dim_ess.clone(),
            min_ess: r.ess.min_ess,
            ess_per_second: r.ess.ess_per_second,
            acceptance_rate: r.acceptance_rate,
            cap_hits: r.cap_hits,
            warnings: r.warnings,
            run_dir: Some(dir),
            series,
        },
        Err(e) => failed(cell, suite, e, series),
    }
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

fn summarize(suite: &SuiteSpec, cells: &[CellResult]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for kernel in &suite.kernels {
        for &sampler in &suite.samplers {
            let group: Vec<&CellResult> = cells
                .iter()
                .filter(|c| c.kernel == kernel.name && c.sampler == sampler)
                .collect();
            let ok: Vec<&CellResult> = group.iter().copied().filter(|c| c.ok).collect();
            let col = |f: &dyn Fn(&CellResult) -> f64| ok.iter().map(|c| f(c)).collect::<Vec<f64>>();
            let dims = ok.first().map_or(0, |c| c.per_dim_ess.len());
            let eps = col(&|c| c.ess_per_second);
            out.push(CellSummary {
                kernel: kernel.name.clone(),
                sampler,
                n_ok: ok.len(),
                n_failed: group.len() - ok.len(),
                wall_time_seconds: MeanSd::of(&col(&|c| c.wall_time_seconds)),
                per_dim_ess: (0..dims).filter_map(|j| MeanSd::of(&col(&|c| c.per_dim_ess[j]))).collect(),
                min_ess: MeanSd::of(&col(&|c| c.min_ess)),
                ess_per_second: MeanSd::of(&eps),
                median_ess_per_second: median(&eps),
            });
        }
    }
    out
}

/// Plain-text table, one row per (kernel, sampler).
pub fn format_table(summary: &[CellSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:<7} {:>5} {:>20} {:>20} {:>24}  per-dim ESS",
        "kernel", "sampler", "ok", "time (s)", "min ESS", "ESS/s"
    );
    for c in summary {
        let pm = |m: Option<MeanSd>, p: usize| m.map_or_else(|| "-".to_string(), |m| format!("{:.p$} ± {:.p$}", m.mean, m.sd));
        let dims = c
            .per_dim_ess
            .iter()
            .map(|m| format!("{:.0}", m.mean))
            .collect::<Vec<_>>()
            .join(" / ");
        let _ = writeln!(
            s,
            "{:<20} {:<7} {:>5} {:>20} {:>20} {:>24}  {}",
            c.kernel,
            sampler_name(c.sampler),
            format!("{}/{}", c.n_ok, c.n_ok + c.n_failed),
            pm(c.wall_time_seconds, 4),
            pm(c.min_ess, 1),
            pm(c.ess_per_second, 1),
            dims
        );
    }
    s
}

/// Runs every cell (failures are recorded, not fatal) and writes
/// `benchmark_report.json` plus per-run artifacts under `output_dir/runs`.
pub fn cmd_benchmark(suite: &SuiteSpec, threads: usize, output_dir: &Path) -> CliResult<BenchmarkReport> {
    suite.validate()?;
    let runs_dir = output_dir.join("runs");
    ensure_dir(&runs_dir)?;
    let cells = suite.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let results: Vec<CellResult> = pool.install(|| cells.par_iter().map(|c| run_cell(suite, c, &runs_dir)).collect());
    let summary = summarize(suite, &results);
    let report = BenchmarkReport {
        suite: suite.clone(),
        threads,
        table: format_table(&summary),
        cells: results,
        summary,
    };
    write_json(&output_dir.join("benchmark_report.json"), &report)?;
    Ok(report)
}
