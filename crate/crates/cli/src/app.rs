//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use asg_core::asg::{ChainConfig, SamplerKind, ScanOrder};
use asg_core::kernels::{Params, SyntheticSpec};
use asg_core::support::SupportOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::benchmark::{cmd_benchmark, resolve_threads, Budget, SuiteSpec};
use crate::commands::{cmd_lasso, cmd_list_kernels, cmd_sample, cmd_support, kernel_rows_csv, LassoJob};
use crate::error::{CliError, CliResult, EXIT_USAGE};
use crate::manifest::{DataSource, KernelSpec, RunManifest};
use crate::output::read_json;

#[derive(Debug, Parser)]
#[command(name = "asg", version, about = "Automated sliced Gibbs sampling: samplers, supports and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the registered kernels with their dimensions and default parameters.
    ListKernels {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run one chain and write samples.csv, logk_trace.csv, ess_report.json and manifest.json.
    Sample(SampleArgs),
    /// Print the effective support of one coordinate of a kernel.
    Support(SupportArgs),
    /// Run a kernels x samplers x replicates suite and write benchmark_report.json.
    Benchmark(BenchmarkArgs),
    /// Sample a LASSO / bridge regression posterior and summarize it.
    Lasso(LassoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Asg,
    Rwmh,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Asg => SamplerKind::Asg,
            SamplerArg::Rwmh => SamplerKind::Rwmh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    Systematic,
    RandomPermutation,
}

/// Chain settings; unset flags keep the command's defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    /// Retained draws N.
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Burn-in iterations B.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Thinning interval L.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Tail mass excluded from each coordinate's effective support.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Scale of the Cauchy transform in the support estimator.
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// RNG stream index.
    #[arg(long)]
    pub stream: Option<u64>,
    #[arg(long, value_enum)]
    pub scan: Option<ScanArg>,
    /// Rejections before a coordinate update keeps its current value.
    #[arg(long)]
    pub max_rejections: Option<usize>,
    /// Fallback grid range as LO,HI.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub fallback_range: Option<Vec<f64>>,
    /// Reuse a coordinate's bracket when its conditioning values are unchanged.
    #[arg(long)]
    pub reuse_bracket_if_unchanged: bool,
}

impl ChainArgs {
    pub fn apply(&self, mut c: ChainConfig) -> ChainConfig {
        if let Some(v) = self.n_samples {
            c.n_samples = v;
        }
        if let Some(v) = self.burn_in {
            c.burn_in = v;
        }
        if let Some(v) = self.thin {
            c.thin = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = self.s0 {
            c.s0 = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.stream {
            c.stream = v;
        }
        if let Some(v) = self.scan {
            c.scan = match v {
                ScanArg::Systematic => ScanOrder::Systematic,
                ScanArg::RandomPermutation => ScanOrder::RandomPermutation,
            };
        }
        if let Some(v) = self.max_rejections {
            c.max_rejections = v;
        }
        if let Some(v) = &self.fallback_range {
            c.fallback_range = (v[0], v[1]);
        }
        c.reuse_bracket_if_unchanged |= self.reuse_bracket_if_unchanged;
        c
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel name (see list-kernels).
    #[arg(long)]
    pub kernel: Option<String>,
    /// Kernel parameter NAME=VALUE; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Regression data CSV (column `y` is the response) for lasso_bridge.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

impl KernelArgs {
    fn spec(&self) -> CliResult<KernelSpec> {
        let name = self
            .kernel
            .as_deref()
            .ok_or_else(|| CliError::Usage("--kernel is required".into()))?;
        let mut spec = KernelSpec::new(name, self.params.iter().cloned().collect::<Params>());
        spec.data = self.data.clone().map(|path| DataSource::Csv { path });
        Ok(spec)
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("parameter `{k}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = SamplerArg::Asg)]
    pub sampler: SamplerArg,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// RW-MH proposal standard deviation(s); one value broadcasts.
    #[arg(long, value_delimiter = ',')]
    pub proposal_sd: Option<Vec<f64>>,
    /// Starting point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
    /// Output directory [default: asg-output, or the manifest's when replaying].
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Replay a stored manifest.json (other run flags are ignored, except --output-dir).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SupportArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Coordinate to inspect, 1-based.
    #[arg(long)]
    pub coord: usize,
    /// Values of the other coordinates, in order, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub fixed: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
    /// Skip the Cauchy-transform path and use the grid.
    #[arg(long)]
    pub force_grid: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// Suite spec as JSON; flags below are ignored when given.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    /// Kernels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub kernels: Vec<String>,
    /// Samplers, comma separated.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub samplers: Vec<SamplerArg>,
    /// Wall-clock budget per cell in seconds (fixed-time mode); otherwise
    /// each cell keeps --n-samples draws.
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub replicates: usize,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_delimiter = ',')]
    pub proposal_sd: Option<Vec<f64>>,
    /// Worker threads [env: ASG_THREADS; default: available cores].
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "asg-benchmark")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LassoArgs {
    /// Regression data CSV with a `y` column; synthetic data otherwise.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Synthetic data: observations.
    #[arg(long, default_value_t = 100)]
    pub n_obs: usize,
    /// Synthetic data: predictors.
    #[arg(long, default_value_t = 20)]
    pub n_pred: usize,
    /// Synthetic data: nonzero coefficients.
    #[arg(long, default_value_t = 5)]
    pub sparsity: usize,
    /// Synthetic data: generator seed.
    #[arg(long, default_value_t = 42)]
    pub data_seed: u64,
    /// Run the full 100,000-draw chain instead of the 20,000-draw default.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value = "asg-lasso")]
    pub output_dir: PathBuf,
}

pub const LASSO_DEFAULT_SAMPLES: usize = 20_000;
pub const LASSO_FULL_SAMPLES: usize = 100_000;

fn print_json<T: serde::Serialize>(v: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run_sample(args: &SampleArgs) -> CliResult<()> {
    let manifest = match &args.manifest {
        Some(path) => {
            let mut m: RunManifest = read_json(path)?;
            if let Some(dir) = &args.output_dir {
                m.output_dir = dir.clone();
            }
            m
        }
        None => {
            let config = args.chain.apply(ChainConfig::default());
            let dir = args.output_dir.clone().unwrap_or_else(|| PathBuf::from("asg-output"));
            let mut m = RunManifest::new(args.kernel.spec()?, args.sampler.into(), config, &dir);
            if let Some(sd) = &args.proposal_sd {
                m.proposal_sd = sd.clone();
            }
            m.x0 = args.x0.clone();
            m
        }
    };
    let out = cmd_sample(&manifest)?;
    warn_all(&out.report.warnings);
    let r = &out.report;
    eprintln!(
        "{} / {}: {} draws in {:.3} s, min ESS {:.1}, ESS/s {:.1}{}",
        r.kernel,
        crate::benchmark::sampler_name(r.sampler),
        r.n_retained,
        r.wall_time_seconds,
        r.ess.min_ess,
        r.ess.ess_per_second,
        r.acceptance_rate.map_or(String::new(), |a| format!(", acceptance {a:.3}"))
    );
    println!("{}", out.files.dir.display());
    Ok(())
}

fn run_support(args: &SupportArgs) -> CliResult<()> {
    let opts = SupportOptions {
        s0: args.s0,
        force_grid: args.force_grid,
        ..SupportOptions::with_epsilon(args.epsilon)
    };
    let report = cmd_support(&args.kernel.spec()?, args.coord, &args.fixed, &opts)?;
    match args.format {
        Format::Json => print_json(&report),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["kernel", "coord", "fixed", "lower", "upper", "norm_const", "method"])?;
            let fixed = report.fixed.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            let method = serde_json::to_value(report.method)?;
            w.write_record([
                report.kernel.clone(),
                report.coord.to_string(),
                fixed,
                report.lower.to_string(),
                report.upper.to_string(),
                report.norm_const.to_string(),
                method.as_str().unwrap_or_default().to_string(),
            ])?;
            w.flush().map_err(|e| CliError::io("stdout", e))?;
            Ok(())
        }
    }
}

fn run_benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let suite = match &args.suite {
        Some(path) => read_json::<SuiteSpec>(path)?,
        None => {
            let budget = match (args.time_budget, args.chain.n_samples) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("--time-budget and --n-samples are mutually exclusive".into()))
                }
                (Some(seconds), None) => Budget::FixedTime { seconds },
                (None, n) => Budget::FixedSamples {
                    n_samples: n.unwrap_or(ChainConfig::default().n_samples),
                },
            };
            let config = args.chain.apply(ChainConfig::default());
            SuiteSpec {
                kernels: args.kernels.iter().map(|k| KernelSpec::new(k, Params::new())).collect(),
                samplers: args.samplers.iter().map(|&s| s.into()).collect(),
                budget,
                replicates: args.replicates,
                seed: config.seed,
                proposal_sd: args.proposal_sd.clone().unwrap_or_else(|| vec![1.0]),
                config,
            }
        }
    };
    suite.validate()?;
    let threads = resolve_threads(args.threads)?;
    let report = cmd_benchmark(&suite, threads, &args.output_dir)?;
    for c in report.cells.iter().filter(|c| !c.ok) {
        eprintln!(
            "cell {} ({} / {}, replicate {}) failed: {}",
            c.index,
            c.kernel,
            crate::benchmark::sampler_name(c.sampler),
            c.replicate,
            c.error.as_deref().unwrap_or("")
        );
    }
    for c in &report.cells {
        warn_all(&c.warnings);
    }
    print!("{}", report.table);
    Ok(())
}

fn run_lasso(args: &LassoArgs) -> CliResult<()> {
    let data = match &args.data {
        Some(path) => DataSource::Csv { path: path.clone() },
        None => DataSource::Synthetic(SyntheticSpec {
            n_obs: args.n_obs,
            n_pred: args.n_pred,
            sparsity: args.sparsity,
            seed: args.data_seed,
            ..SyntheticSpec::default()
        }),
    };
    let base = ChainConfig {
        n_samples: if args.full {
            LASSO_FULL_SAMPLES
        } else {
            LASSO_DEFAULT_SAMPLES
        },
        ..ChainConfig::default()
    };
    let job = LassoJob {
        data,
        lambda: args.lambda,
        alpha: args.alpha,
        config: args.chain.apply(base),
        output_dir: args.output_dir.clone(),
    };
    let (outcome, report) = cmd_lasso(&job)?;
    warn_all(&outcome.report.warnings);
    eprintln!(
        "{} draws in {:.2} s, min ESS {:.1}",
        outcome.report.n_retained, report.wall_time_seconds, report.min_ess
    );
    println!("{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}", "coef", "mode", "mean", "sd", "2.5%", "97.5%");
    for c in &report.summary.coefficients {
        println!(
            "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            c.name, c.mode, c.mean, c.sd, c.q025, c.q975
        );
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::ListKernels { format } => {
            let rows = cmd_list_kernels();
            match format {
                Format::Json => print_json(&rows),
                Format::Csv => {
                    print!("{}", kernel_rows_csv(&rows)?);
                    Ok(())
                }
            }
        }
        Command::Sample(a) => run_sample(a),
        Command::Support(a) => run_support(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Lasso(a) => run_lasso(a),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
