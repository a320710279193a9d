//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "wasubench",
    version,
    about = "Benchmark WebAssembly engines: manage registries, run measured executions, check feature support, and analyze results."
)]
pub struct Cli {
    /// Registry directory holding runtimes/ and benchmarks/.
    #[arg(long, global = true, env = "WASUBENCH_REGISTRY", default_value = "./registry")]
    pub registry: PathBuf,

    /// Directory for generated files (results, charts, CSV exports).
    #[arg(long, global = true, default_value = "./out")]
    pub output_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect benchmark groups.
    Benchmarks {
        #[command(subcommand)]
        action: BenchmarksAction,
    },
    /// Manage registered engines.
    Runtimes {
        #[command(subcommand)]
        action: RuntimesAction,
    },
    /// Execute benchmarks and write a results file.
    Run(RunArgs),
    /// Run a feature payload set across engines and print the support matrix.
    Check(CheckArgs),
    /// Export a results file to CSV.
    Export(ExportArgs),
    /// Render charts from a results file.
    Plot(PlotArgs),
    /// Compute dynamic metrics from instruction profiles.
    Analyze(AnalyzeArgs),
    /// Principal component analysis over a metrics CSV.
    Pca(PcaArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchmarksAction {
    /// List groups and their benchmark counts.
    List,
    /// Show one group (`GROUP`) or one benchmark (`GROUP/ID`).
    Show { target: String },
}

#[derive(Debug, Subcommand)]
pub enum RuntimesAction {
    /// List registered runtimes and their subruntimes.
    List,
    /// Register a runtime from a JSON spec file.
    Add { spec: PathBuf },
    /// Remove a registered runtime by name.
    Remove { name: String },
    /// Show one runtime's full configuration.
    Show { name: String },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run every benchmark of this group (repeatable).
    #[arg(long = "group", value_name = "GROUP")]
    pub groups: Vec<String>,

    /// Run a single benchmark, written GROUP/ID (repeatable).
    #[arg(long = "bench", value_name = "GROUP/ID")]
    pub benches: Vec<String>,

    /// Runtime selector, NAME or NAME:SUBRUNTIME (repeatable; default: all).
    #[arg(long = "runtime", value_name = "NAME[:SUB]")]
    pub runtimes: Vec<String>,

    /// Repetitions per benchmark×runtime pair.
    #[arg(short = 'n', long = "repetitions", default_value_t = 1)]
    pub repetitions: u32,

    /// Per-run timeout in milliseconds.
    #[arg(long, value_name = "MS")]
    pub timeout: Option<u64>,

    /// Disable peak RSS/VMS tracking.
    #[arg(long = "no-mem")]
    pub no_mem: bool,

    /// Results file path (default: <output-dir>/results-<timestamp>.json).
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Print resolved command lines without executing anything.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Payload set (benchmark group name, e.g. wasm-features).
    #[arg(long)]
    pub set: String,

    /// Engine selector, NAME or NAME:SUBRUNTIME (repeatable, required).
    #[arg(long = "runtime", value_name = "NAME[:SUB]", required = true)]
    pub runtimes: Vec<String>,

    /// Per-payload timeout in milliseconds (default 10000).
    #[arg(long, value_name = "MS")]
    pub timeout: Option<u64>,

    /// Also write the matrix as CSV (payload,engine,verdict).
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Results file produced by `run`.
    pub results: PathBuf,

    /// Write CSV here instead of stdout.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Results file produced by `run`.
    pub results: PathBuf,

    /// Use a log10 scale for bar heights.
    #[arg(long)]
    pub log: bool,

    /// Directory for the SVG/CSV outputs (default: <output-dir>).
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of profile JSON files.
    #[arg(long, value_name = "DIR")]
    pub profiles: PathBuf,

    /// Results file whose summaries feed the time_ns/rss/vms columns.
    #[arg(long, value_name = "FILE")]
    pub results: Option<PathBuf>,

    /// Write the metrics CSV here instead of stdout.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Also render one function-execution CDF chart per profile into DIR.
    #[arg(long, value_name = "DIR")]
    pub cdf: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    /// Metrics CSV produced by `analyze`.
    pub metrics: PathBuf,

    /// Number of leading components to report and plot.
    #[arg(long, default_value_t = 4)]
    pub components: usize,

    /// Directory for loadings/scores/variance CSVs and scatter SVGs
    /// (default: <output-dir>).
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    pub output: Option<PathBuf>,
}
