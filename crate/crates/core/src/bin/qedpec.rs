use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qedpec::experiment::{load_config, run_config, ExperimentConfig, OutputFormat, RunControl, Task};
use qedpec::Result;

/// Order-K error detection + probabilistic error cancellation experiments.
#[derive(Parser)]
#[command(name = "qedpec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile per-block tables and print block summaries.
    Compile {
        #[command(flatten)]
        common: Common,
        /// Write each table and the circuit as text into this directory.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Single-point Monte Carlo run.
    Run(Common),
    /// Monte Carlo over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Continue an interrupted sweep, skipping points already in --out.
        #[arg(long)]
        resume: bool,
    },
    /// Toy-model cost expressions.
    Toy(Common),
    /// Per-block certificates.
    Certify(Common),
    /// Analytic QED+PEC cost against the unencoded PEC baseline.
    Baseline(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Physical qubit counts, comma separated (overrides the config).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Detection intervals, comma separated (overrides the config).
    #[arg(long = "T", value_delimiter = ',')]
    t: Option<Vec<usize>>,
    /// Truncation order (overrides the config).
    #[arg(long = "K")]
    k: Option<usize>,
    /// Trajectory budget (overrides the config).
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn build(task: Task, c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => load_config(p, Some(task))?,
        None => ExperimentConfig::defaults(task),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(f) = c.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(n) = &c.n {
        cfg.code.n = n.clone();
    }
    if let Some(t) = &c.t {
        cfg.code.t = t.clone();
    }
    if let Some(k) = c.k {
        cfg.code.order = k;
    }
    if let Some(s) = c.shots {
        cfg.sampling.shots = s;
    }
    if c.out.is_some() {
        cfg.output = c.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, common, ctl_extra) = match &cli.command {
        Command::Compile { common, tables } => (
            Task::Compile,
            common,
            RunControl {
                tables_dir: tables.clone(),
                ..RunControl::default()
            },
        ),
        Command::Run(c) => (Task::Run, c, RunControl::default()),
        Command::Sweep { common, resume } => (
            Task::Sweep,
            common,
            RunControl {
                resume: *resume,
                ..RunControl::default()
            },
        ),
        Command::Toy(c) => (Task::Toy, c, RunControl::default()),
        Command::Certify(c) => (Task::Certify, c, RunControl::default()),
        Command::Baseline(c) => (Task::Baseline, c, RunControl::default()),
    };
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("qedpec: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match build(task, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qedpec: {e}");
            return ExitCode::from(2);
        }
    };
    let ctl = RunControl {
        out: cfg.output.clone(),
        ..ctl_extra
    };
    match run_config(&cfg, &ctl) {
        Ok(s) => {
            if s.skipped > 0 {
                eprintln!("qedpec: {} points already done, {} new rows", s.skipped, s.rows);
            }
            if s.failed > 0 {
                eprintln!("qedpec: {} of {} rows failed (see status column)", s.failed, s.rows);
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qedpec: {e}");
            ExitCode::from(1)
        }
    }
}
