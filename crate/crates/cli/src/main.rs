//! `dchoice`: experiment harness for d-choice storage load balancing.
//!
//! Exit codes: 0 success, 2 config or input error, 3 numerical failure,
//! 1 anything else (e.g. an unwritable output path).

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dchoice::allocation::AllocationKind;

use commands::InspectSource;
use config::{DesignSpec, ExperimentConfig, Format, OneOrMany, Overrides, SigmaSpec};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dchoice", version, about = "Load-balancing experiments on redundant storage allocations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate P_Σ and the imbalance factor over a sweep of designs and loads.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Statistical checks of the spacing limit laws.
    LimitChecks {
        #[command(flatten)]
        common: Common,
        /// Number of spacings (overrides `limit_checks.k`).
        #[arg(long)]
        k: Option<usize>,
        /// Window width (overrides `limit_checks.d`).
        #[arg(long)]
        d: Option<usize>,
    },
    /// Validate an allocation and print its structural summary.
    Inspect {
        #[command(flatten)]
        common: Common,
        /// Allocation JSON file.
        #[arg(long, conflicts_with_all = ["config", "kind"])]
        file: Option<PathBuf>,
        #[command(flatten)]
        design: DesignArgs,
    },
    /// Exact P_Σ for three objects on three nodes.
    ExactK3 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArgs,
        /// Cumulative load.
        #[arg(long)]
        sigma: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output file; the format follows the extension unless --format is given.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A builder call given on the command line.
#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long)]
    kind: Option<AllocationKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    r: usize,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, trials: self.trials, out: self.out.clone(), format: self.format }
    }

    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&self.overrides());
        Ok(cfg)
    }
}

impl DesignArgs {
    fn design(&self, default_kind: Option<AllocationKind>, default_n: Option<usize>) -> CliResult<Option<DesignSpec>> {
        let Some(kind) = self.kind.or(default_kind) else {
            return Ok(None);
        };
        let n = self.n.or(default_n).ok_or_else(|| CliError::config("--n", "missing"))?;
        let d = self.d.ok_or_else(|| CliError::config("--d", "missing"))?;
        Ok(Some(DesignSpec { kind, n, k: self.k, d, r: self.r }))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { common } => commands::simulate(&common.load()?),
        Command::LimitChecks { common, k, d } => {
            let mut cfg = common.load()?;
            if k.is_some() || d.is_some() {
                let mut sec = cfg.limit_checks.unwrap_or(config::LimitSection {
                    k: 0,
                    d: 1,
                    ks_threshold: config::DEFAULT_KS_THRESHOLD,
                });
                sec.k = k.unwrap_or(sec.k);
                sec.d = d.unwrap_or(sec.d);
                if sec.k == 0 {
                    return Err(CliError::config("--k", "missing"));
                }
                cfg.limit_checks = Some(sec);
            }
            commands::limit_checks(&cfg)
        }
        Command::Inspect { common, file, design } => {
            let cfg = common.load()?;
            let src = if let Some(path) = file {
                InspectSource::File(path)
            } else if let Some(spec) = design.design(None, None)? {
                InspectSource::Config(ExperimentConfig { designs: vec![spec], kind: None, n: None, d: None, ..cfg.clone() })
            } else if common.config.is_some() {
                InspectSource::Config(cfg.clone())
            } else {
                return Err(CliError::config("inspect", "give --file, --config or --kind/--n/--d"));
            };
            let outputs = if common.out.is_some() || common.format.is_some() { cfg.outputs } else { Vec::new() };
            commands::inspect(&src, &outputs)
        }
        Command::ExactK3 { common, design, sigma } => {
            let mut cfg = common.load()?;
            let default_kind = common.config.is_none().then_some(AllocationKind::Cyclic);
            if let Some(spec) = design.design(default_kind, Some(3))? {
                cfg.kind = None;
                cfg.n = None;
                cfg.d = None;
                cfg.designs = vec![spec];
            }
            if let Some(s) = sigma {
                cfg.sigma = Some(OneOrMany::One(SigmaSpec::Absolute(s)));
            } else if cfg.sigma.is_none() {
                cfg.sigma = Some(OneOrMany::One(SigmaSpec::Absolute(3.0)));
            }
            commands::exact_k3(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dchoice: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
