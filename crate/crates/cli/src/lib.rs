//! Command-line driver: configuration loading, subcommand dispatch and
//! output files.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::Config;
pub use error::CliError;
use output::{OutputDir, Provenance};

#[derive(Debug, Parser)]
#[command(name = "ehdspray", version, about = "Multi-printhead EHD spray deposition simulator")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, env = "EHDSPRAY_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Leave the timestamp out of output headers.
    #[arg(long, global = true)]
    pub reproducible: bool,
    /// Print the documented default configuration and exit.
    #[arg(long)]
    pub print_defaults: bool,
    /// Override a config key, e.g. `--set layout.n_heads=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Potential and field on a regular grid.
    FieldMap,
    /// Per-tip interference ratios over a spacing sweep.
    Interference,
    /// Droplet plume: deposition events and conservation totals.
    Plume,
    /// Plume plus film thickness grid, rate and uniformity.
    Deposit,
    /// Minimum clear spacing for the configured pattern.
    LayoutOpt,
    /// Throughput table over head counts.
    Rate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FieldMap => "field-map",
            Command::Interference => "interference",
            Command::Plume => "plume",
            Command::Deposit => "deposit",
            Command::LayoutOpt => "layout-opt",
            Command::Rate => "rate",
        }
    }
}

/// Loads the config named by `--config`, applying `--set` and `--seed`.
pub fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = Config::from_toml(&text, &cli.overrides).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command line; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if cli.print_defaults {
        print!("{}", config::documented_defaults());
        return Ok(Vec::new());
    }
    let command = cli
        .command
        .ok_or_else(|| CliError::Config("no subcommand given (see --help)".into()))?;
    let cfg = load_config(cli)?;
    let provenance = Provenance::new(command.name(), &cfg.to_toml(), cfg.seed, cli.reproducible);
    let mut out = OutputDir::create(&cli.out_dir, provenance)?;

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.workers {
            if n == 0 {
                return Err(CliError::Config("--workers must be >= 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?
    };
    pool.install(|| {
        commands::echo_config(&cfg, &mut out)?;
        match command {
            Command::FieldMap => commands::field_map(&cfg, &mut out),
            Command::Interference => commands::interference(&cfg, &mut out),
            Command::Plume => commands::plume(&cfg, &mut out),
            Command::Deposit => commands::deposit(&cfg, &mut out),
            Command::LayoutOpt => commands::layout_opt(&cfg, &mut out),
            Command::Rate => commands::rate(&cfg, &mut out),
        }
    })?;
    Ok(out.written().to_vec())
}

/// Parses `args`, runs, reports to stdout/stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
