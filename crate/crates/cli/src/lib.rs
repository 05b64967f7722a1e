//! Command-line front end: `run`, `verify` and `sweep`.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Format, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mixflow",
    version,
    about = "Trajectory flows of pure and mixed two-slit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML scenario file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted override such as `physics.delta=0.5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

impl Common {
    /// Defaults, then the file, then `--set`, then the dedicated flags.
    pub fn resolve(&self, extra: &[String]) -> Result<ScenarioConfig, CliError> {
        let mut overrides = self.set.clone();
        overrides.extend_from_slice(extra);
        let mut cfg = ScenarioConfig::load(self.config.as_deref(), &overrides)?;
        if let Some(out) = &self.out {
            cfg.output.path = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        if let Some(f) = self.format {
            cfg.output.format = match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its datasets and manifest.
    Run(Common),
    /// Run the oracle suite and print a residual table.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Scale factor applied to the velocities under test (self-test of the suite).
        #[arg(long, default_value_t = 1.0, hide = true)]
        perturb_velocity: f64,
    },
    /// Repeat `run` for each value of one parameter, one subdirectory per value.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted key to vary, e.g. `physics.delta`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

fn run_one(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let summary = run::run_scenario(cfg)?;
    for f in &summary.files {
        println!(
            "{}  {} rows  {}",
            cfg.output.path.join(&f.name).display(),
            f.rows,
            f.sha256
        );
    }
    if summary.partial() {
        return Err(CliError::Runtime(format!(
            "{} of {} trajectories truncated; see manifest.json",
            summary.failures, summary.trajectories
        )));
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => run_one(&common.resolve(&[])?),
        Command::Verify {
            common,
            perturb_velocity,
        } => {
            let cfg = common.resolve(&[])?;
            let report = verify::verify(
                &cfg,
                verify::VerifyOptions {
                    velocity_scale: perturb_velocity,
                },
            )?;
            print!("{}", report.table());
            if report.pass() {
                Ok(())
            } else {
                let failed = report.checks.iter().filter(|c| !c.pass).count();
                Err(CliError::Verification(format!("{failed} check(s) failed")))
            }
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            let base = common.resolve(&[])?.output.path;
            for v in &values {
                let mut cfg = common.resolve(&[format!("{param}={v}")])?;
                cfg.output.path = base.join(format!("{param}={v}"));
                run_one(&cfg)?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mixflow: {e}");
            e.exit_code()
        }
    }
}
