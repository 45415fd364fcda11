mod commands;
mod config;
mod output;
mod repro;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::RunConfig;
use output::Output;
use repro::Figure;

#[derive(Parser, Debug)]
#[command(name = "bec-focus", version, about = "Diffractive focusing of a box-trapped condensate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set evolution.dt=5e-5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Validate the configuration and exit.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Ground state of the trap.
    Ground,
    /// Quench and free evolution; focusing factor.
    Evolve,
    /// Wigner functions at the configured times.
    Wigner,
    /// Classical trajectories in the mean-field potential.
    Trajectories,
    /// Parameter sweep from the `[sweep]` block.
    Sweep,
    /// 3D versus quasi-1D comparison.
    Validate3d,
    /// Sample the LG potentials.
    PotentialDump,
    /// Canned run for one figure.
    Repro {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Command {
    fn name(self) -> String {
        match self {
            Command::Ground => "ground".into(),
            Command::Evolve => "evolve".into(),
            Command::Wigner => "wigner".into(),
            Command::Trajectories => "trajectories".into(),
            Command::Sweep => "sweep".into(),
            Command::Validate3d => "validate3d".into(),
            Command::PotentialDump => "potential-dump".into(),
            Command::Repro { figure } => format!("repro {}", figure.name()),
        }
    }
}

/// Error reported as JSON on stderr with a matching exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub key: Option<String>,
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError { kind: "validation", key: Some(key.into()), message: message.into(), code: 1 }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { kind: "numeric", key: None, message: message.into(), code: 2 }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { kind: "io", key: None, message: format!("{}: {e}", path.display()), code: 2 }
    }
}

impl From<bec_focus::Error> for CliError {
    fn from(e: bec_focus::Error) -> Self {
        use bec_focus::Error as E;
        let message = e.to_string();
        match e {
            E::Config { key, .. } => CliError { kind: "validation", key: Some(key), message, code: 1 },
            E::Domain(_) => CliError { kind: "domain", key: None, message, code: 1 },
            E::WindowTooSmall { .. } => CliError { kind: "window", key: Some("grid.half_width".into()), message, code: 1 },
            E::MemoryBudget { .. } => CliError { kind: "memory", key: Some("validate3d.memory_cap".into()), message, code: 1 },
            E::NotConverged { .. } => CliError { kind: "not_converged", key: Some("itp.max_iters".into()), message, code: 2 },
            E::Numeric(_) => CliError { kind: "numeric", key: None, message, code: 2 },
            E::Io(_) => CliError { kind: "io", key: None, message, code: 2 },
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if cli.threads == Some(0) {
        return Err(CliError::validation("threads", "must be >= 1"));
    }
    cfg.validate()?;
    let hash = cfg.hash();
    if cli.dry_run {
        println!("{}", json!({ "valid": true, "command": cli.command.name(), "config_hash": hash }));
        return Ok(());
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::numeric(e.to_string()))?;
    }
    let mut out = Output::new(&cfg.output_dir, &hash)?;
    out.json("config.json", json!({ "command": cli.command.name(), "config": cfg }))?;
    let summary = match cli.command {
        Command::Ground => commands::ground(&cfg, &mut out)?,
        Command::Evolve => commands::evolve(&cfg, &mut out)?,
        Command::Wigner => commands::wigner(&cfg, &mut out)?,
        Command::Trajectories => commands::trajectories(&cfg, &mut out)?,
        Command::Sweep => commands::sweep(&cfg, &mut out, cli.threads)?,
        Command::Validate3d => commands::validate3d(&cfg, &mut out)?,
        Command::PotentialDump => commands::potential_dump(&cfg, &mut out)?,
        Command::Repro { figure } => repro::run(figure, &cfg, &mut out, cli.threads)?,
    };
    println!("{}", serde_json::to_string(&json!({ "command": cli.command.name(), "summary": summary, "config_hash": hash })).unwrap_or_default());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let v = json!({ "error": { "kind": e.kind, "key": e.key, "message": e.message, "exit_code": e.code } });
            eprintln!("{v}");
            ExitCode::from(e.code)
        }
    }
}
