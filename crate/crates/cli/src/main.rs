//! `cwl` - experiment runner binding the corner-wave laboratory into
//! reproducible, file-driven studies.
//!
//! Every subcommand reads a JSON config (or uses its built-in default),
//! writes CSV/JSON/SVG artifacts plus a `manifest.json` with content hashes
//! into `--out`, and is deterministic given identical config and seed.
//! Exit codes: 0 success, 2 config/schema violation, 3 numerical failure
//! (with `error.json` diagnostics).

mod commands;
mod config;
mod emit;

use clap::{Parser, Subcommand};
use config::load_config;
use emit::Emitter;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl RunError {
    fn config_err(msg: impl Into<String>) -> Self {
        RunError::Config(msg.into())
    }

    fn numerical(msg: impl Into<String>) -> Self {
        RunError::Numerical(msg.into())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Parser)]
#[command(name = "cwl", version, about = "Corner-wave laboratory experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file (defaults are built in)
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory for artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Job-level parallelism
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for the deterministic random choices
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// CGO closed forms, decay slopes and hard inequality studies
    VerifyCgo,
    /// Regularized Herglotz kernel fits with (truncation, residual, norm) reports
    FitHerglotz,
    /// Conductive transmission eigenpairs on a meshed medium
    Eig,
    /// Corner-vanishing profile of the leading eigenfunction
    CornerProfile,
    /// Forward conductive scattering with far-field output
    Forward,
    /// Far field from a saved ring trace
    Farfield,
    /// Twin-polygon single-far-field distinguishability report
    Distinguish,
    /// Surface-parameter recovery from one far field
    RecoverEta,
    /// Dimension-reduction identity and bracket checks
    DimredVerify,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CWL_LOG")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(RunError::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            let diag = serde_json::json!({ "error": "numerical", "detail": msg });
            let _ = std::fs::create_dir_all(&cli.out);
            let _ = std::fs::write(
                cli.out.join("error.json"),
                serde_json::to_string_pretty(&diag).unwrap(),
            );
            3
        }
        Err(RunError::Io(e)) => {
            eprintln!("i/o error: {e}");
            3
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<(), RunError> {
    match &cli.command {
        Command::VerifyCgo => dispatch(cli, "verify-cgo", |cfg: &config::VerifyCgoCfg, em| {
            commands::verify_cgo(cfg, em, cli.jobs)
        }),
        Command::FitHerglotz => dispatch(cli, "fit-herglotz", |cfg: &config::FitHerglotzCfg, em| {
            commands::fit_herglotz(cfg, em, cli.jobs)
        }),
        Command::Eig => dispatch(cli, "eig", |cfg: &config::EigCfg, em| {
            commands::eig(cfg, em, cli.seed)
        }),
        Command::CornerProfile => {
            dispatch(cli, "corner-profile", |cfg: &config::CornerProfileCfg, em| {
                commands::corner_profile(cfg, em, cli.seed)
            })
        }
        Command::Forward => dispatch(cli, "forward", |cfg: &config::ForwardCfg, em| {
            commands::forward(cfg, em, cli.seed)
        }),
        Command::Farfield => dispatch_no_default(cli, "farfield", |cfg: &config::FarfieldCfg, em| {
            commands::farfield(cfg, em)
        }),
        Command::Distinguish => dispatch(cli, "distinguish", |cfg: &config::DistinguishCfg, em| {
            commands::distinguish_cmd(cfg, em, cli.seed)
        }),
        Command::RecoverEta => dispatch(cli, "recover-eta", |cfg: &config::RecoverEtaCfg, em| {
            commands::recover_eta_cmd(cfg, em, cli.seed)
        }),
        Command::DimredVerify => {
            dispatch(cli, "dimred-verify", |cfg: &config::DimredVerifyCfg, em| {
                commands::dimred_verify(cfg, em, cli.seed)
            })
        }
    }
}

fn dispatch<C, F>(cli: &Cli, name: &str, body: F) -> Result<(), RunError>
where
    C: Default + Serialize + for<'de> serde::Deserialize<'de>,
    F: FnOnce(&C, &mut Emitter) -> Result<(), RunError>,
{
    let cfg: C = load_config(cli.config.as_deref()).map_err(RunError::Config)?;
    run_with(cli, name, &cfg, body)
}

/// Commands without a sensible default config require `--config`.
fn dispatch_no_default<C, F>(cli: &Cli, name: &str, body: F) -> Result<(), RunError>
where
    C: Serialize + for<'de> serde::Deserialize<'de>,
    F: FnOnce(&C, &mut Emitter) -> Result<(), RunError>,
{
    let Some(path) = cli.config.as_deref() else {
        return Err(RunError::Config(format!("`{name}` requires --config")));
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{path}: {e}")))?;
    let cfg: C =
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{path}: {e}")))?;
    run_with(cli, name, &cfg, body)
}

fn run_with<C, F>(cli: &Cli, name: &str, cfg: &C, body: F) -> Result<(), RunError>
where
    C: Serialize,
    F: FnOnce(&C, &mut Emitter) -> Result<(), RunError>,
{
    log::info!("running `{name}` into {:?}", cli.out);
    let mut em = Emitter::new(&cli.out)?;
    let echo = serde_json::to_string(cfg).expect("config echo");
    body(cfg, &mut em)?;
    em.finish(name, cli.seed, &echo)?;
    log::info!("`{name}` finished");
    Ok(())
}
