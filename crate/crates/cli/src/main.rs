mod args;
mod commands;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::Parser;
use smsp_core::SmspError;

use args::{Cli, Cmd};
use manifest::{digests, git_describe, manifest_path_for, RunManifest};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Raised when a replayed run does not reproduce its recorded outputs.
#[derive(Debug)]
struct ReplayMismatch(Vec<String>);

impl std::fmt::Display for ReplayMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "replay changed {} output(s): {}", self.0.len(), self.0.join(", "))
    }
}

impl std::error::Error for ReplayMismatch {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SmspError>() {
            return if e.is_io() {
                EXIT_IO
            } else if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return EXIT_IO;
        }
        if cause.is::<ReplayMismatch>() {
            return EXIT_NUMERICAL;
        }
    }
    1
}

/// The error chain joined by `: `, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn config_snapshot(cmd: &Cmd) -> Result<serde_json::Value> {
    Ok(match cmd {
        Cmd::SimulateYinyang(a) => serde_json::to_value(a)?,
        Cmd::Fit(a) => serde_json::to_value(a)?,
        Cmd::Predict(a) => serde_json::to_value(a)?,
        Cmd::Metrics(a) => serde_json::to_value(a)?,
        Cmd::Shape(a) => serde_json::to_value(a)?,
        Cmd::Invariance(a) => serde_json::to_value(a)?,
        Cmd::Timing(a) => serde_json::to_value(a)?,
        Cmd::Replay(a) => serde_json::to_value(a)?,
    })
}

/// Runs one command and writes its manifest; returns the manifest.
fn execute(cmd: &Cmd, argv: Vec<String>) -> Result<RunManifest> {
    let start = Instant::now();
    let produced = match cmd {
        Cmd::SimulateYinyang(a) => commands::simulate_yinyang(a)?,
        Cmd::Fit(a) => commands::fit(a)?,
        Cmd::Predict(a) => commands::predict(a)?,
        Cmd::Metrics(a) => commands::metrics_cmd(a)?,
        Cmd::Shape(a) => commands::shape(a)?,
        Cmd::Invariance(a) => commands::invariance(a)?,
        Cmd::Timing(a) => commands::timing(a)?,
        Cmd::Replay(a) => return replay(&a.manifest),
    };
    let manifest = RunManifest {
        args: argv,
        command: cmd.name().to_string(),
        seed: produced.seed,
        config: config_snapshot(cmd)?,
        git: git_describe(),
        wall_seconds: start.elapsed().as_secs_f64(),
        deterministic: produced.deterministic,
        outputs: digests(&produced.outputs)?,
    };
    let path = manifest_path_for(&produced.anchor);
    manifest.save(&path)?;
    log::info!("manifest written to {}", path.display());
    Ok(manifest)
}

fn replay(path: &std::path::Path) -> Result<RunManifest> {
    let recorded = RunManifest::load(path)?;
    let cli = Cli::try_parse_from(std::iter::once("smsp".to_string()).chain(recorded.args.iter().cloned()))
        .map_err(|e| anyhow!(SmspError::Config(format!("manifest arguments do not parse: {e}"))))?;
    if matches!(cli.command, Cmd::Replay(_)) {
        bail!(SmspError::Config("refusing to replay a replay".into()));
    }
    let fresh = execute(&cli.command, recorded.args.clone())?;
    if !recorded.deterministic {
        println!("{} is not deterministic; outputs regenerated without comparison", recorded.command);
        return Ok(fresh);
    }
    let changed: Vec<String> = recorded
        .outputs
        .iter()
        .filter(|(file, digest)| fresh.outputs.get(*file) != Some(digest))
        .map(|(file, _)| file.clone())
        .collect();
    if !changed.is_empty() {
        return Err(ReplayMismatch(changed).into());
    }
    println!("replay reproduced {} output digest(s)", recorded.outputs.len());
    Ok(fresh)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<OsString> = std::env::args_os().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
