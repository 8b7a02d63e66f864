mod args;
mod commands;
mod figures;
mod output;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command};
use output::{write_bundle, Run, RunManifest};

/// Invalid flags or inputs; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<blockade::Error>() {
        Some(blockade::Error::InvalidParameter { .. } | blockade::Error::Parse(_)) => 2,
        Some(_) => 3,
        None => 1,
    }
}

/// Arguments with `--out` and `--workers` removed.
fn reproducible_argv(raw: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in raw {
        if std::mem::take(&mut skip) {
            continue;
        }
        match a.as_str() {
            "--out" | "--workers" => skip = true,
            s if s.starts_with("--out=") || s.starts_with("--workers=") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Staircase(_) => "staircase",
        Command::Sweep(_) => "sweep",
        Command::Window(_) => "window",
        Command::G2(_) => "g2",
        Command::G2scan(_) => "g2scan",
        Command::Response(_) => "response",
        Command::Oracle(_) => "oracle",
        Command::Figure(_) => "figure",
        Command::Replay(_) => "replay",
    }
}

fn execute(cmd: &Command) -> Result<Run> {
    match cmd {
        Command::Staircase(a) => commands::staircase_cmd(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::Window(a) => commands::window_cmd(a),
        Command::G2(a) => commands::g2_cmd(a),
        Command::G2scan(a) => commands::g2scan_cmd(a),
        Command::Response(a) => commands::response_cmd(a),
        Command::Oracle(a) => commands::oracle_cmd(a),
        Command::Figure(a) => figures::figure(a.preset),
        Command::Replay(_) => unreachable!("replay is resolved before execution"),
    }
}

fn load_replay(path: &Path) -> Result<(Cli, Vec<String>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: not a run manifest: {e}", path.display())))?;
    if manifest.schema_version != output::SCHEMA_VERSION {
        return Err(UsageError(format!("unsupported manifest schema_version {}", manifest.schema_version)).into());
    }
    let cli = Cli::try_parse_from(std::iter::once("blockade".to_string()).chain(manifest.argv.iter().cloned()))
        .map_err(|e| UsageError(format!("manifest argv does not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(UsageError("a manifest cannot replay another manifest".into()).into());
    }
    Ok((cli, manifest.argv))
}

fn run(cli: Cli, raw: &[String]) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(UsageError("--workers must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker pool")?;
    }
    let (command, argv) = match &cli.command {
        Command::Replay(r) => {
            let (inner, argv) = load_replay(&r.manifest)?;
            (inner.command, argv)
        }
        _ => (cli.command, reproducible_argv(raw)),
    };
    let start = Instant::now();
    let result = execute(&command)?;
    let duration = start.elapsed().as_secs_f64();
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{}", result.summary);
    match &cli.out {
        Some(dir) => {
            let manifest = RunManifest::new(&result, subcommand_name(&command), argv, duration);
            let (csv, json) = write_bundle(dir, &result, &manifest)
                .with_context(|| format!("writing into {}", dir.display()))?;
            eprintln!("wrote {} and {}", csv.display(), json.display());
        }
        None => print!("{}", result.table.to_csv()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let raw: Vec<String> = std::env::args().skip(1).collect();
    match run(cli, &raw) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
