use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use toravg_cli::{parse_scenario, run_scenario, RunOptions, TASK_KINDS};

#[derive(Parser)]
#[command(name = "toravg", version, about = "Run averaging and normal-form scenarios on angle-action phase spaces")]
struct Cli {
    /// Print the available task kinds and exit.
    #[arg(long)]
    list_tasks: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and emit its JSON report.
    Run {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Uniform multiplier on every upper tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Seed for property suites and sampled points; overrides the scenario's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(file: PathBuf, out: Option<PathBuf>, tol_scale: f64, seed: Option<u64>) -> anyhow::Result<bool> {
    anyhow::ensure!(tol_scale.is_finite() && tol_scale > 0.0, "--tol-scale must be positive");
    let text = std::fs::read_to_string(&file).with_context(|| format!("cannot read {}", file.display()))?;
    let scenario = parse_scenario(&text).with_context(|| format!("in {}", file.display()))?;
    let opts = RunOptions {
        seed,
        tol_scale,
        output_dir: file.parent().map(PathBuf::from),
        source: file.file_name().map(|n| n.to_string_lossy().into_owned()),
    };
    let report = run_scenario(&scenario, &opts).with_context(|| format!("in {}", file.display()))?;
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{json}"),
    }
    for t in report.tasks.iter().filter(|t| !t.pass) {
        let why = t.error.clone().unwrap_or_else(|| {
            let ids: Vec<&str> = t.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
            format!("failed checks: {}", ids.join(", "))
        });
        eprintln!("task {} ({}, line {}) failed: {why}", t.index, t.kind, t.line);
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_tasks {
        for (_, name, about) in TASK_KINDS {
            println!("{name:<16}{about}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(Command::Run { file, out, tol_scale, seed }) = cli.command else {
        eprintln!("nothing to do; try `toravg run <file>` or `toravg --list-tasks`");
        return ExitCode::from(2);
    };
    match run(file, out, tol_scale, seed) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
