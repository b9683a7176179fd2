//! `interlace` command line front end.
//!
//! Every run prints a JSON report on standard output (or CSV with
//! `--format csv`). Exit status: 0 pass, 1 verification failure, 2 usage or
//! input error, 3 search failure or resource limit.

mod commands;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, ValueEnum};
use serde_json::{json, Value};

use commands::{Command, RunParams, VerifyArgs};
use report::{emit_plot_data, plot_csv, read_input, CliError, CliResult, Exit, RunReport};

#[derive(Parser, Debug)]
#[command(name = "interlace", version, about = "Interlacing-families toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: RunParams,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Directory for report.json and generated artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the plottable sequence of the results as CSV to this file
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    /// JSON pointer into the results selecting the sequence to plot
    #[arg(long, global = true)]
    plot_field: Option<String>,
    /// Record wall-clock time in the report
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Runs `cmd`, turning verification and search failures into failing
/// reports. Usage and input errors propagate.
fn execute(cmd: &Command, params: &RunParams) -> CliResult<(RunReport, commands::Outcome)> {
    let outcome = match commands::run(cmd, params) {
        Ok(o) => o,
        Err(e) if e.exit == Exit::Usage => return Err(e),
        Err(e) => commands::Outcome {
            results: json!({"error": e.message, "search_or_resource": e.exit == Exit::Search}),
            pass: false,
            digest: cmd.input().and_then(|p| read_input(p).ok()).map(|(_, d)| d),
            plot_field: None,
            artifacts: Vec::new(),
        },
    };
    let report = RunReport {
        command: cmd.name().into(),
        input_digest: outcome.digest.clone(),
        parameters: json!({"args": cmd, "budget": params.budget, "tol": params.tol}),
        results: outcome.results.clone(),
        pass: outcome.pass,
        seed: params.seed,
        wall_time: None,
    };
    Ok((report, outcome))
}

/// Largest relative numeric gap between two JSON values. Paths where they
/// differ structurally are pushed onto `mismatches`.
fn json_gap(a: &Value, b: &Value, path: &str, mismatches: &mut Vec<String>) -> f64 {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if x == y {
                0.0
            } else {
                (x - y).abs() / x.abs().max(1.0)
            }
        }
        (Value::Array(xs), Value::Array(ys)) if xs.len() == ys.len() => xs
            .iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (x, y))| json_gap(x, y, &format!("{path}/{i}"), mismatches))
            .fold(0.0, f64::max),
        (Value::Object(xs), Value::Object(ys)) if xs.len() == ys.len() => xs
            .iter()
            .map(|(k, x)| match ys.get(k) {
                Some(y) => json_gap(x, y, &format!("{path}/{k}"), mismatches),
                None => {
                    mismatches.push(format!("{path}/{k}"));
                    0.0
                }
            })
            .fold(0.0, f64::max),
        _ => {
            if a != b {
                mismatches.push(path.to_string());
            }
            0.0
        }
    }
}

fn verify(args: &VerifyArgs, params: &RunParams) -> CliResult<RunReport> {
    let (text, digest) = read_input(&args.report)?;
    let saved: RunReport = serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!("{}: line {} column {}: {e}", args.report.display(), e.line(), e.column()))
    })?;
    let cmd: Command = serde_json::from_value(saved.parameters["args"].clone())
        .map_err(|e| CliError::usage(format!("{}: unreadable parameters: {e}", args.report.display())))?;
    if matches!(cmd, Command::Verify(_)) {
        return Err(CliError::usage("cannot verify a verify report"));
    }
    let field = |k: &str| saved.parameters.get(k).cloned().ok_or_else(|| CliError::usage(format!("missing parameter {k}")));
    let rerun_params = RunParams {
        seed: saved.seed,
        budget: serde_json::from_value(field("budget")?).map_err(|e| CliError::usage(e.to_string()))?,
        tol: serde_json::from_value(field("tol")?).map_err(|e| CliError::usage(e.to_string()))?,
    };
    let (rerun, _) = execute(&cmd, &rerun_params)?;
    let digest_match = rerun.input_digest == saved.input_digest;
    let mut mismatches = Vec::new();
    let gap = json_gap(&saved.results, &rerun.results, "", &mut mismatches);
    let results_match = mismatches.is_empty() && gap <= params.tol;
    let pass = digest_match && results_match && rerun.pass == saved.pass;
    mismatches.truncate(20);
    Ok(RunReport {
        command: "verify".into(),
        input_digest: Some(digest),
        parameters: json!({"args": Command::Verify(args.clone()), "tol": params.tol}),
        results: json!({
            "verified_command": saved.command,
            "digest_match": digest_match,
            "results_match": results_match,
            "max_relative_difference": gap,
            "structural_mismatches": mismatches,
            "saved_pass": saved.pass,
            "rerun_pass": rerun.pass,
        }),
        pass,
        seed: saved.seed,
        wall_time: None,
    })
}

fn write(path: &PathBuf, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn main_inner(cli: &Cli) -> CliResult<Exit> {
    let start = Instant::now();
    let (mut report, artifacts, plot_field) = match &cli.command {
        Command::Verify(args) => (verify(args, &cli.params)?, Vec::new(), None),
        cmd => {
            let (report, outcome) = execute(cmd, &cli.params)?;
            (report, outcome.artifacts, outcome.plot_field)
        }
    };
    if cli.output.timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    let plot_field = cli.output.plot_field.clone().or(plot_field);
    let need_plot = cli.output.plot.is_some() || cli.output.format == Format::Csv;
    let plot_field = match plot_field {
        Some(f) => f,
        None if need_plot => return Err(CliError::usage("this command has no sequence to plot; pass --plot-field")),
        None => String::new(),
    };
    if let Some(dir) = &cli.output.out {
        fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
        for (name, contents) in &artifacts {
            write(&dir.join(name), contents)?;
        }
        write(&dir.join("report.json"), &report.to_json())?;
    }
    if let Some(path) = &cli.output.plot {
        emit_plot_data(&report, &plot_field, path)?;
    }
    match cli.output.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Csv => print!("{}", plot_csv(&report, &plot_field)?),
    }
    Ok(report.exit())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
