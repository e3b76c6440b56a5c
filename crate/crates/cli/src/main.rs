use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use polylogic::corpus;
use polylogic::parallel::Execution;
use polylogic::rational::parse_rational;
use polylogic::runner::{self, Report, RunOptions};

#[derive(Parser)]
#[command(name = "polylogic", version, about = "Evaluate conditional statements over parametric probability networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Strict-inequality margin, as a rational such as 1/1000.
    #[arg(long, global = true, default_value = "1/1000")]
    epsilon: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Compare every solved range against a brute-force grid.
    #[arg(long, global = true)]
    oracle_check: bool,

    /// Grid resolution per dimension for the oracle.
    #[arg(long, global = true, default_value_t = 200)]
    grid: usize,

    /// Include the compiled programs in the report.
    #[arg(long, global = true)]
    dump_programs: bool,

    /// Record per-query wall time. Not part of any comparison.
    #[arg(long, global = true)]
    timing: bool,

    /// Run queries one at a time.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every query in a model file.
    Run { file: PathBuf },
    /// Run a bundled model, or `all` of them, against its expectations.
    Corpus { name: String },
    /// Parse and validate a model file without running it.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct LoadError(anyhow::Error);

fn options(cli: &Cli) -> Result<RunOptions> {
    let epsilon = parse_rational(&cli.epsilon).ok_or_else(|| anyhow!("invalid epsilon `{}`", cli.epsilon))?;
    if cli.grid == 0 {
        return Err(anyhow!("grid must be positive"));
    }
    Ok(RunOptions {
        epsilon,
        oracle_check: cli.oracle_check,
        grid: cli.grid,
        dump_programs: cli.dump_programs,
        timing: cli.timing,
        execution: if cli.sequential { Execution::Sequential } else { Execution::default() },
    })
}

fn read_model(path: &PathBuf) -> Result<String, LoadError> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(LoadError)
}

fn render(reports: &[(String, Report)], format: Format, single: bool) -> String {
    match format {
        Format::Text => reports.iter().map(|(_, r)| r.to_text()).collect::<Vec<_>>().join("\n"),
        Format::Json if single => reports[0].1.to_json(),
        Format::Json => {
            let runs: Vec<_> = reports
                .iter()
                .map(|(name, r)| serde_json::json!({ "name": name, "report": r }))
                .collect();
            let ok = reports.iter().all(|(_, r)| r.ok());
            serde_json::to_string_pretty(&serde_json::json!({ "schema": 1, "ok": ok, "runs": runs })).expect("reports serialize")
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, LoadError> {
    let opts = options(cli).map_err(LoadError)?;
    match &cli.command {
        Command::Run { file } => {
            let src = read_model(file)?;
            let report = runner::run_str(&src, &opts).map_err(|e| LoadError(anyhow!("{}: {e}", file.display())))?;
            println!("{}", render(&[(file.display().to_string(), report.clone())], cli.format, true).trim_end());
            Ok(report.exit_code())
        }
        Command::Check { file } => {
            let src = read_model(file)?;
            let loaded = runner::load_str(&src).map_err(|e| LoadError(anyhow!("{}: {e}", file.display())))?;
            let queries = loaded.model.queries().count();
            match cli.format {
                Format::Text => println!("{}: ok ({queries} queries)", file.display()),
                Format::Json => println!("{}", serde_json::json!({ "schema": 1, "file": file.display().to_string(), "ok": true, "queries": queries })),
            }
            Ok(0)
        }
        Command::Corpus { name } => {
            let names: Vec<&str> = if name == "all" {
                corpus::names().collect()
            } else if corpus::source(name).is_some() {
                vec![name.as_str()]
            } else {
                let known = corpus::names().collect::<Vec<_>>().join(", ");
                return Err(LoadError(anyhow!("unknown corpus model `{name}` (known: {known}, all)")));
            };
            let mut reports = Vec::new();
            for n in &names {
                let report = corpus::run(n, &opts)
                    .expect("name checked above")
                    .map_err(|e| LoadError(anyhow!("corpus {n}: {e}")))?;
                reports.push((n.to_string(), report));
            }
            println!("{}", render(&reports, cli.format, names.len() == 1).trim_end());
            if cli.format == Format::Text && names.len() > 1 {
                let bad: Vec<_> = reports.iter().filter(|(_, r)| !r.ok()).map(|(n, _)| n.as_str()).collect();
                let mismatches: usize = reports.iter().map(|(_, r)| r.summary.mismatches).sum();
                println!(
                    "corpus: {} models, {mismatches} mismatches, {}",
                    reports.len(),
                    if bad.is_empty() { "all ok".to_string() } else { format!("failing: {}", bad.join(", ")) }
                );
            }
            Ok(if reports.iter().all(|(_, r)| r.ok()) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(LoadError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
