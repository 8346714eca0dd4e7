use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use everett_dm::scenario::{self, Context, Report, RunOptions, ScenarioFile};
use everett_dm::Error;

#[derive(Parser)]
#[command(name = "everett-dm", version, about = "Run density-matrix branching scenarios and built-in cases")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tolerance override, e.g. `--tol esp=1e-8` (repeatable).
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    tol: Vec<String>,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { file: PathBuf },
    /// Run a built-in case, or `all` of them.
    Reproduce { id: String },
    /// List built-in cases.
    List,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

fn emit(reports: &[Report], format: Format) {
    match format {
        Format::Text => {
            for r in reports {
                println!("{r}\n");
            }
        }
        Format::Structured if reports.len() == 1 => println!("{}", reports[0].to_json()),
        Format::Structured => println!("{}", serde_json::to_string_pretty(reports).expect("reports serialize")),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for id in scenario::case_ids() {
                println!("{id:<28} {}", scenario::describe_case(id).unwrap_or_default());
            }
            ExitCode::SUCCESS
        }
        Command::Run { file } => {
            let opts = RunOptions {
                tolerances: cli.tol,
                seed: cli.seed,
            };
            match ScenarioFile::from_path(&file).and_then(|f| scenario::run(&f, &opts)) {
                Ok(report) => {
                    emit(std::slice::from_ref(&report), cli.format);
                    ExitCode::from(scenario::exit_status(&report) as u8)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Reproduce { id } => {
            let ctx = match Context::new(cli.tol, cli.seed) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let results = if id == "all" {
                scenario::reproduce_all(&ctx)
            } else {
                vec![scenario::reproduce(&id, &ctx)]
            };
            let mut reports = Vec::new();
            let mut status = 0;
            for r in results {
                match r {
                    Ok(report) => {
                        status = status.max(scenario::exit_status(&report));
                        reports.push(report);
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        status = status.max(e.exit_code());
                    }
                }
            }
            emit(&reports, cli.format);
            if id == "all" && cli.format == Format::Text {
                let passed = reports.iter().filter(|r| r.passed()).count();
                println!("{passed}/{} cases passed", scenario::case_ids().len());
            }
            ExitCode::from(status as u8)
        }
    }
}
