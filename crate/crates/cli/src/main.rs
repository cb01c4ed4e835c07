use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tvspec_cli::emit::{self, Format};
use tvspec_cli::{gallery, run_gallery, run_scenario, CliError, Params, Report, Scenario};

#[derive(Parser)]
#[command(name = "tvspec", version, about = "Spectral radii and Neumann resolvents on sequence spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run every registered example
    Gallery {
        /// Only these ids
        #[arg(long = "id")]
        ids: Vec<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// List registered examples
    List,
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write files here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Opts {
    fn params(&self) -> Params {
        Params { seed: self.seed, depth: self.depth, level: self.level }
    }
}

fn output(report: &Report, opts: &Opts) -> Result<(), CliError> {
    match &opts.out_dir {
        Some(dir) => {
            for name in emit::emit(report, opts.format, dir)? {
                eprintln!("wrote {}", dir.join(name).display());
            }
        }
        None => print!("{}", emit::render(report, opts.format)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for e in &gallery::REGISTRY {
                println!("{:<32} {}", e.id, e.title);
                println!("{:<32} expected: {}", "", e.expected);
            }
            return ExitCode::SUCCESS;
        }
        Command::Run { scenario, opts } => Scenario::load(&scenario)
            .and_then(|s| run_scenario(&s, &opts.params()))
            .and_then(|r| output(&r, &opts).map(|_| r.passed)),
        Command::Gallery { ids, opts } => {
            let unknown: Vec<&String> = ids.iter().filter(|i| gallery::find(i).is_none()).collect();
            if !unknown.is_empty() {
                eprintln!("error: unknown gallery ids {unknown:?}");
                return ExitCode::from(2);
            }
            let report = if ids.is_empty() {
                run_gallery(&opts.params())
            } else {
                let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
                tvspec_cli::report::run_gallery_ids(&ids, &opts.params())
            };
            output(&report, &opts).map(|_| report.passed)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
