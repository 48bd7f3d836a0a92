use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use percolate_cli::battery::{battery, find};
use percolate_cli::plot::emit_plot;
use percolate_cli::{failure_code, run_scenario, RunOptions, Scenario};

/// Random spherical obstacles in the unit ball: analytic avoidability
/// criteria against walk-on-spheres escape estimates.
#[derive(Parser, Debug)]
#[command(name = "percolate", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Scenario file to run when no subcommand is given.
    #[arg(long, env = "PERCOLATE_CONFIG", global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the scenario's.
    #[arg(long, env = "PERCOLATE_SEED", global = true)]
    seed: Option<u64>,

    /// Walks per escape estimate.
    #[arg(long, env = "PERCOLATE_PATHS", global = true)]
    paths: Option<u64>,

    /// Realizations per truncation.
    #[arg(long, env = "PERCOLATE_REALIZATIONS", global = true)]
    realizations: Option<usize>,

    /// Output directory; each scenario writes to OUT/<name>/.
    #[arg(long, env = "PERCOLATE_OUT", default_value = "percolate-out", global = true)]
    out: PathBuf,

    /// Also render every CSV as SVG.
    #[arg(long, env = "PERCOLATE_PLOT", global = true)]
    plot: bool,

    /// Worker threads (wall time only; results do not depend on it).
    #[arg(long, env = "PERCOLATE_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario given by --config.
    Run,
    /// Run the built-in scenarios (all, or those named).
    Battery { names: Vec<String> },
    /// Print a built-in scenario as a scenario file.
    Show { name: String },
    /// List the built-in scenarios.
    List,
    /// Render a CSV produced by a run as SVG.
    Plot {
        csv: PathBuf,
        /// Destination; defaults to the CSV path with an .svg extension.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn options(cli: &Cli) -> RunOptions {
    RunOptions {
        seed: cli.seed,
        paths: cli.paths,
        realizations: cli.realizations,
        out: cli.out.clone(),
        plot: cli.plot,
    }
}

fn run_many(scenarios: &[Scenario], opts: &RunOptions) -> u8 {
    let mut code = 0;
    for s in scenarios {
        match run_scenario(s, opts) {
            Ok(outcome) => {
                println!("{}", outcome.summary);
                if code == 0 {
                    code = outcome.exit_code();
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e:#}", s.name);
                if code == 0 || code == 4 {
                    code = failure_code(&e);
                }
            }
        }
    }
    code
}

fn plot(csv: &PathBuf, output: Option<&PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(csv).with_context(|| format!("cannot read {}", csv.display()))?;
    let svg = emit_plot(&text)?;
    let dest = output.cloned().unwrap_or_else(|| csv.with_extension("svg"));
    std::fs::write(&dest, svg).with_context(|| format!("cannot write {}", dest.display()))
}

fn dispatch(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let opts = options(cli);
    match &cli.command {
        None | Some(Command::Run) => {
            let path = cli.config.as_ref().context("--config is required to run a scenario")?;
            let scenario = Scenario::load(path)?;
            Ok(run_many(&[scenario], &opts))
        }
        Some(Command::Battery { names }) => {
            let scenarios = if names.is_empty() {
                battery()
            } else {
                names
                    .iter()
                    .map(|n| find(n).with_context(|| format!("no built-in scenario named {n:?}")))
                    .collect::<Result<_>>()?
            };
            Ok(run_many(&scenarios, &opts))
        }
        Some(Command::Show { name }) => {
            let s = find(name).with_context(|| format!("no built-in scenario named {name:?}"))?;
            print!("{}", s.to_toml());
            Ok(0)
        }
        Some(Command::List) => {
            for s in battery() {
                println!("{}", s.name);
            }
            Ok(0)
        }
        Some(Command::Plot { csv, output }) => {
            plot(csv, output.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(failure_code(&e))
        }
    }
}
