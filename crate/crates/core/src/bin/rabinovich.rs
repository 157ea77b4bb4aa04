use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rabinovich::app::{run_analyze, run_simulate, AnalysisTarget};
use rabinovich::config::ScenarioConfig;
use rabinovich::plot::{emit_plot_data, parse_pair};
use rabinovich::verify::{run_verify, Suite};
use rabinovich::Error;

#[derive(Parser)]
#[command(name = "rabinovich", version, about = "Simulate, analyze and verify Rabinovich-type systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Equilibria, characteristic polynomials, Matignon verdicts or delay roots.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// equilibria | charpoly | matignon | roots
        #[arg(long)]
        target: String,
    },
    /// Run an invariant suite: dynamics, poisson, metriplectic, delay, fractional, stability or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Phase-plane projection of a trajectory file.
    Plot {
        trajectory: PathBuf,
        /// Coordinate pair `i,j`.
        #[arg(long)]
        pair: String,
        /// SVG instead of two-column CSV.
        #[arg(long)]
        svg: bool,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Simulate { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let path = run_simulate(&cfg)?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Analyze { config, target } => {
            let target: AnalysisTarget = target.parse()?;
            let cfg = ScenarioConfig::from_path(&config)?;
            let report = run_analyze(&cfg, target)?;
            print!("{}", report.text);
            Ok(0)
        }
        Command::Verify { suite, seed, json } => {
            let suite: Suite = suite.parse()?;
            let report = run_verify(suite, seed);
            if json {
                println!("{}", report.to_json()?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(report.exit_code())
        }
        Command::Plot {
            trajectory,
            pair,
            svg,
            output,
        } => {
            let pair = parse_pair(&pair)?;
            let data = emit_plot_data(&trajectory, pair, svg)?;
            match output {
                Some(p) => std::fs::write(p, data)?,
                None => print!("{data}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
