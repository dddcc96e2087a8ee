use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quadsar::runner::{self, RunConfig};
use quadsar::{schema, Result};

#[derive(Parser)]
#[command(
    name = "quadsar",
    version,
    about = "Quadcopter search-and-rescue simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, replaces sim.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "QUADSAR_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Config override as dot.path=VALUE. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn run_config(self) -> RunConfig {
        RunConfig {
            config: self.config,
            seed: self.seed,
            out_dir: self.out,
            overrides: self.overrides,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run(Common),
    /// Run one scenario per parameter value and write a metrics table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Config dot-path to vary, e.g. filter.alpha.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Re-score an existing detection log.
    Eval {
        #[command(flatten)]
        common: Common,
        /// detections.jsonl written by `run`.
        #[arg(long)]
        log: PathBuf,
        /// Association radius in m; defaults to mission.assoc_radius.
        #[arg(long)]
        assoc_radius: Option<f64>,
    },
    /// Print config paths with defaults and the output formats.
    Schema,
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(common) => {
            let rc = common.run_config();
            let report = runner::run(&rc)?;
            let m = &report.metrics;
            match m.recall {
                Some(r) => println!(
                    "recall {r} ({} matched, {} false positives)",
                    m.matched, m.false_positives
                ),
                None => println!("recall n/a ({} false positives)", m.false_positives),
            }
            println!("wrote {}", rc.out_dir.display());
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            let table = runner::run_sweep(&common.run_config(), &param, &values)?;
            print!("{table}");
        }
        Command::Eval {
            common,
            log,
            assoc_radius,
        } => {
            let metrics = runner::eval(&common.run_config(), &log, assoc_radius)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&metrics).expect("metrics serialize")
            );
        }
        Command::Schema => print!("{}", schema::render()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
