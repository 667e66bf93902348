use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use walkbench::commands::{cmd_classify, cmd_coherence, cmd_run};
use walkbench::output::format_sig;
use walkbench::sweep::{cmd_sweep, Axis};

const EXIT_UNHEALTHY: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "walkbench", version, about = "Coined quantum-walk search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write its trace CSV.
    Run {
        file: PathBuf,
        /// Overrides the file's `output`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify the marked arrangement of an experiment file.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Compare simulated and closed-form coherence of the (X, Q) cycle walk.
    Coherence {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long)]
        steps: usize,
        /// Write the table here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment template over a grid of parameter values.
    Sweep {
        file: PathBuf,
        /// `key=v1,v2`, `key=v1|v2` or `key=a..b`; repeat for a product.
        #[arg(long, required = true)]
        vary: Vec<Axis>,
        #[arg(long, default_value = "sweep")]
        out_dir: PathBuf,
        /// Add a classification column to the index.
        #[arg(long)]
        classify: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { file, output } => {
            let report = cmd_run(&file, output)?;
            println!("{}", report.summary());
            if !report.healthy() {
                eprintln!("norm drift exceeded health limit");
            }
            Ok(report.healthy())
        }
        Command::Classify { file, tol } => {
            let report = cmd_classify(&file, tol)?;
            print!("{}", report.render());
            Ok(true)
        }
        Command::Coherence { n, rho, theta, phi, steps, output } => {
            let table = cmd_coherence(n, rho, theta, phi, steps)?;
            let summary = format!("max abs_error {}", format_sig(table.max_abs_error()));
            match output {
                Some(path) => {
                    table.write(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
                    println!("{summary}; wrote {}", path.display());
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    table.write(&mut lock)?;
                    lock.flush()?;
                    eprintln!("{summary}");
                }
            }
            Ok(table.healthy())
        }
        Command::Sweep { file, vary, out_dir, classify, tol } => {
            let report = cmd_sweep(&file, &vary, &out_dir, classify, tol)?;
            println!("{} runs; index {}", report.rows.len(), report.index.display());
            Ok(report.healthy())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_UNHEALTHY),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
