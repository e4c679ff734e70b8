use std::path::PathBuf;
use std::process::ExitCode;

use blendsem_core::{Error, RunConfig, Solver};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "blendsem",
    version,
    about = "Blended DGSEM/FV Euler solver with a positivity limiter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file
    Run {
        config: PathBuf,
        /// Override a config value, e.g. `--set time.t_end=1`
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (overrides `output.dir`)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_ABORT: u8 = 2;

fn load(config: &PathBuf, overrides: &[String]) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(config).map_err(|e| Error::Io {
        path: config.clone(),
        source: e,
    })?;
    RunConfig::load(&text, std::env::vars(), overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        overrides,
        out_dir,
    } = cli.command;

    let cfg = match load(&config, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = out_dir.unwrap_or_else(|| cfg.output.dir.clone());
    let mut sim = match Solver::new(cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    eprintln!(
        "{}: {}x{} elements, N = {}, t_end = {}",
        sim.config.experiment,
        sim.config.mesh.elements_x,
        sim.config.mesh.elements_y,
        sim.config.degree,
        sim.config.time.t_end
    );
    match sim.run(Some(&out), &mut ()) {
        Ok(summary) => {
            eprintln!(
                "done: {} steps, t = {}, {} samples, {} snapshots, output in {}",
                summary.steps,
                summary.final_time,
                summary.samples.len(),
                summary.snapshots.len(),
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::Aborted { .. }) => {
            eprintln!("abort: {e}");
            ExitCode::from(EXIT_ABORT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
