use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk_cli::{replay, run_config, run_preset, CliError, Overrides, RunManifest, PRESETS};
use qwalk_core::Workers;

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Disordered discrete-time quantum walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: QWALK_WORKERS, then CPU count)
    #[arg(long, env = "QWALK_WORKERS")]
    workers: Option<usize>,
    /// Base coin angle in radians
    #[arg(long)]
    theta: Option<f64>,
    /// Disorder strength in [0, 1]
    #[arg(long)]
    strength: Option<f64>,
    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            steps: self.steps,
            realizations: self.realizations,
            seed: self.seed,
            theta: self.theta,
            strength: self.strength,
            svg: self.svg,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a named preset
    Run {
        preset: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment described by a TOML file
    Config {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run the experiment recorded in a manifest.json
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, env = "QWALK_WORKERS")]
        workers: Option<usize>,
    },
    /// List the available presets
    ListPresets,
}

fn workers(w: Option<usize>) -> Result<Workers, CliError> {
    match w {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => Ok(Workers(n)),
        None => Ok(Workers::from_env()),
    }
}

fn report(m: &RunManifest) {
    for f in &m.files {
        println!("{}/{}", m.outdir, f);
    }
    println!("{}/{}", m.outdir, qwalk_cli::MANIFEST_FILE);
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { preset, common } => {
            report(&run_preset(&preset, &common.out, &common.overrides(), workers(common.workers)?)?)
        }
        Command::Config { file, common } => {
            report(&run_config(&file, &common.out, &common.overrides(), workers(common.workers)?)?)
        }
        Command::Replay { manifest, out, workers: w } => report(&replay(&manifest, &out, workers(w)?)?),
        Command::ListPresets => {
            for (name, about) in PRESETS {
                println!("{name:<8} {about}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
