use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use starkskin::config::{ConfigError, Experiment, ExperimentConfig};
use starkskin::registry;
use starkskin::run;

const DEFAULT_OUT: &str = "starkskin-out";

#[derive(Parser)]
#[command(name = "starkskin", version, about = "Imaginary-Stark skin effect experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config or a figure preset and write CSV tables.
    Run {
        #[arg(long, required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Figure id; replaces the config's experiment and lattice.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (flag > STARKSKIN_OUT > config `out` > default).
        #[arg(long, env = "STARKSKIN_OUT")]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// List the figure presets.
    ListFigures {
        #[arg(long)]
        json: bool,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn fail_validation(e: &ConfigError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            preset,
            out,
            jobs,
        } => {
            let mut cfg = match config.as_deref().map(ExperimentConfig::load).transpose() {
                Ok(c) => c,
                Err(e) => return fail_validation(&e),
            };
            if let Some(id) = preset {
                let base = cfg.take();
                cfg = Some(ExperimentConfig {
                    spec: None,
                    experiment: Experiment::Figure { id },
                    out: base.as_ref().and_then(|c| c.out.clone()),
                    seed: base.map_or(0, |c| c.seed),
                });
            }
            let cfg = cfg.expect("clap requires --config or --preset");
            if let Err(e) = cfg.validate() {
                return fail_validation(&e);
            }
            let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            match run::run(&cfg, &dir, jobs) {
                Ok(report) => {
                    let m = &report.manifest;
                    println!(
                        "{} files, {} points ({} failed) -> {}",
                        m.files.len(),
                        m.points,
                        m.failed_points,
                        dir.display()
                    );
                    ExitCode::from(report.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("{}", serde_json::json!({ "error": "run", "message": format!("{e:#}") }));
                    ExitCode::from(3)
                }
            }
        }
        Command::ListFigures { json } => {
            let figs = registry::figures();
            if json {
                println!("{}", serde_json::to_string_pretty(&figs).expect("presets serialize"));
            } else {
                for f in &figs {
                    println!("{:<18} {} [{}]", f.id, f.title, f.parameters);
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match ExperimentConfig::load(&config).and_then(|c| c.validate()) {
            Ok(()) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => fail_validation(&e),
        },
    }
}
