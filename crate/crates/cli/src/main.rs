use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use saddleflow_cli::config::ExperimentConfig;
use saddleflow_cli::runner::{compare, run};
use saddleflow_cli::CliError;

#[derive(Parser)]
#[command(name = "saddleflow", version, about = "Integrate saddle flows and check their convergence rates")]
struct Cli {
    /// Directory for the output files (overrides the config).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Seed for random problem data and initial states (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run { config: PathBuf },
    /// Run several experiments concurrently and tabulate their rates.
    Compare { configs: Vec<PathBuf> },
}

fn load(path: &Path, seed: Option<u64>) -> Result<(String, ExperimentConfig), CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    Ok((name, cfg))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let (name, cfg) = load(&config, cli.seed)?;
            let out = cli
                .output_dir
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&name));
            let summary = run(&cfg, &name, &out)?;
            if !cli.quiet {
                print!("{}", summary.report);
                println!("outputs: {}", out.display());
            }
        }
        Command::Compare { configs } => {
            if configs.is_empty() {
                return Err(CliError::Usage(
                    "compare needs at least one config\n\nUsage: saddleflow compare <CONFIG>...".into(),
                ));
            }
            let loaded = configs
                .iter()
                .map(|p| load(p, cli.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let out = cli.output_dir.unwrap_or_else(|| PathBuf::from("out").join("compare"));
            let summaries = compare(&loaded, &out)?;
            if !cli.quiet {
                println!("{:<24} {:<20} {:>10} {:>10} {:>10} {:>12}", "config", "algorithm", "c_bound", "c_fit", "wall_s", "residual");
                for s in &summaries {
                    let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
                    println!(
                        "{:<24} {:<20} {:>10} {:>10} {:>10.3} {:>12.3e}",
                        s.name,
                        s.algorithm,
                        f(s.c_bound),
                        f(s.c_fit),
                        s.wall_time,
                        s.final_residual
                    );
                }
                println!("table: {}", out.join("compare.csv").display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saddleflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
