use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kp_core::plot::emit_plot_script;
use kp_core::run::{run_path, RunOptions, EXIT_CONFIG, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "kp", version, about = "KP-I/KP-II pseudo-spectral toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON configuration (simulate, norms, verify or counterexample).
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed_override: Option<u64>,
        /// Worker threads; defaults to all cores.
        #[arg(long, env = "KP_THREADS")]
        threads: Option<usize>,
    },
    /// Write a gnuplot script next to a CSV report.
    Plot { csv: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            output_dir,
            seed_override,
            threads,
        } => {
            if let Some(n) = threads {
                if n == 0 {
                    eprintln!("error: --threads must be positive");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_FAILURE as u8);
                }
            }
            run_path(
                &config,
                &RunOptions {
                    output_dir,
                    seed_override,
                },
            )
        }
        Command::Plot { csv } => match emit_plot_script(&csv) {
            Ok(p) => {
                println!("{}", p.display());
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                kp_core::run::error_exit_code(&e).max(EXIT_FAILURE)
            }
        },
    };
    ExitCode::from(code as u8)
}
