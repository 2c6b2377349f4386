use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epsflow::runner::{EXIT_CONFIG, EXIT_IO, EXIT_VIOLATION, SUMMARY_FILE};
use epsflow::verify::write_report;
use epsflow::{run, run_suite, sweep, RunConfig, Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "epsflow", version, about = "Axisymmetric model-family solver")]
struct Cli {
    /// worker threads for sweeps and parallel mode
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// output directory (overrides the configuration)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration
    Run {
        config: PathBuf,
        /// continue from a snapshot
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a configuration once per epsilon
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Run a property suite: hardy, lemma3, elliptic, scaling, energy, maxprinciple, all
    Verify {
        suite: String,
        /// epsilon values for the maxprinciple suite
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// viscosities for the maxprinciple suite
        #[arg(long, value_delimiter = ',')]
        nu: Option<Vec<f64>>,
    },
}

fn load(path: &PathBuf, output: &Option<PathBuf>) -> Result<RunConfig, ExitCode> {
    let mut cfg = RunConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG as u8)
    })?;
    if let Some(out) = output {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    match cli.command {
        Command::Run { config, resume } => {
            let cfg = match load(&config, &cli.output) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run(&cfg, resume.as_deref()) {
                Ok(out) => {
                    if let Some(f) = &out.failure {
                        eprintln!(
                            "instability: {} (last good t = {}, last dt = {:e}); see {}",
                            f.message,
                            f.t,
                            f.last_dt,
                            cfg.output.display()
                        );
                    } else {
                        println!(
                            "t = {} after {} steps, {} diagnostics rows in {}",
                            out.state.t,
                            out.steps,
                            out.records.len(),
                            cfg.output.display()
                        );
                    }
                    ExitCode::from(out.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Sweep { config, eps } => {
            let cfg = match load(&config, &cli.output) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match sweep(&cfg, &eps) {
                Ok(rows) => {
                    for r in &rows {
                        println!(
                            "eps = {}: {} (omega1 growth {:.4}, max gamma ratio {:.6})",
                            r.epsilon,
                            r.status,
                            r.omega1_growth(),
                            r.max_gamma_ratio
                        );
                    }
                    println!("summary: {}", cfg.output.join(SUMMARY_FILE).display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Verify { suite, eps, nu } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            };
            let opts = VerifyOptions { eps, nu };
            if let Err(msg) = opts.validate() {
                eprintln!("error: {msg}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            let rows = run_suite(suite, &opts);
            let written = match &cli.output {
                Some(dir) => std::fs::create_dir_all(dir)
                    .map_err(csv::Error::from)
                    .and_then(|_| {
                        let path = dir.join(format!("verify_{}.csv", suite.name()));
                        let file = std::fs::File::create(path).map_err(csv::Error::from)?;
                        write_report(&rows, file)
                    }),
                None => write_report(&rows, std::io::stdout().lock()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_IO as u8);
            }
            let violated: Vec<_> = rows.iter().filter(|r| r.violated()).collect();
            for r in &violated {
                eprintln!("violated: [{}] {} (lhs {:e} > rhs {:e})", r.suite, r.case, r.lhs, r.rhs);
            }
            if violated.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATION as u8)
            }
        }
    }
}
