use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use dnnsplit::config::{self, Experiment};
use dnnsplit::experiment::{run_experiment, trace_run, write_trace_file};
use dnnsplit::policy::PolicySpec;

const EXIT_PARSE: u8 = 1;
const EXIT_SEMANTIC: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(version, about = "Goal-oriented DNN splitting at the wireless edge: simulation and sweeps")]
struct Cli {
    /// Overrides `output_dir` from the config.
    #[arg(long, global = true, env = "DNNSPLIT_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full sweep and write CSV artifacts.
    Run { config: PathBuf },
    /// Check a config and list every problem found.
    Validate { config: PathBuf },
    /// Run one policy in one cell and write its per-slot trace.
    Trace {
        config: PathBuf,
        /// dynamic, flc, accuracy-unaware, fixed-sp:<k> or fixed-snr:<dB>
        #[arg(long)]
        policy: PolicySpec,
        /// `<i,j>`: index into the accuracy targets and the path losses.
        #[arg(long, value_parser = parse_cell)]
        cell: (usize, usize),
        /// Use this V instead of sweeping for the cheapest feasible one.
        #[arg(long)]
        v: Option<f64>,
    },
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected `<i,j>`")?;
    Ok((i.trim().parse().map_err(|_| "bad row index")?, j.trim().parse().map_err(|_| "bad column index")?))
}

fn load(path: &Path) -> Result<Experiment, ExitCode> {
    config::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(if e.is_semantic() { EXIT_SEMANTIC } else { EXIT_PARSE })
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_override = cli.output_dir;
    let result = match cli.command {
        Command::Validate { config } => {
            return match config::validate_config(&config) {
                Ok(diags) if diags.is_empty() => {
                    println!("{}: ok", config.display());
                    ExitCode::SUCCESS
                }
                Ok(diags) => {
                    for d in &diags {
                        println!("{d}");
                    }
                    ExitCode::from(EXIT_SEMANTIC)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_PARSE)
                }
            };
        }
        Command::Run { config } => {
            let exp = match load(&config) {
                Ok(e) => e,
                Err(code) => return code,
            };
            let out = out_override.unwrap_or_else(|| exp.output_dir.clone());
            let start = Instant::now();
            run_experiment(&exp, &out).map(|outcome| {
                println!(
                    "{} cells written to {} in {:.1}s",
                    outcome.cells.len(),
                    out.display(),
                    start.elapsed().as_secs_f64()
                );
            })
        }
        Command::Trace { config, policy, cell, v } => {
            let exp = match load(&config) {
                Ok(e) => e,
                Err(code) => return code,
            };
            let kind = match policy {
                PolicySpec::Bfsp | PolicySpec::Bfsnr => {
                    eprintln!("error: trace needs a single policy; use fixed-sp:<k> or fixed-snr:<dB>");
                    return ExitCode::from(EXIT_SEMANTIC);
                }
                spec => spec.expand(&exp.model)[0],
            };
            if cell.0 >= exp.g_avg_list.len() || cell.1 >= exp.path_loss_db_list.len() {
                eprintln!(
                    "error: cell {},{} outside the {}x{} sweep grid",
                    cell.0,
                    cell.1,
                    exp.g_avg_list.len(),
                    exp.path_loss_db_list.len()
                );
                return ExitCode::from(EXIT_SEMANTIC);
            }
            if let Err(e) = kind.validate(&exp.model, &exp.lut) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_SEMANTIC);
            }
            let out = out_override.unwrap_or_else(|| exp.output_dir.clone());
            trace_run(&exp, kind, cell.0, cell.1, v).and_then(|r| {
                let path = out.join(format!("trace_{}_{}_{}.csv", policy_file_tag(policy), cell.0, cell.1));
                write_trace_file(&r, &path)?;
                println!(
                    "V={} energy={} J delay={} s accuracy={} avg_sp={} -> {}",
                    r.meta.v,
                    r.avg_energy,
                    r.avg_delay,
                    r.avg_accuracy,
                    r.avg_sp,
                    path.display()
                );
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn policy_file_tag(p: PolicySpec) -> String {
    p.to_string().replace(':', "-")
}
