//! `gpsort` — generate seeded instances, run metered sorting trials, and
//! aggregate the reports into plottable CSV tables.
//!
//! The output directory defaults to `$GPSORT_OUT` (or `./out`); every
//! subcommand accepts `--out` to override it. `run --strict` exits nonzero
//! if any trial fails its ground-truth audit.

use clap::{Parser, Subcommand};
use gpsort::bench::{cmd_gen, cmd_report, cmd_run, default_instance_name, Algorithm};
use gpsort::instance::{GapProfile, GenParams, Model};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gpsort", version, about = "Query-metered poset sorting benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance and write it as JSON.
    Gen {
        /// Query-graph model to draw from.
        #[arg(long, value_enum)]
        model: Model,
        /// Vertex count (per side for bipartite).
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Width bound for er/gpsc models.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Edge probability (er/gpsc) or cross density (bipartite).
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        /// Number of distinct weight values for the weighted model.
        #[arg(long = "W", default_value_t = 2)]
        w: usize,
        /// Spacing of the weighted model's weight values.
        #[arg(long, value_enum, default_value = "uniform-log")]
        gap_profile: GapProfile,
        /// Master seed; the file is byte-identical per (params, seed).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; defaults to a descriptive name in the output dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run metered trials of one algorithm against an instance file.
    Run {
        /// Instance JSON produced by `gen`.
        instance: PathBuf,
        /// Solver to run; must match the instance's model.
        #[arg(long, value_enum)]
        algo: Algorithm,
        /// Independent trials, each seeded from (seed, trial index).
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Master seed for the per-trial RNG streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit nonzero if any trial reports correct=false.
        #[arg(long)]
        strict: bool,
        /// Directory receiving reports.jsonl / reports.csv (append-only).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a reports.jsonl stream into median and slope tables.
    Report {
        /// Path to reports.jsonl; defaults to the one in the output dir.
        reports: Option<PathBuf>,
        /// Directory receiving report_medians.csv / report_slopes.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `--out` beats `$GPSORT_OUT` beats `./out`.
fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("GPSORT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            model,
            n,
            k,
            p,
            w,
            gap_profile,
            seed,
            out,
        } => {
            let gp = GenParams {
                n,
                k,
                p,
                w,
                gap_profile,
            };
            let path = out
                .unwrap_or_else(|| out_dir(None).join(default_instance_name(model, &gp, seed)));
            let instance = cmd_gen(model, &gp, seed, &path)?;
            println!(
                "wrote {} (model={model}, n={}, edges={})",
                path.display(),
                instance.graph.n(),
                instance.graph.edges().len()
            );
        }
        Command::Run {
            instance,
            algo,
            trials,
            seed,
            strict,
            out,
        } => {
            let dir = out_dir(out);
            let reports = cmd_run(&instance, algo, trials, seed, &dir)?;
            for r in &reports {
                println!(
                    "trial {:>3}: queries={:<8} cost={:<12.1} correct={}",
                    r.trial, r.query_count, r.cost, r.correct
                );
            }
            let wrong = reports.iter().filter(|r| !r.correct).count();
            println!(
                "{} trials, {} incorrect; appended to {}",
                reports.len(),
                wrong,
                dir.join("reports.jsonl").display()
            );
            if strict && wrong > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { reports, out } => {
            let dir = out_dir(out);
            let path = reports.unwrap_or_else(|| dir.join("reports.jsonl"));
            let tables = cmd_report(&path, &dir)?;
            println!(
                "aggregated {} median rows, {} slope fits into {}",
                tables.medians.len(),
                tables.slopes.len(),
                dir.display()
            );
            for s in &tables.slopes {
                println!("  {:<40} slope={:+.3} ({} sizes)", s.family, s.slope, s.points);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
