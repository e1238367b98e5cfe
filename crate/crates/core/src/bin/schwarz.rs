use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use schwarz_core::experiment::{
    rows_to_csv, rows_to_table, run_solve, run_study, write_results, ExperimentConfig, Format, Study,
};

/// Overlapping Schwarz experiments.
///
/// Exit status: 0 when every run converged, 2 when some run hit the
/// iteration limit, 1 on error.
#[derive(Parser)]
#[command(name = "schwarz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single solve; writes the solution, residual history, setup report,
    /// decomposition and mesh.
    Solve(Common),
    /// Weak scaling: refinement r pairs with 4^r times the subdomains.
    ScalingStudy(Common),
    /// Fixed subdomains, one run per overlap value.
    OverlapStudy(Common),
    /// Same problem under each configured preconditioner.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for graph partitioning (overrides `decomposition.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for local solves.
    #[arg(long)]
    threads: Option<usize>,
    /// Leave wall times empty for reproducible output.
    #[arg(long)]
    no_timing: bool,
}

fn run(cli: Cli) -> schwarz_core::Result<bool> {
    let (study, common) = match cli.command {
        Command::Solve(c) => (Study::Solve, c),
        Command::ScalingStudy(c) => (Study::Scaling, c),
        Command::OverlapStudy(c) => (Study::Overlap, c),
        Command::Compare(c) => (Study::Compare, c),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| schwarz_core::Error::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.decomposition.seed = Some(seed);
    }
    let dir = common.out.unwrap_or_else(|| cfg.output.dir.clone());
    let timing = !common.no_timing;

    let rows = match study {
        Study::Solve => vec![run_solve(&cfg, Some(&dir))?],
        s => run_study(&cfg, s)?,
    };
    write_results(&dir, &rows, timing, cfg.solver.maxit, study)?;
    match cfg.output.format {
        Format::Table => print!("{}", rows_to_table(&rows, timing, cfg.solver.maxit)),
        Format::Csv => print!("{}", rows_to_csv(&rows, timing)),
    }
    Ok(rows.iter().all(|r| r.converged))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.command {
        Command::Solve(c) | Command::ScalingStudy(c) | Command::OverlapStudy(c) | Command::Compare(c) => c.config.clone(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: some runs reached the iteration limit");
            ExitCode::from(2)
        }
        Err(e) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let text = s.to_string();
                if !msg.contains(&text) {
                    msg.push_str(&format!(": {text}"));
                }
                src = s.source();
            }
            eprintln!("error ({}): {msg}", config.display());
            ExitCode::from(1)
        }
    }
}
