//! `hamqaoa`: simulations, lightcone formulas, parameter search and the
//! desk-scale benchmark suites, with JSON on stdout.

mod bench;
mod commands;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "HAMQAOA_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "hamqaoa", version, about = "Hamiltonian QAOA for 2-local Hamiltonians")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph.
    GenGraph(commands::GenGraphArgs),
    /// Choose a sign string by maximum cut.
    Maxcut(commands::MaxcutArgs),
    /// Extremal eigenvalues of a Hamiltonian.
    Exact(commands::ExactArgs),
    /// Energy (and ground-space fidelity) of a HamQAOA state.
    Simulate(commands::SimulateArgs),
    /// Search for parameters.
    Optimize(commands::OptimizeArgs),
    /// Per-edge expectations from the finite-degree iteration.
    FormulaFinite(commands::FormulaFiniteArgs),
    /// Rescaled objective from the infinite-degree iteration.
    FormulaInfinite(commands::FormulaInfiniteArgs),
    /// Canonical representative of a parameter set.
    GaugeFix(commands::GaugeFixArgs),
    /// Optimize the AGM baseline.
    Agm(commands::AgmArgs),
    /// Run a benchmark suite and write CSV rows plus a manifest.
    Bench(bench::BenchArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        anyhow::ensure!(w >= 1, "--workers must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let value = match cli.command {
        Command::GenGraph(a) => commands::gen_graph(a)?,
        Command::Maxcut(a) => commands::maxcut(a)?,
        Command::Exact(a) => commands::exact(a)?,
        Command::Simulate(a) => commands::simulate(a)?,
        Command::Optimize(a) => commands::optimize(a)?,
        Command::FormulaFinite(a) => commands::formula_finite(a)?,
        Command::FormulaInfinite(a) => commands::formula_infinite(a)?,
        Command::GaugeFix(a) => commands::gauge_fix(a)?,
        Command::Agm(a) => commands::agm(a)?,
        Command::Bench(a) => bench::run(a)?,
    };
    let text = serde_json::to_string_pretty(&value)?;
    match cli.out {
        Some(path) => std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                // a closed pipe downstream is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r.context("writing stdout")?,
            }
        }
    }
    Ok(())
}
