use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use capax_core::experiments::{parse_bounds, parse_number, run, Command, ExperimentConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Hopf-link capacity ladder, ring calibration and level-set fluxes
    Hopf,
    /// cap(C0, φC0) against cap(φC0, T) for seeded C0
    Halving,
    /// Linking sweep and the reflection/dihedral capacity chain
    Symmetrize,
    /// Capacity floor for seeded separated linked pairs
    Theorem,
    /// Graph modulus duality and axioms
    Duality,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Hopf => Command::Hopf,
            Cmd::Halving => Command::Halving,
            Cmd::Symmetrize => Command::Symmetrize,
            Cmd::Theorem => Command::Theorem,
            Cmd::Duality => Command::Duality,
        }
    }
}

/// Conformal capacity and modulus experiments.
///
/// Writes a JSON report to --out (default `reports/<command>.json`), an aligned text report
/// next to it with extension `.txt`, and a CSV of (h, value) rows when there are any. The
/// exit code is 0 iff every check passes.
#[derive(Debug, Parser)]
#[command(name = "capax", version)]
struct Args {
    command: Cmd,
    /// Box `a,b` (the grid box is [a, b]³, with a = −b)
    #[arg(long = "box", value_parser = parse_bounds, allow_hyphen_values = true)]
    bounds: Option<(f64, f64)>,
    /// Grid spacing, e.g. 1/64; for `hopf` the finest rung of the ladder 4h, 2h, h
    #[arg(long, value_parser = parse_number)]
    h: Option<f64>,
    /// Tube radius around curves (for `hopf`, at the finest rung; coarser rungs scale with h)
    #[arg(long, value_parser = parse_number)]
    rthick: Option<f64>,
    /// Exponent
    #[arg(long, value_parser = parse_number, default_value = "3")]
    p: f64,
    /// Relative stopping tolerance of the solvers
    #[arg(long, value_parser = parse_number, default_value = "1e-6")]
    tol: f64,
    /// Regularization relative to the starting gradient
    #[arg(long, value_parser = parse_number, default_value = "1e-6")]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of seeded cases
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the text report
    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    match try_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("capax: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn try_main() -> Result<bool> {
    let a = Args::parse();
    let command: Command = a.command.into();
    let cfg = ExperimentConfig {
        command,
        bounds: a.bounds,
        h: a.h,
        r_thick: a.rthick,
        p: a.p,
        eps_rel: a.eps,
        tol: a.tol,
        seed: a.seed,
        cases: a.cases,
        out: a.out.clone(),
    };
    let report = run(&cfg)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from(format!("reports/{command}.json")));
    report.write(&out).with_context(|| format!("writing {}", out.display()))?;
    let text = report.to_text();
    if a.verbose {
        print!("{text}");
    } else {
        for c in &report.checks {
            println!("[{}] {:<24} {}  {}", c.criterion, c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        }
    }
    println!("report: {}", out.display());
    Ok(report.passed())
}
