use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use ccqp::admm::{lambda_hat, solve, Algorithm};
use ccqp::problem::CcqpProblem;
use clap::Args;
use rayon::prelude::*;

use crate::problem_file::read_problem;
use crate::solve::{config_for, Tolerances};
use crate::{write_output, Auto, Outcome};

/// Worker count for sweeps; serial when unset.
pub const WORKERS_ENV: &str = "CCQP_WORKERS";

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    sigmas: Vec<Auto>,
    /// `auto` picks the default ρ for each σ.
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    rhos: Vec<Auto>,
    /// Read `--sigmas` as multiples of 1/λ̂_max(Q).
    #[arg(long)]
    relative: bool,
    #[command(flatten)]
    tol: Tolerances,
    /// Add a wall-time column; makes the output nondeterministic.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Cell {
    algo: Algorithm,
    sigma: Auto,
    rho: Auto,
}

fn workers() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => {
            let n: usize = v
                .parse()
                .with_context(|| format!("{WORKERS_ENV} must be a positive integer"))?;
            if n == 0 {
                bail!("{WORKERS_ENV} must be a positive integer");
            }
            Ok(n)
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn run_cell(p: &CcqpProblem, lam: f64, a: &CompareArgs, cell: &Cell) -> Vec<String> {
    let sigma = match cell.sigma {
        Auto::Value(s) if a.relative => Auto::Value(s / lam),
        other => other,
    };
    let rho = match cell.rho {
        Auto::Auto => None,
        Auto::Value(r) => Some(r),
    };
    let mut cfg = config_for(p, lam, sigma, rho);
    a.tol.apply(&mut cfg);
    let mut row = vec![cell.algo.to_string(), fmt(cfg.sigma), fmt(cfg.rho)];
    match solve(p, cell.algo, &cfg, None) {
        Ok(r) => {
            let e = r.residual;
            row.push(if r.converged() { "converged" } else { "dnf" }.into());
            row.push(if r.converged() {
                r.iterations.to_string()
            } else {
                "DNF".into()
            });
            row.extend(
                [
                    e.eta_primal,
                    e.eta_dual,
                    e.eta_w,
                    e.eta_theta,
                    e.eta_comp,
                    e.max(),
                    r.fp_residual,
                ]
                .map(fmt),
            );
            if a.timing {
                row.push(fmt(r.wall_time_secs));
            }
            row.push(String::new());
        }
        Err(err) => {
            row.push("error".into());
            row.extend(std::iter::repeat_n(String::new(), 8 + usize::from(a.timing)));
            row.push(err.to_string());
        }
    }
    row
}

pub fn run(a: CompareArgs) -> Result<Outcome> {
    let p = read_problem(&a.input)?.to_ccqp();
    let lam = lambda_hat(&p);
    let mut cells = Vec::new();
    for &algo in &a.algos {
        for &sigma in &a.sigmas {
            for &rho in &a.rhos {
                cells.push(Cell { algo, sigma, rho });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers()?).build()?;
    let rows: Vec<Vec<String>> = pool.install(|| cells.par_iter().map(|c| run_cell(&p, lam, &a, c)).collect());

    let mut header = vec![
        "algo",
        "sigma",
        "rho",
        "status",
        "iterations",
        "eta_primal",
        "eta_dual",
        "eta_w",
        "eta_theta",
        "eta_comp",
        "max_residual",
        "fp_residual",
    ];
    if a.timing {
        header.push("wall_time_secs");
    }
    header.push("error");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in &rows {
        w.write_record(r)?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    write_output(a.out.as_ref(), &text)?;
    Ok(Outcome::Success)
}
