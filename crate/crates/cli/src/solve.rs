use std::path::PathBuf;

use anyhow::{Context, Result};
use ccqp::admm::{default_parameters, lambda_hat, solve, Algorithm, IterateState, SolverConfig};
use ccqp::problem::CcqpProblem;
use ccqp::symcore::{Point, Space, SymMatrix};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::problem_file::read_problem;
use crate::report::{write_checkpoints, RunReport};
use crate::{write_output, Auto, Outcome};

/// Solver parameters shared by `solve` and `compare`.
#[derive(Debug, Args)]
pub struct Tolerances {
    #[arg(long)]
    pub tol_kkt: Option<f64>,
    #[arg(long)]
    pub tol_fp: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Iterations between KKT checkpoints.
    #[arg(long)]
    pub log_every: Option<usize>,
    /// Accept σ and ρ outside the admissible region.
    #[arg(long)]
    pub unsafe_override: bool,
}

impl Tolerances {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        if let Some(v) = self.tol_kkt {
            cfg.tol_kkt = v;
        }
        if let Some(v) = self.tol_fp {
            cfg.tol_fp = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.log_every {
            cfg.log_every = v;
        }
        cfg.unsafe_override = self.unsafe_override;
    }
}

/// Configuration for one run: `σ = auto` is `1/λ̂`, and an unset `ρ`
/// follows the default rule for the chosen `σ`.
pub fn config_for(p: &CcqpProblem, lam: f64, sigma: Auto, rho: Option<f64>) -> SolverConfig {
    let mut cfg = default_parameters(p);
    if let Auto::Value(s) = sigma {
        cfg.sigma = s;
        cfg.rho = SolverConfig::default_rho(s, lam);
    }
    if let Some(r) = rho {
        cfg.rho = r;
    }
    cfg
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "modified")]
    algo: Algorithm,
    #[arg(long, default_value = "auto")]
    sigma: Auto,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[command(flatten)]
    tol: Tolerances,
    /// Per-checkpoint CSV log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// JSON report; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes the final `(w, y, z, x)`; matrices as upper triangles.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl SolutionFile {
    fn new(p: &CcqpProblem, s: &IterateState) -> Self {
        let flat = |v: &Point| match p.space() {
            Space::Sym(n) => SymMatrix::from_point(n, v).expect("point has n² entries").to_upper(),
            Space::Vector(_) => v.iter().copied().collect(),
        };
        Self {
            w: flat(&s.w),
            y: s.y.iter().copied().collect(),
            z: flat(&s.z),
            x: flat(&s.x),
        }
    }
}

pub fn run(a: SolveArgs) -> Result<Outcome> {
    let p = read_problem(&a.input)?.to_ccqp();
    let lam = lambda_hat(&p);
    let mut cfg = config_for(&p, lam, a.sigma, a.rho);
    if let Some(t) = a.tau {
        cfg.tau = t;
    }
    a.tol.apply(&mut cfg);
    let r = solve(&p, a.algo, &cfg, None)?;
    if let Some(path) = &a.log {
        let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_checkpoints(f, &r).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.solution {
        let mut text = serde_json::to_string_pretty(&SolutionFile::new(&p, &r.state))?;
        text.push('\n');
        write_output(Some(path), &text)?;
    }
    let report = RunReport::new(&p, lam, &r, a.log.as_ref().map(|l| l.display().to_string()));
    if a.out.is_some() {
        write_output(a.out.as_ref(), &report.to_json())?;
        println!(
            "{}: {} after {} iterations, max KKT residual {:.3e}",
            a.algo,
            if r.converged() {
                "converged"
            } else {
                "iteration budget exhausted"
            },
            report.iterations,
            report.max_residual
        );
    } else {
        write_output(None, &report.to_json())?;
    }
    Ok(if r.converged() {
        Outcome::Success
    } else {
        Outcome::NoConvergence
    })
}
