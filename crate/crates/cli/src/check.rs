use std::path::PathBuf;

use anyhow::Result;
use ccqp::admm::{lambda_hat, solve, Algorithm};
use ccqp::diagnostics::{
    equivalence_check, kkt_perturbation_check, moreau_check, EquivalenceMode, EquivalenceOptions, EquivalenceReport,
    MoreauReport, PerturbationReport,
};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::problem_file::read_problem;
use crate::solve::config_for;
use crate::{write_output, Auto, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Thm1,
    Prop2,
    Moreau,
    KktPerturb,
}

/// Deviation bound for the equivalence modes.
pub const EQUIVALENCE_BOUND: f64 = 1e-9;
pub const MOREAU_BOUND: f64 = 1e-10;
const MOREAU_SAMPLES: usize = 100;
const PERTURBATION: f64 = 0.05;

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: CheckMode,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value = "auto")]
    sigma: Auto,
    #[arg(long)]
    rho: Option<f64>,
    /// Seed for the sampled modes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies σ on the splitting side only. Test hook for the
    /// equivalence modes; any value other than 1 should fail the check.
    #[arg(long, hide = true)]
    mismatch_sigma: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    schema_version: u32,
    mode: CheckMode,
    bound: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<EquivalenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    moreau: Option<MoreauReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation: Option<PerturbationReport>,
}

pub fn run(a: CheckArgs) -> Result<Outcome> {
    let p = read_problem(&a.input)?.to_ccqp();
    let lam = lambda_hat(&p);
    let mut cfg = config_for(&p, lam, a.sigma, a.rho);
    let mut report = CheckReport {
        schema_version: crate::report::SCHEMA_VERSION,
        mode: a.mode,
        bound: EQUIVALENCE_BOUND,
        passed: false,
        equivalence: None,
        moreau: None,
        perturbation: None,
    };
    match a.mode {
        CheckMode::Thm1 | CheckMode::Prop2 => {
            let mode = if a.mode == CheckMode::Thm1 {
                EquivalenceMode::Thm1
            } else {
                EquivalenceMode::Prop2
            };
            let opts = EquivalenceOptions {
                splitting_sigma: a.mismatch_sigma.map(|f| f * cfg.sigma),
            };
            let r = equivalence_check(&p, &cfg, a.steps, mode, opts)?;
            report.passed = r.max_u_deviation <= EQUIVALENCE_BOUND && r.max_x_deviation <= EQUIVALENCE_BOUND;
            eprintln!(
                "{}: {} steps, max u deviation {:.3e}, max x deviation {:.3e}",
                a.mode.to_possible_value().unwrap().get_name(),
                r.steps,
                r.max_u_deviation,
                r.max_x_deviation
            );
            report.equivalence = Some(r);
        }
        CheckMode::Moreau => {
            let r = moreau_check(p.theta(), p.space(), MOREAU_SAMPLES, a.seed);
            report.bound = MOREAU_BOUND;
            report.passed = r.max_error() <= MOREAU_BOUND;
            eprintln!("moreau: {} samples, max error {:.3e}", r.samples, r.max_error());
            report.moreau = Some(r);
        }
        CheckMode::KktPerturb => {
            cfg.tol_kkt = 1e-11;
            cfg.tol_fp = 1e-16;
            cfg.max_iter = cfg.max_iter.max(200_000);
            let reference = solve(&p, Algorithm::Generalized, &cfg, None)?;
            if !reference.converged() {
                eprintln!(
                    "reference solve did not converge in {} iterations",
                    reference.iterations
                );
                return Ok(Outcome::NoConvergence);
            }
            let mut kkt = reference.state.to_kkt();
            kkt.w = kkt.x.clone();
            let r = kkt_perturbation_check(&p, cfg.sigma, &kkt, PERTURBATION, a.seed)?;
            report.bound = ccqp::diagnostics::UNTOUCHED_CEILING;
            report.passed = r.passed();
            for c in &r.cases {
                eprintln!(
                    "kkt-perturb {:?}: {}",
                    c.condition,
                    if c.passed { "ok" } else { "FAILED" }
                );
            }
            report.perturbation = Some(r);
        }
    }
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(a.out.as_ref(), &text)?;
    Ok(if report.passed {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}
