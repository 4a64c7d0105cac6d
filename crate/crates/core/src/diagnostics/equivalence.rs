use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::admm::{generalized_step, lambda_hat, modified_admm_step, Algorithm, IterateState, SolverConfig};
use crate::error::{Error, Result};
use crate::problem::CcqpProblem;
use crate::splitting::{SplitIter, ThreeTermObjective};
use crate::symcore::rel_dev;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceMode {
    /// Modified ADMM against the unrelaxed iteration with a direct PSD projection.
    Thm1,
    /// Generalized ADMM against the relaxed iteration with the same `ρ`.
    Prop2,
}

impl fmt::Display for EquivalenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivalenceMode::Thm1 => "thm1",
            EquivalenceMode::Prop2 => "prop2",
        })
    }
}

impl FromStr for EquivalenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(EquivalenceMode::Thm1),
            "prop2" => Ok(EquivalenceMode::Prop2),
            _ => Err(Error::InvalidConfig(format!("unknown equivalence mode {s:?}"))),
        }
    }
}

/// Knobs for the checker.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EquivalenceOptions {
    /// Runs the splitting side with this `σ` instead of the configured one.
    /// Exists to exercise the checker against a known mismatch.
    pub splitting_sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDeviation {
    pub k: usize,
    pub u_deviation: f64,
    pub x_deviation: f64,
    /// ADMM `w` against the previous splitting primal, for information only.
    pub w_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub mode: EquivalenceMode,
    pub sigma: f64,
    pub rho: f64,
    pub steps: usize,
    pub max_u_deviation: f64,
    pub max_x_deviation: f64,
    pub trace: Vec<StepDeviation>,
}

/// Runs an ADMM variant and the matching fixed-point iteration in lock-step
/// and records `‖a − b‖/max(1, ‖b‖)` for the shadow points `u` and primal
/// points `x` after each step.
///
/// Both sides start from the ADMM's first shadow point `u⁰ = x¹ − σz¹`,
/// obtained from `(z⁰, x⁰) = (0, 0)`.
pub fn equivalence_check(
    p: &CcqpProblem,
    cfg: &SolverConfig,
    steps: usize,
    mode: EquivalenceMode,
    opts: EquivalenceOptions,
) -> Result<EquivalenceReport> {
    let algo = match mode {
        EquivalenceMode::Thm1 => Algorithm::Modified,
        EquivalenceMode::Prop2 => Algorithm::Generalized,
    };
    cfg.validate(lambda_hat(p), algo)?;
    let (obj, rho) = match mode {
        EquivalenceMode::Thm1 => (ThreeTermObjective::from_cqsdp(p)?, 1.0),
        EquivalenceMode::Prop2 => (ThreeTermObjective::from_ccqp(p), cfg.rho),
    };
    let admm = |s: &IterateState| match mode {
        EquivalenceMode::Thm1 => modified_admm_step(p, cfg.sigma, s),
        EquivalenceMode::Prop2 => generalized_step(p, cfg, s),
    };
    let split_sigma = opts.splitting_sigma.unwrap_or(cfg.sigma);
    if !(split_sigma > 0.0 && split_sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "splitting σ must be positive, got {split_sigma}"
        )));
    }

    let mut state = admm(&IterateState::initial(p, None)?)?;
    let u0 = state.u.clone().expect("stepped state carries u");
    let mut split = SplitIter::new(&obj, split_sigma, rho, u0)?;
    let mut trace = Vec::with_capacity(steps);
    for k in 1..=steps {
        let prev_x = split.state().x.clone();
        state = admm(&state)?;
        let s = split.step()?;
        let u = state.u.as_ref().expect("stepped state carries u");
        trace.push(StepDeviation {
            k,
            u_deviation: rel_dev(&s.u, u),
            x_deviation: rel_dev(&s.x, &state.x),
            w_deviation: rel_dev(&prev_x, &state.w),
        });
    }
    let max_of = |f: fn(&StepDeviation) -> f64| trace.iter().map(f).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        mode,
        sigma: cfg.sigma,
        rho,
        steps,
        max_u_deviation: max_of(|d| d.u_deviation),
        max_x_deviation: max_of(|d| d.x_deviation),
        trace,
    })
}
