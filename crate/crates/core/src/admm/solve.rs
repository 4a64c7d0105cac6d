use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{lambda_hat, step, Algorithm, IterateState, SolverConfig, DIRECT3_WARNING};
use crate::diagnostics::{kkt_residual, KktResidual};
use crate::error::Result;
use crate::problem::CcqpProblem;
use crate::splitting::{SplitIter, StopReason, ThreeTermObjective};
use crate::symcore::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: usize,
    pub residual: KktResidual,
    pub fp_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub state: IterateState,
    pub reason: StopReason,
    pub iterations: usize,
    /// KKT residuals at the final state.
    pub residual: KktResidual,
    /// `‖uᵏ − uᵏ⁻¹‖` of the last step.
    pub fp_residual: f64,
    /// One entry every `log_every` iterations.
    pub history: Vec<Checkpoint>,
    pub wall_time_secs: f64,
    pub config: SolverConfig,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.reason.is_converged()
    }
}

/// Iterates until the max KKT residual (checked every `log_every` steps) is
/// at most `tol_kkt`, the shadow-point change is at most `tol_fp`, or
/// `max_iter` steps have run. Hitting `max_iter` is reported, not raised.
///
/// `init` is `(z0, x0)`, zero by default. The shadow sequence starts from
/// `x0 − σz0`, so [`Algorithm::Dys`] with `ρ = 1` reproduces
/// [`Algorithm::Modified`] whenever `x0 = 𝒥_{σ∂θ*}(x0 − σz0)`.
pub fn solve(
    p: &CcqpProblem,
    algo: Algorithm,
    cfg: &SolverConfig,
    init: Option<(Point, Point)>,
) -> Result<SolveReport> {
    cfg.validate(lambda_hat(p), algo)?;
    let mut warnings = Vec::new();
    if algo == Algorithm::Direct3 {
        log::warn!("{DIRECT3_WARNING}");
        warnings.push(DIRECT3_WARNING.to_string());
    }
    let start = Instant::now();
    let s0 = IterateState::initial(p, init)?;
    let u_init = &s0.x - &s0.z * cfg.sigma;
    let run = match algo {
        Algorithm::Dys => {
            let obj = ThreeTermObjective::from_ccqp(p);
            let mut dys = DysStepper::new(p, cfg, &obj, s0)?;
            drive(p, cfg, u_init, || dys.next())?
        }
        _ => {
            let mut s = s0;
            drive(p, cfg, u_init, || {
                s = step(p, algo, cfg, &s)?;
                Ok(s.clone())
            })?
        }
    };
    Ok(SolveReport {
        algorithm: algo,
        iterations: run.state.k,
        state: run.state,
        reason: run.reason,
        residual: run.residual,
        fp_residual: run.fp_residual,
        history: run.history,
        wall_time_secs: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
        warnings,
    })
}

struct Run {
    state: IterateState,
    reason: StopReason,
    residual: KktResidual,
    fp_residual: f64,
    history: Vec<Checkpoint>,
}

fn drive<F>(p: &CcqpProblem, cfg: &SolverConfig, u_init: Point, mut next: F) -> Result<Run>
where
    F: FnMut() -> Result<IterateState>,
{
    let mut prev_u = u_init;
    let mut history = Vec::new();
    loop {
        let s = next()?;
        let u = s.u.clone().expect("stepped state carries u");
        let fp = (&u - &prev_u).norm();
        prev_u = u;
        let checkpoint = s.k % cfg.log_every == 0;
        let fp_hit = fp <= cfg.tol_fp;
        let out_of_budget = s.k >= cfg.max_iter;
        if !(checkpoint || fp_hit || out_of_budget) {
            continue;
        }
        let residual = kkt_residual(p, cfg.sigma, &s.to_kkt())?;
        if checkpoint {
            history.push(Checkpoint {
                k: s.k,
                residual,
                fp_residual: fp,
            });
            log::debug!("k = {} max KKT = {:.3e} fp = {:.3e}", s.k, residual.max(), fp);
        }
        let reason = if checkpoint && residual.max() <= cfg.tol_kkt {
            StopReason::Kkt
        } else if fp_hit {
            StopReason::FixedPoint
        } else if out_of_budget {
            StopReason::MaxIter
        } else {
            continue;
        };
        return Ok(Run {
            state: s,
            reason,
            residual,
            fp_residual: fp,
            history,
        });
    }
}

/// Runs the relaxed fixed-point iteration and rebuilds the ADMM iterate from
/// consecutive shadow points: `x = 𝒥(u)`, `z = (x − u)/σ`, `w = x_prev`
/// and `y` from the least-squares solve of the multiplier relation.
struct DysStepper<'o, 'a> {
    p: &'a CcqpProblem,
    sigma: f64,
    rho: f64,
    iter: SplitIter<'o, 'a>,
    prev: IterateState,
}

impl<'o, 'a> DysStepper<'o, 'a> {
    fn new(p: &'a CcqpProblem, cfg: &SolverConfig, obj: &'o ThreeTermObjective<'a>, s0: IterateState) -> Result<Self> {
        let u0 = &s0.x - &s0.z * cfg.sigma;
        Ok(Self {
            p,
            sigma: cfg.sigma,
            rho: cfg.rho,
            iter: SplitIter::new(obj, cfg.sigma, cfg.rho, u0)?,
            prev: s0,
        })
    }

    /// `u = x + σv` with `v = ρ𝒜*y − (1−ρ)z − ρ(Qx + c)` gives
    /// `𝒜*y = ((u − x)/σ + (1−ρ)z)/ρ + Qx + c`.
    fn next(&mut self) -> Result<IterateState> {
        let (sigma, rho) = (self.sigma, self.rho);
        let next = self.iter.step()?;
        let (u, x) = (next.u.clone(), next.x.clone());
        let prev = &self.prev;
        let a = self.p.constraints();
        let dual = ((&u - &prev.x) / sigma + &prev.z * (1.0 - rho)) / rho + self.p.grad_q(&prev.x);
        let y = a.solve_gram(&a.apply(&dual)?)?;
        let z = (&x - &u) / sigma;
        self.prev = IterateState {
            w: prev.x.clone(),
            y,
            z,
            x,
            u: Some(u),
            k: prev.k + 1,
        };
        Ok(self.prev.clone())
    }
}
