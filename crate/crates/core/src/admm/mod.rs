//! Closed-form ADMM steps on the dual problem
//!
//! ```text
//! min ½⟨w, Qw⟩ − ⟨b, y⟩ + θ(−z)   s.t.   −Qw + 𝒜*y + z = c
//! ```
//!
//! with multiplier `x`. Every step consumes `(z, x)` from the incoming state
//! and stores the shadow point `u = x⁺ − σz⁺` on the outgoing one.

mod solve;

pub use solve::{solve, Checkpoint, SolveReport};

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::problem::{prox_conjugate, CcqpProblem, KktPoint, ProxFriendly};
use crate::symcore::{Point, LAMBDA_INFLATION};

/// Below this `λ̂_max(Q)` the operator is treated as zero.
pub const ZERO_OPERATOR_TOL: f64 = 1e-12;

pub const DIRECT3_WARNING: &str = "the directly extended 3-block ADMM is not guaranteed to converge";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// `w⁺ = x`, no relaxation.
    Modified,
    /// Modified scheme with relaxation `ρ`.
    Generalized,
    /// Direct 3-block extension with dual step `τ`.
    Direct3,
    /// Relaxed three-operator splitting on the shadow sequence.
    Dys,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Modified,
        Algorithm::Generalized,
        Algorithm::Direct3,
        Algorithm::Dys,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Modified => "modified",
            Algorithm::Generalized => "generalized",
            Algorithm::Direct3 => "direct3",
            Algorithm::Dys => "dys",
        }
    }

    /// Whether `ρ` enters the iteration.
    pub fn uses_rho(self) -> bool {
        matches!(self, Algorithm::Generalized | Algorithm::Dys)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown algorithm {s:?} (expected modified, generalized, direct3 or dys)"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub sigma: f64,
    pub rho: f64,
    pub tau: f64,
    pub tol_kkt: f64,
    pub tol_fp: f64,
    pub max_iter: usize,
    /// KKT checkpoint spacing.
    pub log_every: usize,
    pub unsafe_override: bool,
}

/// `λ̂_max(Q)`: the power-iteration estimate inflated by [`LAMBDA_INFLATION`].
pub fn lambda_hat(p: &CcqpProblem) -> f64 {
    p.q().lambda_max_estimate() * LAMBDA_INFLATION
}

/// Supremum of admissible `σ`, `2/λ̂`; infinite for `Q ≈ 0`.
pub fn sigma_bound(lambda_hat: f64) -> f64 {
    if lambda_hat > ZERO_OPERATOR_TOL {
        2.0 / lambda_hat
    } else {
        f64::INFINITY
    }
}

/// Supremum of admissible `ρ`, `min(2, (4 − σλ̂)/2)`.
pub fn rho_bound(sigma: f64, lambda_hat: f64) -> f64 {
    (0.5 * (4.0 - sigma * lambda_hat)).min(2.0)
}

impl SolverConfig {
    pub fn from_lambda_hat(lambda_hat: f64) -> Self {
        let sigma = if lambda_hat > ZERO_OPERATOR_TOL {
            1.0 / lambda_hat
        } else {
            1.0
        };
        Self {
            sigma,
            rho: Self::default_rho(sigma, lambda_hat),
            tau: 1.0,
            tol_kkt: 1e-7,
            tol_fp: 1e-9,
            max_iter: 50_000,
            log_every: 10,
            unsafe_override: false,
        }
    }

    /// `min(1.5, (4 − σλ̂)/2 − 0.05)`.
    pub fn default_rho(sigma: f64, lambda_hat: f64) -> f64 {
        let lam = if lambda_hat > ZERO_OPERATOR_TOL {
            lambda_hat
        } else {
            0.0
        };
        (0.5 * (4.0 - sigma * lam) - 0.05).min(1.5)
    }

    /// Checks the invariants, and unless `unsafe_override` is set, the
    /// admissible region `σ < 2/λ̂`, `0 < ρ < min(2, (4 − σλ̂)/2)`.
    pub fn validate(&self, lambda_hat: f64, algo: Algorithm) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("σ must be positive and finite, got {}", self.sigma));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("τ must be positive and finite, got {}", self.tau));
        }
        if !(self.tol_kkt > 0.0 && self.tol_fp > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iter == 0 || self.log_every == 0 {
            return bad("max_iter and log_every must be at least 1".into());
        }
        if algo.uses_rho() && !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("ρ must be positive, got {}", self.rho));
        }
        if self.unsafe_override {
            return Ok(());
        }
        let smax = sigma_bound(lambda_hat);
        if self.sigma >= smax {
            return bad(format!(
                "σ = {} violates σ < 2/λ_max(Q) = {smax} (λ̂_max = {lambda_hat}); pass the unsafe override to run anyway",
                self.sigma
            ));
        }
        if algo.uses_rho() {
            let lam = if lambda_hat > ZERO_OPERATOR_TOL {
                lambda_hat
            } else {
                0.0
            };
            let rmax = rho_bound(self.sigma, lam);
            if self.rho >= rmax {
                return bad(format!(
                    "ρ = {} violates ρ < min(2, (4 − σλ_max(Q))/2) = {rmax}; pass the unsafe override to run anyway",
                    self.rho
                ));
            }
        }
        Ok(())
    }
}

/// `σ = 1/λ̂_max(Q)` (or 1 for `Q ≈ 0`), `ρ = min(1.5, (4 − σλ̂)/2 − 0.05)`,
/// tolerances 1e-7 (KKT) and 1e-9 (fixed point), 50000 iterations.
pub fn default_parameters(p: &CcqpProblem) -> SolverConfig {
    SolverConfig::from_lambda_hat(lambda_hat(p))
}

/// ADMM iterate `(w, y, z, x)` plus the shadow point of the step that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub w: Point,
    pub y: DVector<f64>,
    pub z: Point,
    pub x: Point,
    /// `x − σz`, present once a step has been taken.
    pub u: Option<Point>,
    pub k: usize,
}

impl IterateState {
    /// Starting state with `w = x0` and `y = 0`; `(z0, x0)` default to zero.
    pub fn initial(p: &CcqpProblem, init: Option<(Point, Point)>) -> Result<Self> {
        let (z, x) = init.unwrap_or_else(|| (p.space().zeros(), p.space().zeros()));
        let len = p.space().len();
        check_len("z0", len, z.len())?;
        check_len("x0", len, x.len())?;
        Ok(Self {
            w: x.clone(),
            y: DVector::zeros(p.m()),
            z,
            x,
            u: None,
            k: 0,
        })
    }

    pub fn from_kkt(kkt: &KktPoint) -> Self {
        Self {
            w: kkt.w.clone(),
            y: kkt.y.clone(),
            z: kkt.z.clone(),
            x: kkt.x.clone(),
            u: None,
            k: 0,
        }
    }

    pub fn to_kkt(&self) -> KktPoint {
        KktPoint {
            w: self.w.clone(),
            y: self.y.clone(),
            z: self.z.clone(),
            x: self.x.clone(),
        }
    }

    fn check(&self, p: &CcqpProblem) -> Result<()> {
        let len = p.space().len();
        check_len("w", len, self.w.len())?;
        check_len("y", p.m(), self.y.len())?;
        check_len("z", len, self.z.len())?;
        check_len("x", len, self.x.len())
    }
}

/// `argmin_y ℒ_σ(w, y, z; x) = −(𝒜𝒜*)⁻¹((𝒜x − b)/σ + 𝒜(z − Qw − c))`.
fn y_update(p: &CcqpProblem, sigma: f64, x: &Point, z: &Point, qw: &Point) -> Result<DVector<f64>> {
    let a = p.constraints();
    let mut rhs = (a.apply(x)? - p.b()) / sigma;
    rhs += a.apply(&(z - qw - p.c()))?;
    Ok(-a.solve_gram(&rhs)?)
}

/// One step of the modified 3-block ADMM:
/// `w⁺ = x`, `y⁺` by the Gram solve, `u = x − σ(Qx + c − 𝒜*y⁺)`,
/// `x⁺ = 𝒥_{σ∂θ*}(u)`, `z⁺ = (x⁺ − u)/σ`.
pub fn modified_admm_step(p: &CcqpProblem, sigma: f64, s: &IterateState) -> Result<IterateState> {
    s.check(p)?;
    let qx = p.q().apply(&s.x);
    let y = y_update(p, sigma, &s.x, &s.z, &qx)?;
    let u = &s.x - (qx + p.c() - p.constraints().adjoint(&y)?) * sigma;
    let x = prox_conjugate(p.theta(), sigma, &u);
    let z = (&x - &u) / sigma;
    Ok(IterateState {
        w: s.x.clone(),
        y,
        z,
        x,
        u: Some(u),
        k: s.k + 1,
    })
}

/// One step of the generalized scheme. With `v = ρ𝒜*y⁺ − (1−ρ)z − ρQw⁺ − ρc`,
/// the z-subproblem in `s = −z` is a single prox of `θ`:
/// `z⁺ = −prox_{θ/σ}(v + x/σ)`, then `x⁺ = x + σ(v + z⁺)` and `u = x + σv`.
pub fn generalized_step(p: &CcqpProblem, cfg: &SolverConfig, s: &IterateState) -> Result<IterateState> {
    s.check(p)?;
    let (sigma, rho) = (cfg.sigma, cfg.rho);
    let qw = p.q().apply(&s.x);
    let y = y_update(p, sigma, &s.x, &s.z, &qw)?;
    let v = p.constraints().adjoint(&y)? * rho - &s.z * (1.0 - rho) - (qw + p.c()) * rho;
    let z = -p.theta().prox(1.0 / sigma, &(&v + &s.x / sigma));
    let u = &s.x + &v * sigma;
    let x = &u + &z * sigma;
    Ok(IterateState {
        w: s.x.clone(),
        y,
        z,
        x,
        u: Some(u),
        k: s.k + 1,
    })
}

/// One step of the directly extended 3-block ADMM (a baseline that may
/// diverge): exact minimization over `w`, `y`, `z` in turn, then
/// `x⁺ = x + τσ(𝒜*y⁺ + z⁺ − Qw⁺ − c)`.
pub fn direct_extended_step(p: &CcqpProblem, cfg: &SolverConfig, s: &IterateState) -> Result<IterateState> {
    s.check(p)?;
    let sigma = cfg.sigma;
    let a = p.constraints();
    let w = if p.q().is_zero() {
        s.x.clone()
    } else {
        let t = &s.x + (a.adjoint(&s.y)? + &s.z - p.c()) * sigma;
        p.q().solve_shifted(sigma, &t)?
    };
    let qw = p.q().apply(&w);
    let y = y_update(p, sigma, &s.x, &s.z, &qw)?;
    let r = a.adjoint(&y)? - &qw - p.c();
    let z = -p.theta().prox(1.0 / sigma, &(&r + &s.x / sigma));
    let x = &s.x + (&r + &z) * (cfg.tau * sigma);
    let u = &x - &z * sigma;
    Ok(IterateState {
        w,
        y,
        z,
        x,
        u: Some(u),
        k: s.k + 1,
    })
}

/// `u = x⁺ − σz⁺` of a stepped state.
pub fn shadow_u(p: &CcqpProblem, sigma: f64, s: &IterateState) -> Result<Point> {
    s.check(p)?;
    if s.u.is_none() {
        return Err(Error::State("shadow point requested before the first step".into()));
    }
    Ok(&s.x - &s.z * sigma)
}

/// Dispatches one ADMM step; [`Algorithm::Dys`] has no per-state step.
pub fn step(p: &CcqpProblem, algo: Algorithm, cfg: &SolverConfig, s: &IterateState) -> Result<IterateState> {
    match algo {
        Algorithm::Modified => modified_admm_step(p, cfg.sigma, s),
        Algorithm::Generalized => generalized_step(p, cfg, s),
        Algorithm::Direct3 => direct_extended_step(p, cfg, s),
        Algorithm::Dys => Err(Error::InvalidConfig(
            "the splitting iteration has no standalone ADMM step".into(),
        )),
    }
}
