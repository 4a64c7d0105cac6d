//! Three-operator splitting for `0 ∈ ∂g₁(x) + ∂g₂(x) + ∇h(x)`.
//!
//! The governing map is
//!
//! ```text
//! Γ(u) = u − x̂ + 𝒥_{σ∂g₂}(2x̂ − u − σ∇h(x̂)),   x̂ = 𝒥_{σ∂g₁}(u)
//! ```
//!
//! iterated with relaxation `u⁺ = (1 − ρ)u + ρΓ(u)`. Primal points are
//! recovered as `x = 𝒥_{σ∂g₁}(u)`. For a composite quadratic program `g₁ = θ*`,
//! `g₂ = δ_K` with `K = {x : 𝒜x = b}` and `h = q`.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::problem::{prox_conjugate, CcqpProblem};
use crate::symcore::{psd_project_point, Point, Space, LAMBDA_INFLATION};

/// `(σ, v) ↦ 𝒥_{σ∂g}(v)`.
pub type Resolvent<'a> = Box<dyn Fn(f64, &Point) -> Result<Point> + 'a>;
pub type Gradient<'a> = Box<dyn Fn(&Point) -> Point + 'a>;

/// The decomposition `g₁ + g₂ + h` with `h` smooth and `β`-cocoercive gradient.
pub struct ThreeTermObjective<'a> {
    prox_g1: Resolvent<'a>,
    prox_g2: Resolvent<'a>,
    grad_h: Gradient<'a>,
    /// Cocoercivity constant `1/λ_max` of `∇h`; `+∞` when `∇h` is constant.
    pub beta: f64,
}

impl<'a> ThreeTermObjective<'a> {
    pub fn new(prox_g1: Resolvent<'a>, prox_g2: Resolvent<'a>, grad_h: Gradient<'a>, beta: f64) -> Self {
        Self {
            prox_g1,
            prox_g2,
            grad_h,
            beta,
        }
    }

    /// `g₁ = θ*` (resolvent through the Moreau identity), `g₂ = δ_K`, `h = q`.
    pub fn from_ccqp(p: &'a CcqpProblem) -> Self {
        Self {
            prox_g1: Box::new(move |s, v| Ok(prox_conjugate(p.theta(), s, v))),
            prox_g2: affine_resolvent(p),
            grad_h: Box::new(move |x| p.grad_q(x)),
            beta: cocoercivity(p),
        }
    }

    /// For a PSD-embedded problem: `g₁ = δ_{𝒮ⁿ₊}` with the resolvent evaluated
    /// as a direct eigenvalue projection rather than through `θ`.
    pub fn from_cqsdp(p: &'a CcqpProblem) -> Result<Self> {
        let n = match p.space() {
            Space::Sym(n) if p.is_psd_embedding() => n,
            _ => {
                return Err(Error::InvalidConfig(
                    "problem is not a semidefinite embedding (θ* must be δ_{𝒮ⁿ₊})".into(),
                ))
            }
        };
        Ok(Self {
            prox_g1: Box::new(move |_, v| Ok(psd_project_point(n, v))),
            prox_g2: affine_resolvent(p),
            grad_h: Box::new(move |x| p.grad_q(x)),
            beta: cocoercivity(p),
        })
    }

    pub fn resolvent_g1(&self, sigma: f64, v: &Point) -> Result<Point> {
        (self.prox_g1)(sigma, v)
    }

    pub fn resolvent_g2(&self, sigma: f64, v: &Point) -> Result<Point> {
        (self.prox_g2)(sigma, v)
    }

    pub fn gradient(&self, x: &Point) -> Point {
        (self.grad_h)(x)
    }

    /// Copy with the two resolvents exchanged.
    pub fn swapped(self) -> Self {
        Self {
            prox_g1: self.prox_g2,
            prox_g2: self.prox_g1,
            grad_h: self.grad_h,
            beta: self.beta,
        }
    }
}

fn affine_resolvent(p: &CcqpProblem) -> Resolvent<'_> {
    Box::new(move |_, v| p.constraints().affine_project(p.b(), v))
}

fn cocoercivity(p: &CcqpProblem) -> f64 {
    let l = p.q().lambda_max_estimate() * LAMBDA_INFLATION;
    if l > 1e-12 {
        1.0 / l
    } else {
        f64::INFINITY
    }
}

/// `Γ(u)` given the already computed `x̂ = 𝒥_{σ∂g₁}(u)`.
fn gamma_from_primal(obj: &ThreeTermObjective<'_>, sigma: f64, u: &Point, xhat: &Point) -> Result<Point> {
    let reflected = xhat * 2.0 - u - obj.gradient(xhat) * sigma;
    Ok(u - xhat + obj.resolvent_g2(sigma, &reflected)?)
}

/// `Γ(u) = u − x̂ + 𝒥_{σ∂g₂}(2x̂ − u − σ∇h(x̂))`, `x̂ = 𝒥_{σ∂g₁}(u)`.
pub fn gamma_apply(obj: &ThreeTermObjective<'_>, sigma: f64, u: &Point) -> Result<Point> {
    check_sigma(sigma)?;
    let xhat = obj.resolvent_g1(sigma, u)?;
    gamma_from_primal(obj, sigma, u, &xhat)
}

/// `x = 𝒥_{σ∂g₁}(u)`.
pub fn recover_primal(obj: &ThreeTermObjective<'_>, sigma: f64, u: &Point) -> Result<Point> {
    check_sigma(sigma)?;
    obj.resolvent_g1(sigma, u)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("σ must be positive, got {sigma}")))
    }
}

/// One point of the relaxed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub u: Point,
    /// `𝒥_{σ∂g₁}(u)`.
    pub x: Point,
    /// Number of relaxed steps taken to reach `u`.
    pub k: usize,
    /// `‖u − u_prev‖`; `+∞` for the starting point.
    pub fp_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    FixedPoint,
    Kkt,
    MaxIter,
    WallClock,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(self, StopReason::FixedPoint | StopReason::Kkt)
    }
}

/// What a stopping rule gets to look at.
#[derive(Debug, Clone, Copy)]
pub struct StopContext {
    pub k: usize,
    pub fp_residual: f64,
    /// Max KKT residual, when evaluated at this iteration.
    pub kkt: Option<f64>,
    pub elapsed: Duration,
}

/// Composable termination test.
#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    FixedPoint(f64),
    Kkt(f64),
    MaxIter(usize),
    WallClock(Duration),
    Any(Vec<StoppingRule>),
    All(Vec<StoppingRule>),
}

impl StoppingRule {
    pub fn check(&self, ctx: &StopContext) -> Option<StopReason> {
        match self {
            StoppingRule::FixedPoint(tol) => (ctx.fp_residual <= *tol).then_some(StopReason::FixedPoint),
            StoppingRule::Kkt(tol) => ctx.kkt.is_some_and(|v| v <= *tol).then_some(StopReason::Kkt),
            StoppingRule::MaxIter(n) => (ctx.k >= *n).then_some(StopReason::MaxIter),
            StoppingRule::WallClock(d) => (ctx.elapsed >= *d).then_some(StopReason::WallClock),
            StoppingRule::Any(rules) => rules.iter().find_map(|r| r.check(ctx)),
            StoppingRule::All(rules) => {
                let mut first = None;
                for r in rules {
                    let hit = r.check(ctx)?;
                    first.get_or_insert(hit);
                }
                first
            }
        }
    }
}

/// Lazy relaxed iteration; yields every state after the start.
pub struct SplitIter<'o, 'a> {
    obj: &'o ThreeTermObjective<'a>,
    sigma: f64,
    rho: f64,
    state: SplitState,
}

impl<'o, 'a> SplitIter<'o, 'a> {
    pub fn new(obj: &'o ThreeTermObjective<'a>, sigma: f64, rho: f64, u0: Point) -> Result<Self> {
        check_sigma(sigma)?;
        if !(rho > 0.0 && rho < 2.0) {
            return Err(Error::InvalidConfig(format!("ρ must lie in (0, 2), got {rho}")));
        }
        let x = obj.resolvent_g1(sigma, &u0)?;
        Ok(Self {
            obj,
            sigma,
            rho,
            state: SplitState {
                u: u0,
                x,
                k: 0,
                fp_residual: f64::INFINITY,
            },
        })
    }

    pub fn state(&self) -> &SplitState {
        &self.state
    }

    pub fn step(&mut self) -> Result<&SplitState> {
        let s = &self.state;
        let g = gamma_from_primal(self.obj, self.sigma, &s.u, &s.x)?;
        let u = if self.rho == 1.0 {
            g
        } else {
            &s.u * (1.0 - self.rho) + g * self.rho
        };
        let fp_residual = (&u - &s.u).norm();
        let x = self.obj.resolvent_g1(self.sigma, &u)?;
        self.state = SplitState {
            u,
            x,
            k: s.k + 1,
            fp_residual,
        };
        Ok(&self.state)
    }
}

impl Iterator for SplitIter<'_, '_> {
    type Item = Result<SplitState>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.step().cloned())
    }
}

/// Outcome of [`relaxed_iterate`].
#[derive(Debug, Clone)]
pub struct SplitRun {
    pub state: SplitState,
    pub reason: StopReason,
    /// `fp_residual` of every step, in order.
    pub fp_history: Vec<f64>,
}

/// Runs `u⁺ = (1 − ρ)u + ρΓ(u)` from `u0` until `stop` fires.
///
/// `monitor` sees every new state and may return the max KKT residual for it,
/// which feeds [`StoppingRule::Kkt`]. Exhausting the iteration budget is a
/// [`StopReason::MaxIter`] outcome, not an error.
pub fn relaxed_iterate<M>(
    obj: &ThreeTermObjective<'_>,
    sigma: f64,
    rho: f64,
    u0: Point,
    stop: &StoppingRule,
    mut monitor: M,
) -> Result<SplitRun>
where
    M: FnMut(&SplitState) -> Result<Option<f64>>,
{
    let start = Instant::now();
    let mut it = SplitIter::new(obj, sigma, rho, u0)?;
    let mut fp_history = Vec::new();
    loop {
        let state = it.step()?;
        fp_history.push(state.fp_residual);
        let kkt = monitor(state)?;
        let ctx = StopContext {
            k: state.k,
            fp_residual: state.fp_residual,
            kkt,
            elapsed: start.elapsed(),
        };
        if let Some(reason) = stop.check(&ctx) {
            return Ok(SplitRun {
                state: it.state.clone(),
                reason,
                fp_history,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::SymMatrix;

    fn identity_resolvent<'a>() -> Resolvent<'a> {
        Box::new(|_, v| Ok(v.clone()))
    }

    fn zero_gradient<'a>(len: usize) -> Gradient<'a> {
        Box::new(move |_| Point::zeros(len))
    }

    #[test]
    fn gamma_reduces_to_first_resolvent() {
        let obj = ThreeTermObjective::new(
            Box::new(|_, v| Ok(psd_project_point(2, v))),
            identity_resolvent(),
            zero_gradient(4),
            f64::INFINITY,
        );
        let u = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
            .unwrap()
            .into_point();
        let g = gamma_apply(&obj, 0.8, &u).unwrap();
        assert!((g - psd_project_point(2, &u)).norm() < 1e-15);
    }

    #[test]
    fn gamma_with_trivial_terms_is_identity() {
        let obj = ThreeTermObjective::new(
            identity_resolvent(),
            identity_resolvent(),
            zero_gradient(3),
            f64::INFINITY,
        );
        let u = Point::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(gamma_apply(&obj, 1.3, &u).unwrap(), u);
    }

    #[test]
    fn recover_primal_projects() {
        let obj = ThreeTermObjective::new(
            Box::new(|_, v| Ok(psd_project_point(2, v))),
            identity_resolvent(),
            zero_gradient(4),
            f64::INFINITY,
        );
        let u = SymMatrix::from_diagonal(&[2.0, -3.0]).into_point();
        let x = recover_primal(&obj, 1.0, &u).unwrap();
        assert!((x - SymMatrix::from_diagonal(&[2.0, 0.0]).into_point()).norm() < 1e-15);

        let plain = ThreeTermObjective::new(
            identity_resolvent(),
            identity_resolvent(),
            zero_gradient(4),
            f64::INFINITY,
        );
        assert_eq!(recover_primal(&plain, 1.0, &u).unwrap(), u);
    }

    #[test]
    fn fixed_point_stops_after_one_step() {
        let obj = ThreeTermObjective::new(
            identity_resolvent(),
            identity_resolvent(),
            zero_gradient(2),
            f64::INFINITY,
        );
        let run = relaxed_iterate(
            &obj,
            1.0,
            1.5,
            Point::from_vec(vec![1.0, 2.0]),
            &StoppingRule::Any(vec![StoppingRule::FixedPoint(1e-12), StoppingRule::MaxIter(10)]),
            |_| Ok(None),
        )
        .unwrap();
        assert_eq!(run.reason, StopReason::FixedPoint);
        assert_eq!(run.state.k, 1);
        assert_eq!(run.state.fp_residual, 0.0);
        assert_eq!(run.state.u, Point::from_vec(vec![1.0, 2.0]));
    }

    #[test]
    fn rejects_bad_parameters() {
        let obj = ThreeTermObjective::new(
            identity_resolvent(),
            identity_resolvent(),
            zero_gradient(1),
            f64::INFINITY,
        );
        assert!(SplitIter::new(&obj, 0.0, 1.0, Point::zeros(1)).is_err());
        assert!(SplitIter::new(&obj, 1.0, 2.0, Point::zeros(1)).is_err());
        assert!(gamma_apply(&obj, -1.0, &Point::zeros(1)).is_err());
    }

    #[test]
    fn stopping_rule_combinators() {
        let ctx = StopContext {
            k: 5,
            fp_residual: 1e-3,
            kkt: Some(1e-9),
            elapsed: Duration::from_millis(10),
        };
        assert_eq!(StoppingRule::Kkt(1e-8).check(&ctx), Some(StopReason::Kkt));
        assert_eq!(StoppingRule::FixedPoint(1e-8).check(&ctx), None);
        let both = StoppingRule::All(vec![StoppingRule::Kkt(1e-8), StoppingRule::FixedPoint(1e-8)]);
        assert_eq!(both.check(&ctx), None);
        let either = StoppingRule::Any(vec![StoppingRule::FixedPoint(1e-8), StoppingRule::MaxIter(5)]);
        assert_eq!(either.check(&ctx), Some(StopReason::MaxIter));
        assert_eq!(
            StoppingRule::WallClock(Duration::from_millis(1)).check(&ctx),
            Some(StopReason::WallClock)
        );
        let no_kkt = StopContext { kkt: None, ..ctx };
        assert_eq!(StoppingRule::Kkt(1.0).check(&no_kkt), None);
    }
}
