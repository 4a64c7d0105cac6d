//! Problem data for quadratic SDPs and composite quadratic programs.
//!
//! A [`CcqpProblem`] is `min θ*(x) + ½⟨x, Qx⟩ + ⟨c, x⟩ s.t. 𝒜x = b`; the solvers
//! work on its dual `min ½⟨w, Qw⟩ − ⟨b, y⟩ + θ(−z) s.t. −Qw + 𝒜*y + z = c`.
//! A [`CqsdpProblem`] embeds into it with `θ* = δ_{𝒮ⁿ₊}`.

mod generate;
mod operator;
mod prox;

pub use generate::{
    gen_l1_ccqp, gen_linear_sdp, gen_nearest_correlation, gen_random_correlation_target, gen_random_cqsdp,
    gen_random_cqsdp_with_certificate,
};
pub use operator::{smat, svec, OperatorForm, QuadOperator};
pub use prox::{prox_conjugate, ProxFriendly, Theta, MEMBERSHIP_TOL};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::symcore::{ConstraintMap, Point, Space, SymMatrix};

const OPERATOR_CHECK_SEED: u64 = 0xc0ffee;
const OPERATOR_CHECK_SAMPLES: usize = 4;

/// `min ½⟨X, φ(X)⟩ + ⟨C, X⟩ s.t. 𝒜(X) = b, X ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CqsdpProblem {
    n: usize,
    phi: QuadOperator,
    a: ConstraintMap,
    b: DVector<f64>,
    c: SymMatrix,
}

impl CqsdpProblem {
    pub fn new(phi: QuadOperator, a: ConstraintMap, b: DVector<f64>, c: SymMatrix) -> Result<Self> {
        let n = c.dim();
        if phi.space() != Space::Sym(n) {
            return Err(Error::InvalidProblem(format!(
                "phi acts on {:?}, expected symmetric matrices of order {n}",
                phi.space()
            )));
        }
        if a.space() != Space::Sym(n) {
            return Err(Error::InvalidProblem(format!(
                "constraint map acts on {:?}, expected symmetric matrices of order {n}",
                a.space()
            )));
        }
        check_len("b", a.m(), b.len())?;
        let a = if a.gram().is_some() { a } else { a.factorized()? };
        let mut rng = ChaCha8Rng::seed_from_u64(OPERATOR_CHECK_SEED);
        phi.check_self_adjoint_psd(&mut rng, OPERATOR_CHECK_SAMPLES)?;
        Ok(Self { n, phi, a, b, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.a.m()
    }

    pub fn phi(&self) -> &QuadOperator {
        &self.phi
    }

    pub fn constraints(&self) -> &ConstraintMap {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &SymMatrix {
        &self.c
    }

    /// `½⟨X, φ(X)⟩ + ⟨C, X⟩`.
    pub fn objective(&self, x: &SymMatrix) -> f64 {
        let p = x.to_point();
        0.5 * p.dot(&self.phi.apply(&p)) + self.c.inner(x)
    }

    /// Embeds into the composite form with `θ = δ_{𝒮ⁿ₋}` so that `θ* = δ_{𝒮ⁿ₊}`.
    pub fn to_ccqp(&self) -> CcqpProblem {
        CcqpProblem {
            space: Space::Sym(self.n),
            q: self.phi.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.to_point(),
            theta: Theta::NsdIndicator,
        }
    }
}

/// Free-function form of [`CqsdpProblem::to_ccqp`].
pub fn cqsdp_to_ccqp(p: &CqsdpProblem) -> CcqpProblem {
    p.to_ccqp()
}

/// `min θ*(x) + ½⟨x, Qx⟩ + ⟨c, x⟩ s.t. 𝒜x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcqpProblem {
    space: Space,
    q: QuadOperator,
    a: ConstraintMap,
    b: DVector<f64>,
    c: Point,
    theta: Theta,
}

impl CcqpProblem {
    pub fn new(q: QuadOperator, a: ConstraintMap, b: DVector<f64>, c: Point, theta: Theta) -> Result<Self> {
        let space = q.space();
        if a.space() != space {
            return Err(Error::InvalidProblem(format!(
                "constraint map acts on {:?} but Q acts on {space:?}",
                a.space()
            )));
        }
        check_len("b", a.m(), b.len())?;
        check_len("c", space.len(), c.len())?;
        if let Space::Sym(n) = space {
            let cm = SymMatrix::from_point(n, &c)?;
            if cm.to_point() != c {
                return Err(Error::InvalidProblem("c must be symmetric".into()));
            }
        }
        if matches!(theta, Theta::PsdIndicator | Theta::NsdIndicator) && !matches!(space, Space::Sym(_)) {
            return Err(Error::InvalidProblem(
                "semidefinite indicators need a symmetric-matrix space".into(),
            ));
        }
        theta.validate()?;
        let a = if a.gram().is_some() { a } else { a.factorized()? };
        let mut rng = ChaCha8Rng::seed_from_u64(OPERATOR_CHECK_SEED);
        q.check_self_adjoint_psd(&mut rng, OPERATOR_CHECK_SAMPLES)?;
        Ok(Self {
            space,
            q,
            a,
            b,
            c,
            theta,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn m(&self) -> usize {
        self.a.m()
    }

    pub fn q(&self) -> &QuadOperator {
        &self.q
    }

    pub fn constraints(&self) -> &ConstraintMap {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &Point {
        &self.c
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    /// True when `θ* = δ_{𝒮ⁿ₊}`, i.e. the problem came from a quadratic SDP.
    pub fn is_psd_embedding(&self) -> bool {
        matches!(self.space, Space::Sym(_)) && self.theta == Theta::NsdIndicator
    }

    /// `∇q(x) = Qx + c`.
    pub fn grad_q(&self, x: &Point) -> Point {
        self.q.apply(x) + &self.c
    }

    /// `q(x) = ½⟨x, Qx⟩ + ⟨c, x⟩`.
    pub fn smooth_objective(&self, x: &Point) -> f64 {
        0.5 * x.dot(&self.q.apply(x)) + self.c.dot(x)
    }

    /// Primal objective `θ*(x) + q(x)`; `+∞` outside `dom θ*`.
    pub fn primal_objective(&self, x: &Point) -> f64 {
        self.theta.conjugate_value(x) + self.smooth_objective(x)
    }

    /// Dual objective in maximization form, `⟨b, y⟩ − ½⟨w, Qw⟩ − θ(−z)`.
    /// Equals the primal objective at a KKT point.
    pub fn dual_objective(&self, w: &Point, y: &DVector<f64>, z: &Point) -> f64 {
        let theta = self.theta.value(&-z).unwrap_or(f64::NAN);
        self.b.dot(y) - 0.5 * w.dot(&self.q.apply(w)) - theta
    }
}

/// A candidate solution `(w, y, z, x)` of the KKT system.
#[derive(Debug, Clone, PartialEq)]
pub struct KktPoint {
    pub w: Point,
    pub y: DVector<f64>,
    pub z: Point,
    pub x: Point,
}

impl KktPoint {
    pub fn zeros(p: &CcqpProblem) -> Self {
        Self {
            w: p.space().zeros(),
            y: DVector::zeros(p.m()),
            z: p.space().zeros(),
            x: p.space().zeros(),
        }
    }

    pub fn check_dims(&self, p: &CcqpProblem) -> Result<()> {
        let len = p.space().len();
        check_len("w", len, self.w.len())?;
        check_len("y", p.m(), self.y.len())?;
        check_len("z", len, self.z.len())?;
        check_len("x", len, self.x.len())
    }
}
