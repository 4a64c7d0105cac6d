//! Dense symmetric-matrix machinery shared by every solver in the crate.
//!
//! Points of the primal space are flat [`Point`] vectors. For the space of
//! symmetric matrices a point is the column-major storage of the full `n × n`
//! matrix, so the plain Euclidean dot product of two points equals the trace
//! inner product `⟨X, Y⟩ = tr(XY)`.

mod gram;
mod map;
mod matrix;
mod power;

pub use gram::GramFactorization;
pub use map::ConstraintMap;
pub use matrix::{psd_project, psd_project_point, SymMatrix};
pub use power::{power_lambda_max, PowerOptions, LAMBDA_INFLATION};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// A point of a primal or dual space.
pub type Point = DVector<f64>;

/// The Euclidean space a problem lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "dim", rename_all = "snake_case")]
pub enum Space {
    /// `ℝᴺ` with the standard inner product.
    Vector(usize),
    /// `𝒮ⁿ` with the trace inner product, stored as full `n × n` column-major.
    Sym(usize),
}

impl Space {
    /// Length of the flat storage of a point.
    pub fn len(&self) -> usize {
        match *self {
            Space::Vector(n) => n,
            Space::Sym(n) => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of free coordinates (`n(n+1)/2` for symmetric matrices).
    pub fn dimension(&self) -> usize {
        match *self {
            Space::Vector(n) => n,
            Space::Sym(n) => n * (n + 1) / 2,
        }
    }

    pub fn zeros(&self) -> Point {
        Point::zeros(self.len())
    }

    /// Standard Gaussian point; symmetric when the space is `𝒮ⁿ`.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Space::Vector(n) => Point::from_fn(n, |_, _| rng.sample(StandardNormal)),
            Space::Sym(n) => SymMatrix::random(n, rng).into_point(),
        }
    }
}

/// Relative distance `‖a − b‖ / max(1, ‖b‖)`.
pub fn rel_dev(a: &Point, b: &Point) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
