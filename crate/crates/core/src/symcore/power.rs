use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Point, Space};
use crate::error::{Error, Result};

/// Multiplicative safety margin applied to λ_max estimates before they enter
/// step-size bounds.
pub const LAMBDA_INFLATION: f64 = 1.0 + 1e-6;

const START_SEED: u64 = 0x5eed_1a4b;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Largest eigenvalue of a self-adjoint PSD operator on `space` by power
/// iteration from a fixed seeded start.
///
/// Stops once successive Rayleigh quotients agree to `tol · max(λ, 1)`.
/// Returns 0 for a numerically zero operator.
pub fn power_lambda_max<F>(space: Space, op: F, opts: PowerOptions) -> Result<f64>
where
    F: Fn(&Point) -> Point,
{
    if opts.tol <= 0.0 {
        return Err(Error::InvalidConfig("power iteration tol must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v = space.random_point(&mut rng);
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    v /= norm;

    let mut lambda = 0.0_f64;
    for it in 0..opts.max_iter {
        let w = op(&v);
        let next = v.dot(&w);
        let wn = w.norm();
        if wn <= 1e-300 {
            return Ok(0.0);
        }
        let done = it > 0 && (next - lambda).abs() <= opts.tol * next.abs().max(1.0);
        lambda = next;
        if done {
            return Ok(lambda.max(0.0));
        }
        v = w / wn;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        estimate: lambda.max(0.0),
    })
}
