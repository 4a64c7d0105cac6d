use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::problem::{prox_conjugate, ProxFriendly, Theta};
use crate::symcore::Space;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoreauReport {
    pub samples: usize,
    /// Largest `‖prox_{tθ*}(v) − ref(t, v)‖/(1 + ‖v‖)` over the samples, where
    /// `ref` is the closed-form conjugate prox.
    pub max_conjugate_error: f64,
    /// Largest `‖prox_{tθ*}(v) + t·prox_{θ/t}(v/t) − v‖/(1 + ‖v‖)`.
    pub max_decomposition_error: f64,
}

impl MoreauReport {
    pub fn max_error(&self) -> f64 {
        self.max_conjugate_error.max(self.max_decomposition_error)
    }
}

/// Samples the Moreau decomposition for `theta` on `space` at `samples`
/// random pairs `(t, v)` with `t` log-uniform in `[1e-2, 1e2]`.
pub fn moreau_check(theta: &Theta, space: Space, samples: usize, seed: u64) -> MoreauReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MoreauReport {
        samples,
        max_conjugate_error: 0.0,
        max_decomposition_error: 0.0,
    };
    for _ in 0..samples {
        let t = 10f64.powf(rng.random_range(-2.0..2.0));
        let v = space.random_point(&mut rng) * rng.random_range(0.1..10.0);
        let scale = 1.0 + v.norm();
        let p = prox_conjugate(theta, t, &v);
        let conj = (&p - theta.conjugate_prox_reference(t, &v)).norm() / scale;
        let dec = (&p + theta.prox(1.0 / t, &(&v / t)) * t - &v).norm() / scale;
        report.max_conjugate_error = report.max_conjugate_error.max(conj);
        report.max_decomposition_error = report.max_decomposition_error.max(dec);
    }
    report
}
