use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{kkt_residual, KktResidual};
use crate::error::Result;
use crate::problem::{CcqpProblem, KktPoint};
use crate::symcore::Point;

/// A target component must exceed this after its perturbation.
pub const RAISED_FLOOR: f64 = 1e-4;
/// Every other component must stay at or below this.
pub const UNTOUCHED_CEILING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KktCondition {
    /// `b ← b + δe`.
    Primal,
    /// `y ← y + δe`.
    Dual,
    /// `w ← w + δd` with `c ← c − δQd`, leaving the dual equation intact.
    W,
    /// `z ← z + δe` with `c ← c + δe`, leaving the dual equation intact.
    Theta,
}

impl KktCondition {
    /// Indices into [`KktResidual::components`] this perturbation may raise.
    fn targets(self, psd: bool) -> &'static [usize] {
        match self {
            KktCondition::Primal => &[0],
            KktCondition::Dual => &[1],
            KktCondition::W => &[2],
            KktCondition::Theta if psd => &[3, 4],
            KktCondition::Theta => &[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCase {
    pub condition: KktCondition,
    pub residual: KktResidual,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub delta: f64,
    pub baseline: KktResidual,
    pub baseline_passed: bool,
    pub cases: Vec<PerturbationCase>,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.baseline_passed && self.cases.iter().all(|c| c.passed)
    }
}

fn unit_direction(p: &CcqpProblem, rng: &mut ChaCha8Rng) -> Point {
    let d = p.space().random_point(rng);
    let n = d.norm();
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

/// Perturbs one KKT condition at a time around `reference` and checks that
/// exactly the matching residual component responds. The `W` case is skipped
/// when `Q = 0`. In the PSD embedding the `Theta` case may also raise the
/// complementarity component.
pub fn kkt_perturbation_check(
    p: &CcqpProblem,
    sigma: f64,
    reference: &KktPoint,
    delta: f64,
    seed: u64,
) -> Result<PerturbationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let baseline = kkt_residual(p, sigma, reference)?;
    let psd = p.is_psd_embedding();
    let rebuild = |b, c| CcqpProblem::new(p.q().clone(), p.constraints().clone(), b, c, p.theta().clone());

    let mut cases = Vec::new();
    for condition in [
        KktCondition::Primal,
        KktCondition::Dual,
        KktCondition::W,
        KktCondition::Theta,
    ] {
        let mut point = reference.clone();
        let residual = match condition {
            KktCondition::Primal => {
                let e = nalgebra::DVector::from_fn(p.m(), |i, _| if i == 0 { 1.0 } else { 0.0 });
                let q = rebuild(p.b() + e * delta, p.c().clone())?;
                kkt_residual(&q, sigma, &point)?
            }
            KktCondition::Dual => {
                let e = nalgebra::DVector::from_fn(p.m(), |i, _| if i == 0 { 1.0 } else { 0.0 });
                point.y += e * delta;
                kkt_residual(p, sigma, &point)?
            }
            KktCondition::W => {
                if p.q().is_zero() {
                    continue;
                }
                let d = unit_direction(p, &mut rng);
                let qd = p.q().apply(&d);
                point.w += &d * delta;
                let q = rebuild(p.b().clone(), p.c() - qd * delta)?;
                kkt_residual(&q, sigma, &point)?
            }
            KktCondition::Theta => {
                let e = unit_direction(p, &mut rng);
                point.z += &e * delta;
                let q = rebuild(p.b().clone(), p.c() + e * delta)?;
                kkt_residual(&q, sigma, &point)?
            }
        };
        let targets = condition.targets(psd);
        let comps = residual.components();
        let raised = targets.iter().any(|&i| comps[i] > RAISED_FLOOR);
        let quiet = comps
            .iter()
            .enumerate()
            .all(|(i, &v)| targets.contains(&i) || v <= UNTOUCHED_CEILING);
        cases.push(PerturbationCase {
            condition,
            residual,
            passed: raised && quiet,
        });
    }
    Ok(PerturbationReport {
        delta,
        baseline,
        baseline_passed: baseline.max() <= UNTOUCHED_CEILING,
        cases,
    })
}
