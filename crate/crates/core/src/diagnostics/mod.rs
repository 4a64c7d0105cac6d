//! KKT residuals, augmented-Lagrangian evaluation and the ADMM/splitting
//! equivalence checker.

mod equivalence;
mod moreau;
mod perturb;

pub use equivalence::{equivalence_check, EquivalenceMode, EquivalenceOptions, EquivalenceReport, StepDeviation};
pub use moreau::{moreau_check, MoreauReport};
pub use perturb::{
    kkt_perturbation_check, KktCondition, PerturbationCase, PerturbationReport, RAISED_FLOOR, UNTOUCHED_CEILING,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{prox_conjugate, CcqpProblem, KktPoint, ProxFriendly};
use crate::symcore::{psd_project_point, Point, Space};

/// Normalized residuals of the KKT system
///
/// ```text
/// 𝒜x = b,   𝒜*y + z − Qw − c = 0,   Qw = Qx,   0 ∈ x − ∂θ(−z)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResidual {
    /// `‖𝒜x − b‖/(1 + ‖b‖)`.
    pub eta_primal: f64,
    /// `‖𝒜*y + z − Qw − c‖/(1 + ‖c‖)`.
    pub eta_dual: f64,
    /// `‖Q(w − x)‖/(1 + ‖Qx‖)`.
    pub eta_w: f64,
    /// `‖x − 𝒥_{σ∂θ*}(x − σz)‖/(1 + ‖x‖)`.
    pub eta_theta: f64,
    /// Semidefinite complementarity and cone infeasibility; zero unless the
    /// problem is a PSD embedding.
    pub eta_comp: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.components().into_iter().fold(0.0, f64::max)
    }

    pub fn components(&self) -> [f64; 5] {
        [
            self.eta_primal,
            self.eta_dual,
            self.eta_w,
            self.eta_theta,
            self.eta_comp,
        ]
    }
}

pub fn kkt_residual(p: &CcqpProblem, sigma: f64, s: &KktPoint) -> Result<KktResidual> {
    s.check_dims(p)?;
    let a = p.constraints();
    let qx = p.q().apply(&s.x);
    let qw = p.q().apply(&s.w);
    let eta_primal = (a.apply(&s.x)? - p.b()).norm() / (1.0 + p.b().norm());
    let eta_dual = (a.adjoint(&s.y)? + &s.z - &qw - p.c()).norm() / (1.0 + p.c().norm());
    let eta_w = (&qw - &qx).norm() / (1.0 + qx.norm());
    let resolved = prox_conjugate(p.theta(), sigma, &(&s.x - &s.z * sigma));
    let eta_theta = (&s.x - resolved).norm() / (1.0 + s.x.norm());
    let eta_comp = match p.space() {
        Space::Sym(n) if p.is_psd_embedding() => psd_complementarity(n, &s.x, &s.z),
        _ => 0.0,
    };
    Ok(KktResidual {
        eta_primal,
        eta_dual,
        eta_w,
        eta_theta,
        eta_comp,
    })
}

/// `|⟨Z,X⟩|/(1 + ‖X‖‖Z‖) + ‖Π₊(−X)‖/(1 + ‖X‖) + ‖Π₊(−Z)‖/(1 + ‖Z‖)`.
fn psd_complementarity(n: usize, x: &Point, z: &Point) -> f64 {
    let (nx, nz) = (x.norm(), z.norm());
    x.dot(z).abs() / (1.0 + nx * nz)
        + psd_project_point(n, &-x).norm() / (1.0 + nx)
        + psd_project_point(n, &-z).norm() / (1.0 + nz)
}

/// `ℒ_σ(w, y, z; x) = ½⟨w,Qw⟩ − ⟨b,y⟩ + θ(−z) + ⟨r, x⟩ + (σ/2)‖r‖²` with
/// `r = 𝒜*y + z − Qw − c`. Returns `+∞` when `−z ∉ dom θ`.
pub fn aug_lagrangian_value(
    p: &CcqpProblem,
    sigma: f64,
    w: &Point,
    y: &DVector<f64>,
    z: &Point,
    x: &Point,
) -> Result<f64> {
    KktPoint {
        w: w.clone(),
        y: y.clone(),
        z: z.clone(),
        x: x.clone(),
    }
    .check_dims(p)?;
    let theta = p.theta().value(&-z).ok_or(Error::ValueOracleMissing)?;
    if theta.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let qw = p.q().apply(w);
    let r = p.constraints().adjoint(y)? + z - &qw - p.c();
    Ok(0.5 * w.dot(&qw) - p.b().dot(y) + theta + r.dot(x) + 0.5 * sigma * r.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{gen_l1_ccqp, gen_random_cqsdp, OperatorForm, QuadOperator, Theta};
    use crate::symcore::ConstraintMap;
    use crate::symcore::SymMatrix;

    #[test]
    fn zero_point_only_misses_feasibility_by_b() {
        let p = gen_random_cqsdp(5, 3, 11, 2).unwrap().to_ccqp();
        let r = kkt_residual(&p, 1.0, &KktPoint::zeros(&p)).unwrap();
        let nb = p.b().norm();
        assert!((r.eta_primal - nb / (1.0 + nb)).abs() < 1e-15);
        assert_eq!(r.eta_w, 0.0);
        assert_eq!(r.eta_theta, 0.0);
        assert_eq!(r.eta_comp, 0.0);
    }

    #[test]
    fn theta_residual_matches_projection_form_on_psd_cone() {
        let p = gen_random_cqsdp(4, 2, 3, 1).unwrap().to_ccqp();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        for sigma in [0.3, 1.0, 2.5] {
            let x = SymMatrix::random(4, &mut rng).into_point();
            let z = SymMatrix::random(4, &mut rng).into_point();
            let kkt = KktPoint {
                z: z.clone(),
                x: x.clone(),
                ..KktPoint::zeros(&p)
            };
            let r = kkt_residual(&p, sigma, &kkt).unwrap();
            let direct = (&x - psd_project_point(4, &(&x - &z * sigma))).norm() / (1.0 + x.norm());
            assert!((r.eta_theta - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn complementary_pair_has_no_theta_residual() {
        let p = gen_random_cqsdp(3, 2, 8, 1).unwrap().to_ccqp();
        let x = SymMatrix::from_diagonal(&[2.0, 0.0, 1.0]).into_point();
        let z = SymMatrix::from_diagonal(&[0.0, 3.0, 0.0]).into_point();
        let kkt = KktPoint {
            z,
            x,
            ..KktPoint::zeros(&p)
        };
        let r = kkt_residual(&p, 0.7, &kkt).unwrap();
        assert!(r.eta_theta <= 1e-10);
        assert!(r.eta_comp <= 1e-12);
    }

    fn l1_problem() -> CcqpProblem {
        let space = Space::Vector(3);
        let f = nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.5, -1.0, 1.0]);
        let q = QuadOperator::new(space, OperatorForm::Dense(f.transpose() * f)).unwrap();
        let a = ConstraintMap::from_dense(nalgebra::DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0])).unwrap();
        CcqpProblem::new(
            q,
            a,
            DVector::from_vec(vec![2.0]),
            Point::from_vec(vec![0.5, -1.0, 0.25]),
            Theta::L1 { weight: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn aug_lagrangian_at_dual_feasible_point() {
        let p = l1_problem();
        let w = Point::from_vec(vec![1.0, -2.0, 0.5]);
        let y = DVector::from_vec(vec![0.7]);
        let z = p.c() + p.q().apply(&w) - p.constraints().adjoint(&y).unwrap();
        let expected = 0.5 * w.dot(&p.q().apply(&w)) - 2.0 * 0.7 + z.lp_norm(1);
        for (sigma, x) in [(1.0, Point::zeros(3)), (3.0, Point::from_vec(vec![4.0, 1.0, -9.0]))] {
            let v = aug_lagrangian_value(&p, sigma, &w, &y, &z, &x).unwrap();
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn aug_lagrangian_penalty_is_linear_in_sigma() {
        let p = l1_problem();
        let w = Point::from_vec(vec![0.1, 0.2, 0.3]);
        let y = DVector::from_vec(vec![-0.4]);
        let z = Point::from_vec(vec![1.0, 0.0, -2.0]);
        let x = Point::from_vec(vec![0.3, 0.3, 0.3]);
        let r = p.constraints().adjoint(&y).unwrap() + &z - p.q().apply(&w) - p.c();
        let v1 = aug_lagrangian_value(&p, 0.8, &w, &y, &z, &x).unwrap();
        let v2 = aug_lagrangian_value(&p, 1.6, &w, &y, &z, &x).unwrap();
        assert!((v2 - v1 - 0.4 * r.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn aug_lagrangian_is_infinite_outside_the_domain() {
        let p = gen_l1_ccqp(4, 2, 1).unwrap();
        let z = Point::from_element(4, 5.0);
        let v = aug_lagrangian_value(&p, 1.0, &Point::zeros(4), &DVector::zeros(2), &z, &Point::zeros(4)).unwrap();
        assert!(v.is_infinite());
    }
}
