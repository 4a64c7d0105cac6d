mod common;

use ccqp::admm::{
    default_parameters, direct_extended_step, generalized_step, modified_admm_step, solve, Algorithm, IterateState,
    SolverConfig,
};
use ccqp::diagnostics::aug_lagrangian_value;
use ccqp::problem::{
    gen_l1_ccqp, gen_linear_sdp, gen_nearest_correlation, gen_random_cqsdp, CcqpProblem, CqsdpProblem, KktPoint,
    QuadOperator,
};
use ccqp::splitting::{gamma_apply, ThreeTermObjective};
use ccqp::symcore::{ConstraintMap, Point, Space, SymMatrix};
use common::{compass_search, dykstra_ncm, flat, rel, LinearSdp, TwoBlock};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn linear_oracle(p: &CqsdpProblem) -> LinearSdp {
    let a = p.constraints();
    LinearSdp {
        rows: (0..p.m()).map(|i| a.sym_row(i).unwrap().matrix().clone()).collect(),
        b: p.b().clone(),
        c: p.c().matrix().clone(),
    }
}

fn reference_kkt(p: &CcqpProblem, cfg: &SolverConfig) -> KktPoint {
    let mut cfg = cfg.clone();
    cfg.tol_kkt = 1e-11;
    cfg.tol_fp = 1e-16;
    cfg.max_iter = 200_000;
    let r = solve(p, Algorithm::Modified, &cfg, None).unwrap();
    assert!(r.converged(), "reference run stopped with {:?}", r.reason);
    let mut kkt = r.state.to_kkt();
    kkt.w = kkt.x.clone();
    kkt
}

#[test]
fn zero_q_is_classic_two_block_admm() {
    let p = gen_linear_sdp(8, 4, 3).unwrap();
    let e = p.to_ccqp();
    let oracle = linear_oracle(&p);
    let sigma = 0.8;
    let mut s = IterateState::initial(&e, None).unwrap();
    let mut t = TwoBlock {
        y: DVector::zeros(4),
        z: DMatrix::zeros(8, 8),
        x: DMatrix::zeros(8, 8),
    };
    for _ in 0..50 {
        s = modified_admm_step(&e, sigma, &s).unwrap();
        t = oracle.step(sigma, 1.0, &t);
        assert!(rel(&s.x, &flat(&t.x)) <= 1e-12);
        assert!(rel(&s.z, &flat(&t.z)) <= 1e-12);
        assert!(rel(&s.y, &t.y) <= 1e-12);
    }
}

#[test]
fn direct3_with_zero_q_uses_step_length() {
    let p = gen_linear_sdp(6, 3, 8).unwrap();
    let e = p.to_ccqp();
    let oracle = linear_oracle(&p);
    let mut cfg = default_parameters(&e);
    cfg.tau = 1.3;
    let mut s = IterateState::initial(&e, None).unwrap();
    let mut t = TwoBlock {
        y: DVector::zeros(3),
        z: DMatrix::zeros(6, 6),
        x: DMatrix::zeros(6, 6),
    };
    for _ in 0..30 {
        s = direct_extended_step(&e, &cfg, &s).unwrap();
        t = oracle.step(cfg.sigma, cfg.tau, &t);
        assert!(rel(&s.x, &flat(&t.x)) <= 1e-12);
        assert!(rel(&s.y, &t.y) <= 1e-12);
    }
}

#[test]
fn direct3_differs_from_generalized() {
    let e = gen_random_cqsdp(6, 3, 5, 4).unwrap().to_ccqp();
    let mut cfg = default_parameters(&e);
    cfg.rho = 1.0;
    cfg.tau = 1.0;
    let mut a = IterateState::initial(&e, None).unwrap();
    let mut b = a.clone();
    for _ in 0..10 {
        a = direct_extended_step(&e, &cfg, &a).unwrap();
        b = generalized_step(&e, &cfg, &b).unwrap();
    }
    assert!(rel(&a.x, &b.x) > 1e-3, "deviation {}", rel(&a.x, &b.x));
}

#[test]
fn generalized_z_update_minimizes_its_subproblem() {
    let p = gen_l1_ccqp(5, 2, 13).unwrap();
    let mut cfg = default_parameters(&p);
    cfg.rho = 1.3;
    let mut s = IterateState::initial(&p, None).unwrap();
    for _ in 0..3 {
        s = generalized_step(&p, &cfg, &s).unwrap();
    }
    let next = generalized_step(&p, &cfg, &s).unwrap();
    let (sigma, rho) = (cfg.sigma, cfg.rho);
    let a = p.constraints();
    let w = next.w.clone();
    let qw = p.q().apply(&w);
    let aty = a.adjoint(&next.y).unwrap();
    // θ(−z) + ⟨z, x⟩ + (σ/2)‖ρ𝒜*y⁺ − (1−ρ)z_prev − ρQw⁺ − ρc + z‖², θ = box indicator.
    let objective = |z: &DVector<f64>| {
        if z.iter().any(|v| v.abs() > 1.0) {
            return f64::INFINITY;
        }
        let r = &aty * rho - &s.z * (1.0 - rho) - (&qw + p.c()) * rho + z;
        z.dot(&s.x) + 0.5 * sigma * r.norm_squared()
    };
    let start = Point::zeros(5);
    let z = compass_search(objective, start, 0.5, 1e-10);
    assert!((&z - &next.z).norm() <= 1e-6, "{z} vs {}", next.z);
}

#[test]
fn y_update_minimizes_the_augmented_lagrangian() {
    let e = gen_random_cqsdp(5, 3, 21, 2).unwrap().to_ccqp();
    let sigma = default_parameters(&e).sigma;
    let mut s = IterateState::initial(&e, None).unwrap();
    for _ in 0..4 {
        s = modified_admm_step(&e, sigma, &s).unwrap();
    }
    let next = modified_admm_step(&e, sigma, &s).unwrap();
    let value = |y: &DVector<f64>| aug_lagrangian_value(&e, sigma, &next.w, y, &s.z, &s.x).unwrap();
    let best = value(&next.y);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let d = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
        let d = d.normalize() * 1e-4;
        assert!(best <= value(&(&next.y + d)));
    }
}

#[test]
fn kkt_points_are_fixed_points() {
    let e = gen_random_cqsdp(6, 3, 17, 2).unwrap().to_ccqp();
    let cfg = default_parameters(&e);
    let kkt = reference_kkt(&e, &cfg);
    let s = IterateState::from_kkt(&kkt);
    let check = |t: &IterateState| {
        assert!((&t.x - &kkt.x).norm() <= 1e-10);
        assert!((&t.z - &kkt.z).norm() <= 1e-10);
        assert!((&t.y - &kkt.y).norm() <= 1e-10);
        assert!((&t.w - &kkt.w).norm() <= 1e-10);
    };
    check(&modified_admm_step(&e, cfg.sigma, &s).unwrap());
    for rho in [0.5, 1.0, 1.5] {
        let c = SolverConfig { rho, ..cfg.clone() };
        check(&generalized_step(&e, &c, &s).unwrap());
    }
    for tau in [0.5, 1.0, 1.6] {
        let c = SolverConfig { tau, ..cfg.clone() };
        check(&direct_extended_step(&e, &c, &s).unwrap());
    }
    let obj = ThreeTermObjective::from_ccqp(&e);
    let u = &kkt.x - &kkt.z * cfg.sigma;
    assert!((gamma_apply(&obj, cfg.sigma, &u).unwrap() - &u).norm() <= 1e-10);
}

#[test]
fn two_by_two_correlation_matches_dykstra() {
    let g = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    let oracle = dykstra_ncm(g.matrix(), 1e-12, 100_000);
    assert!((&oracle - DMatrix::from_element(2, 2, 1.0)).norm() <= 1e-9);
    let e = gen_nearest_correlation(&g).unwrap().to_ccqp();
    let cfg = SolverConfig {
        sigma: 1.0,
        tol_kkt: 1e-9,
        ..default_parameters(&e)
    };
    let r = solve(&e, Algorithm::Modified, &cfg, None).unwrap();
    assert!(r.converged());
    assert!((&r.state.x - flat(&oracle)).norm() <= 1e-6);
}

#[test]
fn identity_target_is_its_own_correlation_matrix() {
    let e = gen_nearest_correlation(&SymMatrix::identity(4)).unwrap().to_ccqp();
    let r = solve(&e, Algorithm::Generalized, &default_parameters(&e), None).unwrap();
    assert!(r.converged());
    assert!((&r.state.x - SymMatrix::identity(4).into_point()).norm() <= 1e-6);
}

#[test]
fn fully_pinned_sdp_recovers_its_unique_feasible_point() {
    // 𝒜 fixes every entry of a 2×2 matrix, so the only feasible point is X̄.
    let rows = [
        SymMatrix::unit(2, 0, 0),
        SymMatrix::unit(2, 1, 1),
        SymMatrix::unit(2, 0, 1),
    ];
    let xbar = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let a = ConstraintMap::from_sym_rows(&rows).unwrap();
    let b = a.apply_sym(&xbar).unwrap();
    let c = SymMatrix::from_rows(&[vec![0.3, -1.0], vec![-1.0, 2.0]]).unwrap();
    let p = CqsdpProblem::new(QuadOperator::zero(Space::Sym(2)), a, b, c).unwrap();
    let e = p.to_ccqp();
    for algo in [Algorithm::Modified, Algorithm::Generalized, Algorithm::Dys] {
        let r = solve(&e, algo, &default_parameters(&e), None).unwrap();
        assert!(r.converged(), "{algo}");
        assert!((&r.state.x - xbar.to_point()).norm() <= 1e-6, "{algo}");
    }
}

#[test]
fn checkpoint_minimum_is_monotone_on_convergent_runs() {
    let e = gen_random_cqsdp(8, 4, 2, 3).unwrap().to_ccqp();
    let r = solve(&e, Algorithm::Generalized, &default_parameters(&e), None).unwrap();
    assert!(r.converged());
    let mut best = f64::INFINITY;
    for c in &r.history {
        let next = best.min(c.residual.max());
        assert!(next <= best);
        best = next;
    }
    assert!(r.residual.max() <= r.config.tol_kkt || r.fp_residual <= r.config.tol_fp);
}

#[test]
fn solve_is_deterministic() {
    let e = gen_random_cqsdp(6, 3, 9, 2).unwrap().to_ccqp();
    let cfg = default_parameters(&e);
    let a = solve(&e, Algorithm::Generalized, &cfg, None).unwrap();
    let b = solve(&e, Algorithm::Generalized, &cfg, None).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.history, b.history);
}
