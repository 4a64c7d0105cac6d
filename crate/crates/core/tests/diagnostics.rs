use ccqp::admm::{default_parameters, solve, Algorithm};
use ccqp::diagnostics::{kkt_perturbation_check, kkt_residual, KktCondition};
use ccqp::problem::{gen_l1_ccqp, gen_linear_sdp, gen_random_cqsdp, CcqpProblem, KktPoint};

fn reference(p: &CcqpProblem) -> (KktPoint, f64) {
    let mut cfg = default_parameters(p);
    cfg.tol_kkt = 1e-11;
    cfg.tol_fp = 1e-16;
    cfg.max_iter = 500_000;
    let r = solve(p, Algorithm::Generalized, &cfg, None).unwrap();
    assert!(r.converged(), "{:?}", r.reason);
    let mut kkt = r.state.to_kkt();
    kkt.w = kkt.x.clone();
    (kkt, cfg.sigma)
}

#[test]
fn converged_reference_has_small_residuals() {
    for p in [
        gen_random_cqsdp(8, 4, 5, 3).unwrap().to_ccqp(),
        gen_l1_ccqp(10, 3, 5).unwrap(),
    ] {
        let (kkt, sigma) = reference(&p);
        let r = kkt_residual(&p, sigma, &kkt).unwrap();
        assert!(r.max() <= 1e-8, "{r:?}");
    }
}

#[test]
fn each_perturbation_raises_only_its_residual() {
    for p in [
        gen_random_cqsdp(8, 4, 5, 3).unwrap().to_ccqp(),
        gen_l1_ccqp(10, 3, 5).unwrap(),
    ] {
        let (kkt, sigma) = reference(&p);
        let report = kkt_perturbation_check(&p, sigma, &kkt, 0.05, 3).unwrap();
        assert!(report.baseline_passed);
        assert_eq!(report.cases.len(), 4);
        for case in &report.cases {
            assert!(case.passed, "{case:?}");
        }
    }
}

#[test]
fn w_case_is_skipped_without_q() {
    let p = gen_linear_sdp(6, 3, 2).unwrap().to_ccqp();
    let (kkt, sigma) = reference(&p);
    let report = kkt_perturbation_check(&p, sigma, &kkt, 0.05, 1).unwrap();
    assert!(report.cases.iter().all(|c| c.condition != KktCondition::W));
    assert!(report.passed(), "{report:?}");
}
