use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CcqpProblem, CqsdpProblem, OperatorForm, QuadOperator, Theta};
use crate::error::{Error, Result};
use crate::symcore::{ConstraintMap, Point, Space, SymMatrix};

const MAX_DRAWS: usize = 16;

fn unit_sym<R: Rng>(n: usize, rng: &mut R) -> SymMatrix {
    let m = SymMatrix::random(n, rng);
    let nrm = m.frobenius_norm();
    m.scale(1.0 / nrm)
}

/// Well-conditioned positive definite matrix of unit Frobenius norm.
fn spd<R: Rng>(n: usize, shift: f64, rng: &mut R) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let m = &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * shift;
    let s = SymMatrix::from_matrix(m).expect("square");
    let nrm = s.frobenius_norm();
    s.scale(1.0 / nrm)
}

/// Random quadratic SDP with a Slater point and a strictly feasible dual.
///
/// Returns the problem together with the positive definite `X̃` used to set
/// `b = 𝒜(X̃)`.
pub fn gen_random_cqsdp_with_certificate(
    n: usize,
    m: usize,
    seed: u64,
    phi_rank: usize,
) -> Result<(CqsdpProblem, SymMatrix)> {
    if n == 0 || m == 0 || m > n * (n + 1) / 2 {
        return Err(Error::InvalidConfig(format!(
            "need 1 ≤ m ≤ n(n+1)/2, got n = {n}, m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = Space::Sym(n);

    let mut map = None;
    for _ in 0..MAX_DRAWS {
        let rows: Vec<SymMatrix> = (0..m).map(|_| unit_sym(n, &mut rng)).collect();
        if let Ok(a) = ConstraintMap::from_sym_rows(&rows)?.factorized() {
            map = Some(a);
            break;
        }
    }
    let a = map.ok_or_else(|| Error::InvalidProblem("could not draw a surjective constraint map".into()))?;

    let slater = spd(n, 1.0, &mut rng);
    let b = a.apply_sym(&slater)?;

    let phi = if phi_rank == 0 {
        QuadOperator::zero(space)
    } else {
        let mut factors = DMatrix::zeros(phi_rank, n * n);
        for r in 0..phi_rank {
            factors
                .row_mut(r)
                .copy_from_slice(unit_sym(n, &mut rng).matrix().as_slice());
        }
        QuadOperator::new(space, OperatorForm::RankOneSum(factors))?
    };

    // C = 𝒜*ỹ + Z̃ − φ(W̃) with Z̃ ≻ 0 keeps the dual strictly feasible.
    let y_dual = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let z_dual = spd(n, 0.1, &mut rng);
    let w_dual = SymMatrix::random(n, &mut rng);
    let c = a.adjoint(&y_dual)? + z_dual.to_point() - phi.apply(&w_dual.to_point());
    let c = SymMatrix::from_point(n, &c)?;
    let c = c.scale(1.0 / c.frobenius_norm());

    Ok((CqsdpProblem::new(phi, a, b, c)?, slater))
}

/// Random quadratic SDP: unit-norm Gaussian constraint matrices, `φ` a sum of
/// `phi_rank` rank-one terms `⟨Bᵢ, ·⟩Bᵢ` with `‖Bᵢ‖ = 1`, `‖C‖ = 1`.
pub fn gen_random_cqsdp(n: usize, m: usize, seed: u64, phi_rank: usize) -> Result<CqsdpProblem> {
    gen_random_cqsdp_with_certificate(n, m, seed, phi_rank).map(|(p, _)| p)
}

/// Linear SDP (`φ = 0`).
pub fn gen_linear_sdp(n: usize, m: usize, seed: u64) -> Result<CqsdpProblem> {
    gen_random_cqsdp(n, m, seed, 0)
}

/// Nearest correlation matrix to `g`: `min ½‖X − G‖²` over unit-diagonal PSD `X`.
pub fn gen_nearest_correlation(g: &SymMatrix) -> Result<CqsdpProblem> {
    let n = g.dim();
    let rows: Vec<SymMatrix> = (0..n).map(|i| SymMatrix::unit(n, i, i)).collect();
    CqsdpProblem::new(
        QuadOperator::identity(Space::Sym(n)),
        ConstraintMap::from_sym_rows(&rows)?,
        DVector::from_element(n, 1.0),
        g.scale(-1.0),
    )
}

/// Symmetric target with unit diagonal and off-diagonal entries uniform in `[−1, 1]`.
pub fn gen_random_correlation_target(n: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::identity(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = rng.random_range(-1.0..=1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrix::from_matrix(m).expect("square")
}

/// ℓ1-regularized quadratic program on `ℝⁿ`:
/// `min ‖x‖₁ + ½⟨x, Qx⟩ + ⟨c, x⟩ s.t. Ax = b`, encoded with `θ = δ_{[−1,1]ⁿ}`.
///
/// `Q` is a rank-deficient dense PSD matrix and `‖c‖∞ < 1`, which makes the
/// objective coercive.
pub fn gen_l1_ccqp(n: usize, m: usize, seed: u64) -> Result<CcqpProblem> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::InvalidConfig(format!("need 1 ≤ m ≤ n, got n = {n}, m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (2 * n).div_ceil(3);
    let f = DMatrix::from_fn(k, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = f.transpose() * &f / n as f64;
    let q = (&q + q.transpose()) * 0.5;
    let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal)) / (n as f64).sqrt();
    let x_ref = Point::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let b = &a * &x_ref;
    let c = Point::from_fn(n, |_, _| rng.random_range(-0.5..0.5));
    CcqpProblem::new(
        QuadOperator::new(Space::Vector(n), OperatorForm::Dense(q))?,
        ConstraintMap::from_dense(a)?,
        b,
        c,
        Theta::Box {
            lower: -1.0,
            upper: 1.0,
        },
    )
}
