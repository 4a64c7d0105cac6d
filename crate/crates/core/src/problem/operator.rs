use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::symcore::{power_lambda_max, Point, PowerOptions, Space};

/// Representation of a self-adjoint PSD operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorForm {
    Zero,
    /// `α·𝓘`, `α ≥ 0`.
    ScaledIdentity(f64),
    /// Elementwise weights over the flat storage (`D ∘ X`).
    Hadamard(Point),
    /// Symmetric matrix acting on `ℝᴺ`, or on the isometric `svec`
    /// coordinates of `𝒮ⁿ` (off-diagonals scaled by `√2`).
    Dense(DMatrix<f64>),
    /// `Σᵢ ⟨Bᵢ, ·⟩ Bᵢ`; rows of the matrix are the flat `Bᵢ`.
    RankOneSum(DMatrix<f64>),
}

/// A self-adjoint PSD linear operator on a fixed [`Space`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadOperator {
    space: Space,
    form: OperatorForm,
}

/// Isometric vectorization of the flat storage of a symmetric matrix.
pub fn svec(n: usize, x: &Point) -> DVector<f64> {
    let mut out = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] = if i == j {
                x[i + i * n]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (x[i + j * n] + x[j + i * n])
            };
            k += 1;
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(n: usize, s: &DVector<f64>) -> Point {
    let mut out = Point::zeros(n * n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                out[i + i * n] = s[k];
            } else {
                let v = s[k] / std::f64::consts::SQRT_2;
                out[i + j * n] = v;
                out[j + i * n] = v;
            }
            k += 1;
        }
    }
    out
}

impl QuadOperator {
    pub fn zero(space: Space) -> Self {
        Self {
            space,
            form: OperatorForm::Zero,
        }
    }

    pub fn identity(space: Space) -> Self {
        Self {
            space,
            form: OperatorForm::ScaledIdentity(1.0),
        }
    }

    /// Checks the payload shape against `space` and the structural PSD conditions
    /// that are cheap to verify exactly.
    pub fn new(space: Space, form: OperatorForm) -> Result<Self> {
        match &form {
            OperatorForm::Zero => {}
            OperatorForm::ScaledIdentity(a) => {
                if !(a.is_finite() && *a >= 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "identity scale must be a nonnegative number, got {a}"
                    )));
                }
            }
            OperatorForm::Hadamard(w) => {
                check_len("hadamard weights", space.len(), w.len())?;
                if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidProblem("hadamard weights must be nonnegative".into()));
                }
                if let Space::Sym(n) = space {
                    for i in 0..n {
                        for j in 0..i {
                            if w[i + j * n] != w[j + i * n] {
                                return Err(Error::InvalidProblem("hadamard weights must be symmetric".into()));
                            }
                        }
                    }
                }
            }
            OperatorForm::Dense(m) => {
                check_len("dense operator rows", space.dimension(), m.nrows())?;
                check_len("dense operator columns", space.dimension(), m.ncols())?;
                let asym = (m - m.transpose()).norm();
                if asym > 1e-12 * (1.0 + m.norm()) {
                    return Err(Error::InvalidProblem(format!(
                        "dense operator is not symmetric (asymmetry {asym:e})"
                    )));
                }
            }
            OperatorForm::RankOneSum(b) => {
                if b.nrows() > 0 {
                    check_len("rank-one factor length", space.len(), b.ncols())?;
                }
                if let Space::Sym(n) = space {
                    for r in 0..b.nrows() {
                        for i in 0..n {
                            for j in 0..i {
                                if b[(r, i + j * n)] != b[(r, j + i * n)] {
                                    return Err(Error::InvalidProblem("rank-one factors must be symmetric".into()));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { space, form })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn form(&self) -> &OperatorForm {
        &self.form
    }

    pub fn is_zero(&self) -> bool {
        match &self.form {
            OperatorForm::Zero => true,
            OperatorForm::ScaledIdentity(a) => *a == 0.0,
            OperatorForm::Hadamard(w) => w.iter().all(|v| *v == 0.0),
            OperatorForm::Dense(m) => m.iter().all(|v| *v == 0.0),
            OperatorForm::RankOneSum(b) => b.iter().all(|v| *v == 0.0),
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        debug_assert_eq!(x.len(), self.space.len());
        match &self.form {
            OperatorForm::Zero => Point::zeros(x.len()),
            OperatorForm::ScaledIdentity(a) => x * *a,
            OperatorForm::Hadamard(w) => x.component_mul(w),
            OperatorForm::Dense(m) => match self.space {
                Space::Vector(_) => m * x,
                Space::Sym(n) => smat(n, &(m * svec(n, x))),
            },
            OperatorForm::RankOneSum(b) => {
                if b.nrows() == 0 {
                    Point::zeros(x.len())
                } else {
                    b.tr_mul(&(b * x))
                }
            }
        }
    }

    /// Power-iteration estimate of λ_max (not inflated). A non-converged run
    /// falls back to its best estimate with a warning.
    pub fn lambda_max_estimate(&self) -> f64 {
        match power_lambda_max(self.space, |x| self.apply(x), PowerOptions::default()) {
            Ok(l) => l,
            Err(Error::NoConvergence { estimate, iterations }) => {
                log::warn!("power iteration did not settle in {iterations} iterations; using {estimate}");
                estimate
            }
            Err(e) => unreachable!("power iteration with default options: {e}"),
        }
    }

    /// Samples the self-adjointness and PSD invariants on random points.
    pub fn check_self_adjoint_psd<R: rand::Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> Result<()> {
        for _ in 0..samples {
            let x = self.space.random_point(rng);
            let y = self.space.random_point(rng);
            let qx = self.apply(&x);
            let qy = self.apply(&y);
            let curv = x.dot(&qx);
            if curv < -1e-12 * x.norm() * (x.norm() + qx.norm()) {
                return Err(Error::InvalidProblem(format!(
                    "operator is not positive semidefinite (⟨x, Qx⟩ = {curv:e})"
                )));
            }
            let a = qx.dot(&y);
            let b = x.dot(&qy);
            if (a - b).abs() > 1e-12 * (1.0 + qx.norm() * y.norm()) {
                return Err(Error::InvalidProblem(format!(
                    "operator is not self-adjoint (⟨Qx,y⟩ − ⟨x,Qy⟩ = {:e})",
                    a - b
                )));
            }
        }
        Ok(())
    }

    /// Solves `(𝓘 + σQ) w = t`.
    pub fn solve_shifted(&self, sigma: f64, t: &Point) -> Result<Point> {
        match &self.form {
            OperatorForm::Zero => Ok(t.clone()),
            OperatorForm::ScaledIdentity(a) => Ok(t / (1.0 + sigma * a)),
            OperatorForm::Hadamard(w) => Ok(t.zip_map(w, |ti, wi| ti / (1.0 + sigma * wi))),
            OperatorForm::Dense(m) => {
                let k = m.nrows();
                let shifted = DMatrix::identity(k, k) + m * sigma;
                let chol = shifted
                    .cholesky()
                    .ok_or_else(|| Error::WSubproblemUnsupported("𝓘 + σQ is not positive definite".into()))?;
                Ok(match self.space {
                    Space::Vector(_) => chol.solve(t),
                    Space::Sym(n) => smat(n, &chol.solve(&svec(n, t))),
                })
            }
            OperatorForm::RankOneSum(b) => {
                let r = b.nrows();
                if r == 0 {
                    return Ok(t.clone());
                }
                // Woodbury: (𝓘 + σBᵀB)⁻¹ = 𝓘 − Bᵀ(𝓘/σ + BBᵀ)⁻¹B
                let inner = DMatrix::identity(r, r) / sigma + b * b.transpose();
                let chol = inner
                    .cholesky()
                    .ok_or_else(|| Error::WSubproblemUnsupported("Woodbury core is not positive definite".into()))?;
                Ok(t - b.tr_mul(&chol.solve(&(b * t))))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::SymMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svec_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = SymMatrix::random(4, &mut rng).into_point();
        let y = SymMatrix::random(4, &mut rng).into_point();
        assert!((svec(4, &x).dot(&svec(4, &y)) - x.dot(&y)).abs() < 1e-12);
        assert!((smat(4, &svec(4, &x)) - &x).norm() < 1e-14);
    }

    #[test]
    fn every_form_solves_its_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let space = Space::Sym(3);
        let mut bs = DMatrix::zeros(2, 9);
        for r in 0..2 {
            bs.row_mut(r)
                .copy_from_slice(SymMatrix::random(3, &mut rng).to_point().as_slice());
        }
        let g = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 / 5.0);
        let dense = &g * g.transpose();
        let w = SymMatrix::from_upper(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
            .unwrap()
            .into_point();
        let forms = vec![
            OperatorForm::Zero,
            OperatorForm::ScaledIdentity(2.5),
            OperatorForm::Hadamard(w),
            OperatorForm::Dense(dense),
            OperatorForm::RankOneSum(bs),
        ];
        for f in forms {
            let q = QuadOperator::new(space, f).unwrap();
            q.check_self_adjoint_psd(&mut rng, 10).unwrap();
            let t = space.random_point(&mut rng);
            let wv = q.solve_shifted(0.7, &t).unwrap();
            let back = &wv + q.apply(&wv) * 0.7;
            assert!((back - &t).norm() < 1e-12 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn rejects_asymmetric_or_negative() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(QuadOperator::new(Space::Vector(2), OperatorForm::Dense(m)).is_err());
        assert!(QuadOperator::new(Space::Vector(2), OperatorForm::ScaledIdentity(-1.0)).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let q = QuadOperator::new(Space::Vector(2), OperatorForm::Dense(neg)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(q.check_self_adjoint_psd(&mut rng, 20).is_err());
    }
}
