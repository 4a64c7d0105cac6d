use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Relative pivot threshold below which the Gram matrix is declared singular.
pub const RANK_TOL: f64 = 1e-12;

/// Diagonally pivoted Cholesky factorization `P G Pᵀ = L Lᵀ` of a symmetric
/// positive-definite Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactorization {
    factor: DMatrix<f64>,
    /// `perm[k]` is the original row placed at position `k`.
    perm: Vec<usize>,
}

impl GramFactorization {
    /// Factors `gram`, failing with [`Error::SurjectivityViolation`] when a pivot
    /// drops below `RANK_TOL` times the largest diagonal entry.
    pub fn new(gram: &DMatrix<f64>) -> Result<Self> {
        let m = gram.nrows();
        check_len("gram matrix columns", m, gram.ncols())?;
        if m == 0 {
            return Err(Error::InvalidProblem(
                "constraint map must have at least one row".into(),
            ));
        }
        let max_diag = gram.diagonal().iter().fold(0.0_f64, |a, &v| a.max(v));
        let threshold = RANK_TOL * max_diag;

        let mut a = gram.clone();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut l = DMatrix::zeros(m, m);

        for k in 0..m {
            let (p, pivot) =
                (k..m).map(|i| (i, a[(i, i)])).fold(
                    (k, f64::NEG_INFINITY),
                    |best, cur| {
                        if cur.1 > best.1 {
                            cur
                        } else {
                            best
                        }
                    },
                );
            if !(pivot > threshold) || max_diag <= 0.0 {
                return Err(Error::SurjectivityViolation {
                    row: perm[p],
                    pivot,
                    threshold,
                });
            }
            if p != k {
                a.swap_rows(k, p);
                a.swap_columns(k, p);
                l.swap_rows(k, p);
                perm.swap(k, p);
            }
            let d = pivot.sqrt();
            l[(k, k)] = d;
            for i in (k + 1)..m {
                l[(i, k)] = a[(i, k)] / d;
            }
            for j in (k + 1)..m {
                for i in j..m {
                    let v = a[(i, j)] - l[(i, k)] * l[(j, k)];
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
        }
        Ok(Self { factor: l, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Lower-triangular factor of the permuted Gram matrix.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Rebuilds `G = Pᵀ L Lᵀ P` in the original ordering.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let llt = &self.factor * self.factor.transpose();
        let m = self.dim();
        let mut g = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                g[(self.perm[a], self.perm[b])] = llt[(a, b)];
            }
        }
        g
    }

    /// Solves `G x = rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.dim();
        check_len("gram right-hand side", m, rhs.len())?;
        let mut z = DVector::from_fn(m, |k, _| rhs[self.perm[k]]);
        let l = &self.factor;
        for i in 0..m {
            let mut s = z[i];
            for k in 0..i {
                s -= l[(i, k)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            for k in (i + 1)..m {
                s -= l[(k, i)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        let mut out = DVector::zeros(m);
        for k in 0..m {
            out[self.perm[k]] = z[k];
        }
        Ok(out)
    }
}
