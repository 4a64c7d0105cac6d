use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::Point;
use crate::error::{check_len, Error, Result};

/// A real symmetric `n × n` matrix.
///
/// Stored in full; every constructor symmetrizes so `m[(i, j)] == m[(j, i)]`
/// holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

impl SymMatrix {
    /// Symmetrizes `(M + Mᵀ)/2`. Fails on non-square or empty input.
    pub fn from_matrix(mut m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidProblem(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidProblem("matrix order must be at least 1".into()));
        }
        symmetrize_in_place(&mut m);
        Ok(Self { inner: m })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            inner: DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }),
        }
    }

    /// The elementary matrix `eᵢeⱼᵀ + eⱼeᵢᵀ` scaled to `eᵢeᵢᵀ` on the diagonal.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        Self { inner: m }
    }

    /// Builds from a row-major list of rows; the input is symmetrized.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            check_len("matrix row", n, r.len())?;
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds from the row-major upper triangle `(0,0), (0,1), …, (0,n−1), (1,1), …`.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        check_len("upper triangle", n * (n + 1) / 2, upper.len())?;
        if n == 0 {
            return Err(Error::InvalidProblem("matrix order must be at least 1".into()));
        }
        let mut m = DMatrix::zeros(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = upper[idx];
                m[(j, i)] = upper[idx];
                idx += 1;
            }
        }
        Ok(Self { inner: m })
    }

    /// Row-major upper triangle, inverse of [`SymMatrix::from_upper`].
    pub fn to_upper(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Reads a flat column-major point of length `n²`, symmetrizing.
    pub fn from_point(n: usize, p: &Point) -> Result<Self> {
        check_len("symmetric point", n * n, p.len())?;
        Self::from_matrix(DMatrix::from_column_slice(n, n, p.as_slice()))
    }

    pub fn into_point(self) -> Point {
        Point::from_vec(self.inner.data.into())
    }

    pub fn to_point(&self) -> Point {
        Point::from_column_slice(self.inner.as_slice())
    }

    /// Symmetric matrix with i.i.d. standard normal upper triangle.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v: f64 = rng.sample(StandardNormal);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Trace inner product `tr(AB)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.inner.dot(&other.inner)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn scale(&self, a: f64) -> SymMatrix {
        SymMatrix { inner: &self.inner * a }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.inner.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

/// Projection onto the PSD cone `𝒮ⁿ₊` in Frobenius norm.
///
/// Computes `Σ max(λᵢ, 0) vᵢvᵢᵀ` from an eigendecomposition of `(M + Mᵀ)/2`.
pub fn psd_project(m: &SymMatrix) -> SymMatrix {
    SymMatrix {
        inner: project_dense(m.inner.clone()),
    }
}

/// [`psd_project`] on a flat point of `𝒮ⁿ`.
pub fn psd_project_point(n: usize, p: &Point) -> Point {
    debug_assert_eq!(p.len(), n * n);
    let m = DMatrix::from_column_slice(n, n, p.as_slice());
    Point::from_column_slice(project_dense(m).as_slice())
}

fn project_dense(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    symmetrize_in_place(&mut m);
    let eig = SymmetricEigen::new(m);
    let abs_max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let clamp = 1e-14 * abs_max;

    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > clamp).collect();
    if keep.is_empty() {
        return DMatrix::zeros(n, n);
    }
    // V₊ diag(√λ₊) so the result is B Bᵀ.
    let b = DMatrix::from_fn(n, keep.len(), |i, c| {
        let k = keep[c];
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()
    });
    let mut out = &b * b.transpose();
    symmetrize_in_place(&mut out);
    out
}
