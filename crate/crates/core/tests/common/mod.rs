//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the solver's algorithmic code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// PSD projection from a raw eigendecomposition, no clamping heuristics.
pub fn psd_oracle(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let v = eig.eigenvectors.column(j);
            out += v * v.transpose() * l;
        }
    }
    out
}

/// Nearest correlation matrix to `g` by Dykstra's alternating projections
/// between the PSD cone and the unit-diagonal affine set.
pub fn dykstra_ncm(g: &DMatrix<f64>, tol: f64, max_iter: usize) -> DMatrix<f64> {
    let n = g.nrows();
    let mut y = g.clone();
    let mut ds = DMatrix::zeros(n, n);
    for _ in 0..max_iter {
        let r = &y - &ds;
        let x = psd_oracle(&r);
        ds = &x - &r;
        let mut y_next = x.clone();
        for i in 0..n {
            y_next[(i, i)] = 1.0;
        }
        let change = (&y_next - &y).norm();
        let gap = (&x - &y_next).norm();
        y = y_next;
        if change <= tol && gap <= tol {
            return psd_oracle(&y);
        }
    }
    panic!("Dykstra did not reach {tol} in {max_iter} iterations");
}

/// State of the classic two-block ADMM on
/// `min −⟨b,y⟩ + δ_{𝒮ⁿ₊}(Z)  s.t.  𝒜*y + Z = C` with multiplier `X`.
#[derive(Clone, Debug)]
pub struct TwoBlock {
    pub y: DVector<f64>,
    pub z: DMatrix<f64>,
    pub x: DMatrix<f64>,
}

pub struct LinearSdp {
    pub rows: Vec<DMatrix<f64>>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
}

impl LinearSdp {
    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|a| a.dot(x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.c.nrows();
        self.rows
            .iter()
            .zip(y.iter())
            .fold(DMatrix::zeros(n, n), |acc, (a, &yi)| acc + a * yi)
    }

    /// `y⁺ = argmin_y ℒ`, `Z⁺ = Π₊(C − 𝒜*y⁺ − X/σ)`, `X⁺ = X + τσ(𝒜*y⁺ + Z⁺ − C)`.
    pub fn step(&self, sigma: f64, tau: f64, s: &TwoBlock) -> TwoBlock {
        let m = self.rows.len();
        let gram = DMatrix::from_fn(m, m, |i, j| self.rows[i].dot(&self.rows[j]));
        let rhs = (&self.b - self.apply(&s.x)) / sigma - self.apply(&(&s.z - &self.c));
        let y = gram.lu().solve(&rhs).expect("Gram matrix is nonsingular");
        let aty = self.adjoint(&y);
        let z = psd_oracle(&(&self.c - &aty - &s.x / sigma));
        let x = &s.x + (&aty + &z - &self.c) * (tau * sigma);
        TwoBlock { y, z, x }
    }
}

/// Derivative-free compass search with step halving.
pub fn compass_search<F>(f: F, x0: DVector<f64>, step0: f64, tol: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut x = x0;
    let mut fx = f(&x);
    let mut step = step0;
    while step > tol {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] += dir * step;
                let ft = f(&trial);
                if ft < fx {
                    x = trial;
                    fx = ft;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    x
}

/// Column-major flattening of a full matrix, the solver's point layout.
pub fn flat(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unflat(n: usize, p: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, p.as_slice())
}

pub fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
