use nalgebra::{DMatrix, DVector};

use super::{GramFactorization, Point, Space, SymMatrix};
use crate::error::{check_len, Error, Result};

/// A linear map `𝒜: 𝒳 → ℝᵐ`, `(𝒜x)ᵢ = ⟨Aᵢ, x⟩`, together with the
/// factorization of its Gram matrix `𝒜𝒜*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMap {
    space: Space,
    /// `m × len` matrix whose i-th row is the flat storage of `Aᵢ`.
    rows: DMatrix<f64>,
    gram: Option<GramFactorization>,
}

impl ConstraintMap {
    /// Builds an unfactored map from symmetric rows of a common order.
    pub fn from_sym_rows(rows: &[SymMatrix]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidProblem("constraint map needs at least one row".into()))?;
        let n = first.dim();
        for r in rows {
            check_len("constraint row order", n, r.dim())?;
        }
        let len = n * n;
        let mut mat = DMatrix::zeros(rows.len(), len);
        for (i, r) in rows.iter().enumerate() {
            mat.row_mut(i).copy_from_slice(r.matrix().as_slice());
        }
        Ok(Self {
            space: Space::Sym(n),
            rows: mat,
            gram: None,
        })
    }

    /// Builds an unfactored map on `ℝᴺ` from an `m × N` matrix.
    pub fn from_dense(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::InvalidProblem("constraint matrix must be non-empty".into()));
        }
        Ok(Self {
            space: Space::Vector(rows.ncols()),
            rows,
            gram: None,
        })
    }

    /// Factors the Gram matrix and caches it.
    pub fn factorized(mut self) -> Result<Self> {
        self.gram = Some(GramFactorization::new(&self.gram_matrix())?);
        Ok(self)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Number of constraints `m`.
    pub fn m(&self) -> usize {
        self.rows.nrows()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// The i-th row as a symmetric matrix (only meaningful on `𝒮ⁿ`).
    pub fn sym_row(&self, i: usize) -> Option<SymMatrix> {
        match self.space {
            Space::Sym(n) => SymMatrix::from_point(n, &self.rows.row(i).transpose()).ok(),
            Space::Vector(_) => None,
        }
    }

    pub fn gram(&self) -> Option<&GramFactorization> {
        self.gram.as_ref()
    }

    /// `G[i][j] = ⟨Aᵢ, Aⱼ⟩`.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        &self.rows * self.rows.transpose()
    }

    pub fn apply(&self, x: &Point) -> Result<DVector<f64>> {
        check_len("constraint map input", self.rows.ncols(), x.len())?;
        Ok(&self.rows * x)
    }

    /// `𝒜*y = Σ yᵢ Aᵢ`.
    pub fn adjoint(&self, y: &DVector<f64>) -> Result<Point> {
        check_len("constraint map adjoint input", self.m(), y.len())?;
        Ok(self.rows.tr_mul(y))
    }

    pub fn apply_sym(&self, x: &SymMatrix) -> Result<DVector<f64>> {
        self.apply(&x.to_point())
    }

    pub fn adjoint_sym(&self, y: &DVector<f64>) -> Result<SymMatrix> {
        match self.space {
            Space::Sym(n) => SymMatrix::from_point(n, &self.adjoint(y)?),
            Space::Vector(_) => Err(Error::InvalidProblem(
                "constraint map is not defined on symmetric matrices".into(),
            )),
        }
    }

    fn factorization(&self) -> Result<&GramFactorization> {
        self.gram
            .as_ref()
            .ok_or_else(|| Error::State("constraint map has not been factorized".into()))
    }

    /// Solves `(𝒜𝒜*) y = rhs` with the cached factorization.
    pub fn solve_gram(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.factorization()?.solve(rhs)
    }

    /// Projection onto `K = {x : 𝒜x = b}`: `x − 𝒜*(𝒜𝒜*)⁻¹(𝒜x − b)`.
    pub fn affine_project(&self, b: &DVector<f64>, x: &Point) -> Result<Point> {
        check_len("right-hand side b", self.m(), b.len())?;
        let r = self.apply(x)? - b;
        let y = self.solve_gram(&r)?;
        Ok(x - self.adjoint(&y)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows2() -> ConstraintMap {
        ConstraintMap::from_sym_rows(&[
            SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap(),
            SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn trace_of_identity_row() {
        let a = ConstraintMap::from_sym_rows(&[SymMatrix::identity(3)]).unwrap();
        let x = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(a.apply_sym(&x).unwrap()[0], 6.0);
    }

    #[test]
    fn coordinate_extraction() {
        let a = ConstraintMap::from_sym_rows(&[SymMatrix::unit(3, 0, 0)]).unwrap();
        let x = SymMatrix::from_upper(3, &[7.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(a.apply_sym(&x).unwrap()[0], 7.0);
    }

    #[test]
    fn two_row_map() {
        let x = SymMatrix::from_rows(&[vec![2.0, 3.0], vec![3.0, 5.0]]).unwrap();
        let out = rows2().apply_sym(&x).unwrap();
        // brute-force elementwise sums
        let a = rows2();
        for i in 0..2 {
            let ai = a.sym_row(i).unwrap();
            let mut s = 0.0;
            for r in 0..2 {
                for c in 0..2 {
                    s += ai.get(r, c) * x.get(r, c);
                }
            }
            assert_eq!(out[i], s);
        }
        assert_eq!(out.as_slice(), &[2.0, 6.0]);
    }

    #[test]
    fn adjoint_basics() {
        let a = ConstraintMap::from_sym_rows(&[SymMatrix::identity(2)]).unwrap();
        assert_eq!(a.adjoint_sym(&DVector::zeros(1)).unwrap(), SymMatrix::zeros(2));
        assert_eq!(
            a.adjoint_sym(&DVector::from_element(1, 3.0)).unwrap(),
            SymMatrix::from_diagonal(&[3.0, 3.0])
        );
    }

    #[test]
    fn dimension_errors() {
        let a = rows2();
        assert!(a.apply(&Point::zeros(9)).is_err());
        assert!(a.adjoint(&DVector::zeros(3)).is_err());
        assert!(ConstraintMap::from_sym_rows(&[SymMatrix::identity(2), SymMatrix::identity(3)]).is_err());
    }

    #[test]
    fn gram_of_identity_row() {
        let a = ConstraintMap::from_sym_rows(&[SymMatrix::identity(2)])
            .unwrap()
            .factorized()
            .unwrap();
        let f = a.gram().unwrap();
        assert!((f.factor()[(0, 0)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_rows_have_identity_gram() {
        let a = ConstraintMap::from_sym_rows(&[SymMatrix::unit(2, 0, 0), SymMatrix::unit(2, 1, 1)]).unwrap();
        assert_eq!(a.gram_matrix(), DMatrix::identity(2, 2));
    }

    #[test]
    fn duplicated_row_is_not_surjective() {
        let r = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]]).unwrap();
        let err = ConstraintMap::from_sym_rows(&[r.clone(), r]).unwrap().factorized();
        assert!(matches!(err, Err(Error::SurjectivityViolation { .. })));
    }

    #[test]
    fn affine_projection_overwrites_diagonal() {
        let a = ConstraintMap::from_sym_rows(&[SymMatrix::unit(2, 0, 0), SymMatrix::unit(2, 1, 1)])
            .unwrap()
            .factorized()
            .unwrap();
        let b = DVector::from_element(2, 1.0);
        let x = SymMatrix::from_rows(&[vec![2.0, 3.0], vec![3.0, 5.0]]).unwrap();
        let p = SymMatrix::from_point(2, &a.affine_project(&b, &x.to_point()).unwrap()).unwrap();
        let expect = SymMatrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        assert!((&p - &expect).frobenius_norm() < 1e-15);

        // dense least-squares oracle: minimize ‖p − x‖ s.t. Ap = b via the normal
        // equations of the KKT system, solved by LU.
        let rows = a.rows().clone();
        let m = rows.nrows();
        let len = rows.ncols();
        let mut kkt = DMatrix::zeros(len + m, len + m);
        kkt.view_mut((0, 0), (len, len)).fill_with_identity();
        kkt.view_mut((0, len), (len, m)).copy_from(&rows.transpose());
        kkt.view_mut((len, 0), (m, len)).copy_from(&rows);
        let mut rhs = DVector::zeros(len + m);
        rhs.rows_mut(0, len).copy_from(&x.to_point());
        rhs.rows_mut(len, m).copy_from(&b);
        let sol = kkt.lu().solve(&rhs).unwrap();
        assert!((sol.rows(0, len) - p.to_point()).norm() < 1e-12);
    }

    #[test]
    fn affine_projection_zero_case_and_feasible_points() {
        let a = rows2().factorized().unwrap();
        let zero = Point::zeros(4);
        let b0 = a.apply(&zero).unwrap();
        assert_eq!(a.affine_project(&b0, &zero).unwrap(), zero);

        let x = SymMatrix::from_rows(&[vec![4.0, -1.0], vec![-1.0, 2.0]])
            .unwrap()
            .to_point();
        let b = a.apply(&x).unwrap();
        assert!((a.affine_project(&b, &x).unwrap() - &x).norm() <= 1e-12);
    }

    #[test]
    fn unfactored_map_refuses_to_project() {
        let a = rows2();
        assert!(matches!(
            a.affine_project(&DVector::zeros(2), &Point::zeros(4)),
            Err(Error::State(_))
        ));
    }
}
