//! JSON problem files.
//!
//! Symmetric matrices are stored as their upper triangle in row-major order.
//! Vector-space problems store plain arrays.

use anyhow::{anyhow, bail, Context, Result};
use ccqp::problem::{CcqpProblem, CqsdpProblem, OperatorForm, QuadOperator, Theta};
use ccqp::symcore::{ConstraintMap, Point, Space, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Cqsdp,
    Ccqp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "payload", rename_all = "snake_case")]
pub enum OperatorDescriptor {
    Zero,
    IdentityScaled(f64),
    /// Weights, as an upper triangle for matrix spaces.
    HadamardDiag(Vec<f64>),
    /// Rows of the matrix acting on `svec` coordinates (matrix spaces) or on
    /// the vector directly.
    DenseVec(Vec<Vec<f64>>),
    /// The factors `Bᵢ` of `Σ ⟨Bᵢ,·⟩Bᵢ`.
    RankOneSum(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub i: usize,
    /// Column in matrix spaces; absent for vector spaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum ConstraintDescriptor {
    Dense { rows: Vec<Vec<f64>> },
    Triplets { entries: Vec<Triplet> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub kind: ProblemKind,
    /// Required for `ccqp`; `cqsdp` always lives on `𝒮ⁿ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Space>,
    pub n: usize,
    pub m: usize,
    #[serde(alias = "Q", alias = "q")]
    pub phi: OperatorDescriptor,
    #[serde(rename = "A", alias = "a")]
    pub a: ConstraintDescriptor,
    pub b: Vec<f64>,
    #[serde(rename = "C", alias = "c")]
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Theta>,
}

/// A parsed problem in its original class.
#[derive(Debug, Clone)]
pub enum Problem {
    Cqsdp(CqsdpProblem),
    Ccqp(CcqpProblem),
}

impl Problem {
    pub fn to_ccqp(&self) -> CcqpProblem {
        match self {
            Problem::Cqsdp(p) => p.to_ccqp(),
            Problem::Ccqp(p) => p.clone(),
        }
    }
}

fn upper_of(n: usize, p: &Point) -> Vec<f64> {
    SymMatrix::from_point(n, p).expect("point has n² entries").to_upper()
}

fn sym_from_upper(n: usize, v: &[f64], field: &str) -> Result<SymMatrix> {
    SymMatrix::from_upper(n, v).map_err(|e| anyhow!("{field}: {e}"))
}

impl ProblemFile {
    pub fn from_cqsdp(p: &CqsdpProblem) -> Self {
        let n = p.n();
        let a = p.constraints();
        Self {
            schema_version: SCHEMA_VERSION,
            kind: ProblemKind::Cqsdp,
            space: None,
            n,
            m: p.m(),
            phi: describe_operator(p.phi()),
            a: ConstraintDescriptor::Dense {
                rows: (0..p.m())
                    .map(|i| a.sym_row(i).expect("matrix row").to_upper())
                    .collect(),
            },
            b: p.b().iter().copied().collect(),
            c: p.c().to_upper(),
            theta: None,
        }
    }

    pub fn from_ccqp(p: &CcqpProblem) -> Self {
        let space = p.space();
        let a = p.constraints();
        let rows = (0..p.m())
            .map(|i| match space {
                Space::Sym(_) => a.sym_row(i).expect("matrix row").to_upper(),
                Space::Vector(_) => a.rows().row(i).iter().copied().collect(),
            })
            .collect();
        let c = match space {
            Space::Sym(n) => upper_of(n, p.c()),
            Space::Vector(_) => p.c().iter().copied().collect(),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            kind: ProblemKind::Ccqp,
            space: Some(space),
            n: match space {
                Space::Sym(n) | Space::Vector(n) => n,
            },
            m: p.m(),
            phi: describe_operator(p.q()),
            a: ConstraintDescriptor::Dense { rows },
            b: p.b().iter().copied().collect(),
            c,
            theta: Some(p.theta().clone()),
        }
    }

    pub fn to_problem(&self) -> Result<Problem> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            );
        }
        let space = match (self.kind, self.space) {
            (ProblemKind::Cqsdp, None) => Space::Sym(self.n),
            (ProblemKind::Cqsdp, Some(s)) if s == Space::Sym(self.n) => s,
            (ProblemKind::Cqsdp, Some(s)) => bail!("space: cqsdp problems live on sym({}), found {s:?}", self.n),
            (ProblemKind::Ccqp, Some(s)) => s,
            (ProblemKind::Ccqp, None) => bail!("space: required for ccqp problems"),
        };
        let dim = match space {
            Space::Sym(n) | Space::Vector(n) => n,
        };
        if dim != self.n {
            bail!("n: {} disagrees with space {space:?}", self.n);
        }
        if self.b.len() != self.m {
            bail!("b: expected {} entries, found {}", self.m, self.b.len());
        }
        let q = build_operator(space, &self.phi).context("phi")?;
        let a = build_constraints(space, self.m, &self.a).context("A")?;
        let b = DVector::from_vec(self.b.clone());
        match self.kind {
            ProblemKind::Cqsdp => {
                if self.theta.is_some() {
                    bail!("theta: not allowed for cqsdp problems");
                }
                let c = sym_from_upper(self.n, &self.c, "C")?;
                Ok(Problem::Cqsdp(CqsdpProblem::new(q, a, b, c)?))
            }
            ProblemKind::Ccqp => {
                let theta = self
                    .theta
                    .clone()
                    .ok_or_else(|| anyhow!("theta: required for ccqp problems"))?;
                let c = match space {
                    Space::Sym(n) => sym_from_upper(n, &self.c, "C")?.into_point(),
                    Space::Vector(n) => {
                        if self.c.len() != n {
                            bail!("C: expected {n} entries, found {}", self.c.len());
                        }
                        Point::from_vec(self.c.clone())
                    }
                };
                Ok(Problem::Ccqp(CcqpProblem::new(q, a, b, c, theta)?))
            }
        }
    }
}

fn describe_operator(q: &QuadOperator) -> OperatorDescriptor {
    let flat = |p: &[f64]| -> Vec<f64> {
        match q.space() {
            Space::Sym(n) => upper_of(n, &Point::from_column_slice(p)),
            Space::Vector(_) => p.to_vec(),
        }
    };
    match q.form() {
        OperatorForm::Zero => OperatorDescriptor::Zero,
        OperatorForm::ScaledIdentity(a) => OperatorDescriptor::IdentityScaled(*a),
        OperatorForm::Hadamard(w) => OperatorDescriptor::HadamardDiag(flat(w.as_slice())),
        OperatorForm::Dense(m) => {
            OperatorDescriptor::DenseVec(m.row_iter().map(|r| r.iter().copied().collect()).collect())
        }
        OperatorForm::RankOneSum(b) => OperatorDescriptor::RankOneSum(
            b.row_iter()
                .map(|r| flat(&r.iter().copied().collect::<Vec<_>>()))
                .collect(),
        ),
    }
}

fn point_of(space: Space, v: &[f64], field: &str) -> Result<Point> {
    match space {
        Space::Sym(n) => Ok(sym_from_upper(n, v, field)?.into_point()),
        Space::Vector(n) => {
            if v.len() != n {
                bail!("{field}: expected {n} entries, found {}", v.len());
            }
            Ok(Point::from_vec(v.to_vec()))
        }
    }
}

fn dense_rows(rows: &[Vec<f64>], ncols: usize, field: &str) -> Result<DMatrix<f64>> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            bail!("{field}[{i}]: expected {ncols} entries, found {}", r.len());
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn build_operator(space: Space, d: &OperatorDescriptor) -> Result<QuadOperator> {
    let form = match d {
        OperatorDescriptor::Zero => OperatorForm::Zero,
        OperatorDescriptor::IdentityScaled(a) => OperatorForm::ScaledIdentity(*a),
        OperatorDescriptor::HadamardDiag(w) => OperatorForm::Hadamard(point_of(space, w, "payload")?),
        OperatorDescriptor::DenseVec(rows) => {
            let d = space.dimension();
            if rows.len() != d {
                bail!("payload: expected {d} rows, found {}", rows.len());
            }
            OperatorForm::Dense(dense_rows(rows, d, "payload")?)
        }
        OperatorDescriptor::RankOneSum(factors) => {
            let mut m = DMatrix::zeros(factors.len(), space.len());
            for (r, f) in factors.iter().enumerate() {
                let p = point_of(space, f, &format!("payload[{r}]"))?;
                m.row_mut(r).copy_from_slice(p.as_slice());
            }
            OperatorForm::RankOneSum(m)
        }
    };
    Ok(QuadOperator::new(space, form)?)
}

fn build_constraints(space: Space, m: usize, d: &ConstraintDescriptor) -> Result<ConstraintMap> {
    let rows = match d {
        ConstraintDescriptor::Dense { rows } => {
            if rows.len() != m {
                bail!("rows: expected {m} rows, found {}", rows.len());
            }
            rows.iter()
                .enumerate()
                .map(|(i, r)| point_of(space, r, &format!("rows[{i}]")))
                .collect::<Result<Vec<_>>>()?
        }
        ConstraintDescriptor::Triplets { entries } => {
            let mut rows = vec![space.zeros(); m];
            for (k, t) in entries.iter().enumerate() {
                let at = || format!("entries[{k}]");
                if t.row >= m {
                    bail!("{}: row {} out of range 0..{m}", at(), t.row);
                }
                let (idx, mirror) = match (space, t.j) {
                    (Space::Sym(n), Some(j)) if t.i < n && j < n => (t.i + j * n, Some(j + t.i * n)),
                    (Space::Vector(n), None) if t.i < n => (t.i, None),
                    _ => bail!("{}: index out of range for {space:?}", at()),
                };
                rows[t.row][idx] += t.value;
                if let Some(mi) = mirror.filter(|&mi| mi != idx) {
                    rows[t.row][mi] += t.value;
                }
            }
            rows
        }
    };
    let mut mat = DMatrix::zeros(m, space.len());
    for (i, r) in rows.iter().enumerate() {
        mat.row_mut(i).copy_from_slice(r.as_slice());
    }
    let map = match space {
        Space::Vector(_) => ConstraintMap::from_dense(mat)?,
        Space::Sym(n) => {
            let syms = rows
                .iter()
                .map(|r| SymMatrix::from_point(n, r))
                .collect::<ccqp::Result<Vec<_>>>()?;
            ConstraintMap::from_sym_rows(&syms)?
        }
    };
    Ok(map)
}

pub fn read_problem(path: &std::path::Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ProblemFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.to_problem()
        .with_context(|| format!("invalid problem in {}", path.display()))
}

pub fn to_json(file: &ProblemFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("problem files serialize");
    s.push('\n');
    s
}
