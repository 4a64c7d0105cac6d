//! Machine-readable run reports.

use ccqp::admm::{Algorithm, SolveReport, SolverConfig};
use ccqp::diagnostics::KktResidual;
use ccqp::problem::CcqpProblem;
use ccqp::splitting::StopReason;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Columns of the per-checkpoint CSV log.
pub const CSV_COLUMNS: [&str; 7] = [
    "k",
    "eta_primal",
    "eta_dual",
    "eta_w",
    "eta_theta",
    "eta_comp",
    "fp_residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub config: SolverConfig,
    pub lambda_max_estimate: f64,
    pub status: Status,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub residual: KktResidual,
    pub max_residual: f64,
    pub fp_residual: f64,
    /// `null` when the final point lies outside the domain of `θ*`.
    pub primal_objective: Option<f64>,
    pub dual_objective: Option<f64>,
    pub wall_time_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl RunReport {
    pub fn new(p: &CcqpProblem, lambda_hat: f64, r: &SolveReport, log_csv: Option<String>) -> Self {
        let s = &r.state;
        Self {
            schema_version: SCHEMA_VERSION,
            algorithm: r.algorithm,
            config: r.config.clone(),
            lambda_max_estimate: lambda_hat,
            status: if r.converged() {
                Status::Converged
            } else {
                Status::MaxIter
            },
            stop_reason: r.reason,
            iterations: r.iterations,
            residual: r.residual,
            max_residual: r.residual.max(),
            fp_residual: r.fp_residual,
            primal_objective: finite(p.primal_objective(&s.x)),
            dual_objective: finite(p.dual_objective(&s.w, &s.y, &s.z)),
            wall_time_secs: r.wall_time_secs,
            log_csv,
            warnings: r.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn write_checkpoints<W: std::io::Write>(out: W, r: &SolveReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for c in &r.history {
        let e = c.residual;
        w.serialize((
            c.k,
            e.eta_primal,
            e.eta_dual,
            e.eta_w,
            e.eta_theta,
            e.eta_comp,
            c.fp_residual,
        ))?;
    }
    w.flush()?;
    Ok(())
}
