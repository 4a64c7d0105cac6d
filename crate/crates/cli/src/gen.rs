use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use ccqp::problem::{
    gen_l1_ccqp, gen_linear_sdp, gen_nearest_correlation, gen_random_correlation_target, gen_random_cqsdp,
};
use ccqp::symcore::SymMatrix;
use clap::{Args, ValueEnum};

use crate::problem_file::{to_json, ProblemFile};
use crate::{write_output, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    RandomCqsdp,
    Ncm,
    LinearSdp,
    L1Ccqp,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of rank-one terms in φ (random-cqsdp).
    #[arg(long, default_value_t = 5)]
    phi_rank: usize,
    /// Target matrix for ncm: inline JSON rows or a path to a JSON file.
    #[arg(long, conflicts_with = "g_random")]
    g: Option<String>,
    /// Draw a random ncm target of order n from the seed.
    #[arg(long)]
    g_random: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_target(arg: &str) -> Result<SymMatrix> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading --g file {arg}"))?
    };
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text).context("--g must be a JSON array of rows")?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        bail!("--g must be square");
    }
    let g = SymMatrix::from_rows(&rows)?;
    if (0..n).any(|i| (0..i).any(|j| rows[i][j] != rows[j][i])) {
        bail!("--g must be symmetric");
    }
    Ok(g)
}

fn need(v: Option<usize>, flag: &str, kind: GenKind) -> Result<usize> {
    v.with_context(|| {
        format!(
            "--{flag} is required for --kind {}",
            kind.to_possible_value().unwrap().get_name()
        )
    })
}

pub fn run(a: GenArgs) -> Result<Outcome> {
    if a.kind != GenKind::Ncm && (a.g.is_some() || a.g_random) {
        bail!("--g and --g-random only apply to --kind ncm");
    }
    let file = match a.kind {
        GenKind::RandomCqsdp => {
            let p = gen_random_cqsdp(need(a.n, "n", a.kind)?, need(a.m, "m", a.kind)?, a.seed, a.phi_rank)?;
            ProblemFile::from_cqsdp(&p)
        }
        GenKind::LinearSdp => {
            let p = gen_linear_sdp(need(a.n, "n", a.kind)?, need(a.m, "m", a.kind)?, a.seed)?;
            ProblemFile::from_cqsdp(&p)
        }
        GenKind::L1Ccqp => {
            let p = gen_l1_ccqp(need(a.n, "n", a.kind)?, need(a.m, "m", a.kind)?, a.seed)?;
            ProblemFile::from_ccqp(&p)
        }
        GenKind::Ncm => {
            let g = match (&a.g, a.g_random) {
                (Some(spec), false) => parse_target(spec)?,
                (None, true) => gen_random_correlation_target(need(a.n, "n", a.kind)?, a.seed),
                _ => bail!("--kind ncm needs exactly one of --g or --g-random"),
            };
            if let Some(n) = a.n {
                if n != g.dim() {
                    bail!("--n {n} disagrees with the order {} of --g", g.dim());
                }
            }
            ProblemFile::from_cqsdp(&gen_nearest_correlation(&g)?)
        }
    };
    write_output(a.out.as_ref(), &to_json(&file))?;
    Ok(Outcome::Success)
}
