use serde::{Deserialize, Serialize};

use crate::symcore::{psd_project_point, Point};

/// Relative slack used when testing membership in an indicator's domain.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A closed proper convex function accessed through its proximal map.
pub trait ProxFriendly {
    /// `argmin_s { θ(s) + ‖s − v‖² / (2t) }`, `t > 0`.
    fn prox(&self, t: f64, v: &Point) -> Point;

    /// `θ(v)`, or `None` when no value oracle exists. Indicators return `+∞`
    /// outside their set.
    fn value(&self, _v: &Point) -> Option<f64> {
        None
    }

    fn is_indicator(&self) -> bool {
        false
    }
}

/// Resolvent of `t∂θ*` through the Moreau identity
/// `v = prox_{tθ*}(v) + t·prox_{θ/t}(v/t)`.
pub fn prox_conjugate<F: ProxFriendly + ?Sized>(f: &F, t: f64, v: &Point) -> Point {
    let inv = 1.0 / t;
    v - f.prox(inv, &(v * inv)) * t
}

/// The shipped prox-friendly functions `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Theta {
    /// `δ_{𝒮ⁿ₊}`.
    PsdIndicator,
    /// `δ_{𝒮ⁿ₋}`; its conjugate is `δ_{𝒮ⁿ₊}`, which embeds the PSD-constrained
    /// quadratic program.
    NsdIndicator,
    /// `δ_{ℝᴺ₊}`.
    NonnegIndicator,
    /// Indicator of the box `[lower, upper]ᴺ`.
    Box {
        lower: f64,
        upper: f64,
    },
    /// `weight·‖·‖₁`.
    L1 {
        weight: f64,
    },
    Zero,
}

fn sym_order(len: usize) -> usize {
    let n = (len as f64).sqrt().round() as usize;
    assert_eq!(n * n, len, "point of length {len} is not a square matrix");
    n
}

fn min_eig(v: &Point) -> f64 {
    let n = sym_order(v.len());
    let m = nalgebra::DMatrix::from_column_slice(n, n, v.as_slice());
    let m = (&m + m.transpose()) * 0.5;
    m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

fn indicator(inside: bool) -> f64 {
    if inside {
        0.0
    } else {
        f64::INFINITY
    }
}

impl Theta {
    pub fn validate(&self) -> crate::Result<()> {
        match *self {
            Theta::Box { lower, upper } if !(lower <= upper) => Err(crate::Error::InvalidProblem(format!(
                "box bounds must satisfy lower ≤ upper, got [{lower}, {upper}]"
            ))),
            Theta::L1 { weight } if !(weight >= 0.0 && weight.is_finite()) => Err(crate::Error::InvalidProblem(
                format!("l1 weight must be nonnegative, got {weight}"),
            )),
            _ => Ok(()),
        }
    }

    /// Whether `v` lies in `dom θ` up to [`MEMBERSHIP_TOL`].
    pub fn in_domain(&self, v: &Point) -> bool {
        let slack = MEMBERSHIP_TOL * (1.0 + v.norm());
        match *self {
            Theta::PsdIndicator => min_eig(v) >= -slack,
            Theta::NsdIndicator => min_eig(&-v) >= -slack,
            Theta::NonnegIndicator => v.iter().all(|&x| x >= -slack),
            Theta::Box { lower, upper } => v.iter().all(|&x| x >= lower - slack && x <= upper + slack),
            Theta::L1 { .. } | Theta::Zero => true,
        }
    }

    /// `θ*(x)`, used for reporting primal objectives.
    pub fn conjugate_value(&self, x: &Point) -> f64 {
        let slack = MEMBERSHIP_TOL * (1.0 + x.norm());
        match *self {
            Theta::PsdIndicator => indicator(min_eig(&-x) >= -slack),
            Theta::NsdIndicator => indicator(min_eig(x) >= -slack),
            Theta::NonnegIndicator => indicator(x.iter().all(|&v| v <= slack)),
            Theta::Box { lower, upper } => x.iter().map(|&v| (lower * v).max(upper * v)).sum(),
            Theta::L1 { weight } => indicator(x.amax() <= weight + slack),
            Theta::Zero => indicator(x.norm() <= slack),
        }
    }

    /// Closed-form `prox_{tθ*}` computed directly from `θ*`, independent of the
    /// Moreau route. Used only to verify [`prox_conjugate`].
    pub fn conjugate_prox_reference(&self, t: f64, v: &Point) -> Point {
        match *self {
            Theta::PsdIndicator => -psd_project_point(sym_order(v.len()), &-v),
            Theta::NsdIndicator => psd_project_point(sym_order(v.len()), v),
            Theta::NonnegIndicator => v.map(|x| x.min(0.0)),
            Theta::Box { lower, upper } => v.map(|x| {
                if x > t * upper {
                    x - t * upper
                } else if x < t * lower {
                    x - t * lower
                } else {
                    0.0
                }
            }),
            Theta::L1 { weight } => v.map(|x| x.clamp(-weight, weight)),
            Theta::Zero => Point::zeros(v.len()),
        }
    }
}

impl ProxFriendly for Theta {
    fn prox(&self, t: f64, v: &Point) -> Point {
        match *self {
            Theta::PsdIndicator => psd_project_point(sym_order(v.len()), v),
            Theta::NsdIndicator => -psd_project_point(sym_order(v.len()), &-v),
            Theta::NonnegIndicator => v.map(|x| x.max(0.0)),
            Theta::Box { lower, upper } => v.map(|x| x.clamp(lower, upper)),
            Theta::L1 { weight } => {
                let k = t * weight;
                v.map(|x| x.signum() * (x.abs() - k).max(0.0))
            }
            Theta::Zero => v.clone(),
        }
    }

    fn value(&self, v: &Point) -> Option<f64> {
        Some(match *self {
            Theta::L1 { weight } => weight * v.lp_norm(1),
            Theta::Zero => 0.0,
            _ => indicator(self.in_domain(v)),
        })
    }

    fn is_indicator(&self) -> bool {
        !matches!(self, Theta::L1 { .. } | Theta::Zero)
    }
}
