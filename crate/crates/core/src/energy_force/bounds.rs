//! A priori bounds on the Peach–Koehler force, evaluated as diagnostics.
//!
//! The constants are not known in closed form. Each was measured as the
//! largest ratio `lhs / rhs(C = 1)` over circles with `R/ε ∈ {5, 10, 20, 40}`
//! in isotropic(1,1) and doubled (`examples/calibrate_bounds.rs`).

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};
use crate::geometry::DislocationNetwork;
use crate::kernels::KernelEvaluator;
use crate::quadrature::LineQuadratureRule;

use super::{pk_force, ForceField};

pub const PK_LINF_CONSTANT: f64 = 1.31e-2;
pub const PK_L2_CONSTANT: f64 = 1.31e-2;
pub const CONTINUITY_CONSTANT: f64 = 1.67e-3;

/// `log(1 + 2M/(εΘ))`, the factor shared by all bounds.
pub fn log_factor(mass: f64, epsilon: f64, theta: f64) -> f64 {
    if mass <= 0.0 {
        return 0.0;
    }
    (2.0 * mass / (epsilon * theta)).ln_1p()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceBoundReport {
    pub linf_lhs: f64,
    pub linf_rhs: f64,
    pub l2_lhs: f64,
    pub l2_rhs: f64,
}

impl ForceBoundReport {
    pub fn linf_ratio(&self) -> f64 {
        ratio(self.linf_lhs, self.linf_rhs)
    }

    pub fn l2_ratio(&self) -> f64 {
        ratio(self.l2_lhs, self.l2_rhs)
    }
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `‖f‖_∞ ≤ (C/ε)‖b‖_∞ Θ log(1 + 2M/(εΘ))` and the `L²` version with an
/// extra `M^{1/2}`, at the given mass ratio estimate `theta`.
pub fn force_bound_report(s: &DislocationNetwork, f: &ForceField, theta: f64) -> ForceBoundReport {
    let eps = s.epsilon();
    let m = s.mass();
    let b = s.max_burgers().unwrap_or(0.0);
    let core = b * theta * log_factor(m, eps, theta) / eps;
    ForceBoundReport {
        linf_lhs: f.max_norm(),
        linf_rhs: PK_LINF_CONSTANT * core,
        l2_lhs: f.l2_norm(),
        l2_rhs: PK_L2_CONSTANT * core * m.sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `‖∇_τ g‖_∞` and `‖g‖_∞`
    pub grad_g: f64,
    pub g: f64,
}

impl ContinuityReport {
    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }
}

/// Largest nodal change of `f` under `x ↦ x + g(x)` against
/// `(1 + C M)‖∇_τ g‖_∞ + C M ‖g‖_∞`.
pub fn continuity_check(
    s: &DislocationNetwork,
    g: &[Vec3],
    ev: &KernelEvaluator,
    rule: &LineQuadratureRule,
) -> Result<ContinuityReport> {
    if g.len() != s.node_count() {
        return Err(DddError::invalid("g", "one vector per node is required"));
    }
    let moved = s.pushforward(g)?;
    let f0 = pk_force(s, ev, rule)?;
    let f1 = pk_force(&moved, ev, rule)?;
    let lhs = f0
        .force
        .iter()
        .zip(&f1.force)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let mut grad_g = 0.0f64;
    let mut offset = 0;
    for l in s.loops() {
        let n = l.len();
        for (k, len) in l.segment_lengths().into_iter().enumerate() {
            let d = g[offset + (k + 1) % n] - g[offset + k];
            grad_g = grad_g.max(d.norm() / len);
        }
        offset += n;
    }
    let g_max = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cm = CONTINUITY_CONSTANT * s.mass();
    Ok(ContinuityReport {
        lhs,
        rhs: (1.0 + cm) * grad_g + cm * g_max,
        grad_g,
        g: g_max,
    })
}
