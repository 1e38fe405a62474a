//! Right-hand sides of the a priori velocity and mass bounds.
//!
//! Each constant was measured as the largest `lhs / rhs(C = 1)` along
//! shrinking-circle runs with `R/ε ∈ {5, 10, 20, 40}` (isotropic(1,1),
//! isotropic drag) and doubled; see `examples/calibrate_bounds.rs`. The mass
//! envelope inherits the length-rate constant, as in its derivation.

use serde::{Deserialize, Serialize};

use crate::energy_force::bounds::{log_factor, ratio};

pub const AP_VEL_CONSTANT: f64 = 1.28e-2;
pub const LENGTH_RATE_CONSTANT: f64 = 2.63e-3;
pub const V_UNIFORM_CONSTANT: f64 = 1.61e-3;
pub const DV_UNIFORM_CONSTANT: f64 = 9.95e-6;

/// Quantities the bounds are evaluated with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub epsilon: f64,
    pub mass: f64,
    pub theta: f64,
    pub b_max: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Mass and time at the start of the run, for the mass envelope.
    pub mass0: f64,
    pub elapsed: f64,
}

/// Observed norms of the velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityNorms {
    pub h1: f64,
    pub grad_l1: f64,
    pub sup: f64,
    pub grad_sup: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundRatios {
    pub ap_vel: f64,
    pub pk_linf: f64,
    pub length_rate: f64,
    pub mass: f64,
    pub v_uniform: f64,
    pub dv_uniform: f64,
}

impl BoundRatios {
    pub fn max(&self) -> f64 {
        [self.ap_vel, self.pk_linf, self.length_rate, self.mass, self.v_uniform, self.dv_uniform]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn componentwise_max(&self, o: &BoundRatios) -> BoundRatios {
        BoundRatios {
            ap_vel: self.ap_vel.max(o.ap_vel),
            pk_linf: self.pk_linf.max(o.pk_linf),
            length_rate: self.length_rate.max(o.length_rate),
            mass: self.mass.max(o.mass),
            v_uniform: self.v_uniform.max(o.v_uniform),
            dv_uniform: self.dv_uniform.max(o.dv_uniform),
        }
    }
}

/// Right-hand sides with all constants set to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitBounds {
    pub ap_vel: f64,
    pub pk_linf: f64,
    pub length_rate: f64,
    pub v_uniform: f64,
    pub dv_uniform: f64,
}

pub fn unit_bounds(x: &BoundInputs) -> UnitBounds {
    let lf = log_factor(x.mass, x.epsilon, x.theta);
    let gamma = x.alpha.min(x.beta);
    let core = x.theta * x.b_max * lf / x.epsilon;
    let root = (1.0 + 2.0 * x.mass).sqrt();
    UnitBounds {
        ap_vel: core * x.mass.sqrt() / gamma,
        pk_linf: core,
        length_rate: core * x.mass / gamma,
        v_uniform: core * root / gamma,
        dv_uniform: core * x.mass * (1.0 + root / gamma) / x.alpha,
    }
}

/// `m(t) = (1/M_0 − 2 C t ‖b‖ / (ε² min(α, β)))^{-1}`, infinite once the
/// envelope has blown up.
pub fn mass_envelope(x: &BoundInputs, c: f64) -> f64 {
    // M_0 / (1 − 2 C t ‖b‖ M_0 / (ε² γ)), exact at t = 0
    let denom = 1.0 - 2.0 * c * x.elapsed * x.b_max * x.mass0 / (x.epsilon * x.epsilon * x.alpha.min(x.beta));
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        x.mass0 / denom
    }
}

/// Ratios `lhs / rhs` with the calibrated constants.
pub fn bound_ratios(x: &BoundInputs, v: &VelocityNorms, f_sup: f64) -> BoundRatios {
    let u = unit_bounds(x);
    BoundRatios {
        ap_vel: ratio(v.h1, AP_VEL_CONSTANT * u.ap_vel),
        pk_linf: ratio(f_sup, crate::energy_force::PK_LINF_CONSTANT * u.pk_linf),
        length_rate: ratio(v.grad_l1, LENGTH_RATE_CONSTANT * u.length_rate),
        mass: ratio(x.mass, mass_envelope(x, LENGTH_RATE_CONSTANT)),
        v_uniform: ratio(v.sup, V_UNIFORM_CONSTANT * u.v_uniform),
        dv_uniform: ratio(v.grad_sup, DV_UNIFORM_CONSTANT * u.dv_uniform),
    }
}
