//! Per-loop velocity solve: piecewise-linear periodic elements on each
//! polyline, two unknowns per node in the plane normal to the node tangent.
//!
//! The discrete weak form is
//!
//! ```text
//! Σ_k (v_{k+1} − v_k)·A (w_{k+1} − w_k) / L_k + Σ_i ℓ_i (B†v_i)·w_i = Σ_i ℓ_i f_i·w_i
//! ```
//!
//! for all nodal `w_i ⊥ τ_i`, with lumped lengths `ℓ_i`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::elasticity::{Mat3, Vec3};
use crate::energy_force::ForceField;
use crate::error::{DddError, Result};
use crate::geometry::{DislocationNetwork, Loop};
use crate::mobility::{normal_basis, MobilityModel};

/// Relative residual demanded of the linear solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;
/// Above this many unknowns per loop the solve switches to conjugate gradients.
const DENSE_LIMIT: usize = 1200;

#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub velocity: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
    /// Largest relative residual of the per-loop linear systems.
    pub residual: f64,
}

impl VelocityField {
    pub fn max_norm(&self) -> f64 {
        self.velocity.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

struct LoopSystem {
    basis: Vec<(Vec3, Vec3)>,
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

fn block(e: &(Vec3, Vec3), m: &Mat3, f: &(Vec3, Vec3)) -> [[f64; 2]; 2] {
    let (a0, a1) = e;
    let (b0, b1) = f;
    [
        [a0.dot(&(m * b0)), a0.dot(&(m * b1))],
        [a1.dot(&(m * b0)), a1.dot(&(m * b1))],
    ]
}

fn add_block(k: &mut DMatrix<f64>, i: usize, j: usize, b: [[f64; 2]; 2], s: f64) {
    for r in 0..2 {
        for c in 0..2 {
            k[(2 * i + r, 2 * j + c)] += s * b[r][c];
        }
    }
}

fn assemble(l: &Loop, loop_index: usize, force: &[Vec3], lumped: &[f64], model: &MobilityModel) -> Result<LoopSystem> {
    let n = l.len();
    let b = l.burgers().cartesian;
    let tangents = l.tangents();
    if let Some(k) = tangents.iter().position(|t| t.hairpin) {
        return Err(DddError::Hairpin { loop_index, node: k });
    }
    let basis: Vec<(Vec3, Vec3)> = tangents.iter().map(|t| normal_basis(&t.tangent)).collect();
    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    let mut rhs = DVector::zeros(2 * n);
    for k in 0..n {
        let j = (k + 1) % n;
        let dx = l.segment_vector(k);
        let len = dx.norm();
        let a = model.bending_matrix(&b, &(dx / len));
        let s = 1.0 / len;
        add_block(&mut matrix, k, k, block(&basis[k], &a, &basis[k]), s);
        add_block(&mut matrix, j, j, block(&basis[j], &a, &basis[j]), s);
        add_block(&mut matrix, k, j, block(&basis[k], &a, &basis[j]), -s);
        add_block(&mut matrix, j, k, block(&basis[j], &a, &basis[k]), -s);
    }
    for i in 0..n {
        let d = model.drag_matrix(&b, &tangents[i].tangent)?;
        add_block(&mut matrix, i, i, block(&basis[i], &d.pseudo_inverse, &basis[i]), lumped[i]);
        let (e0, e1) = &basis[i];
        rhs[2 * i] = lumped[i] * e0.dot(&force[i]);
        rhs[2 * i + 1] = lumped[i] * e1.dot(&force[i]);
    }
    // exact symmetry for the Cholesky factorization
    let matrix = (&matrix + matrix.transpose()) * 0.5;
    Ok(LoopSystem { basis, matrix, rhs })
}

fn conjugate_gradient(k: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let diag: DVector<f64> = k.diagonal().map(|d| 1.0 / d);
    let mut x = DVector::zeros(rhs.len());
    let mut r = rhs.clone();
    let mut z = r.component_mul(&diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let target = 0.01 * SOLVE_TOLERANCE * rhs.norm();
    for _ in 0..(10 * rhs.len()) {
        if r.norm() <= target {
            return Ok(x);
        }
        let kp = k * &p;
        let step = rz / p.dot(&kp);
        x.axpy(step, &p, 1.0);
        r.axpy(-step, &kp, 1.0);
        z = r.component_mul(&diag);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
    }
    Err(DddError::Solver("conjugate gradients did not converge".into()))
}

/// Solve for the nodal velocities of every loop (flattened node order).
pub fn solve_velocity(s: &DislocationNetwork, f: &ForceField, model: &MobilityModel) -> Result<VelocityField> {
    if s.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    if f.force.len() != s.node_count() {
        return Err(DddError::invalid("force", "one force per node is required"));
    }
    let offsets = s.offsets();
    let per_loop: Vec<Result<(Vec<Vec3>, Vec<Vec3>, f64)>> = s
        .loops()
        .par_iter()
        .enumerate()
        .map(|(i, l)| {
            let o = offsets[i];
            let n = l.len();
            let sys = assemble(l, i, &f.force[o..o + n], &f.lumped_length[o..o + n], model)?;
            let rhs_norm = sys.rhs.norm();
            let x = if rhs_norm == 0.0 {
                DVector::zeros(2 * n)
            } else if 2 * n <= DENSE_LIMIT {
                let chol = sys
                    .matrix
                    .clone()
                    .cholesky()
                    .ok_or_else(|| DddError::Solver(format!("loop {i}: system is not positive definite")))?;
                chol.solve(&sys.rhs)
            } else {
                conjugate_gradient(&sys.matrix, &sys.rhs)?
            };
            let residual = if rhs_norm == 0.0 {
                0.0
            } else {
                (&sys.matrix * &x - &sys.rhs).norm() / rhs_norm
            };
            if !(residual <= SOLVE_TOLERANCE) {
                return Err(DddError::Solver(format!("loop {i}: relative residual {residual:e}")));
            }
            let v = (0..n)
                .map(|k| sys.basis[k].0 * x[2 * k] + sys.basis[k].1 * x[2 * k + 1])
                .collect();
            let t = sys.basis.iter().map(|(e0, e1)| e0.cross(e1)).collect();
            Ok((v, t, residual))
        })
        .collect();
    let mut velocity = Vec::with_capacity(s.node_count());
    let mut tangents = Vec::with_capacity(s.node_count());
    let mut residual = 0.0f64;
    for r in per_loop {
        let (v, t, res) = r?;
        velocity.extend(v);
        tangents.extend(t);
        residual = residual.max(res);
    }
    Ok(VelocityField {
        velocity,
        tangents,
        residual,
    })
}

/// Terms of the weak form tested with `w`: `(a(v, w), d(v, w), ⟨f, w⟩)`.
/// The residual is `a + d − ⟨f, w⟩`.
pub fn weak_form_terms(
    s: &DislocationNetwork,
    f: &ForceField,
    model: &MobilityModel,
    v: &[Vec3],
    w: &[Vec3],
) -> Result<(f64, f64, f64)> {
    let (mut a, mut d, mut fw) = (0.0, 0.0, 0.0);
    let mut o = 0;
    for l in s.loops() {
        let n = l.len();
        let b = l.burgers().cartesian;
        for k in 0..n {
            let j = (k + 1) % n;
            let dx = l.segment_vector(k);
            let len = dx.norm();
            let am = model.bending_matrix(&b, &(dx / len));
            a += (v[o + j] - v[o + k]).dot(&(am * (w[o + j] - w[o + k]))) / len;
        }
        for (k, t) in l.tangents().iter().enumerate() {
            let dp = model.dpsi_perp(&b, &t.tangent, &v[o + k])?;
            d += f.lumped_length[o + k] * dp.dot(&w[o + k]);
            fw += f.lumped_length[o + k] * f.force[o + k].dot(&w[o + k]);
        }
        o += n;
    }
    Ok((a, d, fw))
}

/// `‖∇_τ v‖_∞`, `‖∇_τ v‖_1` and the discrete `H¹` norm.
pub fn velocity_norms(s: &DislocationNetwork, v: &[Vec3], lumped: &[f64]) -> (f64, f64, f64) {
    let mut dmax = 0.0f64;
    let mut d1 = 0.0;
    let mut h1 = 0.0;
    let mut o = 0;
    for l in s.loops() {
        let n = l.len();
        for (k, len) in l.segment_lengths().into_iter().enumerate() {
            let dv = (v[o + (k + 1) % n] - v[o + k]).norm();
            dmax = dmax.max(dv / len);
            d1 += dv;
            h1 += dv * dv / len;
        }
        o += n;
    }
    for (vi, li) in v.iter().zip(lumped) {
        h1 += li * vi.norm_squared();
    }
    (dmax, d1, h1.sqrt())
}
