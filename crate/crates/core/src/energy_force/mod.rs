//! Regularized self-energy of a network, its discrete gradient and the
//! Peach–Koehler force.
//!
//! The line energy is
//!
//! ```text
//! Φ^ε(S) = ½ ∫∫ K^ε_abcd(s − t) b_a(s) τ_b(s) b_c(t) τ_d(t) ds dt
//! ```
//!
//! discretized per ordered segment pair with a tensor Gauss rule, the line
//! element absorbed into the segment vectors. Because `K^ε` is smooth the
//! discrete energy is a smooth function of the node positions and its
//! gradient is assembled exactly.

pub mod bounds;
pub mod surface;

use log::warn;
use rayon::prelude::*;

use crate::elasticity::{Mat3, Vec3};
use crate::error::{DddError, Result};
use crate::geometry::DislocationNetwork;
use crate::kernels::{ridge, ContractedK, KernelEvaluator};
use crate::quadrature::LineQuadratureRule;

pub use bounds::{
    continuity_check, force_bound_report, ContinuityReport, ForceBoundReport, CONTINUITY_CONSTANT,
    PK_L2_CONSTANT, PK_LINF_CONSTANT,
};
pub use surface::{energy_surface, surface_g_field, SurfaceOptions, SURFACE_FORCE_SIGN};

/// Energy and its split into loop-pair interactions.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub total: f64,
    /// `pairs[i][j]`: interaction of loops `i` and `j`; self-energies on the diagonal.
    pub pairs: Vec<Vec<f64>>,
}

/// Per-node force density, lumped lengths and the field `G` with `f = τ ∧ G`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceField {
    pub force: Vec<Vec3>,
    pub lumped_length: Vec<f64>,
    /// Empty when the force was obtained from the discrete gradient.
    pub g_field: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
}

impl ForceField {
    pub fn max_norm(&self) -> f64 {
        self.force.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    /// `(∫ |f|² ds)^{1/2}` with lumped lengths.
    pub fn l2_norm(&self) -> f64 {
        self.force
            .iter()
            .zip(&self.lumped_length)
            .map(|(f, l)| l * f.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    p0: Vec3,
    dx: Vec3,
    loop_index: usize,
    node0: usize,
    node1: usize,
}

fn segments(s: &DislocationNetwork) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, l) in s.loops().iter().enumerate() {
        let n = l.len();
        for k in 0..n {
            let (a, b) = l.segment(k);
            out.push(Segment {
                p0: a,
                dx: b - a,
                loop_index: i,
                node0: offset + k,
                node1: offset + (k + 1) % n,
            });
        }
        offset += n;
    }
    out
}

fn check_epsilon(s: &DislocationNetwork, ev: &KernelEvaluator) -> Result<()> {
    let (a, b) = (s.epsilon(), ev.epsilon());
    if (a - b).abs() > 1e-12 * a.max(b) {
        return Err(DddError::invalid(
            "epsilon",
            format!("network uses {a} but the kernel was built for {b}"),
        ));
    }
    let flagged = s.resolution_flags();
    if !flagged.is_empty() {
        warn!("{} segments are longer than epsilon; the line quadrature is under-resolved", flagged.len());
    }
    Ok(())
}

/// Contracted kernels for every ordered loop pair, row-major.
fn loop_pair_kernels<'a>(s: &DislocationNetwork, ev: &'a KernelEvaluator) -> Vec<ContractedK<'a>> {
    let b: Vec<Vec3> = s.loops().iter().map(|l| l.burgers().cartesian).collect();
    let mut out = Vec::with_capacity(b.len() * b.len());
    for bi in &b {
        for bj in &b {
            out.push(ev.contracted_k(bi, bj));
        }
    }
    out
}

/// Contribution of one unordered segment pair: `e_pq` and, optionally, the
/// derivatives of `e_pq` in the four end points `(p0, p1, q0, q1)`.
struct PairResult {
    energy: f64,
    grad: [Vec3; 4],
}

fn pair_term(ck: &ContractedK, sp: &Segment, sq: &Segment, rule: &LineQuadratureRule, with_grad: bool) -> PairResult {
    let nz = ck.nodes.len();
    let mut g = Vec::with_capacity(nz);
    let mut vq = Vec::with_capacity(nz);
    let mut wp = Vec::with_capacity(nz);
    for (m, w) in ck.mats.iter().zip(&ck.weights) {
        let mq: Vec3 = m * sq.dx;
        g.push(w * sp.dx.dot(&mq));
        if with_grad {
            vq.push(mq * *w);
            wp.push(m.tr_mul(&sp.dx) * *w);
        }
    }
    let deg = ck.ridge.degree();
    let mut energy = 0.0;
    let mut grad = [Vec3::zeros(); 4];
    for (xa, wa) in rule.points.iter().zip(&rule.weights) {
        let x = sp.p0 + sp.dx * *xa;
        for (xb, wb) in rule.points.iter().zip(&rule.weights) {
            let y = sq.p0 + sq.dx * *xb;
            let s = x - y;
            let r = s.norm();
            let rc = ck.ridge.coefficients(r);
            let n = rc.n_even;
            let ww = 0.5 * wa * wb;
            if !with_grad {
                let sh = if r > 0.0 { s / r } else { Vec3::z() };
                let mut acc = 0.0;
                for (z, gz) in ck.nodes.iter().zip(&g) {
                    let (h, _) = ridge::legendre_sums(z.dot(&sh), deg, [&rc.value[..n]]);
                    acc += gz * h[0];
                }
                energy += ww * acc;
                continue;
            }
            let mut acc = 0.0;
            let mut sv = Vec3::zeros();
            let mut sw = Vec3::zeros();
            let mut grad_s = Vec3::zeros();
            if r > 0.0 {
                let sh = s / r;
                let mut gr = 0.0;
                let mut gz_sum = Vec3::zeros();
                let mut gu_sum = 0.0;
                for k in 0..nz {
                    let z = &ck.nodes[k];
                    let u = z.dot(&sh);
                    let (h, hu) = ridge::legendre_sums(u, deg, [&rc.value[..n], &rc.radial[..n]]);
                    acc += g[k] * h[0];
                    sv += vq[k] * h[0];
                    sw += wp[k] * h[0];
                    // ∇h = h_r ŝ + h_u (z − u ŝ)/r
                    gr += g[k] * h[1];
                    gz_sum += z * (g[k] * hu[0]);
                    gu_sum += g[k] * hu[0] * u;
                }
                grad_s = sh * (gr - gu_sum / r) + gz_sum / r;
            } else {
                let sh = Vec3::z();
                for k in 0..nz {
                    let (h, _) = ridge::legendre_sums(ck.nodes[k].dot(&sh), deg, [&rc.value[..n]]);
                    acc += g[k] * h[0];
                    sv += vq[k] * h[0];
                    sw += wp[k] * h[0];
                }
            }
            energy += ww * acc;
            // s = x − y, x = (1−ξ_a) p0 + ξ_a p1, y = (1−ξ_b) q0 + ξ_b q1
            grad[0] += (grad_s * (1.0 - xa) - sv) * ww;
            grad[1] += (grad_s * *xa + sv) * ww;
            grad[2] += (-grad_s * (1.0 - xb) - sw) * ww;
            grad[3] += (-grad_s * *xb + sw) * ww;
        }
    }
    PairResult { energy, grad }
}

struct Assembly {
    breakdown: EnergyBreakdown,
    gradient: Vec<Vec3>,
}

fn assemble(s: &DislocationNetwork, ev: &KernelEvaluator, rule: &LineQuadratureRule, with_grad: bool) -> Result<Assembly> {
    if s.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    check_epsilon(s, ev)?;
    let nl = s.loops().len();
    let kernels = loop_pair_kernels(s, ev);
    let segs = segments(s);
    // rows are computed in parallel, each sequentially; the reduction below
    // runs in row order so the result does not depend on the worker count
    let rows: Vec<Vec<PairResult>> = (0..segs.len())
        .into_par_iter()
        .map(|p| {
            let sp = &segs[p];
            (p..segs.len())
                .map(|q| {
                    let sq = &segs[q];
                    let ck = &kernels[sp.loop_index * nl + sq.loop_index];
                    pair_term(ck, sp, sq, rule, with_grad)
                })
                .collect()
        })
        .collect();
    let mut pairs = vec![vec![0.0; nl]; nl];
    let mut gradient = vec![Vec3::zeros(); if with_grad { s.node_count() } else { 0 }];
    for (p, row) in rows.iter().enumerate() {
        let sp = &segs[p];
        for (k, res) in row.iter().enumerate() {
            let q = p + k;
            let sq = &segs[q];
            let (i, j) = (sp.loop_index, sq.loop_index);
            if p == q {
                pairs[i][i] += res.energy;
            } else {
                pairs[i][j] += res.energy;
                pairs[j][i] += res.energy;
            }
            if with_grad {
                let m = if p == q { 1.0 } else { 2.0 };
                gradient[sp.node0] += res.grad[0] * m;
                gradient[sp.node1] += res.grad[1] * m;
                gradient[sq.node0] += res.grad[2] * m;
                gradient[sq.node1] += res.grad[3] * m;
            }
        }
    }
    let total = pairs.iter().flatten().sum();
    Ok(Assembly {
        breakdown: EnergyBreakdown { total, pairs },
        gradient,
    })
}

/// `Φ^ε(S)` by the segment-pair Gauss rule, including self pairs.
pub fn energy_line(s: &DislocationNetwork, ev: &KernelEvaluator, rule: &LineQuadratureRule) -> Result<EnergyBreakdown> {
    Ok(assemble(s, ev, rule, false)?.breakdown)
}

/// Energy together with its exact gradient in the node positions
/// (flattened node order).
pub fn energy_and_gradient(
    s: &DislocationNetwork,
    ev: &KernelEvaluator,
    rule: &LineQuadratureRule,
) -> Result<(EnergyBreakdown, Vec<Vec3>)> {
    let a = assemble(s, ev, rule, true)?;
    Ok((a.breakdown, a.gradient))
}

pub fn discrete_energy_gradient(s: &DislocationNetwork, ev: &KernelEvaluator, rule: &LineQuadratureRule) -> Result<Vec<Vec3>> {
    Ok(energy_and_gradient(s, ev, rule)?.1)
}

fn node_tangents(s: &DislocationNetwork) -> Vec<Vec3> {
    s.loops()
        .iter()
        .flat_map(|l| l.tangents().into_iter().map(|t| t.tangent))
        .collect()
}

fn lumped_lengths(s: &DislocationNetwork) -> Vec<f64> {
    s.loops().iter().flat_map(|l| l.lumped_lengths()).collect()
}

fn levi_civita_contract(t: &Mat3) -> Vec3 {
    // G_k = ε_klm T_lm
    Vec3::new(t[(1, 2)] - t[(2, 1)], t[(2, 0)] - t[(0, 2)], t[(0, 1)] - t[(1, 0)])
}

/// `G(x)` for a point `x` on loop `loop_index`:
/// `G_k = Σ_t ε_klm ∂_m K_alcd(x − t) b_a b'_c τ_d(t) dt`.
fn g_at(x: &Vec3, row: &[ContractedK], segs: &[Segment], rule: &LineQuadratureRule) -> Vec3 {
    let mut t = Mat3::zeros();
    for sq in segs {
        let ck = &row[sq.loop_index];
        let deg = ck.ridge.degree();
        let mq: Vec<Vec3> = ck.mats.iter().zip(&ck.weights).map(|(m, w)| (m * sq.dx) * *w).collect();
        for (xb, wb) in rule.points.iter().zip(&rule.weights) {
            let s = x - (sq.p0 + sq.dx * *xb);
            let r = s.norm();
            if r == 0.0 {
                continue;
            }
            let rc = ck.ridge.coefficients(r);
            let n = rc.n_even;
            let sh = s / r;
            for (z, v) in ck.nodes.iter().zip(&mq) {
                let u = z.dot(&sh);
                let (h, hu) = ridge::legendre_sums(u, deg, [&rc.value[..n], &rc.radial[..n]]);
                let dh = sh * (h[1] - hu[0] * u / r) + z * (hu[0] / r);
                t += (v * *wb) * dh.transpose();
            }
        }
    }
    levi_civita_contract(&t)
}

/// Peach–Koehler force density at every node from the line formula,
/// `f = τ ∧ G` with the node tangent, so that `⟨DΦ, g⟩ = −∫ f·g`.
pub fn pk_force(s: &DislocationNetwork, ev: &KernelEvaluator, rule: &LineQuadratureRule) -> Result<ForceField> {
    if s.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    check_epsilon(s, ev)?;
    let nl = s.loops().len();
    let kernels = loop_pair_kernels(s, ev);
    let segs = segments(s);
    let nodes = s.flat_nodes();
    let tangents = node_tangents(s);
    let owner: Vec<usize> = s
        .loops()
        .iter()
        .enumerate()
        .flat_map(|(i, l)| std::iter::repeat(i).take(l.len()))
        .collect();
    let g_field: Vec<Vec3> = (0..nodes.len())
        .into_par_iter()
        .map(|k| g_at(&nodes[k], &kernels[owner[k] * nl..(owner[k] + 1) * nl], &segs, rule))
        .collect();
    let force = g_field.iter().zip(&tangents).map(|(g, t)| t.cross(g)).collect();
    Ok(ForceField {
        force,
        lumped_length: lumped_lengths(s),
        g_field,
        tangents,
    })
}

/// `G` at arbitrary points, each attributed to the loop whose Burgers vector
/// enters as `b(s)`.
pub fn g_field_at(
    s: &DislocationNetwork,
    ev: &KernelEvaluator,
    rule: &LineQuadratureRule,
    points: &[(Vec3, usize)],
) -> Result<Vec<Vec3>> {
    if s.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    let nl = s.loops().len();
    let kernels = loop_pair_kernels(s, ev);
    let segs = segments(s);
    Ok(points
        .par_iter()
        .map(|(x, i)| g_at(x, &kernels[i * nl..(i + 1) * nl], &segs, rule))
        .collect())
}

/// Force from the discrete gradient, `P(τ)(−∂E/∂x_i)/ℓ_i`, together with the
/// energy. This is the force whose work matches the energy change exactly
/// to first order, which the time stepper relies on.
pub fn variational_force(
    s: &DislocationNetwork,
    ev: &KernelEvaluator,
    rule: &LineQuadratureRule,
) -> Result<(EnergyBreakdown, ForceField)> {
    let (e, grad) = energy_and_gradient(s, ev, rule)?;
    let tangents = node_tangents(s);
    let lumped = lumped_lengths(s);
    let force = grad
        .iter()
        .zip(&tangents)
        .zip(&lumped)
        .map(|((g, t), l)| {
            let f = -g / *l;
            f - t * t.dot(&f)
        })
        .collect();
    Ok((
        e,
        ForceField {
            force,
            lumped_length: lumped,
            g_field: Vec::new(),
            tangents,
        },
    ))
}

#[cfg(test)]
pub(crate) mod tests;
