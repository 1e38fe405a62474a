//! Energy and force through triangulated slip surfaces.
//!
//! `E^ε(T) = ½ ∫_T ∫_T J^ε(s − t) : (b⊗ν)(s) ⊗ (b⊗ν)(t) dA dA`. For a loop
//! `S = ∂T` this equals the line energy, whatever surface spans the loop.

use rayon::prelude::*;

use crate::elasticity::{Mat3, Tensor4, Vec3};
use crate::error::{DddError, Result};
use crate::geometry::{SpanningSurface, TriangleRule};
use crate::kernels::factors::levi_civita;
use crate::kernels::{KernelEvaluator, RidgeExpansion};

/// Sign in front of the surface form of `G`, fixed by agreement with the
/// line form on planar loops.
pub const SURFACE_FORCE_SIGN: f64 = -1.0;

/// Quadrature controls for surface integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceOptions {
    pub rule: TriangleRule,
    /// Split triangles to edges of about this length first.
    pub subdivision: Option<f64>,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            rule: TriangleRule::ThreePoint,
            subdivision: None,
        }
    }
}

/// Quadrature of one parent triangle, with its slip and normal.
struct Patch {
    b: Vec3,
    normal: Vec3,
    points: Vec<(Vec3, f64)>,
}

fn patches(surfaces: &[SpanningSurface], opts: &SurfaceOptions) -> Result<Vec<Patch>> {
    if let Some(h) = opts.subdivision {
        if !(h > 0.0 && h.is_finite()) {
            return Err(DddError::invalid("subdivision", "must be positive"));
        }
    }
    let pts = opts.rule.points();
    let mut out = Vec::new();
    for surf in surfaces {
        for t in &surf.triangles {
            let pieces = match opts.subdivision {
                Some(h) => t.subdivide(h),
                None => vec![*t],
            };
            let mut points = Vec::with_capacity(pieces.len() * pts.len());
            for p in &pieces {
                let [a, b, c] = p.vertices;
                for (l, w) in &pts {
                    points.push((a * l[0] + b * l[1] + c * l[2], w * p.area));
                }
            }
            out.push(Patch {
                b: surf.slip.cartesian,
                normal: t.normal,
                points,
            });
        }
    }
    Ok(out)
}

/// `E^ε(T)` for a list of spanning surfaces.
pub fn energy_surface(surfaces: &[SpanningSurface], ev: &KernelEvaluator, opts: &SurfaceOptions) -> Result<f64> {
    if surfaces.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    let patches = patches(surfaces, opts)?;
    let np = patches.len();
    let fast = ev.ridge_j().degree() <= 4;
    let rows: Vec<f64> = (0..np)
        .into_par_iter()
        .map(|i| {
            let pi = &patches[i];
            let mut row = 0.0;
            for (j, pj) in patches.iter().enumerate().skip(i) {
                let cj = ev.contracted_j(&pi.b, &pi.normal, &pj.b, &pj.normal);
                let mut acc = 0.0;
                if fast {
                    let mom = Moments::new(cj.nodes, &cj.values);
                    let ridge = cj.ridge;
                    for (x, wx) in &pi.points {
                        for (y, wy) in &pj.points {
                            acc += wx * wy * mom.eval(ridge, &(x - y));
                        }
                    }
                } else {
                    for (x, wx) in &pi.points {
                        for (y, wy) in &pj.points {
                            acc += wx * wy * cj.eval(&(x - y));
                        }
                    }
                }
                row += if i == j { acc } else { 2.0 * acc };
            }
            row
        })
        .collect();
    Ok(0.5 * rows.iter().sum::<f64>())
}

/// Exponents of the degree-2 and degree-4 monomials and their multinomial
/// coefficients.
const MONO2: [([usize; 3], f64); 6] = [
    ([2, 0, 0], 1.0),
    ([0, 2, 0], 1.0),
    ([0, 0, 2], 1.0),
    ([1, 1, 0], 2.0),
    ([1, 0, 1], 2.0),
    ([0, 1, 1], 2.0),
];
const MONO4: [([usize; 3], f64); 15] = [
    ([4, 0, 0], 1.0),
    ([0, 4, 0], 1.0),
    ([0, 0, 4], 1.0),
    ([3, 1, 0], 4.0),
    ([3, 0, 1], 4.0),
    ([1, 3, 0], 4.0),
    ([0, 3, 1], 4.0),
    ([1, 0, 3], 4.0),
    ([0, 1, 3], 4.0),
    ([2, 2, 0], 6.0),
    ([2, 0, 2], 6.0),
    ([0, 2, 2], 6.0),
    ([2, 1, 1], 12.0),
    ([1, 2, 1], 12.0),
    ([1, 1, 2], 12.0),
];

fn powers(v: &Vec3) -> [[f64; 5]; 3] {
    let mut p = [[1.0; 5]; 3];
    for (i, pi) in p.iter_mut().enumerate() {
        for k in 1..5 {
            pi[k] = pi[k - 1] * v[i];
        }
    }
    p
}

/// `Σ_z v_z (z·ŝ)^k` for `k = 0, 2, 4` as polynomials in `ŝ`, which turns the
/// node sum of a degree-4 ridge into a few dozen flops per point pair.
struct Moments {
    t0: f64,
    t2: [f64; 6],
    t4: [f64; 15],
}

impl Moments {
    fn new(nodes: &[Vec3], values: &[f64]) -> Self {
        let mut m = Moments {
            t0: 0.0,
            t2: [0.0; 6],
            t4: [0.0; 15],
        };
        for (z, v) in nodes.iter().zip(values) {
            let p = powers(z);
            m.t0 += v;
            for (t, (e, c)) in m.t2.iter_mut().zip(&MONO2) {
                *t += c * v * p[0][e[0]] * p[1][e[1]] * p[2][e[2]];
            }
            for (t, (e, c)) in m.t4.iter_mut().zip(&MONO4) {
                *t += c * v * p[0][e[0]] * p[1][e[1]] * p[2][e[2]];
            }
        }
        m
    }

    fn eval(&self, ridge: &RidgeExpansion, s: &Vec3) -> f64 {
        let r = s.norm();
        let rc = ridge.coefficients(r);
        let sh = if r > 0.0 { s / r } else { Vec3::z() };
        let p = powers(&sh);
        let mono = |e: &[usize; 3]| p[0][e[0]] * p[1][e[1]] * p[2][e[2]];
        let m2: f64 = self.t2.iter().zip(&MONO2).map(|(t, (e, _))| t * mono(e)).sum();
        let m4: f64 = self.t4.iter().zip(&MONO4).map(|(t, (e, _))| t * mono(e)).sum();
        let c = &rc.second;
        let mut acc = c[0] * self.t0;
        if rc.n_even > 1 {
            acc += c[1] * 0.5 * (3.0 * m2 - self.t0);
        }
        if rc.n_even > 2 {
            acc += c[2] * (35.0 * m4 - 30.0 * m2 + 3.0 * self.t0) / 8.0;
        }
        acc
    }
}

/// `∂_m ∂_n K^ε(s)` as a 3×3 array of tensors, by polarization of second
/// directional derivatives.
fn hessian_k(ev: &KernelEvaluator, s: &Vec3) -> [[Tensor4; 3]; 3] {
    let e = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut diag = [Tensor4::zeros(); 3];
    for m in 0..3 {
        diag[m] = ev.eval_K_along(s, &e[m])[2];
    }
    let mut out = [[Tensor4::zeros(); 3]; 3];
    for m in 0..3 {
        out[m][m] = diag[m];
        for n in (m + 1)..3 {
            let both = ev.eval_K_along(s, &(e[m] + e[n]))[2];
            let mut t = Tensor4::zeros();
            for k in 0..81 {
                t.0[k] = 0.5 * (both.0[k] - diag[m].0[k] - diag[n].0[k]);
            }
            out[m][n] = t;
            out[n][m] = t;
        }
    }
    out
}

/// `G` at `x` from the surface form
/// `G_k = σ ∫_T ε_dfn ν_f ε_klm ∂_m ∂_n K_alcd(x − y) b_a b'_c dA(y)`,
/// where `b` is the Burgers vector carried at `x`.
pub fn surface_g_field(
    x: &Vec3,
    b_at_x: &Vec3,
    surfaces: &[SpanningSurface],
    ev: &KernelEvaluator,
    opts: &SurfaceOptions,
) -> Result<Vec3> {
    let patches = patches(surfaces, opts)?;
    let mut g = Vec3::zeros();
    for p in &patches {
        // ε_dfn ν_f, indexed [d][n]
        let mut a_nu = Mat3::zeros();
        for d in 0..3 {
            for n in 0..3 {
                for f in 0..3 {
                    a_nu[(d, n)] += levi_civita(d, f, n) * p.normal[f];
                }
            }
        }
        for (y, w) in &p.points {
            let h = hessian_k(ev, &(x - y));
            for m in 0..3 {
                for n in 0..3 {
                    let c = h[m][n].contract_13(b_at_x, &p.b); // [l][d]
                    let mut v = [0.0; 3]; // Σ_d c_ld a_nu[d][n]
                    for (l, vl) in v.iter_mut().enumerate() {
                        for d in 0..3 {
                            *vl += c[(l, d)] * a_nu[(d, n)];
                        }
                    }
                    for k in 0..3 {
                        for (l, vl) in v.iter().enumerate() {
                            g[k] += w * levi_civita(k, l, m) * vl;
                        }
                    }
                }
            }
        }
    }
    Ok(g * SURFACE_FORCE_SIGN)
}
