//! Real-space evaluation of `K^ε` for isotropic tensors, by brute-force
//! quadrature over R³ of
//!
//! ```text
//! K_kpgq(s) = ∫ C_abcd Σ_ab;kp(x - s) Σ_cd;gq(x) dx,
//! Σ_ab;kp(y) = A_bpl C_ijkl G^ε_ai,j(y),
//! ```
//!
//! with `G^ε` the isotropic Green's function mollified by the Gaussian
//! `φ^ε`. This does not use the acoustic tensor or the spherical factors and
//! serves as the reference for the normalization of `η^ε`.

use std::f64::consts::PI;

use crate::elasticity::{ElasticityTensor, Tensor4, Vec3};
use crate::error::{DddError, Result};
use crate::quadrature::gauss_legendre;

use super::factors::levi_civita;
use super::mollifier::MollifierProfile;

const SERIES_CUTOFF: f64 = 3.0;

/// Radial functions of the mollified isotropic Green's function, at
/// `a = r/ε` and with `ε = 1`:
///
/// * `ell`: `L'(r)/r` where `L = (2/|x|) * φ`
/// * `bf`, `b3`: `∂_a∂_i∂_j R = bf (y_a δ_ij + y_i δ_aj + y_j δ_ai) + b3 y_a y_i y_j`
///   with `R = |x| * φ`
pub fn green_radial(a: f64) -> (f64, f64, f64) {
    let c = (2.0 / PI).sqrt();
    if a <= SERIES_CUTOFF {
        let a2 = a * a;
        let mut ell = 0.0;
        let mut bf = 0.0;
        let mut b3 = 0.0;
        // term_n = (-1)^n a^{2n} / (2^n n!)
        let mut term = 1.0;
        let mut term_prev = 0.0; // (-1)^{n} a^{2n-2} / (2^n n!) for b3
        for n in 0..80 {
            let nf = n as f64;
            let d3 = 2.0 * nf + 3.0;
            let d5 = 2.0 * nf + 5.0;
            ell += term / d3;
            bf += 2.0 * term / (d3 * d5);
            if n >= 1 {
                b3 += 4.0 * nf * term_prev / (d3 * d5);
            }
            // advance
            let next = -term * a2 / (2.0 * (nf + 1.0));
            term_prev = -term / (2.0 * (nf + 1.0));
            term = next;
            if term.abs() < 1e-18 && term_prev.abs() < 1e-18 {
                break;
            }
        }
        (-2.0 * c * ell, -c * bf, -c * b3)
    } else {
        let erf = libm::erf(a / 2f64.sqrt());
        let e = (-0.5 * a * a).exp();
        let k = 2f64.sqrt() / PI.sqrt();
        let a2 = a * a;
        let a3 = a2 * a;
        let a4 = a2 * a2;
        let a5 = a4 * a;
        let a6 = a3 * a3;
        let a7 = a6 * a;
        let ell = 2.0 * k * e / a2 - 2.0 * erf / a3;
        let bf = -erf / a3 - 3.0 * k * e / a4 + 3.0 * erf / a5;
        let b3 = 2.0 * k * e / a4 + 3.0 * erf / a5 + 15.0 * k * e / a6 - 15.0 * erf / a7;
        (ell, bf, b3)
    }
}

/// `G^ε_ai,j(y)` as `g[a][i][j]`.
pub fn green_gradient(lambda: f64, mu: f64, eps: f64, y: &Vec3) -> [[[f64; 3]; 3]; 3] {
    let r = y.norm();
    let (ell, bf, b3) = green_radial(r / eps);
    let ell = ell / eps.powi(3);
    let bf = bf / eps.powi(3);
    let b3 = b3 / eps.powi(5);
    let kappa = (lambda + mu) / (lambda + 2.0 * mu);
    let pre = 1.0 / (8.0 * PI * mu);
    let mut g = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let dai = if a == i { 1.0 } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                let daj = if a == j { 1.0 } else { 0.0 };
                let third = bf * (y[a] * dij + y[i] * daj + y[j] * dai) + b3 * y[a] * y[i] * y[j];
                g[a][i][j] = pre * (dai * ell * y[j] - kappa * third);
            }
        }
    }
    g
}

/// `Σ_ab;kp(y)` stored at `[3a+b][3k+p]`.
fn sigma(lambda: f64, mu: f64, eps: f64, y: &Vec3) -> [[f64; 9]; 9] {
    let g = green_gradient(lambda, mu, eps, y);
    // T_a;kl = λ δ_kl G_aj,j + μ (G_ak,l + G_al,k)
    let mut t = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        let div = g[a][0][0] + g[a][1][1] + g[a][2][2];
        for k in 0..3 {
            for l in 0..3 {
                let d = if k == l { lambda * div } else { 0.0 };
                t[a][k][l] = d + mu * (g[a][k][l] + g[a][l][k]);
            }
        }
    }
    let mut out = [[0.0; 9]; 9];
    for a in 0..3 {
        for b in 0..3 {
            for k in 0..3 {
                for p in 0..3 {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        let e = levi_civita(b, p, l);
                        if e != 0.0 {
                            acc += e * t[a][k][l];
                        }
                    }
                    out[3 * a + b][3 * k + p] = acc;
                }
            }
        }
    }
    out
}

/// Resolution of the real-space quadrature: Gauss–Legendre nodes per radial
/// piece and in `cos θ`, trapezoid nodes in `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleResolution {
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
}

impl OracleResolution {
    pub const fn uniform(n: usize) -> Self {
        OracleResolution {
            radial: n,
            polar: n,
            azimuthal: n,
        }
    }

    pub fn doubled(&self) -> Self {
        OracleResolution {
            radial: 2 * self.radial,
            polar: 2 * self.polar,
            azimuthal: 2 * self.azimuthal,
        }
    }
}

impl Default for OracleResolution {
    fn default() -> Self {
        OracleResolution::uniform(40)
    }
}

/// Real-space `K^ε(s)` for an isotropic tensor.
pub fn eval_K_direct(c: &ElasticityTensor, profile: &MollifierProfile, s: &Vec3) -> Result<Tensor4> {
    eval_K_direct_with(c, profile, s, OracleResolution::default())
}

pub fn eval_K_direct_with(
    c: &ElasticityTensor,
    profile: &MollifierProfile,
    s: &Vec3,
    res: OracleResolution,
) -> Result<Tensor4> {
    let (lambda, mu) = c.lame().ok_or(DddError::NonIsotropic)?;
    if res.radial == 0 || res.polar == 0 || res.azimuthal == 0 {
        return Err(DddError::invalid("resolution", "all node counts must be positive"));
    }
    let eps = profile.epsilon;
    let center = 0.5 * s;
    let half = 0.5 * s.norm();
    // frame with the pole along s
    let pole = if half > 0.0 { s.normalize() } else { Vec3::z() };
    let helper = if pole[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = pole.cross(&helper).normalize();
    let e2 = pole.cross(&e1);

    let r_inner = half + 8.0 * eps;
    let (xr, wr) = gauss_legendre(res.radial);
    let mut radial: Vec<(f64, f64)> = Vec::new();
    // finite pieces [0, half], [half, r_inner], then [r_inner, ∞) via ρ = r_inner/(1-t)
    let mut breaks = vec![0.0];
    if half > 0.0 {
        breaks.push(half);
    }
    breaks.push(r_inner);
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for (x, wx) in xr.iter().zip(&wr) {
            let rho = 0.5 * (hi - lo) * (x + 1.0) + lo;
            radial.push((rho, 0.5 * (hi - lo) * wx * rho * rho));
        }
    }
    for (x, wx) in xr.iter().zip(&wr) {
        let t = 0.5 * (x + 1.0);
        let rho = r_inner / (1.0 - t);
        let jac = r_inner / ((1.0 - t) * (1.0 - t));
        radial.push((rho, 0.5 * wx * jac * rho * rho));
    }
    let (xu, wu) = gauss_legendre(res.polar);
    let dphi = 2.0 * PI / res.azimuthal as f64;

    let mut acc = [0.0; 81];
    for (rho, wrho) in &radial {
        for (u, wuu) in xu.iter().zip(&wu) {
            let st = (1.0 - u * u).max(0.0).sqrt();
            for j in 0..res.azimuthal {
                let phi = j as f64 * dphi;
                let dir = pole * *u + e1 * (st * phi.cos()) + e2 * (st * phi.sin());
                let x = center + dir * *rho;
                let w = wrho * wuu * dphi;
                let s1 = sigma(lambda, mu, eps, &(x - s));
                let s2 = sigma(lambda, mu, eps, &x);
                accumulate(&mut acc, w, lambda, mu, &s1, &s2);
            }
        }
    }
    Ok(Tensor4(acc))
}

/// `acc_kpgq += w C_abcd s1_ab;kp s2_cd;gq` with the isotropic contraction
/// `C Y = λ tr(Y) I + μ (Y + Yᵀ)`.
fn accumulate(acc: &mut [f64; 81], w: f64, lambda: f64, mu: f64, s1: &[[f64; 9]; 9], s2: &[[f64; 9]; 9]) {
    for kp in 0..9 {
        // Y_ab = s1_ab;kp
        let mut y = [0.0; 9];
        for ab in 0..9 {
            y[ab] = s1[ab][kp];
        }
        let tr = y[0] + y[4] + y[8];
        let mut cy = [0.0; 9];
        for a in 0..3 {
            for b in 0..3 {
                let d = if a == b { lambda * tr } else { 0.0 };
                cy[3 * a + b] = w * (d + mu * (y[3 * a + b] + y[3 * b + a]));
            }
        }
        for gq in 0..9 {
            let mut v = 0.0;
            for cd in 0..9 {
                v += cy[cd] * s2[cd][gq];
            }
            acc[9 * kp + gq] += v;
        }
    }
}
