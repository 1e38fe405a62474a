//! Far-field scan of `D^m K^ε(s)[v_1, …, v_j, ŝ, …, ŝ]` against the bound
//! `C / sqrt(ε^{2m+2} + ε^{2j} |s|^{2m+2-2j})`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elasticity::{ElasticityTensor, Tensor4, Vec3};
use crate::error::{DddError, Result};
use crate::quadrature::gauss_legendre;

use super::factors::k_factor;
use super::mollifier::MollifierProfile;
use super::{KernelEvaluator, K_SIGN};

/// Result of [`decay_bound_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCheckReport {
    pub order: usize,
    pub tangential: usize,
    /// Supremum of the bound ratio over the scan.
    pub constant: f64,
    pub worst_location: Vec3,
    /// Largest (least negative) log-log slope over `|s| ∈ [10ε, 10³ε]`.
    pub max_slope: f64,
    /// `-(m - j + 1)`.
    pub slope_bound: f64,
}

impl DecayCheckReport {
    pub fn passes(&self) -> bool {
        self.constant.is_finite() && self.max_slope <= self.slope_bound + 0.1
    }
}

/// The 26 directions `(i, j, k) ∈ {-1, 0, 1}³ \ {0}`, normalized.
pub fn cube_directions() -> Vec<Vec3> {
    let mut out = Vec::with_capacity(26);
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                if (i, j, k) != (0, 0, 0) {
                    out.push(Vec3::new(i as f64, j as f64, k as f64).normalize());
                }
            }
        }
    }
    out
}

fn random_tangent(rng: &mut ChaCha8Rng, n: &Vec3) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let t = v - n * n.dot(&v);
        if t.norm() > 0.1 {
            return t.normalize();
        }
    }
}

/// `D^m K(s)[w_1, …, w_m]` for `m <= 2`, by polarization of second
/// derivatives along lines.
pub fn multilinear_derivative(ev: &KernelEvaluator, s: &Vec3, dirs: &[Vec3]) -> Tensor4 {
    match dirs {
        [] => ev.eval_K(s),
        [w] => ev.eval_K_along(s, w)[1],
        [w1, w2] => {
            let p = ev.eval_K_along(s, &(w1 + w2))[2];
            let m = ev.eval_K_along(s, &(w1 - w2))[2];
            let mut out = Tensor4::zeros();
            for i in 0..81 {
                out.0[i] = 0.25 * (p.0[i] - m.0[i]);
            }
            out
        }
        _ => panic!("derivatives above order 2 are not provided"),
    }
}

/// Log-spaced radii `10^{-2} ε ..= 10^3 ε`, ten per decade.
pub fn scan_radii(epsilon: f64) -> Vec<f64> {
    (0..=50)
        .map(|i| epsilon * 10f64.powf(-2.0 + i as f64 / 10.0))
        .collect()
}

/// Scan the bound ratio over log-spaced `|s|`, the 26 cube directions and
/// seeded random tangential `v_i`.
pub fn decay_bound_scan(ev: &KernelEvaluator, m: usize, j: usize, seed: u64) -> Result<DecayCheckReport> {
    if m > 2 {
        return Err(DddError::invalid("m", "must be 0, 1 or 2"));
    }
    if j > m {
        return Err(DddError::invalid("j", "must not exceed m"));
    }
    let eps = ev.epsilon();
    let radii = scan_radii(eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constant = 0.0_f64;
    let mut worst = Vec3::zeros();
    let mut max_slope = f64::NEG_INFINITY;
    // zero by symmetry below this level relative to the bound scale
    let scale0 = ev.eval_K(&Vec3::zeros()).max_abs();
    for dir in cube_directions() {
        let tangents: Vec<Vec3> = (0..j).map(|_| random_tangent(&mut rng, &dir)).collect();
        let mut fit: Vec<(f64, f64)> = Vec::new();
        for &r in &radii {
            let s = dir * r;
            let mut dirs = tangents.clone();
            dirs.extend(std::iter::repeat(dir).take(m - j));
            let value = multilinear_derivative(ev, &s, &dirs).max_abs();
            let denom = (eps.powi(2 * m as i32 + 2) + eps.powi(2 * j as i32) * r.powi((2 * m + 2 - 2 * j) as i32)).sqrt();
            let ratio = value * denom;
            if !ratio.is_finite() {
                return Ok(DecayCheckReport {
                    order: m,
                    tangential: j,
                    constant: f64::INFINITY,
                    worst_location: s,
                    max_slope: f64::INFINITY,
                    slope_bound: -((m - j + 1) as f64),
                });
            }
            if ratio > constant {
                constant = ratio;
                worst = s;
            }
            // the bound scale at this radius is ~ε^{-m-1} min(1, ε/r)
            let floor = 1e-12 * scale0 * eps.powi(-(m as i32)) * (eps / r).min(1.0);
            if r >= 10.0 * eps * (1.0 - 1e-12) && value > floor {
                fit.push((r.ln(), value.ln()));
            }
        }
        if fit.len() >= 3 {
            max_slope = max_slope.max(least_squares_slope(&fit));
        }
    }
    Ok(DecayCheckReport {
        order: m,
        tangential: j,
        constant,
        worst_location: worst,
        max_slope,
        slope_bound: -((m - j + 1) as f64),
    })
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `D^m K^ε(s)[v_1, …, v_m]` from scratch on a rule aligned with `s`: the
/// polar variable `u = z·ŝ` is restricted to where the profile is not
/// negligible and the spherical factor is recomputed at every node. Slow;
/// used as an independent reference for large `|s|`.
pub fn eval_K_aligned(
    c: &ElasticityTensor,
    profile: &MollifierProfile,
    s: &Vec3,
    dirs: &[Vec3],
    n_polar: usize,
    n_azimuth: usize,
) -> Result<Tensor4> {
    assert!(dirs.len() <= 3);
    let r = s.norm();
    let pole = if r > 0.0 { s / r } else { Vec3::z() };
    let helper = if pole[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = pole.cross(&helper).normalize();
    let e2 = pole.cross(&e1);
    let a = profile.exponent() * r * r;
    let uc = if a > 40.0 { (40.0 / a).sqrt() } else { 1.0 };
    let (xu, wu) = gauss_legendre(n_polar);
    let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
    let mut out = Tensor4::zeros();
    for (x, w) in xu.iter().zip(&wu) {
        let u = uc * x;
        let st = (1.0 - u * u).max(0.0).sqrt();
        let e = profile.eta_upto3(r * u)[dirs.len()];
        for k in 0..n_azimuth {
            let phi = (k as f64 + 0.5) * dphi;
            let z = pole * u + e1 * (st * phi.cos()) + e2 * (st * phi.sin());
            let f = k_factor(c, &z)?;
            let proj: f64 = dirs.iter().map(|v| z.dot(v)).product();
            let wt = 0.5 * K_SIGN * uc * w * dphi * e * proj;
            for (o, fv) in out.0.iter_mut().zip(&f.0) {
                *o += wt * fv;
            }
        }
    }
    Ok(out)
}
