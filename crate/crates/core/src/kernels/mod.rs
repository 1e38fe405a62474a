//! Regularized interaction kernels `K^ε` (line–line) and `J^ε` (surface–surface).
//!
//! Both kernels are integrals over the unit sphere of a spherical factor
//! times a one-dimensional profile of `z·s`:
//!
//! ```text
//! K^ε(s) = σ_K · ½ ∫_{S²} F(z) η^ε(z·s) dz
//! J^ε(s) = σ_J · ½ ∫_{S²} Jf(z) (η^ε)''(z·s) dz
//! ```
//!
//! Two evaluation routes are provided. The *sampled* route applies the
//! product rule to the integrand as written. It is spectrally accurate as
//! long as the rule resolves the ridge `z·s ≈ 0`, whose angular width is
//! `~ε/|s|` (see [`sampled_order_for_range`]). The default route replaces
//! the ridge by its Legendre truncation (module [`ridge`]) and is exact at every
//! `|s|` once the rule integrates the factors times `P_l` exactly.

pub mod decay;
pub mod factors;
pub mod mollifier;
pub mod oracle;
pub mod ridge;

use crate::elasticity::{ElasticityTensor, Mat3, Tensor4, Vec3};
use crate::error::{DddError, Result};
use crate::quadrature::{SphericalQuadrature, DEFAULT_SPHERE_ORDER};

pub use factors::{j_factor, k_factor, Tensor5};
pub use mollifier::{MollifierKind, MollifierProfile, GAUSSIAN_NORMALIZATION};
pub use ridge::{RidgeCoefficients, RidgeExpansion};

/// Overall sign of `K^ε` relative to `½ ∫ F η`.
pub const K_SIGN: f64 = 1.0;
/// Overall sign of `J^ε` relative to `½ ∫ Jf η''`.
pub const J_SIGN: f64 = -1.0;

/// Sphere order used by the truncated route for isotropic tensors, whose
/// factors are polynomials of degree 6 (K) and 4 (J) on the sphere.
const ISOTROPIC_BAND_ORDER: usize = 8;
const ISOTROPIC_K_DEGREE: usize = 6;
const ISOTROPIC_J_DEGREE: usize = 4;

/// Smallest even sampled order that reproduces `K^ε` to about `1e-9` relative
/// for `|s| <= range` (lengths in units of ε). The angular width of the ridge
/// is `√2 ε/|s|` and the product rule converges like
/// `exp(-4 n² ε²/|s|²)`; the constant below was fitted on isotropic and cubic
/// tensors (see the self-convergence tests).
pub fn sampled_order_for_range(range_over_epsilon: f64) -> usize {
    let n = (2.6 * range_over_epsilon).ceil() as usize + 4;
    (n.max(DEFAULT_SPHERE_ORDER) + 1) & !1
}

/// Hemisphere nodes, weights and the precontracted factors at each node.
#[derive(Clone, Debug)]
pub struct NodeFactors {
    pub quadrature: SphericalQuadrature,
    pub k: Vec<Tensor4>,
    pub j: Vec<Tensor4>,
}

impl NodeFactors {
    fn new(c: &ElasticityTensor, order: usize) -> Result<Self> {
        let quadrature = SphericalQuadrature::new(order)?;
        let mut k = Vec::with_capacity(quadrature.len());
        let mut j = Vec::with_capacity(quadrature.len());
        for z in quadrature.nodes() {
            k.push(k_factor(c, z)?);
            j.push(j_factor(c, z)?);
        }
        Ok(NodeFactors { quadrature, k, j })
    }
}

/// Immutable evaluator of `K^ε`, `∇K^ε` and `J^ε`.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    elasticity: ElasticityTensor,
    profile: MollifierProfile,
    sampled: NodeFactors,
    band: NodeFactors,
    ridge_k: RidgeExpansion,
    ridge_j: RidgeExpansion,
}

/// `K^ε` contracted with two Burgers vectors: per node `f_bd = F_abcd b_a b'_c`,
/// weights already include `σ_K/2`.
#[derive(Clone, Debug)]
pub struct ContractedK<'a> {
    pub nodes: &'a [Vec3],
    pub weights: Vec<f64>,
    pub mats: Vec<Mat3>,
    pub ridge: &'a RidgeExpansion,
}

/// `J^ε` fully contracted with `(b ⊗ ν)` twice: scalar per node, weights
/// include `σ_J/2`.
#[derive(Clone, Debug)]
pub struct ContractedJ<'a> {
    pub nodes: &'a [Vec3],
    pub values: Vec<f64>,
    pub ridge: &'a RidgeExpansion,
}

impl ContractedJ<'_> {
    /// `J^ε(s) : (b⊗ν) ⊗ (b'⊗ν')`.
    pub fn eval(&self, s: &Vec3) -> f64 {
        let r = s.norm();
        let rc = self.ridge.coefficients(r);
        let sh = unit_or_pole(s, r);
        let deg = self.ridge.degree();
        let coef = &rc.second[..rc.n_even];
        let mut acc = 0.0;
        for (z, v) in self.nodes.iter().zip(&self.values) {
            let (h, _) = ridge::legendre_sums(z.dot(&sh), deg, [coef]);
            acc += v * h[0];
        }
        acc
    }
}

#[inline]
fn unit_or_pole(s: &Vec3, r: f64) -> Vec3 {
    if r > 0.0 {
        s / r
    } else {
        Vec3::z()
    }
}

impl KernelEvaluator {
    pub fn new(elasticity: ElasticityTensor, profile: MollifierProfile, order: usize) -> Result<Self> {
        if !elasticity.validate_symmetries() {
            return Err(DddError::invalid(
                "elasticity",
                "tensor lacks the major/minor symmetries",
            ));
        }
        let sampled = NodeFactors::new(&elasticity, order)?;
        let (band_order, k_degree, j_degree) = if elasticity.lame().is_some() {
            let p = order.min(ISOTROPIC_BAND_ORDER);
            (p, ISOTROPIC_K_DEGREE.min(p), ISOTROPIC_J_DEGREE.min(p))
        } else {
            let l = order.min(ridge::MAX_DEGREE);
            (order, l, l)
        };
        let band = if band_order == order {
            sampled.clone()
        } else {
            NodeFactors::new(&elasticity, band_order)?
        };
        Ok(KernelEvaluator {
            ridge_k: RidgeExpansion::new(profile, k_degree),
            ridge_j: RidgeExpansion::new(profile, j_degree),
            elasticity,
            profile,
            sampled,
            band,
        })
    }

    pub fn with_default_order(elasticity: ElasticityTensor, profile: MollifierProfile) -> Result<Self> {
        Self::new(elasticity, profile, DEFAULT_SPHERE_ORDER)
    }

    pub fn elasticity(&self) -> &ElasticityTensor {
        &self.elasticity
    }

    pub fn profile(&self) -> &MollifierProfile {
        &self.profile
    }

    pub fn epsilon(&self) -> f64 {
        self.profile.epsilon
    }

    /// Order of the sampled product rule.
    pub fn order(&self) -> usize {
        self.sampled.quadrature.order()
    }

    /// Order of the rule used by the truncated route.
    pub fn band_order(&self) -> usize {
        self.band.quadrature.order()
    }

    pub fn sampled_factors(&self) -> &NodeFactors {
        &self.sampled
    }

    pub fn band_factors(&self) -> &NodeFactors {
        &self.band
    }

    pub fn ridge_k(&self) -> &RidgeExpansion {
        &self.ridge_k
    }

    pub fn ridge_j(&self) -> &RidgeExpansion {
        &self.ridge_j
    }

    /// `K^ε(s)`.
    pub fn eval_K(&self, s: &Vec3) -> Tensor4 {
        let r = s.norm();
        let rc = self.ridge_k.coefficients(r);
        let sh = unit_or_pole(s, r);
        let deg = self.ridge_k.degree();
        let coef = &rc.value[..rc.n_even];
        let mut out = Tensor4::zeros();
        let q = &self.band.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.band.k) {
            let (h, _) = ridge::legendre_sums(z.dot(&sh), deg, [coef]);
            axpy(&mut out.0, 0.5 * K_SIGN * w * h[0], &f.0);
        }
        out
    }

    /// `∂_e K^ε_abcd(s)`.
    pub fn eval_gradK(&self, s: &Vec3) -> Tensor5 {
        let mut out = Tensor5::zeros();
        let r = s.norm();
        if r == 0.0 {
            return out;
        }
        let rc = self.ridge_k.coefficients(r);
        let sh = s / r;
        let deg = self.ridge_k.degree();
        let n = rc.n_even;
        let q = &self.band.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.band.k) {
            let u = z.dot(&sh);
            let (h, hu) = ridge::legendre_sums(u, deg, [&rc.value[..n], &rc.radial[..n]]);
            // ∇h = h_r ŝ + h_u (z - u ŝ)/r
            let g = sh * (h[1] - hu[0] * u / r) + z * (hu[0] / r);
            let g = g * (0.5 * K_SIGN * w);
            for (i, fv) in f.0.iter().enumerate() {
                out.0[3 * i] += fv * g[0];
                out.0[3 * i + 1] += fv * g[1];
                out.0[3 * i + 2] += fv * g[2];
            }
        }
        out
    }

    /// `K^ε(s + t v)` and its first two derivatives in `t` at `t = 0`.
    pub fn eval_K_along(&self, s: &Vec3, v: &Vec3) -> [Tensor4; 3] {
        let mut out = [Tensor4::zeros(); 3];
        let r = s.norm();
        let rc = self.ridge_k.coefficients(r);
        let deg = self.ridge_k.degree();
        let n = rc.n_even;
        let mut p = [0.0; ridge::MAX_DEGREE + 1];
        let mut dp = [0.0; ridge::MAX_DEGREE + 1];
        let mut ddp = [0.0; ridge::MAX_DEGREE + 1];
        let q = &self.band.quadrature;
        let (r1, r2) = if r > 0.0 {
            let sv = s.dot(v);
            let vv = v.dot(v);
            (sv / r, (vv - sv * sv / (r * r)) / r)
        } else {
            (0.0, 0.0)
        };
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.band.k) {
            let (d0, d1, d2) = if r > 0.0 {
                let zs = z.dot(s);
                let zv = z.dot(v);
                let u = zs / r;
                // u(t) = (zs + t zv) / r(t)
                let u1 = zv / r - zs * r1 / (r * r);
                let u2 = -2.0 * zv * r1 / (r * r) - zs * r2 / (r * r) + 2.0 * zs * r1 * r1 / (r * r * r);
                ridge::legendre_with_derivatives(u, deg, &mut p, &mut dp, &mut ddp);
                let (mut h, mut hr, mut hrr, mut hu, mut huu, mut hru) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..n {
                    let l = 2 * i;
                    h += rc.value[i] * p[l];
                    hr += rc.radial[i] * p[l];
                    hrr += rc.radial2[i] * p[l];
                    hu += rc.value[i] * dp[l];
                    huu += rc.value[i] * ddp[l];
                    hru += rc.radial[i] * dp[l];
                }
                let d1 = hr * r1 + hu * u1;
                let d2 = hrr * r1 * r1 + 2.0 * hru * r1 * u1 + huu * u1 * u1 + hr * r2 + hu * u2;
                (h, d1, d2)
            } else {
                // at the origin: h(t) = Σ_l g_l(|t v|) P_l(±v̂·z), even in t
                let vv = v.norm();
                let vh = if vv > 0.0 { v / vv } else { Vec3::z() };
                ridge::legendre_with_derivatives(z.dot(&vh), deg, &mut p, &mut dp, &mut ddp);
                let mut h = 0.0;
                let mut hrr = 0.0;
                for i in 0..n {
                    h += rc.value[i] * p[2 * i];
                    hrr += rc.radial2[i] * p[2 * i];
                }
                (h, 0.0, hrr * vv * vv)
            };
            let c = 0.5 * K_SIGN * w;
            axpy(&mut out[0].0, c * d0, &f.0);
            axpy(&mut out[1].0, c * d1, &f.0);
            axpy(&mut out[2].0, c * d2, &f.0);
        }
        out
    }

    /// `J^ε(s)`.
    pub fn eval_J(&self, s: &Vec3) -> Tensor4 {
        let r = s.norm();
        let rc = self.ridge_j.coefficients(r);
        let sh = unit_or_pole(s, r);
        let deg = self.ridge_j.degree();
        let coef = &rc.second[..rc.n_even];
        let mut out = Tensor4::zeros();
        let q = &self.band.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.band.j) {
            let (h, _) = ridge::legendre_sums(z.dot(&sh), deg, [coef]);
            axpy(&mut out.0, 0.5 * J_SIGN * w * h[0], &f.0);
        }
        out
    }

    /// `K^ε(s)` by direct sampling of `η(z·s)` at the nodes.
    pub fn eval_K_sampled(&self, s: &Vec3) -> Tensor4 {
        let mut out = Tensor4::zeros();
        let q = &self.sampled.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.sampled.k) {
            let e = self.profile.eta(z.dot(s), 0);
            axpy(&mut out.0, 0.5 * K_SIGN * w * e, &f.0);
        }
        out
    }

    /// `∂_e K^ε(s)` by direct sampling.
    pub fn eval_gradK_sampled(&self, s: &Vec3) -> Tensor5 {
        let mut out = Tensor5::zeros();
        let q = &self.sampled.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.sampled.k) {
            let e = 0.5 * K_SIGN * w * self.profile.eta(z.dot(s), 1);
            for (i, fv) in f.0.iter().enumerate() {
                let c = e * fv;
                out.0[3 * i] += c * z[0];
                out.0[3 * i + 1] += c * z[1];
                out.0[3 * i + 2] += c * z[2];
            }
        }
        out
    }

    /// `J^ε(s)` by direct sampling.
    pub fn eval_J_sampled(&self, s: &Vec3) -> Tensor4 {
        let mut out = Tensor4::zeros();
        let q = &self.sampled.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.sampled.j) {
            let e = self.profile.eta(z.dot(s), 2);
            axpy(&mut out.0, 0.5 * J_SIGN * w * e, &f.0);
        }
        out
    }

    /// Directional derivative `D^m K^ε(s)[v_1, …, v_m]`, `m <= 3`, by direct
    /// sampling.
    pub fn eval_K_directional_sampled(&self, s: &Vec3, dirs: &[Vec3]) -> Tensor4 {
        assert!(dirs.len() <= 3, "derivatives above order 3 are not provided");
        let m = dirs.len();
        let mut out = Tensor4::zeros();
        let q = &self.sampled.quadrature;
        for ((z, w), f) in q.nodes().iter().zip(q.weights()).zip(&self.sampled.k) {
            let e = self.profile.eta_upto3(z.dot(s))[m];
            let proj: f64 = dirs.iter().map(|v| z.dot(v)).product();
            axpy(&mut out.0, 0.5 * K_SIGN * w * e * proj, &f.0);
        }
        out
    }

    /// Node data for `K^ε` contracted with `b` (first slot) and `b'` (third slot).
    pub fn contracted_k(&self, b1: &Vec3, b2: &Vec3) -> ContractedK<'_> {
        let q = &self.band.quadrature;
        let weights = q.weights().iter().map(|w| 0.5 * K_SIGN * w).collect();
        let mats = self.band.k.iter().map(|f| f.contract_13(b1, b2)).collect();
        ContractedK {
            nodes: q.nodes(),
            weights,
            mats,
            ridge: &self.ridge_k,
        }
    }

    /// Node data for `J^ε : (b⊗ν) ⊗ (b'⊗ν')`.
    pub fn contracted_j(&self, b1: &Vec3, n1: &Vec3, b2: &Vec3, n2: &Vec3) -> ContractedJ<'_> {
        let q = &self.band.quadrature;
        let values = q
            .weights()
            .iter()
            .zip(&self.band.j)
            .map(|(w, f)| 0.5 * J_SIGN * w * f.contract(b1, n1, b2, n2))
            .collect();
        ContractedJ {
            nodes: q.nodes(),
            values,
            ridge: &self.ridge_j,
        }
    }
}

#[inline(always)]
fn axpy(y: &mut [f64; 81], a: f64, x: &[f64; 81]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests;
