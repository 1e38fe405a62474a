//! Rank-4 elasticity tensors and the acoustic tensor `D(k)_ac = C_abcd k_b k_d`.
//!
//! Tensors are stored densely (81 entries, row-major in `abcd`). All four-index
//! contractions in the kernel module index this array directly.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{DddError, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Relative floor on the smallest acoustic eigenvalue, in units of the
/// largest stiffness entry times `|k|^2`.
pub const NEAR_SINGULAR_FLOOR: f64 = 1e-8;

#[inline(always)]
pub const fn idx4(a: usize, b: usize, c: usize, d: usize) -> usize {
    27 * a + 9 * b + 3 * c + d
}

/// Dense rank-4 tensor over R^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4(pub [f64; 81]);

impl Tensor4 {
    pub const fn zeros() -> Self {
        Tensor4([0.0; 81])
    }

    #[inline(always)]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.0[idx4(a, b, c, d)]
    }

    #[inline(always)]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: f64) {
        self.0[idx4(a, b, c, d)] = value;
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sum_abcd T_abcd x_a y_b u_c w_d`.
    pub fn contract(&self, x: &Vec3, y: &Vec3, u: &Vec3, w: &Vec3) -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for c in 0..3 {
                    for d in 0..3 {
                        acc += xy * self.get(a, b, c, d) * u[c] * w[d];
                    }
                }
            }
        }
        acc
    }

    /// Contract the first and third slots: `M_bd = sum_ac T_abcd x_a y_c`.
    pub fn contract_13(&self, x: &Vec3, y: &Vec3) -> Mat3 {
        let mut m = Mat3::zeros();
        for a in 0..3 {
            for c in 0..3 {
                let xy = x[a] * y[c];
                for b in 0..3 {
                    for d in 0..3 {
                        m[(b, d)] += xy * self.get(a, b, c, d);
                    }
                }
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|v| *v *= s);
        out
    }
}

/// Linear elastic stiffness tensor with major and minor symmetries.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticityTensor {
    components: Tensor4,
    isotropic: Option<(f64, f64)>,
}

/// Serialized form used in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ElasticitySpec {
    Isotropic { lambda: f64, mu: f64 },
    Full(Vec<f64>),
}

impl Default for ElasticitySpec {
    fn default() -> Self {
        ElasticitySpec::Isotropic {
            lambda: 1.0,
            mu: 1.0,
        }
    }
}

impl ElasticitySpec {
    pub fn build(&self) -> Result<ElasticityTensor> {
        match self {
            ElasticitySpec::Isotropic { lambda, mu } => ElasticityTensor::isotropic(*lambda, *mu),
            ElasticitySpec::Full(values) => ElasticityTensor::from_row_major(values),
        }
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

impl ElasticityTensor {
    /// Lamé form `C_ijkl = λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(DddError::invalid("mu", format!("must be positive, got {mu}")));
        }
        if !(lambda + 2.0 * mu > 0.0) {
            return Err(DddError::invalid(
                "lambda",
                format!("lambda + 2 mu must be positive, got {}", lambda + 2.0 * mu),
            ));
        }
        Ok(Self::isotropic_unchecked(lambda, mu))
    }

    /// Lamé form without parameter checks; used to build deliberately
    /// ill-posed tensors in diagnostics.
    pub fn isotropic_unchecked(lambda: f64, mu: f64) -> Self {
        let mut t = Tensor4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = lambda * delta(i, j) * delta(k, l)
                            + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                        t.set(i, j, k, l, v);
                    }
                }
            }
        }
        ElasticityTensor {
            components: t,
            isotropic: Some((lambda, mu)),
        }
    }

    /// Arbitrary tensor from 81 row-major values. Symmetries are not enforced
    /// here; see [`ElasticityTensor::validate_symmetries`].
    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        if values.len() != 81 {
            return Err(DddError::invalid(
                "full",
                format!("expected 81 values, got {}", values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(DddError::invalid("full", format!("non-finite entry {bad}")));
        }
        let mut t = Tensor4::zeros();
        t.0.copy_from_slice(values);
        Ok(ElasticityTensor {
            components: t,
            isotropic: None,
        })
    }

    pub fn zero() -> Self {
        ElasticityTensor {
            components: Tensor4::zeros(),
            isotropic: None,
        }
    }

    pub fn components(&self) -> &Tensor4 {
        &self.components
    }

    #[inline(always)]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.components.get(a, b, c, d)
    }

    /// Overwrite one entry. Drops the isotropic tag.
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: f64) {
        self.components.set(a, b, c, d, value);
        self.isotropic = None;
    }

    /// Lamé parameters when the tensor was built by [`ElasticityTensor::isotropic`].
    pub fn lame(&self) -> Option<(f64, f64)> {
        self.isotropic
    }

    pub fn stiffness_scale(&self) -> f64 {
        self.components.max_abs()
    }

    /// Exact check of `C_abcd = C_cdab = C_bacd = C_abdc` on stored values.
    pub fn validate_symmetries(&self) -> bool {
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let v = self.get(a, b, c, d);
                        if v != self.get(c, d, a, b)
                            || v != self.get(b, a, c, d)
                            || v != self.get(a, b, d, c)
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Minimum of `C_abcd v_a k_b v_c k_d` over unit `v` and a Halton sample of
    /// `n_samples` unit directions `k`. The minimum over `v` is taken exactly as
    /// the smallest eigenvalue of `D(k)`. Sample sets are nested, so the result
    /// is nonincreasing in `n_samples`.
    pub fn estimate_lh_constant(&self, n_samples: usize) -> Result<f64> {
        if n_samples == 0 {
            return Err(DddError::invalid("n_samples", "must be at least 1"));
        }
        let mut min = f64::INFINITY;
        for i in 0..n_samples {
            let k = halton_direction(i as u64 + 1);
            let d = self.acoustic_matrix(&k);
            let eig = SymmetricEigen::new(d);
            min = min.min(eig.eigenvalues.min());
        }
        Ok(min)
    }

    /// `D(k)_ac = C_abcd k_b k_d` without the nonzero check.
    pub fn acoustic_matrix(&self, k: &Vec3) -> Mat3 {
        let mut m = Mat3::zeros();
        for a in 0..3 {
            for c in 0..3 {
                let mut acc = 0.0;
                for b in 0..3 {
                    for d in 0..3 {
                        acc += self.get(a, b, c, d) * k[b] * k[d];
                    }
                }
                m[(a, c)] = acc;
            }
        }
        m
    }

    pub fn acoustic_tensor(&self, k: &Vec3) -> Result<AcousticTensor> {
        let norm = k.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(DddError::ZeroVector);
        }
        Ok(AcousticTensor {
            matrix: self.acoustic_matrix(k),
            direction: k / norm,
            norm_sq: norm * norm,
            stiffness_scale: self.stiffness_scale(),
        })
    }
}

/// The 3×3 acoustic tensor at one wave vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AcousticTensor {
    pub matrix: Mat3,
    pub direction: Vec3,
    norm_sq: f64,
    stiffness_scale: f64,
}

impl AcousticTensor {
    pub fn floor(&self) -> f64 {
        NEAR_SINGULAR_FLOOR * self.stiffness_scale * self.norm_sq
    }

    /// Inverse of a positive definite acoustic tensor. Fails when the
    /// smallest eigenvalue is under the near-singularity floor.
    pub fn inverse(&self) -> Result<Mat3> {
        let eig = SymmetricEigen::new(self.matrix);
        let min = eig.eigenvalues.min();
        let floor = self.floor();
        if !(min > floor) {
            return Err(DddError::NearSingular {
                min_eigenvalue: min,
                floor,
            });
        }
        let chol = nalgebra::Cholesky::new(self.matrix).ok_or(DddError::NearSingular {
            min_eigenvalue: min,
            floor,
        })?;
        let inv = chol.inverse();
        Ok(0.5 * (inv + inv.transpose()))
    }
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut f = inv_base;
    let mut acc = 0.0;
    while n > 0 {
        acc += f * (n % base) as f64;
        n /= base;
        f *= inv_base;
    }
    acc
}

/// Point `index` of a two-dimensional Halton sequence mapped to the unit sphere.
pub fn halton_direction(index: u64) -> Vec3 {
    let u = 2.0 * radical_inverse(index, 2) - 1.0;
    let phi = 2.0 * std::f64::consts::PI * radical_inverse(index, 3);
    let r = (1.0 - u * u).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), u)
}
