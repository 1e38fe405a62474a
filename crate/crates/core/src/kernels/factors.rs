//! Spherical factors of the Fourier representations, computed from scratch at
//! one unit direction `z`.
//!
//! * K factor: `F_abcd(z) = C_efgh P_ab;ef P_cd;gh` with
//!   `P_ab;ef = C_aijk z_k D(z)^-1_ej A_fib`.
//! * J factor: `C_kmgr - C_abgr D(z)^-1_ai C_ijkm z_b z_j`.
//!
//! Both are symmetric under the pair swap `(ab) <-> (cd)`; the stored result
//! is symmetrized exactly.

use crate::elasticity::{idx4, ElasticityTensor, Mat3, Tensor4, Vec3};
use crate::error::Result;

/// Alternating symbol, `A_ijk`.
#[inline(always)]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    if i == j || j == k || i == k {
        0.0
    } else if (i + 1) % 3 == j {
        1.0
    } else {
        -1.0
    }
}

fn inverse_acoustic(c: &ElasticityTensor, z: &Vec3) -> Result<Mat3> {
    c.acoustic_tensor(z)?.inverse()
}

fn symmetrize_pairs(t: &mut Tensor4) {
    for p in 0..9 {
        for q in (p + 1)..9 {
            let (a, b) = (p / 3, p % 3);
            let (cc, d) = (q / 3, q % 3);
            let v = 0.5 * (t.get(a, b, cc, d) + t.get(cc, d, a, b));
            t.set(a, b, cc, d, v);
            t.set(cc, d, a, b, v);
        }
    }
}

/// `F_abcd(z)` for the K kernel.
pub fn k_factor(c: &ElasticityTensor, z: &Vec3) -> Result<Tensor4> {
    let dinv = inverse_acoustic(c, z)?;
    let cc = c.components();
    // Y_aij = C_aijk z_k ; Z_aie = Y_aij Dinv_je
    let mut zt = [0.0; 27];
    for a in 0..3 {
        for i in 0..3 {
            let mut y = [0.0; 3];
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = (0..3).map(|k| cc.get(a, i, j, k) * z[k]).sum();
            }
            for e in 0..3 {
                zt[9 * a + 3 * i + e] = (0..3).map(|j| y[j] * dinv[(j, e)]).sum();
            }
        }
    }
    // P[ab][ef] = sum_i Z_aie A_fib
    let mut p = [[0.0; 9]; 9];
    for a in 0..3 {
        for b in 0..3 {
            for e in 0..3 {
                for f in 0..3 {
                    let mut acc = 0.0;
                    for i in 0..3 {
                        let eps = levi_civita(f, i, b);
                        if eps != 0.0 {
                            acc += eps * zt[9 * a + 3 * i + e];
                        }
                    }
                    p[3 * a + b][3 * e + f] = acc;
                }
            }
        }
    }
    // Q[ab][gh] = sum_ef P[ab][ef] C_efgh
    let mut q = [[0.0; 9]; 9];
    for ab in 0..9 {
        for gh in 0..9 {
            let mut acc = 0.0;
            for ef in 0..9 {
                acc += p[ab][ef] * cc.0[9 * ef + gh];
            }
            q[ab][gh] = acc;
        }
    }
    let mut out = Tensor4::zeros();
    for ab in 0..9 {
        for cd in ab..9 {
            let mut acc = 0.0;
            for gh in 0..9 {
                acc += q[ab][gh] * p[cd][gh];
            }
            out.0[9 * ab + cd] = acc;
            out.0[9 * cd + ab] = acc;
        }
    }
    Ok(out)
}

/// `C_kmgr - C_abgr D(z)^-1_ai C_ijkm z_b z_j` for the J kernel.
pub fn j_factor(c: &ElasticityTensor, z: &Vec3) -> Result<Tensor4> {
    let dinv = inverse_acoustic(c, z)?;
    let cc = c.components();
    // V[a][gr] = C_abgr z_b, W[i][km] = C_ijkm z_j
    let mut v = [[0.0; 9]; 3];
    let mut w = [[0.0; 9]; 3];
    for a in 0..3 {
        for gr in 0..9 {
            v[a][gr] = (0..3).map(|b| cc.0[27 * a + 9 * b + gr] * z[b]).sum();
            w[a][gr] = (0..3).map(|j| cc.0[27 * a + 9 * j + gr] * z[j]).sum();
        }
    }
    // X[a][km] = Dinv_ai W[i][km]
    let mut x = [[0.0; 9]; 3];
    for a in 0..3 {
        for km in 0..9 {
            x[a][km] = (0..3).map(|i| dinv[(a, i)] * w[i][km]).sum();
        }
    }
    let mut out = *cc;
    for km in 0..9 {
        for gr in 0..9 {
            let corr: f64 = (0..3).map(|a| v[a][gr] * x[a][km]).sum();
            out.0[9 * km + gr] -= corr;
        }
    }
    symmetrize_pairs(&mut out);
    Ok(out)
}

/// Unreduced J factor,
/// `C_abcd L_ab;km L_cd;gr` with `L_ab;km = C_ijkl A_bpl A_pmn z_j z_n D^-1_ai`.
/// Used only to check the reduced form.
pub fn j_factor_unreduced(c: &ElasticityTensor, z: &Vec3) -> Result<Tensor4> {
    let dinv = inverse_acoustic(c, z)?;
    let cc = c.components();
    let mut l = [[0.0; 9]; 9];
    for a in 0..3 {
        for b in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    let mut acc = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for ll in 0..3 {
                                let cz = cc.get(i, j, k, ll) * z[j] * dinv[(a, i)];
                                if cz == 0.0 {
                                    continue;
                                }
                                for p in 0..3 {
                                    let e1 = levi_civita(b, p, ll);
                                    if e1 == 0.0 {
                                        continue;
                                    }
                                    for n in 0..3 {
                                        acc += cz * e1 * levi_civita(p, m, n) * z[n];
                                    }
                                }
                            }
                        }
                    }
                    l[3 * a + b][3 * k + m] = acc;
                }
            }
        }
    }
    let mut out = Tensor4::zeros();
    for km in 0..9 {
        for gr in 0..9 {
            let mut acc = 0.0;
            for ab in 0..9 {
                for cd in 0..9 {
                    acc += cc.0[9 * ab + cd] * l[ab][km] * l[cd][gr];
                }
            }
            out.0[9 * km + gr] = acc;
        }
    }
    Ok(out)
}

/// Dense rank-5 tensor, `T_abcde` stored at `3*idx4(a,b,c,d) + e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor5(pub [f64; 243]);

impl Tensor5 {
    pub const fn zeros() -> Self {
        Tensor5([0.0; 243])
    }

    #[inline(always)]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> f64 {
        self.0[3 * idx4(a, b, c, d) + e]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Contract the last slot with `v`.
    pub fn apply(&self, v: &Vec3) -> Tensor4 {
        let mut out = Tensor4::zeros();
        for (i, o) in out.0.iter_mut().enumerate() {
            *o = self.0[3 * i] * v[0] + self.0[3 * i + 1] * v[1] + self.0[3 * i + 2] * v[2];
        }
        out
    }
}
