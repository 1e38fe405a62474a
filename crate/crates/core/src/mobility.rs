//! Dissipation model: bending penalty `A = α I`, drag matrix `B(b, τ)`, the
//! velocity potential `ψ(v) = ½ vᵀB†v` on the plane `v·τ = 0` and its
//! conjugate `ψ*(f) = ½ fᵀBf`.
//!
//! `B` maps force to velocity, so the BCC parameters `B_eg`, `B_ec`, `B_s`
//! are mobilities: for a pure edge segment with `|b| = 1` the glide and climb
//! eigenvalues are exactly `B_eg` and `B_ec`.

use serde::{Deserialize, Serialize};

use crate::elasticity::{Mat3, Vec3};
use crate::error::{DddError, Result};

/// Relative tolerance on `|τ| = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-10;
/// `ψ` is finite only when `|v·τ| <= CONSTRAINT_TOLERANCE · |v|`.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_SCREW_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MobilityKind {
    /// `B = P(τ)/m`
    IsotropicDrag { m: f64 },
    BccDrag { b_eg: f64, b_ec: f64, b_s: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityModel {
    pub alpha: f64,
    pub kind: MobilityKind,
    pub screw_tolerance: f64,
}

/// `B(b, τ)` and its pseudo-inverse; both annihilate `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DragMatrix {
    pub matrix: Mat3,
    pub pseudo_inverse: Mat3,
    pub tangent: Vec3,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DddError::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

pub fn projector(tau: &Vec3) -> Mat3 {
    Mat3::identity() - tau * tau.transpose()
}

/// Orthonormal `(e1, e2)` with `e1 × e2 = τ`.
pub fn normal_basis(tau: &Vec3) -> (Vec3, Vec3) {
    let helper = if tau.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - tau * tau.dot(&helper)).normalize();
    let e2 = tau.cross(&e1);
    (e1, e2)
}

impl MobilityModel {
    pub fn isotropic(alpha: f64, m: f64) -> Result<Self> {
        let out = MobilityModel {
            alpha,
            kind: MobilityKind::IsotropicDrag { m },
            screw_tolerance: DEFAULT_SCREW_TOLERANCE,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn bcc(alpha: f64, b_eg: f64, b_ec: f64, b_s: f64) -> Result<Self> {
        let out = MobilityModel {
            alpha,
            kind: MobilityKind::BccDrag { b_eg, b_ec, b_s },
            screw_tolerance: DEFAULT_SCREW_TOLERANCE,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        match self.kind {
            MobilityKind::IsotropicDrag { m } => positive("m", m)?,
            MobilityKind::BccDrag { b_eg, b_ec, b_s } => {
                positive("B_eg", b_eg)?;
                positive("B_ec", b_ec)?;
                positive("B_s", b_s)?;
            }
        }
        if !(self.screw_tolerance >= 0.0 && self.screw_tolerance < 0.5) {
            return Err(DddError::invalid("screw_tolerance", "must lie in [0, 0.5)"));
        }
        Ok(())
    }

    /// `A(b, τ)`; only `α I` is provided.
    pub fn bending_matrix(&self, _b: &Vec3, _tau: &Vec3) -> Mat3 {
        Mat3::identity() * self.alpha
    }

    /// Growth constant `β` with `ψ(v) >= ½ β |v|²`: `m` for isotropic drag,
    /// `|b| / max(B_eg, B_ec, B_s)` for BCC drag, whose eigenvalues are at
    /// most `max(B_eg, B_s)/|b|` (glide) and `max(B_ec, B_s)/|b|` (climb).
    pub fn beta(&self, b_norm: f64) -> f64 {
        match self.kind {
            MobilityKind::IsotropicDrag { m } => m,
            MobilityKind::BccDrag { b_eg, b_ec, b_s } => b_norm / b_eg.max(b_ec).max(b_s),
        }
    }

    pub fn drag_matrix(&self, b: &Vec3, tau: &Vec3) -> Result<DragMatrix> {
        if (tau.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(DddError::invalid("tau", format!("|tau| = {} is not 1", tau.norm())));
        }
        let bn = b.norm();
        if bn == 0.0 {
            return Err(DddError::ZeroVector);
        }
        let p = projector(tau);
        let matrix = match self.kind {
            MobilityKind::IsotropicDrag { m } => p / m,
            MobilityKind::BccDrag { b_eg, b_ec, b_s } => {
                let bt = b.dot(tau);
                let c = b.cross(tau);
                let cn = c.norm();
                let glide = (cn * cn / (b_eg * b_eg) + bt * bt / (b_s * b_s)).powf(-0.5);
                let climb = (b_ec * b_ec * cn * cn + b_s * b_s * bt * bt).sqrt() / (bn * bn);
                // both eigenvalues tend to B_s/|b| at screw orientation, where
                // only the eigendirections degenerate
                let screw = p * (0.5 * (glide + climb));
                let tol = self.screw_tolerance * bn;
                if cn <= tol {
                    screw
                } else {
                    let pb = p * b;
                    let formula = (pb * pb.transpose()) * (glide / (cn * cn)) + (c * c.transpose()) * (climb / (cn * cn));
                    if cn >= 2.0 * tol {
                        formula
                    } else {
                        let w = (cn - tol) / tol;
                        formula * w + screw * (1.0 - w)
                    }
                }
            }
        };
        // symmetrize rounding, then invert on the normal plane
        let matrix = (matrix + matrix.transpose()) * 0.5;
        let (e1, e2) = normal_basis(tau);
        let m2 = nalgebra::Matrix2::new(
            e1.dot(&(matrix * e1)),
            e1.dot(&(matrix * e2)),
            e2.dot(&(matrix * e1)),
            e2.dot(&(matrix * e2)),
        );
        let inv = m2
            .try_inverse()
            .ok_or_else(|| DddError::Solver("drag matrix is singular on the normal plane".into()))?;
        let pseudo_inverse = e1 * e1.transpose() * inv[(0, 0)]
            + e1 * e2.transpose() * inv[(0, 1)]
            + e2 * e1.transpose() * inv[(1, 0)]
            + e2 * e2.transpose() * inv[(1, 1)];
        Ok(DragMatrix {
            matrix,
            pseudo_inverse,
            tangent: *tau,
        })
    }

    /// `ψ(b, τ, v)`; `+∞` off the constraint plane.
    pub fn psi(&self, b: &Vec3, tau: &Vec3, v: &Vec3) -> Result<f64> {
        if v.dot(tau).abs() > CONSTRAINT_TOLERANCE * v.norm() {
            return Ok(f64::INFINITY);
        }
        let d = self.drag_matrix(b, tau)?;
        Ok(0.5 * v.dot(&(d.pseudo_inverse * v)))
    }

    /// `ψ*(b, τ, f) = ½ fᵀBf`.
    pub fn psi_star(&self, b: &Vec3, tau: &Vec3, f: &Vec3) -> Result<f64> {
        let d = self.drag_matrix(b, tau)?;
        Ok(0.5 * f.dot(&(d.matrix * f)))
    }

    /// `D⊥ψ(v) = P(τ) B† v` for `v ⊥ τ`.
    pub fn dpsi_perp(&self, b: &Vec3, tau: &Vec3, v: &Vec3) -> Result<Vec3> {
        let violation = v.dot(tau).abs();
        if violation > CONSTRAINT_TOLERANCE * v.norm().max(1.0) {
            return Err(DddError::ConstraintViolation { violation });
        }
        let d = self.drag_matrix(b, tau)?;
        Ok(projector(tau) * (d.pseudo_inverse * v))
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn in_plane(rng: &mut ChaCha8Rng, tau: &Vec3, scale: f64) -> Vec3 {
        let (e1, e2) = normal_basis(tau);
        e1 * rng.gen_range(-scale..scale) + e2 * rng.gen_range(-scale..scale)
    }

    fn bcc() -> MobilityModel {
        MobilityModel::bcc(1.0, 2.0, 0.5, 1.3).unwrap()
    }

    #[test]
    fn isotropic_eigenvalues() {
        let m = MobilityModel::isotropic(1.0, 2.0).unwrap();
        let tau = Vec3::new(1.0, 2.0, 2.0) / 3.0;
        let d = m.drag_matrix(&Vec3::x(), &tau).unwrap();
        let mut ev: Vec<f64> = d.matrix.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!(ev[0].abs() < 1e-15 && (ev[1] - 0.5).abs() < 1e-15 && (ev[2] - 0.5).abs() < 1e-15);
        assert!((d.matrix * tau).norm() < 1e-15);
    }

    #[test]
    fn bcc_edge_eigenvalues_are_the_parameters() {
        let m = bcc();
        let b = Vec3::x();
        let tau = Vec3::y();
        let d = m.drag_matrix(&b, &tau).unwrap();
        let glide = projector(&tau) * b;
        let climb = b.cross(&tau);
        assert!((d.matrix * glide - glide * 2.0).norm() < 1e-14);
        assert!((d.matrix * climb - climb * 0.5).norm() < 1e-14);
    }

    #[test]
    fn screw_completion_is_continuous() {
        let m = bcc();
        let b = Vec3::new(1.0, 1.0, 1.0);
        let tau0 = b.normalize();
        let (e1, _) = normal_basis(&tau0);
        let at = |t: f64| m.drag_matrix(&b, &(tau0 + e1 * t).normalize()).unwrap().matrix;
        let exact = at(0.0);
        assert!((exact - projector(&tau0) * (1.3 / 3f64.sqrt())).norm() < 1e-14);
        let tol = m.screw_tolerance;
        let mut prev = exact;
        for k in 1..=60 {
            let t = 3.0 * tol * k as f64 / 60.0;
            let cur = at(t);
            assert!((cur - prev).norm() < 1e-5, "jump at {t}");
            prev = cur;
        }
    }

    #[test]
    fn drag_and_pseudo_inverse_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for model in [bcc(), MobilityModel::isotropic(1.0, 0.7).unwrap()] {
            for _ in 0..10_000 {
                let b = unit(&mut rng) * rng.gen_range(0.5..2.0);
                let tau = unit(&mut rng);
                let d = model.drag_matrix(&b, &tau).unwrap();
                let p = projector(&tau);
                assert!((d.matrix * tau).norm() < 1e-12 && (d.pseudo_inverse * tau).norm() < 1e-10);
                assert!((d.matrix - d.matrix.transpose()).norm() < 1e-14);
                assert!((d.pseudo_inverse * d.matrix - p).norm() < 1e-10);
                assert!((d.matrix * d.pseudo_inverse - p).norm() < 1e-10);
                let ev = d.matrix.symmetric_eigenvalues();
                assert!(ev.iter().all(|&e| e > -1e-13));
            }
        }
    }

    #[test]
    fn psi_branches() {
        let m = MobilityModel::isotropic(1.0, 3.0).unwrap();
        let b = Vec3::x();
        let tau = Vec3::z();
        assert_eq!(m.psi(&b, &tau, &Vec3::zeros()).unwrap(), 0.0);
        assert_eq!(m.psi(&b, &tau, &Vec3::new(0.0, 0.0, 0.5)).unwrap(), f64::INFINITY);
        let v = Vec3::new(0.3, -0.4, 0.0);
        assert!((m.psi(&b, &tau, &v).unwrap() - 1.5 * 0.25).abs() < 1e-15);
        assert_eq!(m.psi_star(&b, &tau, &tau).unwrap(), 0.0);
        assert!((m.dpsi_perp(&b, &tau, &v).unwrap() - v * 3.0).norm() < 1e-15);
        assert_eq!(m.dpsi_perp(&b, &tau, &Vec3::zeros()).unwrap(), Vec3::zeros());
        assert!(m.dpsi_perp(&b, &tau, &Vec3::new(0.1, 0.0, 0.1)).is_err());
        assert!(m.drag_matrix(&b, &(tau * 1.1)).is_err());
        assert!(m.drag_matrix(&Vec3::zeros(), &tau).is_err());
    }

    #[test]
    fn conjugacy_and_fenchel_young() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = bcc();
        for _ in 0..20 {
            let b = unit(&mut rng);
            let tau = unit(&mut rng);
            let f = unit(&mut rng) * 1.5;
            let star = m.psi_star(&b, &tau, &f).unwrap();
            // grid search for sup over the normal plane
            let (e1, e2) = normal_basis(&tau);
            let d = m.drag_matrix(&b, &tau).unwrap();
            let v0 = d.matrix * f;
            let mut best = f64::NEG_INFINITY;
            let n = 200;
            let span = 2.0 * v0.norm() + 1e-3;
            for i in 0..=n {
                for j in 0..=n {
                    let v = e1 * (span * (2.0 * i as f64 / n as f64 - 1.0)) + e2 * (span * (2.0 * j as f64 / n as f64 - 1.0));
                    best = best.max(v.dot(&f) - m.psi(&b, &tau, &v).unwrap());
                }
            }
            assert!(best <= star + 1e-12 && star - best < 1e-3 * star.max(1e-3));
            let at_max = v0.dot(&f) - m.psi(&b, &tau, &v0).unwrap();
            assert!((at_max - star).abs() < 1e-6 * star.max(1.0));
            let fy = m.psi(&b, &tau, &v0).unwrap() + star;
            assert!((v0.dot(&f) - fy).abs() < 1e-10);
            for _ in 0..10 {
                let v = in_plane(&mut rng, &tau, 2.0);
                assert!(v.dot(&f) <= m.psi(&b, &tau, &v).unwrap() + star + 1e-12);
            }
        }
    }

    #[test]
    fn dpsi_matches_finite_differences_and_psi_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = bcc();
        for _ in 0..100 {
            let b = unit(&mut rng);
            let tau = unit(&mut rng);
            let v = in_plane(&mut rng, &tau, 1.0);
            let w = in_plane(&mut rng, &tau, 1.0);
            let h = 1e-6;
            let fd = (m.psi(&b, &tau, &(v + w * h)).unwrap() - m.psi(&b, &tau, &(v - w * h)).unwrap()) / (2.0 * h);
            let an = m.dpsi_perp(&b, &tau, &v).unwrap().dot(&w);
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0));
            let u = in_plane(&mut rng, &tau, 1.0);
            let th: f64 = rng.gen_range(0.0..1.0);
            let lhs = m.psi(&b, &tau, &(v * th + u * (1.0 - th))).unwrap();
            let rhs = th * m.psi(&b, &tau, &v).unwrap() + (1.0 - th) * m.psi(&b, &tau, &u).unwrap();
            assert!(lhs <= rhs + 1e-12);
            assert!(m.psi(&b, &tau, &v).unwrap() >= 0.5 * m.beta(b.norm()) * v.norm_squared() - 1e-14);
        }
    }

    #[test]
    fn drag_is_lipschitz_away_from_screw() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = bcc();
        let mut lip = 0.0f64;
        for _ in 0..2000 {
            let b = unit(&mut rng);
            let t1 = unit(&mut rng);
            let t2 = (t1 + unit(&mut rng) * 1e-3).normalize();
            if b.cross(&t1).norm() < 0.1 || b.cross(&t2).norm() < 0.1 {
                continue;
            }
            let d1 = m.drag_matrix(&b, &t1).unwrap().matrix;
            let d2 = m.drag_matrix(&b, &t2).unwrap().matrix;
            lip = lip.max((d1 - d2).norm() / (t1 - t2).norm());
        }
        log::info!("Lipschitz estimate of B on |b x tau| >= 0.1: {lip}");
        assert!(lip.is_finite() && lip < 100.0, "{lip}");
    }
}
