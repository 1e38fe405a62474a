//! Crystal lattices and lattice-valued Burgers vectors.

use crate::elasticity::{Mat3, Vec3};
use crate::error::{DddError, Result};

/// Tolerance on the unit length of the shortest lattice vector.
const NORMALIZATION_TOL: f64 = 1e-10;

/// Bravais lattice with basis columns, rescaled so that the shortest nonzero
/// lattice vector has unit length.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: Mat3,
}

impl Lattice {
    /// Build from primitive vectors (the columns of `B`). The basis is
    /// rescaled unless the shortest vector already has unit length.
    pub fn new(basis: Mat3) -> Result<Self> {
        if !basis.iter().all(|v| v.is_finite()) {
            return Err(DddError::invalid("lattice", "entries must be finite"));
        }
        let det = basis.determinant();
        let scale = basis.abs().max();
        if scale == 0.0 || det.abs() <= 1e-12 * scale.powi(3) {
            return Err(DddError::invalid("lattice", "basis is singular"));
        }
        let (shortest, _) = shortest_vector(&basis);
        let basis = if (shortest - 1.0).abs() > NORMALIZATION_TOL {
            basis / shortest
        } else {
            basis
        };
        Ok(Lattice { basis })
    }

    /// Simple cubic lattice with unit spacing.
    pub fn simple_cubic() -> Self {
        Lattice { basis: Mat3::identity() }
    }

    /// Body-centred cubic lattice with primitive vectors along `½⟨111⟩`,
    /// which become the unit-length Burgers vectors.
    pub fn bcc() -> Self {
        let cols = [
            Vec3::new(-1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
            Vec3::new(1.0, 1.0, -1.0),
        ];
        let basis = Mat3::from_columns(&cols) / 3f64.sqrt();
        Lattice { basis }
    }

    pub fn basis(&self) -> &Mat3 {
        &self.basis
    }

    /// Primitive vectors as rows, the order used in the network file.
    pub fn rows(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (j, row) in out.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = self.basis[(i, j)];
            }
        }
        out
    }

    pub fn from_rows(rows: &[[f64; 3]; 3]) -> Result<Self> {
        let cols: Vec<Vec3> = rows.iter().map(|r| Vec3::new(r[0], r[1], r[2])).collect();
        Lattice::new(Mat3::from_columns(&cols))
    }

    pub fn burgers(&self, coords: [i64; 3]) -> Result<BurgersVector> {
        if coords == [0, 0, 0] {
            return Err(DddError::invalid("burgers", "must be a nonzero lattice vector"));
        }
        let n = Vec3::new(coords[0] as f64, coords[1] as f64, coords[2] as f64);
        Ok(BurgersVector {
            lattice_coords: coords,
            cartesian: self.basis * n,
        })
    }
}

/// Length of the shortest nonzero vector of the lattice spanned by the
/// columns of `basis`, and its integer coordinates.
///
/// Any vector of length at most `ℓ` has coordinates `|n_i| <= ℓ |row_i(B⁻¹)|`,
/// so enumerating that box with `ℓ` the shortest column is exhaustive.
pub fn shortest_vector(basis: &Mat3) -> (f64, [i64; 3]) {
    let inv = basis.try_inverse().expect("nonsingular basis");
    let mut best = f64::INFINITY;
    let mut arg = [0; 3];
    for j in 0..3 {
        let len = basis.column(j).norm();
        if len < best {
            best = len;
            arg = [0; 3];
            arg[j] = 1;
        }
    }
    let bound: Vec<i64> = (0..3)
        .map(|i| (best * inv.row(i).norm() + 1e-9).floor() as i64)
        .collect();
    for a in -bound[0]..=bound[0] {
        for b in -bound[1]..=bound[1] {
            for c in -bound[2]..=bound[2] {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let len = (basis * Vec3::new(a as f64, b as f64, c as f64)).norm();
                if len < best * (1.0 - 1e-14) {
                    best = len;
                    arg = [a, b, c];
                }
            }
        }
    }
    (best, arg)
}

/// Lattice vector carried by a loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersVector {
    pub lattice_coords: [i64; 3],
    pub cartesian: Vec3,
}

impl BurgersVector {
    pub fn norm(&self) -> f64 {
        self.cartesian.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescales_to_unit_shortest_vector() {
        let l = Lattice::new(Mat3::from_diagonal(&Vec3::new(2.0, 3.0, 5.0))).unwrap();
        assert!((l.basis()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((l.basis()[(1, 1)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn finds_non_basis_shortest_vector() {
        // columns (1,0,0) and (0.9,0.1,0): their difference is shorter
        let b = Mat3::from_columns(&[Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.9, 0.1, 0.0), Vec3::new(0.0, 0.0, 3.0)]);
        let (len, n) = shortest_vector(&b);
        assert!((len - (0.01f64 + 0.01).sqrt()).abs() < 1e-14);
        assert_eq!(n[2], 0);
        let l = Lattice::new(b).unwrap();
        assert!((shortest_vector(l.basis()).0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bcc_burgers_vectors_are_unit() {
        let l = Lattice::bcc();
        assert!((shortest_vector(l.basis()).0 - 1.0).abs() < 1e-12);
        let b = l.burgers([1, 0, 0]).unwrap();
        assert!((b.norm() - 1.0).abs() < 1e-15);
        // b1 + b2 = (0,0,1)·2/√3, the cube edge
        let e = l.burgers([1, 1, 0]).unwrap();
        assert!((e.norm() - 2.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_singular_basis_and_zero_burgers() {
        let b = Mat3::from_columns(&[Vec3::x(), Vec3::y(), Vec3::x() + Vec3::y()]);
        assert!(Lattice::new(b).is_err());
        assert!(Lattice::simple_cubic().burgers([0, 0, 0]).is_err());
    }

    #[test]
    fn rows_round_trip() {
        let l = Lattice::bcc();
        assert_eq!(Lattice::from_rows(&l.rows()).unwrap(), l);
    }
}
