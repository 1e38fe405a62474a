//! Closed oriented polyline loops and networks of them.

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};

use super::lattice::{BurgersVector, Lattice};

/// Segments shorter than this are degenerate.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-12;

/// Closed polyline; segment `k` runs from node `k` to node `k+1 mod N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    nodes: Vec<Vec3>,
    burgers: BurgersVector,
}

/// Node tangent and whether it fell back to the hairpin rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeTangent {
    pub tangent: Vec3,
    pub hairpin: bool,
}

impl Loop {
    pub fn new(nodes: Vec<Vec3>, burgers: BurgersVector) -> Result<Self> {
        Self::validate(&nodes, 0)?;
        Ok(Loop { nodes, burgers })
    }

    fn validate(nodes: &[Vec3], loop_index: usize) -> Result<()> {
        if nodes.len() < 3 {
            return Err(DddError::InvalidLoop {
                loop_index,
                reason: format!("{} nodes, at least 3 required", nodes.len()),
            });
        }
        if nodes.iter().any(|x| !x.iter().all(|v| v.is_finite())) {
            return Err(DddError::InvalidLoop {
                loop_index,
                reason: "non-finite node coordinate".into(),
            });
        }
        let n = nodes.len();
        for k in 0..n {
            let length = (nodes[(k + 1) % n] - nodes[k]).norm();
            if length <= MIN_SEGMENT_LENGTH {
                return Err(DddError::DegenerateSegment {
                    loop_index,
                    segment: k,
                    length,
                });
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn burgers(&self) -> &BurgersVector {
        &self.burgers
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Segment `k` as `(start, end)`.
    pub fn segment(&self, k: usize) -> (Vec3, Vec3) {
        let n = self.nodes.len();
        (self.nodes[k], self.nodes[(k + 1) % n])
    }

    pub fn segment_vector(&self, k: usize) -> Vec3 {
        let (a, b) = self.segment(k);
        b - a
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.segment_vector(k).norm()).collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    pub fn centroid(&self) -> Vec3 {
        self.nodes.iter().sum::<Vec3>() / self.nodes.len() as f64
    }

    /// Same loop traversed backwards.
    pub fn reversed(&self) -> Loop {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Loop {
            nodes,
            burgers: self.burgers,
        }
    }

    /// Normalized sum of the adjacent unit segment tangents. At a hairpin
    /// (antiparallel neighbours) the outgoing segment tangent is used.
    pub fn tangents(&self) -> Vec<NodeTangent> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let t_in = self.segment_vector((k + n - 1) % n).normalize();
                let t_out = self.segment_vector(k).normalize();
                let sum = t_in + t_out;
                let norm = sum.norm();
                if norm <= 1e-8 {
                    NodeTangent {
                        tangent: t_out,
                        hairpin: true,
                    }
                } else {
                    NodeTangent {
                        tangent: sum / norm,
                        hairpin: false,
                    }
                }
            })
            .collect()
    }

    /// Half the sum of the two adjacent segment lengths.
    pub fn lumped_lengths(&self) -> Vec<f64> {
        let l = self.segment_lengths();
        let n = l.len();
        (0..n).map(|k| 0.5 * (l[k] + l[(k + n - 1) % n])).collect()
    }
}

/// Finite union of closed loops on a common lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct DislocationNetwork {
    lattice: Lattice,
    loops: Vec<Loop>,
    epsilon: f64,
}

impl DislocationNetwork {
    pub fn new(lattice: Lattice, loops: Vec<Loop>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(DddError::invalid("epsilon", "must be positive and finite"));
        }
        for (i, l) in loops.iter().enumerate() {
            Loop::validate(&l.nodes, i)?;
        }
        Ok(DislocationNetwork { lattice, loops, epsilon })
    }

    pub fn empty(lattice: Lattice, epsilon: f64) -> Result<Self> {
        Self::new(lattice, Vec::new(), epsilon)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.loops.iter().map(Loop::len).sum()
    }

    /// Offset of each loop's first node in the flattened node list.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.loops
            .iter()
            .map(|l| {
                let o = acc;
                acc += l.len();
                o
            })
            .collect()
    }

    /// All nodes, loop by loop.
    pub fn flat_nodes(&self) -> Vec<Vec3> {
        self.loops.iter().flat_map(|l| l.nodes.iter().copied()).collect()
    }

    pub fn with_loops(&self, loops: Vec<Loop>) -> Result<Self> {
        Self::new(self.lattice.clone(), loops, self.epsilon)
    }

    /// Union of two networks on the same lattice, keeping this `ε`.
    pub fn union(&self, other: &DislocationNetwork) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(DddError::invalid("lattice", "networks use different lattices"));
        }
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().cloned());
        self.with_loops(loops)
    }

    /// `(loop, segment)` pairs longer than `ε`, where the quadrature
    /// under-resolves the kernel.
    pub fn resolution_flags(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, l) in self.loops.iter().enumerate() {
            for (k, len) in l.segment_lengths().into_iter().enumerate() {
                if len > self.epsilon {
                    out.push((i, k));
                }
            }
        }
        out
    }

    /// Total `|b|`-weighted length.
    pub fn mass(&self) -> f64 {
        self.loops.iter().map(|l| l.burgers.norm() * l.length()).sum()
    }

    /// Smallest Burgers vector length over the loops.
    pub fn min_burgers(&self) -> Option<f64> {
        self.loops.iter().map(|l| l.burgers.norm()).reduce(f64::min)
    }

    pub fn max_burgers(&self) -> Option<f64> {
        self.loops.iter().map(|l| l.burgers.norm()).reduce(f64::max)
    }

    /// Move node `i` (flattened order) by `displacement[i]`.
    pub fn pushforward(&self, displacement: &[Vec3]) -> Result<Self> {
        if displacement.len() != self.node_count() {
            return Err(DddError::invalid(
                "displacement",
                format!("{} vectors for {} nodes", displacement.len(), self.node_count()),
            ));
        }
        let mut it = displacement.iter();
        let loops = self
            .loops
            .iter()
            .map(|l| Loop {
                nodes: l.nodes.iter().map(|x| x + it.next().expect("length checked")).collect(),
                burgers: l.burgers,
            })
            .collect();
        self.with_loops(loops)
    }

    /// Rigid motion `x -> Q x + c` of every node, with `b` left unchanged.
    pub fn map_nodes<F: Fn(&Vec3) -> Vec3>(&self, f: F) -> Result<Self> {
        let loops = self
            .loops
            .iter()
            .map(|l| Loop {
                nodes: l.nodes.iter().map(&f).collect(),
                burgers: l.burgers,
            })
            .collect();
        self.with_loops(loops)
    }
}

/// Regular `n`-gon of radius `radius` in the plane through `center`
/// spanned by orthonormal `e1`, `e2`, counterclockwise about `e1 × e2`.
pub fn regular_polygon(center: Vec3, e1: Vec3, e2: Vec3, radius: f64, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            center + e1 * (radius * t.cos()) + e2 * (radius * t.sin())
        })
        .collect()
}
