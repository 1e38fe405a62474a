//! Triangulated slip surfaces spanning a loop.

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};

use super::lattice::BurgersVector;
use super::network::Loop;

/// Oriented triangle; the normal follows `(v1 - v0) × (v2 - v0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub vertices: [Vec3; 3],
    pub normal: Vec3,
    pub area: f64,
}

impl Triangle {
    pub fn new(vertices: [Vec3; 3]) -> Result<Self> {
        let n = (vertices[1] - vertices[0]).cross(&(vertices[2] - vertices[0]));
        let twice = n.norm();
        let scale = (vertices[1] - vertices[0]).norm().max((vertices[2] - vertices[0]).norm());
        if twice <= 1e-14 * scale * scale || twice == 0.0 {
            return Err(DddError::Surface("degenerate triangle".into()));
        }
        Ok(Triangle {
            vertices,
            normal: n / twice,
            area: 0.5 * twice,
        })
    }

    pub fn centroid(&self) -> Vec3 {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }

    /// Split into triangles with edges at most about `h`: strips parallel to
    /// the shortest edge, each cut into cells of width at most `h`. Suits the
    /// long thin triangles of fan triangulations.
    pub fn subdivide(&self, h: f64) -> Vec<Triangle> {
        let v = self.vertices;
        let edge = |i: usize| (v[(i + 2) % 3] - v[(i + 1) % 3]).norm();
        // apex opposite the shortest edge, keeping the cyclic order
        let apex = (0..3).min_by(|&a, &b| edge(a).total_cmp(&edge(b))).expect("three edges");
        let (p, b0, b1) = (v[apex], v[(apex + 1) % 3], v[(apex + 2) % 3]);
        let strips = (((b0 - p).norm().max((b1 - p).norm())) / h).ceil().max(1.0) as usize;
        let at = |t: f64| (p + (b0 - p) * t, p + (b1 - p) * t);
        let mut out = Vec::new();
        for i in 0..strips {
            let (t0, t1) = (i as f64 / strips as f64, (i + 1) as f64 / strips as f64);
            let (l0, r0) = at(t0);
            let (l1, r1) = at(t1);
            let cells = ((r1 - l1).norm() / h).ceil().max(1.0) as usize;
            let top = |j: usize| l0 + (r0 - l0) * (j as f64 / cells as f64);
            let bot = |j: usize| l1 + (r1 - l1) * (j as f64 / cells as f64);
            for j in 0..cells {
                let tri = [
                    [top(j), bot(j), bot(j + 1)],
                    [top(j), bot(j + 1), top(j + 1)],
                ];
                for (k, verts) in tri.into_iter().enumerate() {
                    if i == 0 && k == 1 {
                        continue; // the top edge of the first strip is the apex
                    }
                    let twice = (verts[1] - verts[0]).cross(&(verts[2] - verts[0])).norm();
                    if twice > 0.0 {
                        out.push(Triangle {
                            vertices: verts,
                            normal: self.normal,
                            area: 0.5 * twice,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Symmetric quadrature rule on a triangle, in barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TriangleRule {
    Centroid,
    #[default]
    ThreePoint,
    SixPoint,
}

impl TriangleRule {
    /// `(barycentric, weight)` with weights summing to 1.
    pub fn points(&self) -> Vec<([f64; 3], f64)> {
        match self {
            TriangleRule::Centroid => vec![([1.0 / 3.0; 3], 1.0)],
            TriangleRule::ThreePoint => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)]
            }
            TriangleRule::SixPoint => {
                let (a1, b1, w1) = (0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322);
                let (a2, b2, w2) = (0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011);
                vec![
                    ([a1, b1, b1], w1),
                    ([b1, a1, b1], w1),
                    ([b1, b1, a1], w1),
                    ([a2, b2, b2], w2),
                    ([b2, a2, b2], w2),
                    ([b2, b2, a2], w2),
                ]
            }
        }
    }

    pub fn order(&self) -> usize {
        match self {
            TriangleRule::Centroid => 1,
            TriangleRule::ThreePoint => 3,
            TriangleRule::SixPoint => 6,
        }
    }

    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(TriangleRule::Centroid),
            3 => Ok(TriangleRule::ThreePoint),
            6 => Ok(TriangleRule::SixPoint),
            _ => Err(DddError::invalid("surface_order", "must be 1, 3 or 6")),
        }
    }
}

/// Triangulated surface whose oriented boundary is one loop.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanningSurface {
    pub triangles: Vec<Triangle>,
    pub slip: BurgersVector,
    pub boundary_loop_index: usize,
}

impl SpanningSurface {
    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Vector area `Σ A ν`, which depends only on the boundary.
    pub fn vector_area(&self) -> Vec3 {
        self.triangles.iter().map(|t| t.normal * t.area).sum()
    }

    /// Same surface with every triangle split to size about `h`.
    pub fn refined(&self, h: f64) -> SpanningSurface {
        SpanningSurface {
            triangles: self.triangles.iter().flat_map(|t| t.subdivide(h)).collect(),
            slip: self.slip,
            boundary_loop_index: self.boundary_loop_index,
        }
    }

    /// Quadrature points and weights (area included) over the surface,
    /// paired with the unit normal of their triangle.
    pub fn quadrature(&self, rule: TriangleRule) -> Vec<(Vec3, f64, Vec3)> {
        let pts = rule.points();
        let mut out = Vec::with_capacity(self.triangles.len() * pts.len());
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            for (l, w) in &pts {
                out.push((a * l[0] + b * l[1] + c * l[2], w * t.area, t.normal));
            }
        }
        out
    }

    /// Boundary edges with multiplicity: interior edges cancel, leaving the
    /// oriented boundary. Vertices are compared exactly.
    pub fn boundary_edges(&self) -> Vec<(Vec3, Vec3)> {
        let mut edges: Vec<(Vec3, Vec3, i32)> = Vec::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = (t.vertices[i], t.vertices[(i + 1) % 3]);
                if let Some(e) = edges.iter_mut().find(|e| e.0 == b && e.1 == a) {
                    e.2 -= 1;
                } else if let Some(e) = edges.iter_mut().find(|e| e.0 == a && e.1 == b) {
                    e.2 += 1;
                } else {
                    edges.push((a, b, 1));
                }
            }
        }
        let mut out = Vec::new();
        for (a, b, m) in edges {
            for _ in 0..m.max(0) {
                out.push((a, b));
            }
            for _ in 0..(-m).max(0) {
                out.push((b, a));
            }
        }
        out
    }
}

/// Fan triangulation of a loop about `apex`.
pub fn make_cone_surface(l: &Loop, loop_index: usize, apex: Vec3) -> Result<SpanningSurface> {
    let scale = l.length();
    if l.nodes().iter().any(|x| (x - apex).norm() <= 1e-12 * scale.max(1.0)) {
        return Err(DddError::Surface("apex coincides with a loop node".into()));
    }
    let n = l.len();
    let triangles = (0..n)
        .map(|k| Triangle::new([apex, l.nodes()[k], l.nodes()[(k + 1) % n]]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpanningSurface {
        triangles,
        slip: *l.burgers(),
        boundary_loop_index: loop_index,
    })
}

/// Fan triangulation about the node centroid, for a planar loop that is
/// star-shaped about it.
pub fn make_planar_surface(l: &Loop, loop_index: usize) -> Result<SpanningSurface> {
    let c = l.centroid();
    let n = l.len();
    let nodes = l.nodes();
    let mut va = Vec3::zeros();
    for k in 0..n {
        va += (nodes[k] - c).cross(&(nodes[(k + 1) % n] - c));
    }
    let norm = va.norm();
    if norm == 0.0 {
        return Err(DddError::Surface("loop encloses no area".into()));
    }
    let normal = va / norm;
    let size = nodes.iter().map(|x| (x - c).norm()).fold(0.0, f64::max);
    if nodes.iter().any(|x| (x - c).dot(&normal).abs() > 1e-8 * size.max(1.0)) {
        return Err(DddError::Surface("loop is not planar".into()));
    }
    for k in 0..n {
        if (nodes[k] - c).cross(&(nodes[(k + 1) % n] - c)).dot(&normal) <= 0.0 {
            return Err(DddError::Surface("loop is not star-shaped about its centroid".into()));
        }
    }
    make_cone_surface(l, loop_index, c)
}
