//! Lower-bound estimator of the mass ratio `Θ(S) = sup M(S ∩ B_r(x)) / r`.

use rayon::prelude::*;

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};

use super::network::DislocationNetwork;

/// Maximizing ball of [`mass_ratio`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassRatioEstimate {
    pub theta: f64,
    pub center: Vec3,
    pub radius: f64,
}

/// Length of the part of segment `[p, q]` inside the closed ball `B_r(c)`.
pub fn clipped_length(p: &Vec3, q: &Vec3, c: &Vec3, r: f64) -> f64 {
    let d = q - p;
    let f = p - c;
    let a = d.dot(&d);
    let b = f.dot(&d);
    let disc = b * b - a * (f.dot(&f) - r * r);
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-b - sq) / a).max(0.0);
    let t1 = ((-b + sq) / a).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * a.sqrt()
    }
}

struct Segment {
    p: Vec3,
    q: Vec3,
    weight: f64,
}

/// `Θ̂`: maximum of `M(S ∩ B_r(x))/r` over centres at all nodes and segment
/// midpoints and radii at every centre–node distance plus `ε/2`.
pub fn mass_ratio(s: &DislocationNetwork) -> Result<MassRatioEstimate> {
    if s.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    let mut segments = Vec::new();
    let mut centers = Vec::new();
    for l in s.loops() {
        let w = l.burgers().norm();
        for k in 0..l.len() {
            let (p, q) = l.segment(k);
            segments.push(Segment { p, q, weight: w });
            centers.push(p);
            centers.push(0.5 * (p + q));
        }
    }
    let nodes = s.flat_nodes();
    let half_eps = 0.5 * s.epsilon();
    let best = centers
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut best = (f64::NEG_INFINITY, 0.0);
            let radii = nodes.iter().map(|x| (x - c).norm()).chain(std::iter::once(half_eps));
            for r in radii {
                if r <= 0.0 {
                    continue;
                }
                let m: f64 = segments.iter().map(|sg| sg.weight * clipped_length(&sg.p, &sg.q, c, r)).sum();
                let theta = m / r;
                if theta > best.0 {
                    best = (theta, r);
                }
            }
            (best.0, i, best.1)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, 0.0),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(MassRatioEstimate {
        theta: best.0,
        center: centers[best.1],
        radius: best.2,
    })
}
