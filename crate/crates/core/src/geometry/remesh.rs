//! Arc-length resampling of loops onto a segment-length band.

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};

use super::network::{DislocationNetwork, Loop};

/// Outcome of [`remesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct RemeshReport {
    /// Indices of loops that were resampled.
    pub remeshed_loops: Vec<usize>,
    pub mass_before: f64,
    pub mass_after: f64,
    /// Segments still outside `[h_min, h_max]` (corner chords).
    pub nonconforming_segments: usize,
}

impl RemeshReport {
    pub fn mass_change(&self) -> f64 {
        self.mass_after - self.mass_before
    }
}

fn conforming(l: &Loop, h_min: f64, h_max: f64) -> bool {
    l.segment_lengths().iter().all(|&h| h >= h_min && h <= h_max)
}

/// `n` points at equal arc length along the closed polyline, starting at
/// node 0.
pub fn resample_closed(nodes: &[Vec3], n: usize) -> Vec<Vec3> {
    let m = nodes.len();
    let lengths: Vec<f64> = (0..m).map(|k| (nodes[(k + 1) % m] - nodes[k]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    out.push(nodes[0]);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for i in 1..n {
        let target = step * i as f64;
        while seg + 1 < m && seg_start + lengths[seg] < target {
            seg_start += lengths[seg];
            seg += 1;
        }
        let t = ((target - seg_start) / lengths[seg]).clamp(0.0, 1.0);
        out.push(nodes[seg] + (nodes[(seg + 1) % m] - nodes[seg]) * t);
    }
    out
}

/// Drop nodes closer than `h_min` to their predecessor (corner chords).
fn merge_short(mut nodes: Vec<Vec3>, h_min: f64) -> Vec<Vec3> {
    let mut k = 0;
    while nodes.len() > 3 && k < nodes.len() {
        let n = nodes.len();
        if (nodes[(k + 1) % n] - nodes[k]).norm() < h_min {
            // keep node 0 fixed where possible
            let drop = if (k + 1) % n == 0 { k } else { (k + 1) % n };
            nodes.remove(drop);
        } else {
            k += 1;
        }
    }
    nodes
}

/// Resample every loop with a segment outside `[h_min, h_max]` at equal arc
/// length, aiming for spacing `(h_min + h_max)/2`. Conforming loops are left
/// untouched.
pub fn remesh(s: &DislocationNetwork, h_min: f64, h_max: f64) -> Result<(DislocationNetwork, RemeshReport)> {
    if !(h_min > 0.0 && h_min < h_max) {
        return Err(DddError::invalid("h_min, h_max", "require 0 < h_min < h_max"));
    }
    let target = 0.5 * (h_min + h_max);
    let mut loops = Vec::with_capacity(s.loops().len());
    let mut remeshed = Vec::new();
    for (i, l) in s.loops().iter().enumerate() {
        let length = l.length();
        if length < 3.0 * h_min {
            return Err(DddError::LoopTooShort {
                loop_index: i,
                length,
                minimum: 3.0 * h_min,
            });
        }
        if conforming(l, h_min, h_max) {
            loops.push(l.clone());
            continue;
        }
        let n = ((length / target).round() as usize).max(3);
        let nodes = merge_short(resample_closed(l.nodes(), n), h_min);
        loops.push(Loop::new(nodes, *l.burgers()).map_err(|e| match e {
            DddError::DegenerateSegment { segment, length, .. } => DddError::DegenerateSegment {
                loop_index: i,
                segment,
                length,
            },
            other => other,
        })?);
        remeshed.push(i);
    }
    let out = s.with_loops(loops)?;
    let nonconforming = out
        .loops()
        .iter()
        .flat_map(|l| l.segment_lengths())
        .filter(|&h| h < h_min || h > h_max)
        .count();
    let report = RemeshReport {
        remeshed_loops: remeshed,
        mass_before: s.mass(),
        mass_after: out.mass(),
        nonconforming_segments: nonconforming,
    };
    Ok((out, report))
}
