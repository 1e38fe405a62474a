//! Gauss–Legendre rules on intervals and a product rule on the unit sphere.

use std::f64::consts::PI;

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[0, 1]`, used along each polyline segment.
#[derive(Clone, Debug, PartialEq)]
pub struct LineQuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl LineQuadratureRule {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(DddError::invalid("line_order", "must be at least 1"));
        }
        let (x, w) = gauss_legendre(order);
        Ok(LineQuadratureRule {
            points: x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
            order,
        })
    }
}

impl Default for LineQuadratureRule {
    fn default() -> Self {
        LineQuadratureRule::new(4).expect("order 4 is valid")
    }
}

/// Default number of Gauss–Legendre nodes in `cos θ`.
pub const DEFAULT_SPHERE_ORDER: usize = 24;

/// Product rule on the unit sphere: Gauss–Legendre in `u = cos θ` (`order`
/// nodes) times the trapezoid rule in `φ` (`2·order` nodes). Only the
/// hemisphere `u > 0` is stored, with doubled weights; every integrand used
/// here is even under `z ↦ -z`, and the full rule is closed under that map.
#[derive(Clone, Debug)]
pub struct SphericalQuadrature {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    order: usize,
}

impl SphericalQuadrature {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || order % 2 != 0 {
            return Err(DddError::invalid(
                "sphere_order",
                format!("must be an even integer >= 2, got {order}"),
            ));
        }
        let (u, wu) = gauss_legendre(order);
        let n_phi = 2 * order;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(order * n_phi / 2);
        let mut weights = Vec::with_capacity(order * n_phi / 2);
        for (ui, wi) in u.iter().zip(&wu) {
            if *ui <= 0.0 {
                continue;
            }
            let r = (1.0 - ui * ui).sqrt();
            for j in 0..n_phi {
                let phi = j as f64 * dphi;
                nodes.push(Vec3::new(r * phi.cos(), r * phi.sin(), *ui));
                weights.push(2.0 * wi * dphi);
            }
        }
        Ok(SphericalQuadrature {
            nodes,
            weights,
            order,
        })
    }

    /// Hemisphere nodes (`z_3 > 0`).
    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    /// Hemisphere weights, already doubled; they sum to `4π`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate an even function over the whole sphere.
    pub fn integrate_even<F: Fn(&Vec3) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * f(z))
            .sum()
    }
}
