//! Largest monitored bound ratios on shapes outside the calibration family.

use ddd_core::elasticity::{ElasticityTensor, Vec3};
use ddd_core::evolution::{bound_monitor, Simulation, StepPolicy};
use ddd_core::geometry::{regular_polygon, remesh, DislocationNetwork, Lattice, Loop};
use ddd_core::kernels::{KernelEvaluator, MollifierProfile};
use ddd_core::mobility::MobilityModel;
use ddd_core::quadrature::LineQuadratureRule;

fn main() -> ddd_core::Result<()> {
    let steps: usize = std::env::args().nth(1).map_or(10, |a| a.parse().expect("steps"));
    let ev = KernelEvaluator::with_default_order(ElasticityTensor::isotropic(1.0, 1.0)?, MollifierProfile::gaussian(1.0)?)?;
    let mut policy = StepPolicy::default();
    policy.max_steps = steps;
    let sim = Simulation::new(ev, MobilityModel::isotropic(1.0, 1.0)?, LineQuadratureRule::default(), policy)?;
    let lat = Lattice::simple_cubic();
    let b = lat.burgers([0, 0, 1])?;
    let tau = 2.0 * std::f64::consts::PI;

    let ellipse: Vec<Vec3> = (0..190)
        .map(|k| {
            let t = tau * k as f64 / 190.0;
            Vec3::new(20.0 * t.cos(), 10.0 * t.sin(), 0.0)
        })
        .collect();
    let square = vec![
        Vec3::new(-10.0, -10.0, 0.0),
        Vec3::new(10.0, -10.0, 0.0),
        Vec3::new(10.0, 10.0, 0.0),
        Vec3::new(-10.0, 10.0, 0.0),
    ];
    let pair = vec![
        Loop::new(regular_polygon(Vec3::new(-12.5, 0.0, 0.0), Vec3::x(), Vec3::y(), 10.0, 96), b)?,
        Loop::new(regular_polygon(Vec3::new(12.5, 0.0, 0.0), Vec3::x(), Vec3::y(), 10.0, 96), b)?,
    ];
    let cases = vec![
        ("ellipse", DislocationNetwork::new(lat.clone(), vec![Loop::new(ellipse, b)?], 1.0)?),
        ("square", remesh(&DislocationNetwork::new(lat.clone(), vec![Loop::new(square, b)?], 1.0)?, 0.3, 1.0)?.0),
        ("pair", DislocationNetwork::new(lat.clone(), pair, 1.0)?),
    ];
    for (name, s0) in cases {
        let (st, why) = sim.run(s0, |_, _| Ok(()))?;
        println!("{name}: {:?} {why:?}", bound_monitor(&st.diagnostics)?);
    }
    Ok(())
}
