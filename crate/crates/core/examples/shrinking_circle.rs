//! Shrinking prismatic circle until annihilation; prints one line per step.

use std::time::Instant;

use ddd_core::elasticity::{ElasticityTensor, Vec3};
use ddd_core::evolution::{Simulation, StepPolicy};
use ddd_core::geometry::{regular_polygon, DislocationNetwork, Lattice, Loop};
use ddd_core::kernels::{KernelEvaluator, MollifierProfile};
use ddd_core::mobility::MobilityModel;
use ddd_core::quadrature::LineQuadratureRule;

fn main() -> ddd_core::Result<()> {
    let radius: f64 = std::env::args().nth(1).map_or(10.0, |a| a.parse().expect("radius"));
    let n: usize = std::env::args().nth(2).map_or(128, |a| a.parse().expect("nodes"));
    let lat = Lattice::simple_cubic();
    let nodes = regular_polygon(Vec3::zeros(), Vec3::x(), Vec3::y(), radius, n);
    let l = Loop::new(nodes, lat.burgers([0, 0, 1])?)?;
    let s0 = DislocationNetwork::new(lat, vec![l], 1.0)?;
    let ev = KernelEvaluator::with_default_order(ElasticityTensor::isotropic(1.0, 1.0)?, MollifierProfile::gaussian(1.0)?)?;
    let sim = Simulation::new(ev, MobilityModel::isotropic(1.0, 1.0)?, LineQuadratureRule::default(), StepPolicy::default())?;
    let start = Instant::now();
    let (st, why) = sim.run(s0, |st, r| {
        println!(
            "{:4} t={:.4} dt={:.3e} n={} R={:.4} E={:.6} dE={:.3e} ratios={:.3}",
            r.step,
            r.t,
            r.dt,
            r.nodes,
            st.mean_radius(),
            r.energy,
            r.energy_decrement,
            r.ratios().max()
        );
        Ok(())
    })?;
    println!("{why:?} after {} steps, {:.1} s, {} events", st.step, start.elapsed().as_secs_f64(), st.events.len());
    Ok(())
}
