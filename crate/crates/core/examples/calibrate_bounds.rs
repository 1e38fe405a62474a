//! Measures the bound constants: the largest `lhs / rhs(C = 1)` over
//! shrinking prismatic circles with `R/ε ∈ {5, 10, 20, 40}`, isotropic(1,1),
//! isotropic drag. The hard-coded constants are twice these values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ddd_core::elasticity::{ElasticityTensor, Vec3};
use ddd_core::energy_force::continuity_check;
use ddd_core::evolution::monitor::unit_bounds;
use ddd_core::evolution::{BoundInputs, EvolutionState, Simulation, StepPolicy};
use ddd_core::geometry::{regular_polygon, DislocationNetwork, Lattice, Loop};
use ddd_core::kernels::{KernelEvaluator, MollifierProfile};
use ddd_core::mobility::MobilityModel;
use ddd_core::quadrature::LineQuadratureRule;

const STEPS: usize = 5;

fn main() -> ddd_core::Result<()> {
    let ev = KernelEvaluator::with_default_order(ElasticityTensor::isotropic(1.0, 1.0)?, MollifierProfile::gaussian(1.0)?)?;
    let model = MobilityModel::isotropic(1.0, 1.0)?;
    let rule = LineQuadratureRule::default();
    let sim = Simulation::new(ev.clone(), model, rule.clone(), StepPolicy::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let names = ["pk_linf", "pk_l2", "continuity", "ap_vel", "length_rate", "v_uniform", "dv_uniform"];
    let mut sup = [0.0f64; 7];
    for radius in [5.0, 10.0, 20.0, 40.0f64] {
        let n = (2.0 * std::f64::consts::PI * radius / 0.5).ceil() as usize;
        let lat = Lattice::simple_cubic();
        let l = Loop::new(regular_polygon(Vec3::zeros(), Vec3::x(), Vec3::y(), radius, n), lat.burgers([0, 0, 1])?)?;
        let mut st = EvolutionState::new(DislocationNetwork::new(lat, vec![l], 1.0)?);
        let mut local = [0.0f64; 7];
        for _ in 0..STEPS {
            let d = sim.evaluate(&mut st)?;
            let s = &st.network;
            let x = BoundInputs {
                epsilon: s.epsilon(),
                mass: s.mass(),
                theta: d.theta,
                b_max: s.max_burgers().unwrap_or(0.0),
                alpha: model.alpha,
                beta: model.beta(s.max_burgers().unwrap_or(0.0)),
                mass0: st.mass0,
                elapsed: st.time,
            };
            let u = unit_bounds(&x);
            let g: Vec<Vec3> = (0..s.node_count())
                .map(|_| {
                    let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    v * (1e-3 / v.norm())
                })
                .collect();
            let c = continuity_check(s, &g, &ev, &rule)?;
            // sufficient form lhs ≤ C M (‖∇g‖ + ‖g‖), dropping the bare ‖∇g‖ term
            let cont = c.lhs / (s.mass() * (c.grad_g + c.g));
            let vals = [
                d.force.max_norm() / u.pk_linf,
                d.force.l2_norm() / (u.pk_linf * s.mass().sqrt()),
                cont,
                d.norms.h1 / u.ap_vel,
                d.norms.grad_l1 / u.length_rate,
                d.norms.sup / u.v_uniform,
                d.norms.grad_sup / u.dv_uniform,
            ];
            for (a, v) in local.iter_mut().zip(vals) {
                *a = a.max(v);
            }
            sim.step(&mut st, None)?;
        }
        println!("R = {radius:>4}: {}", fmt(&names, &local));
        for (a, v) in sup.iter_mut().zip(local) {
            *a = a.max(v);
        }
    }
    println!("sup        {}", fmt(&names, &sup));
    println!("constants  {}", fmt(&names, &sup.map(|v| 2.0 * v)));
    Ok(())
}

fn fmt(names: &[&str], v: &[f64]) -> String {
    names.iter().zip(v).map(|(n, x)| format!("{n}={x:.4e}")).collect::<Vec<_>>().join(" ")
}
