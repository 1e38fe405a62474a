use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::energy_force::tests::{circle, iso, random_network};
use crate::mobility::projector;

fn sim(model: MobilityModel) -> Simulation {
    Simulation::new(iso(1.0), model, LineQuadratureRule::default(), StepPolicy::default()).unwrap()
}

fn random_normal_field(s: &DislocationNetwork, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let mut out = Vec::new();
    for l in s.loops() {
        for t in l.tangents() {
            let w = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            out.push(projector(&t.tangent) * w);
        }
    }
    out
}

#[test]
fn zero_force_gives_zero_velocity() {
    let s = random_network(1);
    let (_, mut f) = variational_force(&s, &iso(1.0), &LineQuadratureRule::default()).unwrap();
    f.force.iter_mut().for_each(|x| *x = Vec3::zeros());
    let v = solve_velocity(&s, &f, &MobilityModel::isotropic(1.0, 1.0).unwrap()).unwrap();
    assert!(v.velocity.iter().all(|x| *x == Vec3::zeros()));
}

#[test]
fn velocity_satisfies_the_weak_form_and_is_normal() {
    let s = random_network(2);
    let (_, f) = variational_force(&s, &iso(1.0), &LineQuadratureRule::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for model in [
        MobilityModel::isotropic(0.7, 2.0).unwrap(),
        MobilityModel::bcc(1.0, 1.0, 10.0, 0.5).unwrap(),
    ] {
        let v = solve_velocity(&s, &f, &model).unwrap();
        for (vi, ti) in v.velocity.iter().zip(&v.tangents) {
            assert!(vi.dot(ti).abs() <= 1e-12 * v.max_norm());
        }
        let scale = f.max_norm() * f.lumped_length.iter().sum::<f64>();
        for _ in 0..100 {
            let w = random_normal_field(&s, &mut rng);
            let (a, d, fw) = weak_form_terms(&s, &f, &model, &v.velocity, &w).unwrap();
            assert!((a + d - fw).abs() <= 1e-9 * scale, "residual {}", a + d - fw);
        }
    }
}

#[test]
fn stiffer_line_tension_smooths_the_velocity() {
    let s = random_network(4);
    let (_, f) = variational_force(&s, &iso(1.0), &LineQuadratureRule::default()).unwrap();
    let mut last = f64::INFINITY;
    for alpha in [0.01, 0.1, 1.0, 10.0] {
        let v = solve_velocity(&s, &f, &MobilityModel::isotropic(alpha, 1.0).unwrap()).unwrap();
        let (grad_sup, _, _) = velocity_norms(&s, &v.velocity, &f.lumped_length);
        assert!(grad_sup < last);
        last = grad_sup;
    }
}

#[test]
fn energy_decrement_matches_dissipation_to_second_order() {
    let sim = sim(MobilityModel::isotropic(1.0, 1.0).unwrap());
    let s0 = random_network(6);
    let mut errs = Vec::new();
    for dt in [0.04, 0.02, 0.01] {
        let mut st = EvolutionState::new(s0.clone());
        sim.step(&mut st, Some(dt)).unwrap();
        let r = st.diagnostics[0];
        errs.push((r.energy_decrement + dt * r.dissipation).abs());
    }
    assert!(errs[0] / errs[1] > 3.0 && errs[1] / errs[2] > 3.0, "{errs:?}");
}

#[test]
fn shrinking_circle_loses_energy_and_length() {
    let mut sim = sim(MobilityModel::isotropic(1.0, 1.0).unwrap());
    sim.policy.max_steps = 20;
    let s0 = circle(1.0, 6.0, 48, [0, 0, 1]);
    let (st, why) = sim.run(s0, |_, _| Ok(())).unwrap();
    assert_eq!(why, Termination::MaxSteps);
    for r in &st.diagnostics {
        assert!(r.energy_decrement < 0.0);
        assert!(r.dissipation > 0.0);
    }
    assert!(st.mean_radius() < 6.0);
    assert!(st.trajectory.is_some() || st.events.iter().any(|e| matches!(e, Event::TrajectoryReset { .. })));
}

#[test]
fn empty_network_terminates_immediately() {
    let sim = sim(MobilityModel::isotropic(1.0, 1.0).unwrap());
    let s0 = circle(1.0, 6.0, 48, [0, 0, 1]).with_loops(vec![]).unwrap();
    let (st, why) = sim.run(s0, |_, _| Ok(())).unwrap();
    assert_eq!(why, Termination::Empty);
    assert!(st.diagnostics.is_empty());
}

#[test]
fn diagnostics_and_events_serialize() {
    let mut sim = sim(MobilityModel::isotropic(1.0, 1.0).unwrap());
    sim.policy.max_steps = 2;
    let (st, _) = sim.run(circle(1.0, 5.0, 40, [1, 0, 0]), |_, _| Ok(())).unwrap();
    let mut csv = Vec::new();
    write_diagnostics(&mut csv, &st.diagnostics).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + st.diagnostics.len());
    assert!(text.starts_with("step,t,dt,"));
    let mut jl = Vec::new();
    write_events(&mut jl, &st.events).unwrap();
    for line in String::from_utf8(jl).unwrap().lines() {
        let e: Event = serde_json::from_str(line).unwrap();
        assert!(st.events.contains(&e));
    }
    assert!(bound_monitor(&st.diagnostics).unwrap().max() > 0.0);
}

#[test]
fn shrinking_circle_trajectory_is_mesh_independent() {
    let sim = sim(MobilityModel::isotropic(1.0, 1.0).unwrap());
    let radii = |n: usize| {
        let mut out = Vec::new();
        let mut st = EvolutionState::new(circle(1.0, 10.0, n, [0, 0, 1]));
        while st.mean_radius() >= 3.0 {
            out.push((st.time, st.mean_radius()));
            sim.step(&mut st, Some(1.0)).unwrap();
        }
        out
    };
    let (coarse, fine) = (radii(64), radii(128));
    let n = coarse.len().min(fine.len());
    assert!(n > 100);
    for ((ta, ra), (tb, rb)) in coarse[..n].iter().zip(&fine[..n]) {
        assert_eq!(ta, tb);
        assert!((ra - rb).abs() < 0.01 * rb, "t = {ta}: {ra} vs {rb}");
    }
}
