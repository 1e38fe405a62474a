//! Self-check: a fast version of every invariant suite, reported as a
//! pass/fail table. Runs on isotropic(1,1) at `ε = 1`; the sphere order and
//! `N_φ` can be overridden to confirm that the suites detect a degraded
//! kernel.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elasticity::{ElasticityTensor, Vec3};
use crate::energy_force::{energy_and_gradient, energy_line, energy_surface, variational_force, SurfaceOptions};
use crate::error::Result;
use crate::evolution::{solve_velocity, weak_form_terms, EvolutionState, Simulation, StepPolicy};
use crate::geometry::{make_cone_surface, make_planar_surface, mass_ratio, regular_polygon, DislocationNetwork, Lattice, Loop};
use crate::kernels::decay::decay_bound_scan;
use crate::kernels::oracle::eval_K_direct;
use crate::kernels::{KernelEvaluator, MollifierProfile, GAUSSIAN_NORMALIZATION};
use crate::mobility::{projector, MobilityModel};
use crate::quadrature::{LineQuadratureRule, DEFAULT_SPHERE_ORDER};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub sphere_order: usize,
    pub normalization: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            sphere_order: DEFAULT_SPHERE_ORDER,
            normalization: GAUSSIAN_NORMALIZATION,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub suites: Vec<SuiteResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<26} {:<6} {:>8}  detail", "suite", "result", "time/s")?;
        for s in &self.suites {
            let r = if s.passed { "pass" } else { "FAIL" };
            writeln!(f, "{:<26} {:<6} {:>8.2}  {}", s.name, r, s.seconds, s.detail)?;
        }
        Ok(())
    }
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn random_vec(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    v.normalize() * rng.gen_range(lo..hi)
}

fn circle(radius: f64, n: usize, b: [i64; 3]) -> Result<DislocationNetwork> {
    let lat = Lattice::simple_cubic();
    let l = Loop::new(regular_polygon(Vec3::zeros(), Vec3::x(), Vec3::y(), radius, n), lat.burgers(b)?)?;
    DislocationNetwork::new(lat, vec![l], 1.0)
}

fn wobbly_network(rng: &mut ChaCha8Rng) -> Result<DislocationNetwork> {
    let lat = Lattice::simple_cubic();
    let bs = [[1, 0, 0], [0, 1, 1]];
    let mut loops = Vec::new();
    for (i, b) in bs.iter().enumerate() {
        let c = Vec3::new(3.0 * i as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = 24;
        let nodes = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                let r = 2.0 + rng.gen_range(-0.2..0.2);
                c + Vec3::new(r * t.cos(), r * t.sin(), rng.gen_range(-0.3..0.3))
            })
            .collect();
        loops.push(Loop::new(nodes, lat.burgers(*b)?)?);
    }
    DislocationNetwork::new(lat, loops, 1.0)
}

type Outcome = Result<(bool, String)>;

fn kernel_symmetry(ev: &KernelEvaluator, rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = random_vec(rng, 0.0, 100.0);
        for (t, tm) in [(ev.eval_K(&s), ev.eval_K(&-s)), (ev.eval_J(&s), ev.eval_J(&-s))] {
            let scale = t.max_abs();
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        for d in 0..3 {
                            let x = t.get(a, b, c, d);
                            worst = worst.max((x - t.get(c, d, a, b)).abs() / scale);
                            worst = worst.max((x - tm.get(a, b, c, d)).abs() / scale);
                        }
                    }
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("max asymmetry {worst:.2e}")))
}

fn kernel_self_convergence(ev: &KernelEvaluator, rng: &mut ChaCha8Rng) -> Outcome {
    let fine = KernelEvaluator::new(ev.elasticity().clone(), *ev.profile(), 2 * ev.order())?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let s = random_vec(rng, 0.5, 20.0);
        worst = worst.max(rel(&ev.eval_K(&s).0, &fine.eval_K(&s).0));
    }
    Ok((worst < 1e-9, format!("order {} vs {}: {worst:.2e}", ev.order(), 2 * ev.order())))
}

fn oracle_equivalence(ev: &KernelEvaluator, rng: &mut ChaCha8Rng) -> Outcome {
    let exact = MollifierProfile::gaussian(ev.epsilon())?;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let s = random_vec(rng, 0.2, 4.0);
        let d = eval_K_direct(ev.elasticity(), &exact, &s)?;
        worst = worst.max(rel(&ev.eval_K(&s).0, &d.0));
    }
    Ok((worst < 1e-6, format!("max relative difference {worst:.2e}")))
}

fn decay_scaling(ev: &KernelEvaluator, seed: u64) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (m, j) in [(0, 0), (1, 0), (1, 1), (2, 0)] {
        let r = decay_bound_scan(ev, m, j, seed)?;
        ok &= r.passes();
        detail.push(format!("({m},{j}) slope {:.3}", r.max_slope));
    }
    Ok((ok, detail.join(", ")))
}

fn surface_independence(ev: &KernelEvaluator) -> Outcome {
    let s = circle(4.0, 32, [1, 0, 1])?;
    let l = &s.loops()[0];
    let line = energy_line(&s, ev, &LineQuadratureRule::new(2)?)?.total;
    let o = SurfaceOptions {
        subdivision: Some(1.0),
        ..Default::default()
    };
    let flat = energy_surface(&[make_planar_surface(l, 0)?], ev, &o)?;
    let cone = energy_surface(&[make_cone_surface(l, 0, Vec3::new(0.0, 0.0, 2.0))?], ev, &o)?;
    let d = ((flat - line).abs()).max((cone - line).abs()) / line.abs();
    Ok((d < 1e-2, format!("line {line:.6}, disk {flat:.6}, cone {cone:.6}")))
}

fn force_gradient(ev: &KernelEvaluator, rng: &mut ChaCha8Rng) -> Outcome {
    let s = wobbly_network(rng)?;
    let rule = LineQuadratureRule::default();
    let (_, grad) = energy_and_gradient(&s, ev, &rule)?;
    let h = 1e-6;
    let n = s.node_count();
    let scale = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in (0..n).step_by(3) {
        for d in 0..3 {
            let mut disp = vec![Vec3::zeros(); n];
            disp[i][d] = h;
            let ep = energy_line(&s.pushforward(&disp)?, ev, &rule)?.total;
            disp[i][d] = -h;
            let em = energy_line(&s.pushforward(&disp)?, ev, &rule)?.total;
            worst = worst.max(((ep - em) / (2.0 * h) - grad[i][d]).abs() / scale);
        }
    }
    Ok((worst < 1e-5, format!("max relative error {worst:.2e}")))
}

fn velocity_solve(ev: &KernelEvaluator, rng: &mut ChaCha8Rng) -> Outcome {
    let s = wobbly_network(rng)?;
    let (_, mut f) = variational_force(&s, ev, &LineQuadratureRule::default())?;
    let model = MobilityModel::bcc(1.0, 1.0, 10.0, 0.5)?;
    let v = solve_velocity(&s, &f, &model)?;
    let vmax = v.max_norm().max(1.0);
    let constraint = v.velocity.iter().zip(&v.tangents).map(|(a, t)| a.dot(t).abs()).fold(0.0, f64::max) / vmax;
    let scale = f.max_norm() * f.lumped_length.iter().sum::<f64>();
    let mut residual = 0.0f64;
    let tangents: Vec<Vec3> = s.loops().iter().flat_map(|l| l.tangents()).map(|t| t.tangent).collect();
    for _ in 0..20 {
        let w: Vec<Vec3> = tangents.iter().map(|t| projector(t) * random_vec(rng, 0.0, 1.0)).collect();
        let (a, d, fw) = weak_form_terms(&s, &f, &model, &v.velocity, &w)?;
        residual = residual.max((a + d - fw).abs() / scale);
    }
    f.force.iter_mut().for_each(|x| *x = Vec3::zeros());
    let zero = solve_velocity(&s, &f, &model)?.velocity.iter().all(|x| *x == Vec3::zeros());
    Ok((
        residual < 1e-9 && constraint < 1e-12 && zero,
        format!("residual {residual:.2e}, |v.t| {constraint:.2e}, zero force -> zero velocity: {zero}"),
    ))
}

fn mass_ratio_suite(rng: &mut ChaCha8Rng) -> Outcome {
    let n = 256;
    let s = circle(5.0, n, [0, 0, 1])?;
    let theta = mass_ratio(&s)?.theta;
    // exact value for the regular polygon: the ball centred at a segment
    // midpoint that reaches the far nodes
    let x = std::f64::consts::PI / n as f64;
    let polygon = 2.0 * n as f64 * x.sin() / (4.0 - 3.0 * x.sin().powi(2)).sqrt();
    let lower = mass_ratio(&wobbly_network(rng)?)?.theta;
    Ok((
        theta >= 0.99 * std::f64::consts::PI && (theta - polygon).abs() < 1e-9 * polygon && lower >= 1.0 - 1e-6,
        format!("256-gon {theta:.8} (polygon value {polygon:.8}), wobbly network {lower:.4}"),
    ))
}

fn dissipation(ev: &KernelEvaluator) -> Outcome {
    let mut policy = StepPolicy::default();
    policy.h_max = 2.0;
    let sim = Simulation::new(ev.clone(), MobilityModel::isotropic(1.0, 1.0)?, LineQuadratureRule::default(), policy)?;
    let s0 = circle(5.0, 32, [0, 0, 1])?;
    let mut errs = Vec::new();
    for dt in [0.4, 0.2, 0.1] {
        let mut st = EvolutionState::new(s0.clone());
        sim.step(&mut st, Some(dt))?;
        let r = st.diagnostics[0];
        errs.push((r.energy_decrement + dt * r.dissipation).abs());
    }
    let order = (errs[1] / errs[2]).log2();
    Ok((order >= 1.9, format!("decrement discrepancy order {order:.3}")))
}

/// Run every suite; failures and errors become report rows.
pub fn run_checks(opts: &CheckOptions) -> CheckReport {
    let ev = MollifierProfile::with_normalization(1.0, opts.normalization)
        .and_then(|p| KernelEvaluator::new(ElasticityTensor::isotropic(1.0, 1.0)?, p, opts.sphere_order));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut suites = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut(&KernelEvaluator, &mut ChaCha8Rng) -> Outcome| {
        let start = Instant::now();
        let out = match &ev {
            Ok(ev) => f(ev, &mut rng),
            Err(e) => Ok((false, format!("kernel setup failed: {e}"))),
        };
        let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        suites.push(SuiteResult {
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    };
    run("kernel symmetry", &mut |ev, rng| kernel_symmetry(ev, rng));
    run("kernel self-convergence", &mut |ev, rng| kernel_self_convergence(ev, rng));
    run("oracle equivalence", &mut |ev, rng| oracle_equivalence(ev, rng));
    run("decay scaling", &mut |ev, _| decay_scaling(ev, opts.seed));
    run("surface independence", &mut |ev, _| surface_independence(ev));
    run("force = -gradient", &mut |ev, rng| force_gradient(ev, rng));
    run("velocity solve", &mut |ev, rng| velocity_solve(ev, rng));
    run("mass ratio", &mut |_, rng| mass_ratio_suite(rng));
    run("gradient-flow dissipation", &mut |ev, _| dissipation(ev));
    CheckReport { suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degraded_kernels_are_detected() {
        let r = run_checks(&CheckOptions {
            sphere_order: 4,
            ..Default::default()
        });
        let get = |r: &CheckReport, n: &str| r.suites.iter().find(|s| s.name == n).unwrap().passed;
        assert!(!get(&r, "kernel self-convergence"), "{r}");
        let r = run_checks(&CheckOptions {
            normalization: 1.1 * GAUSSIAN_NORMALIZATION,
            ..Default::default()
        });
        assert!(!get(&r, "oracle equivalence"), "{r}");
    }
}
