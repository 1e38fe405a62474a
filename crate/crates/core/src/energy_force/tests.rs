use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::elasticity::ElasticityTensor;
use crate::geometry::{make_cone_surface, make_planar_surface, regular_polygon, Lattice, Loop};
use crate::kernels::MollifierProfile;

pub(crate) fn iso(eps: f64) -> KernelEvaluator {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    KernelEvaluator::with_default_order(c, MollifierProfile::gaussian(eps).unwrap()).unwrap()
}

pub(crate) fn circle(eps: f64, radius: f64, n: usize, b: [i64; 3]) -> DislocationNetwork {
    let lat = Lattice::simple_cubic();
    let nodes = regular_polygon(Vec3::zeros(), Vec3::x(), Vec3::y(), radius, n);
    let l = Loop::new(nodes, lat.burgers(b).unwrap()).unwrap();
    DislocationNetwork::new(lat, vec![l], eps).unwrap()
}

/// Three wobbly loops of radius about 2, at ε = 1.
pub(crate) fn random_network(seed: u64) -> DislocationNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat = Lattice::simple_cubic();
    let bs = [[1, 0, 0], [0, 1, 1], [1, -1, 0]];
    let loops = (0..3)
        .map(|i| {
            let c = Vec3::new(3.0 * i as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = 12;
            let nodes = (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    let r = 2.0 + rng.gen_range(-0.2..0.2);
                    c + Vec3::new(r * t.cos(), r * t.sin(), rng.gen_range(-0.3..0.3))
                })
                .collect();
            Loop::new(nodes, lat.burgers(bs[i]).unwrap()).unwrap()
        })
        .collect();
    DislocationNetwork::new(lat, loops, 1.0).unwrap()
}

fn max_rel(a: &[Vec3], b: &[Vec3]) -> f64 {
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn gradient_matches_central_differences() {
    let s = random_network(3);
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let (_, grad) = energy_and_gradient(&s, &ev, &rule).unwrap();
    let h = 1e-6;
    let n = s.node_count();
    let mut fd = vec![Vec3::zeros(); n];
    for i in 0..n {
        for d in 0..3 {
            let mut disp = vec![Vec3::zeros(); n];
            disp[i][d] = h;
            let ep = energy_line(&s.pushforward(&disp).unwrap(), &ev, &rule).unwrap().total;
            disp[i][d] = -h;
            let em = energy_line(&s.pushforward(&disp).unwrap(), &ev, &rule).unwrap().total;
            fd[i][d] = (ep - em) / (2.0 * h);
        }
    }
    let err = max_rel(&grad, &fd);
    assert!(err < 1e-5, "relative error {err:e}");
}

#[test]
fn energy_is_translation_invariant_and_gradient_sums_to_zero() {
    let s = random_network(5);
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let (e0, grad) = energy_and_gradient(&s, &ev, &rule).unwrap();
    let shifted = s.map_nodes(|x| x + Vec3::new(3.7, -11.2, 0.45)).unwrap();
    let e1 = energy_line(&shifted, &ev, &rule).unwrap();
    assert!((e0.total - e1.total).abs() < 1e-12 * e0.total.abs());
    let sum: Vec3 = grad.iter().sum();
    let scale = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
    assert!(sum.norm() < 1e-10 * scale, "{}", sum.norm());
}

#[test]
fn breakdown_is_symmetric_and_sums_to_total() {
    let s = random_network(7);
    let e = energy_line(&s, &iso(1.0), &LineQuadratureRule::default()).unwrap();
    let n = e.pairs.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            assert!((e.pairs[i][j] - e.pairs[j][i]).abs() <= 1e-12 * e.pairs[i][j].abs());
            sum += e.pairs[i][j];
        }
        assert!(e.pairs[i][i] > 0.0);
    }
    assert_eq!(sum, e.total);
}

#[test]
fn energy_and_gradient_agree_with_energy_only_path() {
    let s = random_network(9);
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let a = energy_line(&s, &ev, &rule).unwrap();
    let (b, _) = energy_and_gradient(&s, &ev, &rule).unwrap();
    assert!((a.total - b.total).abs() < 1e-13 * a.total);
}

#[test]
fn prismatic_circle_force_points_inward_and_is_normal() {
    let s = circle(1.0, 10.0, 64, [0, 0, 1]);
    let f = pk_force(&s, &iso(1.0), &LineQuadratureRule::default()).unwrap();
    for ((x, fx), t) in s.flat_nodes().iter().zip(&f.force).zip(&f.tangents) {
        assert!(fx.dot(&x.normalize()) < 0.0);
        assert!(fx.dot(t).abs() < 1e-12 * fx.norm().max(1e-300));
    }
}

#[test]
fn distant_loops_barely_interact() {
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let one = circle(1.0, 3.0, 24, [1, 0, 0]);
    let other = one.map_nodes(|x| x + Vec3::new(1000.0, 0.0, 0.0)).unwrap();
    let e1 = energy_line(&one, &ev, &rule).unwrap().total;
    let e2 = energy_line(&one.union(&other).unwrap(), &ev, &rule).unwrap().total;
    assert!((e2 - 2.0 * e1).abs() < 1e-3 * 2.0 * e1);
}

#[test]
fn circle_energy_converges_under_refinement() {
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let a = energy_line(&circle(1.0, 8.0, 64, [1, 0, 0]), &ev, &rule).unwrap().total;
    let b = energy_line(&circle(1.0, 8.0, 128, [1, 0, 0]), &ev, &rule).unwrap().total;
    assert!((a - b).abs() < 0.01 * b.abs());
}

#[test]
fn line_and_surface_energies_agree_on_a_planar_loop() {
    let ev = iso(1.0);
    let s = circle(1.0, 4.0, 32, [1, 0, 1]);
    let l = &s.loops()[0];
    let line = energy_line(&s, &ev, &LineQuadratureRule::new(2).unwrap()).unwrap().total;
    let o = SurfaceOptions {
        subdivision: Some(1.0),
        ..Default::default()
    };
    let flat = energy_surface(&[make_planar_surface(l, 0).unwrap()], &ev, &o).unwrap();
    let cone = energy_surface(&[make_cone_surface(l, 0, Vec3::new(0.0, 0.0, 2.0)).unwrap()], &ev, &o).unwrap();
    assert!((flat - line).abs() < 1e-3 * line, "{flat} {line}");
    assert!((cone - line).abs() < 1e-3 * line, "{cone} {line}");
}

#[test]
fn reversing_loop_and_surface_keeps_the_energy() {
    let ev = iso(1.0);
    let s = circle(1.0, 3.0, 16, [0, 1, 1]);
    let l = &s.loops()[0];
    let o = SurfaceOptions::default();
    let a = energy_surface(&[make_planar_surface(l, 0).unwrap()], &ev, &o).unwrap();
    let b = energy_surface(&[make_planar_surface(&l.reversed(), 0).unwrap()], &ev, &o).unwrap();
    assert!((a - b).abs() < 1e-12 * a.abs());
}

#[test]
fn surface_form_of_g_matches_line_form() {
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let s = circle(1.0, 4.0, 32, [1, 0, 0]);
    let l = &s.loops()[0];
    let surfaces = [
        make_planar_surface(l, 0).unwrap(),
        make_cone_surface(l, 0, Vec3::new(0.0, 0.0, 2.0)).unwrap(),
    ];
    let o = SurfaceOptions {
        subdivision: Some(0.5),
        rule: crate::geometry::TriangleRule::SixPoint,
    };
    for x in [l.nodes()[3], Vec3::new(1.0, 0.5, 3.0)] {
        let gl = g_field_at(&s, &ev, &rule, &[(x, 0)]).unwrap()[0];
        for surf in &surfaces {
            let gs = surface_g_field(&x, &l.burgers().cartesian, std::slice::from_ref(surf), &ev, &o).unwrap();
            assert!((gs - gl).norm() < 1e-6 * gl.norm(), "{gs:?} {gl:?}");
        }
    }
}

#[test]
fn nodal_force_approaches_line_formula() {
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let mut errs = Vec::new();
    for n in [40, 80] {
        let lat = Lattice::simple_cubic();
        let nodes: Vec<Vec3> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Vec3::new(6.0 * t.cos(), 3.0 * t.sin(), 0.5 * (2.0 * t).sin())
            })
            .collect();
        let l = Loop::new(nodes, lat.burgers([1, 0, 1]).unwrap()).unwrap();
        let s = DislocationNetwork::new(lat, vec![l], 1.0).unwrap();
        let f = pk_force(&s, &ev, &rule).unwrap();
        let (_, grad) = energy_and_gradient(&s, &ev, &rule).unwrap();
        let dens: Vec<Vec3> = grad.iter().zip(&f.lumped_length).map(|(g, l)| -g / *l).collect();
        errs.push(max_rel(&f.force, &dens));
    }
    assert!(errs[0] < 0.02);
    assert!((errs[0] / errs[1]).log2() > 0.9, "{errs:?}");
}

#[test]
fn force_rotates_with_the_network() {
    use nalgebra::{Rotation3, Unit};
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let s = random_network(11);
    let q = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(0.3, -1.0, 0.7)), 0.83);
    let lat = Lattice::new(q.matrix() * s.lattice().basis()).unwrap();
    let loops = s
        .loops()
        .iter()
        .map(|l| {
            let nodes = l.nodes().iter().map(|x| q * x).collect();
            Loop::new(nodes, lat.burgers(l.burgers().lattice_coords).unwrap()).unwrap()
        })
        .collect();
    let r = DislocationNetwork::new(lat, loops, 1.0).unwrap();
    let f0 = pk_force(&s, &ev, &rule).unwrap();
    let f1 = pk_force(&r, &ev, &rule).unwrap();
    let rotated: Vec<Vec3> = f0.force.iter().map(|f| q * f).collect();
    assert!(max_rel(&rotated, &f1.force) < 1e-8);
}

#[test]
fn variational_force_is_normal_and_matches_gradient() {
    let s = random_network(13);
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let (_, f) = variational_force(&s, &ev, &rule).unwrap();
    let grad = discrete_energy_gradient(&s, &ev, &rule).unwrap();
    for i in 0..grad.len() {
        let t = f.tangents[i];
        assert!(f.force[i].dot(&t).abs() < 1e-12 * f.force[i].norm());
        let expected = -(grad[i] - t * t.dot(&grad[i])) / f.lumped_length[i];
        assert!((f.force[i] - expected).norm() <= 1e-14 * expected.norm());
    }
}

#[test]
fn bound_report_is_scale_covariant() {
    use crate::geometry::mass_ratio;
    let rule = LineQuadratureRule::default();
    let combo = |scale: f64| {
        let s = circle(scale, 10.0 * scale, 64, [0, 0, 1]);
        let f = pk_force(&s, &iso(scale), &rule).unwrap();
        let theta = mass_ratio(&s).unwrap().theta;
        let r = force_bound_report(&s, &f, theta);
        (r.linf_ratio(), r.l2_ratio())
    };
    let (a, b) = (combo(1.0), combo(2.0));
    assert!((a.0 - b.0).abs() < 1e-6 * a.0);
    // the L² norm picks up the square root of the length scale on both sides
    assert!((a.1 - b.1).abs() < 1e-6 * a.1);
}

#[test]
fn continuity_check_edge_cases() {
    let s = circle(1.0, 5.0, 32, [1, 0, 0]);
    let ev = iso(1.0);
    let rule = LineQuadratureRule::default();
    let zero = vec![Vec3::zeros(); s.node_count()];
    let r = continuity_check(&s, &zero, &ev, &rule).unwrap();
    assert_eq!(r.lhs, 0.0);
    let shift = vec![Vec3::new(0.3, -0.1, 0.2); s.node_count()];
    let r = continuity_check(&s, &shift, &ev, &rule).unwrap();
    assert!(r.lhs < 1e-12 && r.rhs > 0.0, "{r:?}");
}
