use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::decay::eval_K_aligned;
use super::*;

fn iso_ev(order: usize) -> KernelEvaluator {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    KernelEvaluator::new(c, MollifierProfile::gaussian(1.0).unwrap(), order).unwrap()
}

fn cubic() -> ElasticityTensor {
    let mut c = ElasticityTensor::zero();
    for a in 0..3 {
        for b in 0..3 {
            c.set(a, a, b, b, if a == b { 3.0 } else { 1.5 });
            if a != b {
                c.set(a, b, a, b, 2.0);
                c.set(a, b, b, a, 2.0);
            }
        }
    }
    c
}

fn random_vec(rng: &mut ChaCha8Rng, max_norm: f64) -> Vec3 {
    let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    v.normalize() * rng.gen_range(0.0..max_norm)
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn symmetries_hold_to_rounding() {
    let ev = iso_ev(24);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let s = random_vec(&mut rng, 100.0);
        for (t, tm) in [(ev.eval_K(&s), ev.eval_K(&-s)), (ev.eval_J(&s), ev.eval_J(&-s))] {
            let scale = t.max_abs();
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        for d in 0..3 {
                            assert!((t.get(a, b, c, d) - t.get(c, d, a, b)).abs() <= 1e-12 * scale);
                            assert!((t.get(a, b, c, d) - tm.get(a, b, c, d)).abs() <= 1e-12 * scale);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn gradient_vanishes_at_origin() {
    let ev = iso_ev(24);
    assert_eq!(ev.eval_gradK(&Vec3::zeros()).max_abs(), 0.0);
    assert!(ev.eval_gradK_sampled(&Vec3::zeros()).max_abs() < 1e-15);
}

#[test]
fn truncated_route_matches_sampled_route_near_core() {
    for c in [ElasticityTensor::isotropic(1.0, 1.0).unwrap(), cubic()] {
        let ev = KernelEvaluator::new(c, MollifierProfile::gaussian(1.0).unwrap(), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let s = random_vec(&mut rng, 5.0);
            assert!(rel(&ev.eval_K(&s).0, &ev.eval_K_sampled(&s).0) < 1e-10);
            assert!(rel(&ev.eval_gradK(&s).0, &ev.eval_gradK_sampled(&s).0) < 1e-10);
            assert!(rel(&ev.eval_J(&s).0, &ev.eval_J_sampled(&s).0) < 1e-10);
        }
    }
}

#[test]
fn truncated_route_matches_aligned_reference_far_away() {
    let p = MollifierProfile::gaussian(1.0).unwrap();
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let ev = KernelEvaluator::new(c.clone(), p, 24).unwrap();
    let v = Vec3::new(0.3, -0.8, 0.5);
    for r in [20.0, 150.0, 900.0] {
        let s = Vec3::new(0.48, -0.6, 0.64) * r;
        let reference = eval_K_aligned(&c, &p, &s, &[], 64, 96).unwrap();
        assert!(rel(&ev.eval_K(&s).0, &reference.0) < 1e-9, "r = {r}");
        let d1 = eval_K_aligned(&c, &p, &s, &[v], 64, 96).unwrap();
        assert!(rel(&ev.eval_K_along(&s, &v)[1].0, &d1.0) < 1e-8, "r = {r}");
        let d2 = eval_K_aligned(&c, &p, &s, &[v, v], 64, 96).unwrap();
        assert!(rel(&ev.eval_K_along(&s, &v)[2].0, &d2.0) < 1e-8, "r = {r}");
    }
}

#[test]
fn anisotropic_truncation_is_accurate_at_moderate_range() {
    let p = MollifierProfile::gaussian(1.0).unwrap();
    let ev = KernelEvaluator::new(cubic(), p, 24).unwrap();
    let s = Vec3::new(0.48, -0.6, 0.64) * 15.0;
    let reference = eval_K_aligned(&cubic(), &p, &s, &[], 64, 128).unwrap();
    assert!(rel(&ev.eval_K(&s).0, &reference.0) < 1e-6);
}

#[test]
fn gradient_matches_central_differences() {
    let ev = iso_ev(24);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    for _ in 0..50 {
        let s = random_vec(&mut rng, 30.0);
        let g = ev.eval_gradK(&s);
        let mut fd = [0.0; 243];
        for e in 0..3 {
            let mut dp = s;
            dp[e] += h;
            let mut dm = s;
            dm[e] -= h;
            let (kp, km) = (ev.eval_K(&dp), ev.eval_K(&dm));
            for i in 0..81 {
                fd[3 * i + e] = (kp.0[i] - km.0[i]) / (2.0 * h);
            }
        }
        assert!(rel(&g.0, &fd) < 1e-6, "{}", rel(&g.0, &fd));
    }
}

#[test]
fn line_derivatives_match_finite_differences() {
    let ev = iso_ev(24);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-4;
    for i in 0..20 {
        let s = if i == 0 { Vec3::zeros() } else { random_vec(&mut rng, 20.0) };
        let v = random_vec(&mut rng, 1.0) + Vec3::new(0.3, 0.0, 0.0);
        let [k0, k1, k2] = ev.eval_K_along(&s, &v);
        let kp = ev.eval_K(&(s + v * h));
        let km = ev.eval_K(&(s - v * h));
        let mut d1 = [0.0; 81];
        let mut d2 = [0.0; 81];
        for j in 0..81 {
            d1[j] = (kp.0[j] - km.0[j]) / (2.0 * h);
            d2[j] = (kp.0[j] - 2.0 * k0.0[j] + km.0[j]) / (h * h);
        }
        assert!(rel(&k0.0, &ev.eval_K(&s).0) < 1e-14);
        let scale = k0.max_abs();
        let e1 = k1.0.iter().zip(&d1).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let e2 = k2.0.iter().zip(&d2).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(e1 < 1e-7 * scale, "first derivative, {e1}");
        assert!(e2 < 1e-5 * scale, "second derivative, {e2}");
        // gradient route agrees with the line route
        assert!(rel(&ev.eval_gradK(&s).apply(&v).0, &k1.0) < 1e-10 || s.norm() == 0.0);
    }
}

#[test]
fn sampled_route_order_rule() {
    // doubling the order changes the sampled kernel by < 1e-9 within the stated range
    for range in [5.0, 10.0, 20.0] {
        let order = sampled_order_for_range(range);
        let a = iso_ev(order);
        let b = iso_ev(2 * order);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_vec(&mut rng, 1.0).normalize() * range;
            let d = rel(&a.eval_K_sampled(&s).0, &b.eval_K_sampled(&s).0);
            assert!(d < 1e-9, "range {range}, order {order}: {d}");
        }
    }
}

#[test]
fn low_order_sampling_is_not_converged() {
    let a = iso_ev(4);
    let b = iso_ev(8);
    let s = Vec3::new(0.0, 3.0, 4.0) * 2.0;
    assert!(rel(&a.eval_K_sampled(&s).0, &b.eval_K_sampled(&s).0) > 1e-3);
}

#[test]
fn matches_real_space_convolution() {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let p = MollifierProfile::gaussian(1.0).unwrap();
    let ev = KernelEvaluator::new(c.clone(), p, 24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..4 {
        let s = if i == 0 { Vec3::new(0.7, -0.3, 1.2) } else { random_vec(&mut rng, 4.0) };
        let d = oracle::eval_K_direct(&c, &p, &s).unwrap();
        assert!(rel(&ev.eval_K(&s).0, &d.0) < 1e-6);
    }
}

#[test]
fn perturbed_normalization_breaks_agreement() {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let p = MollifierProfile::gaussian(1.0).unwrap();
    let off = MollifierProfile::with_normalization(1.0, 1.1 * GAUSSIAN_NORMALIZATION).unwrap();
    let ev = KernelEvaluator::new(c.clone(), off, 24).unwrap();
    let s = Vec3::new(0.7, -0.3, 1.2);
    let d = oracle::eval_K_direct(&c, &p, &s).unwrap();
    assert!(rel(&ev.eval_K(&s).0, &d.0) > 0.05);
}

#[test]
fn oracle_is_even_and_decays() {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let p = MollifierProfile::gaussian(1.0).unwrap();
    let s = Vec3::new(1.1, 0.4, -0.9);
    let a = oracle::eval_K_direct(&c, &p, &s).unwrap();
    let b = oracle::eval_K_direct(&c, &p, &-s).unwrap();
    assert!(rel(&a.0, &b.0) < 1e-10);
    let k0 = oracle::eval_K_direct(&c, &p, &Vec3::zeros()).unwrap().max_abs();
    let k40 = oracle::eval_K_direct(&c, &p, &Vec3::new(0.0, 0.0, 40.0)).unwrap().max_abs();
    let ratio = k40 * 40.0 / k0;
    assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "{ratio}");
}

#[test]
fn oracle_self_converges() {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let p = MollifierProfile::gaussian(1.0).unwrap();
    let s = Vec3::new(2.0, 1.0, -0.5);
    let res = oracle::OracleResolution::default();
    let a = oracle::eval_K_direct_with(&c, &p, &s, res).unwrap();
    let b = oracle::eval_K_direct_with(&c, &p, &s, res.doubled()).unwrap();
    assert!(rel(&a.0, &b.0) < 1e-6);
}

#[test]
fn kernel_scales_inversely_with_epsilon() {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let a = KernelEvaluator::new(c.clone(), MollifierProfile::gaussian(1.0).unwrap(), 24).unwrap();
    let b = KernelEvaluator::new(c, MollifierProfile::gaussian(0.5).unwrap(), 24).unwrap();
    let s = Vec3::new(1.0, 2.0, -0.5);
    let ka = a.eval_K(&s);
    let kb = b.eval_K(&(s * 0.5)).scaled(0.5);
    assert!(rel(&ka.0, &kb.0) < 1e-13);
}

#[test]
fn decay_scan_meets_slopes() {
    let ev = iso_ev(24);
    for (m, j) in [(0, 0), (1, 0), (1, 1), (2, 0)] {
        let rep = decay::decay_bound_scan(&ev, m, j, 7).unwrap();
        assert!(rep.passes(), "{rep:?}");
    }
}
