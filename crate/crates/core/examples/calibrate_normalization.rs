//! Least-squares fit of the Gaussian line-profile normalization against the
//! real-space kernel.

use ddd_core::elasticity::{ElasticityTensor, Vec3};
use ddd_core::kernels::mollifier::MollifierProfile;
use ddd_core::kernels::{oracle, KernelEvaluator};

fn main() {
    let c = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let unit = MollifierProfile::with_normalization(1.0, 1.0).unwrap();
    let ev = KernelEvaluator::with_default_order(c.clone(), unit).unwrap();
    let probes = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(0.5, 0.0, 0.0),
        Vec3::new(0.7, -0.3, 1.2),
        Vec3::new(2.0, 1.0, -0.5),
        Vec3::new(-1.5, 2.5, 1.0),
    ];
    let (mut num, mut den) = (0.0, 0.0);
    for s in &probes {
        let f = ev.eval_K(s);
        let d = oracle::eval_K_direct(&c, &unit, s).unwrap();
        for i in 0..81 {
            num += f.0[i] * d.0[i];
            den += f.0[i] * f.0[i];
        }
    }
    let n = num / den;
    let mut resid = 0.0_f64;
    for s in &probes {
        let f = ev.eval_K(s);
        let d = oracle::eval_K_direct(&c, &unit, s).unwrap();
        for i in 0..81 {
            resid = resid.max((n * f.0[i] - d.0[i]).abs() / d.max_abs());
        }
    }
    println!("normalization = {n:.17e}");
    println!("max relative residual = {resid:.3e}");
    println!("sqrt(pi)/(2 pi)^3 = {:.17e}", std::f64::consts::PI.sqrt() / (2.0 * std::f64::consts::PI).powi(3));
}
