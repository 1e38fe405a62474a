//! Legendre truncation of the ridge profile `u -> η^ε(r u)` on `[-1, 1]`.
//!
//! For a spherical factor `F` of harmonic degree at most `L`, the Funk–Hecke
//! formula gives
//!
//! ```text
//! ∫_{S²} F(z) η(z·s) dz = ∫_{S²} F(z) h_r(z·ŝ) dz,
//! h_r(u) = Σ_{l ≤ L, l even} (2l+1)/2 · Λ_l(r) · P_l(u),
//! Λ_l(r) = ∫_{-1}^{1} η(r u) P_l(u) du,
//! ```
//!
//! so a quadrature that integrates `F · P_l` exactly reproduces the kernel at
//! every `|s|`, while sampling `η(z·s)` at the nodes directly resolves the
//! ridge only for `|s|` up to a few times `order · ε`.
//!
//! For the Gaussian profile `Λ_l` is a finite combination of the moments
//! `m_k(a) = ∫_{-1}^{1} u^{2k} exp(-a u²) du`, `a = r²/(4ε²)`, which obey
//! `m_k = ((2k-1) m_{k-1} - 2 e^{-a}) / (2a)`.

use crate::quadrature::gauss_legendre;

use super::mollifier::MollifierProfile;

/// Largest Legendre degree supported by the truncation.
pub const MAX_DEGREE: usize = 64;
const N_EVEN: usize = MAX_DEGREE / 2 + 1;
/// Above this degree the monomial form loses too many digits to cancellation
/// and the coefficients are computed by Gauss–Legendre quadrature instead.
const MOMENT_DEGREE_LIMIT: usize = 12;
/// Truncation of the Gaussian tail: `exp(-TAIL_EXPONENT)`.
const TAIL_EXPONENT: f64 = 40.0;
/// Below this `a` the monomial sums cancel badly for the higher degrees and
/// the Taylor series of `exp(-a u²)` is used instead.
const SERIES_EXPONENT: f64 = 4.0;

/// Per-distance coefficients of the truncated ridge profile, indexed by
/// `l / 2`. All include the factor `(2l+1)/2`.
#[derive(Clone, Copy, Debug)]
pub struct RidgeCoefficients {
    /// `(2l+1)/2 · Λ_l(r)`
    pub value: [f64; N_EVEN],
    /// `d/dr` of `value`
    pub radial: [f64; N_EVEN],
    /// `d²/dr²` of `value`
    pub radial2: [f64; N_EVEN],
    /// `(2l+1)/2 · ∫ η''(r u) P_l(u) du`
    pub second: [f64; N_EVEN],
    pub n_even: usize,
}

/// Precomputed Legendre data for the truncation at degree `L`.
#[derive(Clone, Debug)]
pub struct RidgeExpansion {
    profile: MollifierProfile,
    degree: usize,
    /// `coeffs[l/2][j]` = coefficient of `u^{2j}` in `P_l` (even `l`).
    coeffs: Vec<Vec<f64>>,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

fn legendre_monomial_coefficients(degree: usize) -> Vec<Vec<f64>> {
    // full coefficient arrays by the three-term recurrence
    let mut p: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0, 1.0]];
    for n in 1..degree {
        let nf = n as f64;
        let mut next = vec![0.0; n + 2];
        for (i, c) in p[n].iter().enumerate() {
            next[i + 1] += (2.0 * nf + 1.0) * c / (nf + 1.0);
        }
        for (i, c) in p[n - 1].iter().enumerate() {
            next[i] -= nf * c / (nf + 1.0);
        }
        p.push(next);
    }
    (0..=degree)
        .step_by(2)
        .map(|l| p[l].iter().step_by(2).copied().collect())
        .collect()
}

/// `m_k(a)` for `k = 0..out.len()`.
pub fn gaussian_moments(a: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    if a == 0.0 {
        for (k, m) in out.iter_mut().enumerate() {
            *m = 2.0 / (2.0 * k as f64 + 1.0);
        }
        return;
    }
    let ea = (-a).exp();
    let top = n - 1;
    // upward recursion is stable while 2a >= 2k - 1
    let k_up = if a + 0.5 >= top as f64 {
        top
    } else {
        (a + 0.5).floor() as usize
    };
    let sa = a.sqrt();
    out[0] = (std::f64::consts::PI / a).sqrt() * libm::erf(sa);
    if a < 1e-3 {
        // series avoids the 1/a cancellation for tiny a
        for (k, m) in out.iter_mut().enumerate() {
            *m = series_moment(k, a, ea);
        }
        return;
    }
    for k in 1..=k_up {
        out[k] = ((2.0 * k as f64 - 1.0) * out[k - 1] - 2.0 * ea) / (2.0 * a);
    }
    if k_up < top {
        out[top] = series_moment(top, a, ea);
        for k in (k_up + 1..top).rev() {
            out[k] = (2.0 * a * out[k + 1] + 2.0 * ea) / (2.0 * k as f64 + 1.0);
        }
    }
}

/// `∫_{-1}^{1} u^{2k} exp(-a u²) P_l(u) du` for `k = 0, 1, 2` and even `l`,
/// by the Taylor series of the exponential.
fn legendre_gauss_integrals(a: f64, l: usize) -> [f64; 3] {
    // mom(q) = ∫ u^q P_l du, nonzero for even q >= l:
    // mom(l) = 2^{l+1} (l!)² / (2l+1)!, then a ratio recurrence in q
    let mut base = 2.0;
    for i in 1..=l {
        base *= i as f64 / (2 * i + 1) as f64;
    }
    let next = |q: usize, m: f64| -> f64 {
        let (qf, lf) = (q as f64, l as f64);
        m * (qf + 2.0) * (qf + 1.0) * ((qf + lf) / 2.0 + 1.0)
            / (((qf - lf) / 2.0 + 1.0) * (qf + lf + 3.0) * (qf + lf + 2.0))
    };
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        // first n with 2n + 2k >= l
        let n0 = (l / 2).saturating_sub(k);
        let mut q = l;
        let mut mom = base;
        while q < 2 * n0 + 2 * k {
            mom = next(q, mom);
            q += 2;
        }
        let mut coef = 1.0;
        for i in 1..=n0 {
            coef *= -a / i as f64;
        }
        let mut sum = 0.0;
        let mut n = n0;
        loop {
            let term = coef * mom;
            sum += term;
            if n > n0 + 4 && term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            n += 1;
            coef *= -a / n as f64;
            mom = next(q, mom);
            q += 2;
            if n > n0 + 200 {
                break;
            }
        }
        *o = sum;
    }
    out
}

/// `m_k(a) = e^{-a} Σ_n a^n / Π_{i=0}^{n} (k + 1/2 + i)`.
fn series_moment(k: usize, a: f64, ea: f64) -> f64 {
    let s = k as f64 + 0.5;
    let mut term = 1.0 / s;
    let mut sum = term;
    for i in 1..400 {
        term *= a / (s + i as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    ea * sum
}

impl RidgeExpansion {
    pub fn new(profile: MollifierProfile, degree: usize) -> Self {
        let degree = degree.min(MAX_DEGREE) & !1;
        let (gl_nodes, gl_weights) = if degree > MOMENT_DEGREE_LIMIT {
            gauss_legendre(64 + degree / 2)
        } else {
            (Vec::new(), Vec::new())
        };
        RidgeExpansion {
            profile,
            degree,
            coeffs: legendre_monomial_coefficients(degree),
            gl_nodes,
            gl_weights,
        }
    }

    /// Even truncation degree `L`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn profile(&self) -> &MollifierProfile {
        &self.profile
    }

    pub fn coefficients(&self, r: f64) -> RidgeCoefficients {
        let n_even = self.degree / 2 + 1;
        let mut out = RidgeCoefficients {
            value: [0.0; N_EVEN],
            radial: [0.0; N_EVEN],
            radial2: [0.0; N_EVEN],
            second: [0.0; N_EVEN],
            n_even,
        };
        if self.degree > MOMENT_DEGREE_LIMIT {
            self.coefficients_by_quadrature(r, &mut out);
        } else {
            self.coefficients_by_moments(r, &mut out);
        }
        for i in 0..n_even {
            let f = 0.5 * ((4 * i) as f64 + 1.0);
            out.value[i] *= f;
            out.radial[i] *= f;
            out.radial2[i] *= f;
            out.second[i] *= f;
        }
        out
    }

    fn coefficients_by_moments(&self, r: f64, out: &mut RidgeCoefficients) {
        let c = self.profile.exponent();
        let peak = self.profile.peak();
        let a = c * r * r;
        if a < SERIES_EXPONENT {
            for i in 0..self.coeffs.len() {
                let g = legendre_gauss_integrals(a, 2 * i);
                out.value[i] = peak * g[0];
                out.radial[i] = -peak * g[1] * 2.0 * c * r;
                out.radial2[i] = peak * (4.0 * c * a * g[2] - 2.0 * c * g[1]);
                out.second[i] = peak * (4.0 * c * a * g[1] - 2.0 * c * g[0]);
            }
            return;
        }
        let mut m = [0.0; MOMENT_DEGREE_LIMIT / 2 + 3];
        let nm = self.degree / 2 + 3;
        gaussian_moments(a, &mut m[..nm]);
        for (i, coeffs) in self.coeffs.iter().enumerate() {
            let mut v = 0.0;
            let mut d = 0.0;
            let mut d2 = 0.0;
            let mut s = 0.0;
            for (j, p) in coeffs.iter().enumerate() {
                v += p * m[j];
                d -= p * m[j + 1];
                d2 += p * (4.0 * c * a * m[j + 2] - 2.0 * c * m[j + 1]);
                s += p * (4.0 * c * a * m[j + 1] - 2.0 * c * m[j]);
            }
            out.value[i] = peak * v;
            out.radial[i] = peak * d * 2.0 * c * r;
            out.radial2[i] = peak * d2;
            out.second[i] = peak * s;
        }
    }

    fn coefficients_by_quadrature(&self, r: f64, out: &mut RidgeCoefficients) {
        let c = self.profile.exponent();
        let a = c * r * r;
        let uc = if a > TAIL_EXPONENT {
            (TAIL_EXPONENT / a).sqrt()
        } else {
            1.0
        };
        let n_even = self.degree / 2 + 1;
        let mut p = [0.0; MAX_DEGREE + 1];
        for (x, w) in self.gl_nodes.iter().zip(&self.gl_weights) {
            let u = uc * x;
            let t = r * u;
            let eta = self.profile.eta_upto3(t);
            let wu = uc * w;
            legendre_values(u, self.degree, &mut p);
            for i in 0..n_even {
                let pl = p[2 * i];
                out.value[i] += wu * eta[0] * pl;
                out.radial[i] += wu * eta[1] * u * pl;
                out.radial2[i] += wu * eta[2] * u * u * pl;
                out.second[i] += wu * eta[2] * pl;
            }
        }
    }
}

/// `P_0(u) ..= P_degree(u)`.
#[inline]
pub fn legendre_values(u: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree == 0 {
        return;
    }
    out[1] = u;
    for n in 1..degree {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * u * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// `P_l`, `P_l'` and `P_l''` for `l = 0..=degree`.
pub fn legendre_with_derivatives(
    u: f64,
    degree: usize,
    p: &mut [f64],
    dp: &mut [f64],
    ddp: &mut [f64],
) {
    p[0] = 1.0;
    dp[0] = 0.0;
    ddp[0] = 0.0;
    if degree == 0 {
        return;
    }
    p[1] = u;
    dp[1] = 1.0;
    ddp[1] = 0.0;
    for n in 1..degree {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * u * p[n] - nf * p[n - 1]) / (nf + 1.0);
        dp[n + 1] = dp[n - 1] + (2.0 * nf + 1.0) * p[n];
        ddp[n + 1] = ddp[n - 1] + (2.0 * nf + 1.0) * dp[n];
    }
}

/// Evaluate `Σ_{l even} c_l P_l(u)` and its `u` derivative for several
/// coefficient sets at once. `sets[k][l/2]` are the coefficients of set `k`.
#[inline]
pub fn legendre_sums<const K: usize>(
    u: f64,
    degree: usize,
    sets: [&[f64]; K],
) -> ([f64; K], [f64; K]) {
    let mut val = [0.0; K];
    let mut der = [0.0; K];
    // P_0 = 1, P'_0 = 0
    for k in 0..K {
        val[k] = sets[k][0];
    }
    if degree == 0 {
        return (val, der);
    }
    let (mut p_prev, mut p_cur) = (1.0, u);
    let (mut d_prev, mut d_cur) = (0.0, 1.0);
    for n in 1..degree {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * u * p_cur - nf * p_prev) / (nf + 1.0);
        let d_next = d_prev + (2.0 * nf + 1.0) * p_cur;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
        if (n + 1) % 2 == 0 {
            let i = (n + 1) / 2;
            for k in 0..K {
                val[k] += sets[k][i] * p_cur;
                der[k] += sets[k][i] * d_cur;
            }
        }
    }
    (val, der)
}
