//! Reference implementations shared by the integration tests and the
//! acceptance suite. None of these call into the code under test.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule over `panels` equal pieces of [a, b].
pub struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        Rule { x, w }
    }

    pub fn complex<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64, panels: usize) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..panels {
            let c = a + (j as f64 + 0.5) * h;
            for (x, w) in self.x.iter().zip(&self.w) {
                acc += *w * f(c + 0.5 * h * x);
            }
        }
        acc * (0.5 * h)
    }

    pub fn real<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        self.complex(|s| Complex64::new(f(s), 0.0), a, b, panels).re
    }
}

/// `erf(z) = 2 z/sqrt(pi) int_0^1 exp(-z^2 s^2) ds`, along the segment [0, z].
pub fn erf_contour(z: Complex64) -> Complex64 {
    let rule = Rule::new(40);
    let f = |s: f64| (-(z * z) * s * s).exp();
    2.0 * z / PI.sqrt() * rule.complex(f, 0.0, 1.0, 16)
}

/// `erfc(z) = 2/sqrt(pi) int_0^inf exp(-(z + s)^2) ds` for `Re z >= 0`,
/// reflected otherwise.
pub fn erfc_contour(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return 2.0 - erfc_contour(-z);
    }
    let rule = Rule::new(40);
    let f = |s: f64| (-(z + s) * (z + s)).exp();
    // exp(-(x+s)^2 + y^2) is below 1e-30 of its start once s > 9.
    2.0 / PI.sqrt() * rule.complex(f, 0.0, 9.0, 64)
}

/// Asymptotic series `erfc(z) ~ e^{-z^2}/(z sqrt(pi)) sum (-1)^n (2n-1)!!/(2z^2)^n`,
/// truncated at its smallest term; valid for `|z|` large and `|arg z| < 3pi/4`.
pub fn erfc_asymptotic(z: Complex64) -> Complex64 {
    (-(z * z)).exp() * erfcx_asymptotic(z)
}

/// The same series for `e^{z^2} erfc(z)`, which does not underflow.
pub fn erfcx_asymptotic(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let inv = 1.0 / (2.0 * z * z);
    for n in 1..200 {
        let next = -term * (2 * n - 1) as f64 * inv;
        if next.norm() > term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum / (z * PI.sqrt())
}

/// Momentum state with `alpha = 1`, written out independently.
pub fn bm_phi(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        18.0 / 35f64.sqrt() * p * ((-p).exp() - (-p / 2.0).exp() / 6.0)
    }
}

/// `Psi(x', t') = (2 pi)^{-1/2} int_0^P phi(p) exp(i p x' - i p^2 t'/2) dp`.
pub fn bm_fourier(x: f64, t: f64) -> Complex64 {
    let rule = Rule::new(24);
    let cutoff = 90.0;
    // Resolve the fastest phase p^2 t/2 + p|x| with ~1 rad per panel.
    let panels = ((cutoff * cutoff * t / 2.0 + cutoff * x.abs()) as usize).max(200);
    let f = |p: f64| bm_phi(p) * Complex64::new(0.0, p * x - p * p * t / 2.0).exp();
    rule.complex(f, 0.0, cutoff, panels) / (2.0 * PI).sqrt()
}

/// Free Gaussian packet written as one complex exponential, `lambda^2 = hbar t/m`.
pub fn packet_direct(hbar: f64, m: f64, sigma: f64, a: f64, k: f64, x: f64, t: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let l2 = hbar * t / m;
    let pre = ((2.0 * PI).sqrt() * (sigma + i * l2 / (2.0 * sigma))).powf(-0.5);
    let u = x - a - 2.0 * i * sigma * sigma * k;
    let den = 2.0 * (2.0 * sigma * sigma + i * l2);
    let psi = pre * (-(u * u) / den - sigma * sigma * k * k + i * k * a).exp();
    let dpsi = psi * (-2.0 * u / den);
    (psi, dpsi)
}

/// Standard normal CDF from an external implementation of erfc.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic for sorted data.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the KS statistic.
pub fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Upper tail probability of chi-square with `dof` degrees of freedom.
pub fn chi2_p_value(stat: f64, dof: usize) -> f64 {
    statrs::function::gamma::gamma_ur(dof as f64 / 2.0, stat / 2.0)
}

/// Composite Simpson on `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn crel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
