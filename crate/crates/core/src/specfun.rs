//! Error functions of real and complex argument.
//!
//! Everything is built on the Faddeeva function `w(z) = exp(-z^2) erfc(-iz)`.
//! In the upper half plane `w` is bounded, so products such as
//! `exp(-z^2) erfc(z)` that overflow when formed literally stay finite when
//! expressed through `w`.
//!
//! Evaluation regions (with `z = x + iy`, `x >= 0`, `y >= 0`; the rest of the
//! plane follows from `w(-conj z) = conj w(z)` and `w(-z) = 2 exp(-z^2) - w(z)`):
//!
//! * large `|z|`: Laplace continued fraction, evaluated bottom-up with a term
//!   count that grows as `|z|` shrinks;
//! * elsewhere: the exponentially convergent sums of Zaghloul and Ali, which
//!   need the real scaled function `erfcx(y)` only.
//!
//! Relative accuracy is a few units of 1e-14 over the plane.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `1 / sqrt(pi)`.
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
/// `2 / sqrt(pi)`.
const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;

/// Sum spacing for the exponential-sum region, `pi / sqrt(-ln(eps / 2))`.
const SUM_SPACING: f64 = 0.518_321_480_430_085_9;

/// `exp(t)` overflows for `t` above this.
const EXP_OVERFLOW: f64 = 709.78;

/// Below this the real complementary function is formed from the series of `erf`.
const ERFCX_SERIES_LIMIT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecfunError {
    #[error("argument {0} is not finite")]
    Domain(Complex64),
    #[error("exp(-z^2) overflows at z = {0}")]
    Overflow(Complex64),
}

pub type Result<T> = std::result::Result<T, SpecfunError>;

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::Domain(z))
    }
}

/// `exp(-z^2)`, guarded against overflow.
fn exp_neg_sq(z: Complex64) -> Result<Complex64> {
    // Re(-z^2) = (y - x)(y + x), written to avoid spurious overflow of x^2.
    let re = (z.im - z.re) * (z.im + z.re);
    if re > EXP_OVERFLOW {
        return Err(SpecfunError::Overflow(z));
    }
    let im = -2.0 * z.re * z.im;
    Ok(Complex64::from_polar(re.exp(), im))
}

/// `erf(x)` for `|x| < 1.5` by the positive-term series
/// `2/sqrt(pi) x exp(-x^2) sum (2x^2)^n / (2n+1)!!`, free of cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    FRAC_2_SQRT_PI * x * (-x2).exp() * sum
}

/// Scaled complementary error function `exp(x^2) erfc(x)` of real argument.
pub fn erfcx_real(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // exp(x^2) erfc(x) = 2 exp(x^2) - erfcx(-x)
        return 2.0 * (x * x).exp() - erfcx_real(-x);
    }
    if x < ERFCX_SERIES_LIMIT {
        return (x * x).exp() * (1.0 - erf_series(x));
    }
    if x > 1e8 {
        return FRAC_1_SQRT_PI / x;
    }
    // Laplace continued fraction 1/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
    let terms = (10.0 + 250.0 / (x * x)).ceil() as usize;
    let mut denom = x;
    for k in (1..=terms).rev() {
        denom = x + 0.5 * k as f64 / denom;
    }
    FRAC_1_SQRT_PI / denom
}

/// Complementary error function of real argument.
pub fn erfc_real(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc_real(-x)
    } else if x < 0.5 {
        1.0 - erf_series(x)
    } else {
        (-x * x).exp() * erfcx_real(x)
    }
}

/// Error function of real argument.
pub fn erf_real(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < ERFCX_SERIES_LIMIT {
        erf_series(ax)
    } else if ax > 6.0 {
        1.0
    } else {
        1.0 - (-ax * ax).exp() * erfcx_real(ax)
    };
    v.copysign(x)
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

fn use_continued_fraction(x: f64, y: f64) -> bool {
    y > 7.0 || (x > 6.0 && (y > 0.1 || (x > 8.0 && y > 1e-10) || x >= 10.0))
}

/// Bottom-up evaluation of `z - 1/2 / (z - 1 / (z - 3/2 / ...))`; returns the
/// tail `R` with `w(z) = i/sqrt(pi) / (z - R)`.
fn continued_fraction_tail(z: Complex64) -> Complex64 {
    let rho = (z.re / 6.3).hypot(z.im / 4.4);
    let terms = (2.0 * (3.0 + 1442.0 / (26.0 * rho + 77.0))).ceil() as usize;
    let mut d = z;
    for k in (2..=terms).rev() {
        d = z - 0.5 * k as f64 / d;
    }
    0.5 / d
}

/// Faddeeva function by exponential sums, for `x >= 0`, `0 <= y <= 7`, `x < 10`.
fn w_by_sums(x: f64, y: f64) -> Complex64 {
    let a = SUM_SPACING;
    let c = 2.0 * a / PI;
    let ex2 = (-x * x).exp();
    let mut s1 = 0.0;
    let mut s_cosh = 0.0;
    let mut s_sinh = 0.0;
    let mut n = 1.0_f64;
    loop {
        let an = a * n;
        let den = an * an + y * y;
        let e_minus = (-(an + x) * (an + x)).exp();
        let e_plus = (-(an - x) * (an - x)).exp();
        s1 += (-an * an - x * x).exp() / den;
        s_cosh += (e_plus + e_minus) / den;
        s_sinh += if x < 0.1 {
            // exp(-(an-x)^2) - exp(-(an+x)^2) loses digits for small x.
            (-an * an - x * x).exp() * 2.0 * (2.0 * an * x).sinh() * an / den
        } else {
            an * (e_plus - e_minus) / den
        };
        if an > x {
            let tail = e_plus / den;
            if tail < 1e-18 * s_cosh && an * tail < 1e-18 * s_sinh.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        n += 1.0;
    }
    let coef1 = ex2 * erfcx_real(y) - c * y * s1;
    let coef2 = c * x * ex2;
    let xy = x * y;
    let re = coef1 * (2.0 * xy).cos() + coef2 * xy.sin() * sinc(xy);
    let im = -coef1 * (2.0 * xy).sin() + coef2 * sinc(2.0 * xy);
    Complex64::new(re + 0.5 * c * y * s_cosh, im + 0.5 * c * s_sinh)
}

/// `w(z)` for `Im z >= 0`.
fn w_upper(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return w_upper(Complex64::new(-z.re, z.im)).conj();
    }
    let (x, y) = (z.re, z.im);
    if x == 0.0 {
        return Complex64::new(erfcx_real(y), 0.0);
    }
    if use_continued_fraction(x, y) {
        Complex64::i() * FRAC_1_SQRT_PI / (z - continued_fraction_tail(z))
    } else {
        w_by_sums(x, y)
    }
}

/// `w(z) - i/(sqrt(pi) z)` for `Im z >= 0`, `z != 0`.
fn w_reduced_upper(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return w_reduced_upper(Complex64::new(-z.re, z.im)).conj();
    }
    if use_continued_fraction(z.re, z.im) {
        let r = continued_fraction_tail(z);
        Complex64::i() * FRAC_1_SQRT_PI * r / (z * (z - r))
    } else {
        w_upper(z) - Complex64::i() * FRAC_1_SQRT_PI / z
    }
}

/// Faddeeva function `w(z) = exp(-z^2) erfc(-iz)`.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.im >= 0.0 {
        Ok(w_upper(z))
    } else {
        Ok(2.0 * exp_neg_sq(z)? - w_upper(-z))
    }
}

/// `w(z) - i/(sqrt(pi) z)`: the Faddeeva function minus its leading
/// asymptotic term, computed without cancellation at large `|z|`.
pub fn faddeeva_reduced(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(SpecfunError::Domain(z));
    }
    if z.im >= 0.0 {
        Ok(w_reduced_upper(z))
    } else {
        // w(z) = 2 exp(-z^2) - w(-z) and the 1/z term is odd.
        Ok(2.0 * exp_neg_sq(z)? - w_reduced_upper(-z))
    }
}

/// Scaled complementary error function `exp(z^2) erfc(z) = w(iz)`.
pub fn erfcx(z: Complex64) -> Result<Complex64> {
    faddeeva(Complex64::new(-z.im, z.re))
}

/// Complementary error function.
pub fn erfc(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.im == 0.0 {
        return Ok(Complex64::new(erfc_real(z.re), 0.0));
    }
    if z.re >= 0.0 {
        // i z lies in the closed upper half plane.
        Ok(exp_neg_sq(z)? * w_upper(Complex64::new(-z.im, z.re)))
    } else {
        Ok(2.0 - erfc(-z)?)
    }
}

/// Error function.
pub fn erf(z: Complex64) -> Result<Complex64> {
    check_finite(z)?;
    if z.im == 0.0 {
        return Ok(Complex64::new(erf_real(z.re), 0.0));
    }
    if z.re < 0.0 {
        return Ok(-erf(-z)?);
    }
    let r = z.norm();
    if r < 0.5 {
        return Ok(erf_maclaurin(z));
    }
    Ok(1.0 - exp_neg_sq(z)? * w_upper(Complex64::new(-z.im, z.re)))
}

/// Maclaurin series `2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1))`, for small `|z|`.
fn erf_maclaurin(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    let mut n = 0.0;
    loop {
        n += 1.0;
        power *= -z2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}
