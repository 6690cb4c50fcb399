use super::{eval, QuadratureError, Result};

/// Step reduction factor between successive tableau columns.
const CON: f64 = 1.4;
const NTAB: usize = 12;
/// Stop once the extrapolation error grows by this factor.
const SAFE: f64 = 2.0;
/// Estimates that disagree by more than this (relative) are flagged non-smooth.
const NONSMOOTH_REL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error_estimate: f64,
    /// False when successive extrapolations failed to settle, which happens at
    /// kinks or discontinuities of the differentiated function.
    pub smooth: bool,
}

#[derive(Clone, Copy)]
enum Stencil {
    Central,
    Forward,
    Backward,
}

/// `dF/dt` at `t` by Ridders' extrapolation of central differences, starting
/// from step `h0`.
pub fn differentiate_time<F: Fn(f64) -> f64>(f: F, t: f64, h0: f64) -> Result<Derivative> {
    differentiate_time_within(f, t, h0, f64::NEG_INFINITY, f64::INFINITY)
}

/// As [`differentiate_time`], but never evaluates `F` outside `[lo, hi]`;
/// one-sided differences are used near the edges.
pub fn differentiate_time_within<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    h0: f64,
    lo: f64,
    hi: f64,
) -> Result<Derivative> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(QuadratureError::InvalidTolerance(format!("h0={h0}")));
    }
    if !(t >= lo && t <= hi) {
        return Err(QuadratureError::InvalidInterval(lo, hi));
    }
    let room = (t - lo).min(hi - t);
    let (stencil, h) = if room >= h0 {
        (Stencil::Central, h0)
    } else if room >= h0 / 8.0 {
        (Stencil::Central, room)
    } else if hi - t >= 2.0 * h0 {
        (Stencil::Forward, h0)
    } else if t - lo >= 2.0 * h0 {
        (Stencil::Backward, h0)
    } else {
        let h = 0.5 * (hi - t).max(t - lo);
        if h <= 0.0 {
            return Err(QuadratureError::InvalidInterval(lo, hi));
        }
        if hi - t >= t - lo {
            (Stencil::Forward, h)
        } else {
            (Stencil::Backward, h)
        }
    };
    ridders(&f, t, h, stencil)
}

fn ridders<F: Fn(f64) -> f64>(f: &F, t: f64, mut h: f64, stencil: Stencil) -> Result<Derivative> {
    let f0 = match stencil {
        Stencil::Central => 0.0,
        _ => eval(f, t)?,
    };
    let diff = |h: f64| -> Result<f64> {
        Ok(match stencil {
            Stencil::Central => (eval(f, t + h)? - eval(f, t - h)?) / (2.0 * h),
            Stencil::Forward => (eval(f, t + h)? - f0) / h,
            Stencil::Backward => (f0 - eval(f, t - h)?) / h,
        })
    };
    // Error expansions: even powers for central, all powers for one-sided.
    let (p0, dp) = match stencil {
        Stencil::Central => (2, 2),
        _ => (1, 1),
    };
    let mut table = [[0.0_f64; NTAB]; NTAB];
    table[0][0] = diff(h)?;
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    let mut scale = table[0][0].abs();
    for i in 1..NTAB {
        h /= CON;
        table[0][i] = diff(h)?;
        scale = scale.max(table[0][i].abs());
        for j in 1..=i {
            let fac = CON.powi(p0 + dp * (j as i32 - 1));
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            let errt = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if errt <= err {
                err = errt;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
        if err <= 1e-14 * best.abs() {
            break;
        }
    }
    let smooth = err <= NONSMOOTH_REL * best.abs().max(1e-3 * scale) || err == 0.0;
    Ok(Derivative {
        value: best,
        error_estimate: err,
        smooth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_sine() {
        let d = differentiate_time(|t| t * t, 3.0, 0.5).unwrap();
        assert!((d.value - 6.0).abs() < 1e-9 && d.smooth);
        let d = differentiate_time(f64::sin, 0.0, 0.3).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_sided_at_domain_edge() {
        let f = |t: f64| {
            assert!(t >= 0.0);
            t.exp()
        };
        let d = differentiate_time_within(f, 0.0, 0.1, 0.0, 10.0).unwrap();
        assert!((d.value - 1.0).abs() < 1e-8, "{}", d.value);
        let d = differentiate_time_within(|t: f64| t.cos(), 1.0, 0.1, -5.0, 1.0).unwrap();
        assert!((d.value + 1.0_f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn kink_is_flagged() {
        let d = differentiate_time(|t: f64| (t - 1e-3).abs() + t, 0.0, 0.1).unwrap();
        assert!(!d.smooth || (d.value - 0.0).abs() > 1e-3);
    }
}
