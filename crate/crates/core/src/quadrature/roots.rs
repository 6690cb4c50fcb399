use super::{check_interval, eval, QuadratureError, Result, RootResult, ZeroKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub tol: f64,
    /// Tangential zeros must satisfy `|f| <= zero_threshold_rel * max|f|` over the bracket.
    pub zero_threshold_rel: f64,
    /// Absolute threshold; overrides the relative one when set.
    pub zero_threshold_abs: Option<f64>,
    pub max_iterations: usize,
    /// Samples used to look for interior sign changes or minima of `|f|`.
    pub probe_points: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-12,
            zero_threshold_rel: 1e-10,
            zero_threshold_abs: None,
            max_iterations: 200,
            probe_points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub points_per_decade: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            points_per_decade: 2048,
        }
    }
}

/// Sample points used by [`sign_scan`]: log-spaced when the interval covers
/// more than a decade of positive abscissae, uniform otherwise.
fn scan_points(a: f64, b: f64, scan: &ScanOptions) -> Vec<f64> {
    let per = scan.points_per_decade.max(2);
    if a > 0.0 && b / a > 10.0 {
        let decades = (b / a).log10();
        let n = (per as f64 * decades).ceil() as usize + 1;
        let (la, lb) = (a.ln(), b.ln());
        (0..n)
            .map(|i| match i {
                0 => a,
                _ if i == n - 1 => b,
                _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
            })
            .collect()
    } else {
        (0..per)
            .map(|i| match i {
                0 => a,
                _ if i == per - 1 => b,
                _ => a + (b - a) * i as f64 / (per - 1) as f64,
            })
            .collect()
    }
}

/// Brackets `(lo, hi)` across which `f` changes sign.
pub fn sign_scan<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    scan: &ScanOptions,
) -> Result<Vec<(f64, f64)>> {
    check_interval(a, b)?;
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for x in scan_points(a, b, scan) {
        let v = eval(f, x)?;
        if v == 0.0 {
            continue;
        }
        if let Some((xl, vl)) = last {
            if (vl < 0.0) != (v < 0.0) {
                out.push((xl, x));
            }
        }
        last = Some((x, v));
    }
    Ok(out)
}

/// Zero of `f` in `[lo, hi]` to absolute tolerance `tol`.
pub fn find_zero<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<RootResult> {
    find_zero_with(
        &f,
        lo,
        hi,
        &RootOptions {
            tol,
            ..Default::default()
        },
    )
}

/// Brent's method when the endpoints bracket a sign change. Otherwise the
/// bracket is probed for an interior sign change and, failing that, `|f|` is
/// minimized; a minimum below the zero threshold is reported as tangential.
pub fn find_zero_with<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    opts: &RootOptions,
) -> Result<RootResult> {
    check_interval(lo, hi)?;
    if !(opts.tol > 0.0) {
        return Err(QuadratureError::InvalidTolerance(format!("tol={}", opts.tol)));
    }
    let flo = eval(f, lo)?;
    let fhi = eval(f, hi)?;
    if flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0) {
        return brent(f, lo, hi, flo, fhi, opts);
    }
    let n = opts.probe_points.max(3);
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let mut vs = Vec::with_capacity(n);
    for (i, &x) in xs.iter().enumerate() {
        vs.push(match i {
            0 => flo,
            _ if i == n - 1 => fhi,
            _ => eval(f, x)?,
        });
    }
    for i in 1..n {
        if vs[i] == 0.0 || (vs[i - 1] < 0.0) != (vs[i] < 0.0) {
            return brent(f, xs[i - 1], xs[i], vs[i - 1], vs[i], opts);
        }
    }
    let max_abs = vs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = opts
        .zero_threshold_abs
        .unwrap_or(opts.zero_threshold_rel * max_abs);
    let imin = (0..n)
        .min_by(|&i, &j| vs[i].abs().total_cmp(&vs[j].abs()))
        .unwrap();
    let a = xs[imin.saturating_sub(1)];
    let b = xs[(imin + 1).min(n - 1)];
    let (x, fx, width) = golden_min_abs(f, a, b, opts)?;
    if fx <= threshold {
        Ok(RootResult {
            location: x,
            bracket_width: width,
            classification: ZeroKind::TangentialZero,
        })
    } else {
        Err(QuadratureError::NoZero(lo, hi))
    }
}

fn bracket_width(w: f64, tol: f64) -> f64 {
    w.abs().clamp(f64::MIN_POSITIVE, tol)
}

fn brent<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fhi: f64,
    opts: &RootOptions,
) -> Result<RootResult> {
    let sign_change = |location: f64, width: f64| RootResult {
        location,
        bracket_width: bracket_width(width, opts.tol),
        classification: ZeroKind::SignChange,
    };
    if flo == 0.0 {
        return Ok(sign_change(lo, opts.tol));
    }
    if fhi == 0.0 {
        return Ok(sign_change(hi, opts.tol));
    }
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, flo, fhi);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iterations {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * opts.tol.max(4.0 * f64::EPSILON * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(sign_change(b, c - b));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(f, b)?;
    }
    Ok(sign_change(b, c - b))
}

/// Golden-section minimization of `|f|` on `[a, b]`.
fn golden_min_abs<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut b: f64,
    opts: &RootOptions,
) -> Result<(f64, f64, f64)> {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(f, x1)?.abs();
    let mut f2 = eval(f, x2)?.abs();
    for _ in 0..opts.max_iterations {
        if (b - a) <= opts.tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(f, x1)?.abs();
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(f, x2)?.abs();
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok((x, fx, bracket_width(b - a, opts.tol)))
}
