use super::roots::{find_zero_with, sign_scan, RootOptions, ScanOptions};
use super::{check_interval, eval, IntegrationResult, QuadratureError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_evaluations: 400_000,
        }
    }
}

impl IntegrationOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        IntegrationOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadratureError::InvalidTolerance(format!(
                "rel_tol={} abs_tol={} (both must be > 0)",
                self.rel_tol, self.abs_tol
            )));
        }
        Ok(())
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// 21-point Kronrod rule with embedded 10-point Gauss error estimate.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut res_gauss = 0.0;
    let mut res_kronrod = fc * WGK[10];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += WG[j] * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_kronrod - res_gauss) * half;
    let ah = half.abs();
    Ok(Segment {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(err, res_abs * ah, res_asc * ah),
    })
}

const GK_POINTS: usize = 21;

/// Smallest attainable relative error target.
pub const ROUNDOFF_REL: f64 = 200.0 * f64::EPSILON;

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<IntegrationResult> {
    integrate_finite_with(&f, a, b, &IntegrationOptions::new(rel_tol, abs_tol))
}

pub fn integrate_finite_with<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &IntegrationOptions,
) -> Result<IntegrationResult> {
    check_interval(a, b)?;
    opts.validate()?;
    let first = gk21(f, a, b)?;
    let mut evaluations = GK_POINTS;
    let mut active = vec![first];
    // Segments too narrow to split further keep their error here.
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    loop {
        let value: f64 = frozen_value + active.iter().map(|s| s.value).sum::<f64>();
        let error: f64 = frozen_error + active.iter().map(|s| s.error).sum::<f64>();
        // GK21 error estimates never drop below ~50 eps of the segment
        // magnitude, so tighter relative requests are met at that floor.
        let target = opts.abs_tol.max(opts.rel_tol.max(ROUNDOFF_REL) * value.abs());
        let best = IntegrationResult {
            value,
            abs_error_estimate: error,
            evaluations,
        };
        if error <= target {
            return Ok(best);
        }
        if active.is_empty() || evaluations + 2 * GK_POINTS > opts.max_evaluations {
            return Err(QuadratureError::BudgetExceeded { best });
        }
        let worst = active
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let seg = active.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        let scale = seg.a.abs().max(seg.b.abs()).max(f64::MIN_POSITIVE);
        if (seg.b - seg.a) <= 64.0 * f64::EPSILON * scale || mid <= seg.a || mid >= seg.b {
            frozen_value += seg.value;
            frozen_error += seg.error;
            continue;
        }
        let left = gk21(f, seg.a, mid)?;
        let right = gk21(f, mid, seg.b)?;
        evaluations += 2 * GK_POINTS;
        active.push(left);
        active.push(right);
    }
}

/// Integral of `|g|` over `[a, b]`, split at every sign change found by a
/// preliminary scan so each piece is smooth.
pub fn integrate_abs_finite<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    opts: &IntegrationOptions,
    scan: &ScanOptions,
) -> Result<IntegrationResult> {
    check_interval(a, b)?;
    let mut cuts = vec![a];
    let root_opts = RootOptions {
        tol: 1e-13 * a.abs().max(b.abs()),
        ..Default::default()
    };
    for (lo, hi) in sign_scan(&g, a, b, scan)? {
        let root = find_zero_with(&g, lo, hi, &root_opts)?;
        if root.location > *cuts.last().unwrap() && root.location < b {
            cuts.push(root.location);
        }
    }
    cuts.push(b);
    let pieces = (cuts.len() - 1) as f64;
    let piece_opts = IntegrationOptions {
        abs_tol: opts.abs_tol / pieces,
        ..*opts
    };
    let mut total = IntegrationResult::zero();
    for w in cuts.windows(2) {
        let r = integrate_finite_with(&|x| g(x).abs(), w[0], w[1], &piece_opts)?;
        total.accumulate(&r);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiInfiniteOptions {
    pub rel_tol: f64,
    /// Width of the first chunk `[a, a + initial_width]`.
    pub initial_width: f64,
    pub max_doublings: usize,
    pub max_evaluations: usize,
}

impl Default for SemiInfiniteOptions {
    fn default() -> Self {
        SemiInfiniteOptions {
            rel_tol: 1e-10,
            initial_width: 1.0,
            max_doublings: 80,
            max_evaluations: 2_000_000,
        }
    }
}

/// Integral of `f` over `[a, inf)` by doubling the truncation point until the
/// last two doublings each change the value by less than `rel_tol / 10`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rel_tol: f64,
) -> Result<IntegrationResult> {
    integrate_semi_infinite_with(
        &f,
        a,
        &SemiInfiniteOptions {
            rel_tol,
            ..Default::default()
        },
    )
}

pub fn integrate_semi_infinite_with<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    opts: &SemiInfiniteOptions,
) -> Result<IntegrationResult> {
    doubling(a, opts, |lo, hi, chunk_opts| {
        integrate_finite_with(f, lo, hi, chunk_opts)
    })
}

/// Integral of `|g|` over `[a, inf)`; each chunk is split at sign changes.
pub fn integrate_abs_semi_infinite<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    opts: &SemiInfiniteOptions,
    scan: &ScanOptions,
) -> Result<IntegrationResult> {
    doubling(a, opts, |lo, hi, chunk_opts| {
        integrate_abs_finite(&g, lo, hi, chunk_opts, scan)
    })
}

fn doubling<C>(a: f64, opts: &SemiInfiniteOptions, mut chunk: C) -> Result<IntegrationResult>
where
    C: FnMut(f64, f64, &IntegrationOptions) -> Result<IntegrationResult>,
{
    if !a.is_finite() {
        return Err(QuadratureError::InvalidInterval(a, f64::INFINITY));
    }
    if !(opts.rel_tol > 0.0 && opts.initial_width > 0.0) {
        return Err(QuadratureError::InvalidTolerance(format!(
            "rel_tol={} initial_width={}",
            opts.rel_tol, opts.initial_width
        )));
    }
    let chunk_rel = opts.rel_tol / 20.0;
    let mut upper = a + opts.initial_width;
    let first_opts = IntegrationOptions {
        rel_tol: chunk_rel,
        abs_tol: f64::MIN_POSITIVE,
        max_evaluations: opts.max_evaluations,
    };
    let mut total = chunk(a, upper, &first_opts)?;
    let mut prev_increment = f64::NAN;
    let mut quiet = 0;
    let mut growing = 0;
    for _ in 0..opts.max_doublings {
        let next = a + 2.0 * (upper - a);
        let chunk_opts = IntegrationOptions {
            rel_tol: chunk_rel,
            abs_tol: (chunk_rel * total.value.abs()).max(f64::MIN_POSITIVE),
            max_evaluations: opts.max_evaluations.saturating_sub(total.evaluations).max(1000),
        };
        let inc = chunk(upper, next, &chunk_opts)?;
        total.accumulate(&inc);
        upper = next;
        let small = inc.value.abs() < opts.rel_tol / 10.0 * total.value.abs();
        quiet = if small { quiet + 1 } else { 0 };
        if prev_increment.is_finite() && inc.value.abs() >= prev_increment.abs() && inc.value != 0.0 {
            growing += 1;
        } else {
            growing = 0;
        }
        if quiet >= 2 {
            // Geometric extrapolation of the remaining tail.
            let ratio = inc.value / prev_increment;
            if ratio.is_finite() && ratio > 0.0 && ratio < 1.0 {
                let tail = inc.value * ratio / (1.0 - ratio);
                total.value += tail;
                total.abs_error_estimate += tail.abs();
            }
            return Ok(total);
        }
        if growing >= 6 {
            return Err(QuadratureError::NoDecay {
                upper,
                increment: inc.value,
            });
        }
        prev_increment = inc.value;
    }
    Err(QuadratureError::NoDecay {
        upper,
        increment: prev_increment,
    })
}
