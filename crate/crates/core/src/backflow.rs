//! Bracken-Melloy backflow state: a positive-momentum state whose current at
//! the origin is negative at early times.
//!
//! Everything below works in the dimensionless frame `x' = alpha x / hbar`,
//! `t' = alpha^2 t / (m hbar)`, where the position wave function is
//!
//! ```text
//! Psi = -18/sqrt(70 pi) [5i/(6t') + sqrt(pi/(4t'^3)) (i-1)
//!        ((x'+i) e^{i(x'+i)^2/2t'} erfc(z1) - (2x'+i)/12 e^{i(2x'+i)^2/8t'} erfc(z2))]
//! ```
//!
//! with `z1 = -(1+i)(x'+i)/sqrt(4t')`, `z2 = -(1+i)(2x'+i)/sqrt(16t')`.
//! Each exponential times erfc equals `w(i z)`, and the `i/(sqrt(pi) z)`
//! leading parts of the two `w` terms cancel the `5i/(6t')` term exactly, so
//! `Psi` is evaluated from the reduced Faddeeva function without overflow or
//! cancellation at small `t'`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distribution::{format_float, normalize_with, toa_from_current, CurrentField, CurrentOptions, ToaDistribution};
use crate::error::{Error, Result, Trap};
use crate::quadrature::{
    find_zero_with, integrate_abs_semi_infinite, integrate_finite_with, IntegrationOptions,
    RootOptions, RootResult, ScanOptions, SemiInfiniteOptions, ZeroKind,
};
use crate::specfun::faddeeva_reduced;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Mass of a rubidium-87 atom, kg.
pub const RB87_MASS: f64 = 144.32e-27;
/// Velocity defining the momentum scale of the rubidium frame, m/s.
pub const RB87_VELOCITY: f64 = 3e-3;
/// Zero of the current as reported for this state, in units of `m hbar / alpha^2`.
pub const REPORTED_T0_PRIME: f64 = 0.021;
/// Detection probabilities tabulated for the rubidium frame.
pub const TABLE_TARGETS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessFrame {
    /// Momentum scale, kg m/s.
    pub alpha: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl DimensionlessFrame {
    pub fn new(alpha: f64, mass: f64, hbar: f64) -> Result<Self> {
        let mut v = Vec::new();
        for (name, x) in [("alpha", alpha), ("mass", mass), ("hbar", hbar)] {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{name} must be finite and > 0, got {x}"));
            }
        }
        if !v.is_empty() {
            return Err(Error::InvalidParameters(v));
        }
        Ok(DimensionlessFrame { alpha, mass, hbar })
    }

    /// Frame with `alpha = m v`.
    pub fn from_velocity(mass: f64, velocity: f64) -> Result<Self> {
        Self::new(mass * velocity, mass, HBAR)
    }

    pub fn rb87() -> Self {
        Self::from_velocity(RB87_MASS, RB87_VELOCITY).expect("constants are valid")
    }

    /// `hbar / alpha`, metres.
    pub fn length_scale(&self) -> f64 {
        self.hbar / self.alpha
    }

    /// `m hbar / alpha^2`, seconds.
    pub fn time_scale(&self) -> f64 {
        self.mass * self.hbar / (self.alpha * self.alpha)
    }

    pub fn to_dimensionless_x(&self, x: f64) -> f64 {
        x / self.length_scale()
    }

    pub fn to_physical_x(&self, xp: f64) -> f64 {
        xp * self.length_scale()
    }

    pub fn to_dimensionless_t(&self, t: f64) -> f64 {
        t / self.time_scale()
    }

    pub fn to_physical_t(&self, tp: f64) -> f64 {
        tp * self.time_scale()
    }
}

/// `phi(p) = 18/sqrt(35 alpha^3) p (e^{-p/alpha} - e^{-p/(2 alpha)}/6)` for
/// `p > 0`, zero otherwise.
pub fn bm_momentum_wavefunction(p: f64, alpha: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let q = p / alpha;
    18.0 / (35.0 * alpha.powi(3)).sqrt() * p * ((-q).exp() - (-0.5 * q).exp() / 6.0)
}

fn check_time(tp: f64) -> Result<()> {
    if tp > 0.0 && tp.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimensionless time must be > 0, got {tp}")))
    }
}

struct Terms {
    prefactor: Complex64,
    zeta1: Complex64,
    zeta2: Complex64,
    w1: Complex64,
    w2: Complex64,
}

/// `zeta = i z` for both erfc arguments, and `w(zeta) - i/(sqrt(pi) zeta)`.
fn terms(xp: f64, tp: f64) -> Result<Terms> {
    check_time(tp)?;
    let i = Complex64::i();
    let one_minus_i = Complex64::new(1.0, -1.0);
    let st = tp.sqrt();
    let zeta1 = one_minus_i * (xp + i) / (2.0 * st);
    let zeta2 = one_minus_i * (2.0 * xp + i) / (4.0 * st);
    let ctx = |e: crate::specfun::SpecfunError| {
        Error::from(e).context(format!("backflow state at x'={xp}, t'={tp}"))
    };
    let w1 = faddeeva_reduced(zeta1).map_err(ctx)?;
    let w2 = faddeeva_reduced(zeta2).map_err(ctx)?;
    let prefactor =
        -18.0 / (70.0 * PI).sqrt() * (PI / (4.0 * tp * tp * tp)).sqrt() * Complex64::new(-1.0, 1.0);
    Ok(Terms {
        prefactor,
        zeta1,
        zeta2,
        w1,
        w2,
    })
}

/// Position wave function `Psi(x', t')`.
pub fn bm_position_state(xp: f64, tp: f64) -> Result<Complex64> {
    let s = terms(xp, tp)?;
    let i = Complex64::i();
    Ok(s.prefactor * ((xp + i) * s.w1 - (2.0 * xp + i) / 12.0 * s.w2))
}

/// `dPsi/dx'`, from `w'(z) = -2 z w(z) + 2i/sqrt(pi)`.
pub fn bm_position_state_dx(xp: f64, tp: f64) -> Result<Complex64> {
    let s = terms(xp, tp)?;
    let i = Complex64::i();
    let d1 = s.w1 * (1.0 - 2.0 * s.zeta1 * s.zeta1) + i * FRAC_1_SQRT_PI / s.zeta1;
    let d2 = s.w2 * (1.0 - 2.0 * s.zeta2 * s.zeta2) + i * FRAC_1_SQRT_PI / s.zeta2;
    Ok(s.prefactor * (d1 - d2 / 6.0))
}

/// Dimensionless current `Im(Psi* dPsi/dx')`.
pub fn bm_current(xp: f64, tp: f64) -> Result<f64> {
    let s = terms(xp, tp)?;
    let i = Complex64::i();
    let psi = (xp + i) * s.w1 - (2.0 * xp + i) / 12.0 * s.w2;
    let d1 = s.w1 * (1.0 - 2.0 * s.zeta1 * s.zeta1) + i * FRAC_1_SQRT_PI / s.zeta1;
    let d2 = s.w2 * (1.0 - 2.0 * s.zeta2 * s.zeta2) + i * FRAC_1_SQRT_PI / s.zeta2;
    Ok(s.prefactor.norm_sqr() * (psi.conj() * (d1 - d2 / 6.0)).im)
}

/// The current as a field on dimensionless `(t', x')`.
pub struct BackflowCurrent;

impl CurrentField for BackflowCurrent {
    fn current(&self, t: f64, x: f64) -> Result<f64> {
        bm_current(x, t)
    }
}

/// Where the detection window is centred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCenter {
    /// The numerically located zero of the current.
    LocatedZero,
    /// A fixed dimensionless time, such as [`REPORTED_T0_PRIME`].
    Reported(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionProbability {
    pub probability: f64,
    /// True when the window reached below `t' = 0` and was cut there.
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub target_p: f64,
    pub epsilon_s: f64,
    pub delta_t_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackflowResult {
    pub t0_prime: f64,
    pub t0_physical: f64,
    pub normalization: f64,
    pub t0_root: RootResult,
    pub distribution: ToaDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackflowOptions {
    pub bracket: (f64, f64),
    pub root_tol: f64,
    /// Lower limit of the normalization integral; `[0, floor]` is added as `floor |J(0, floor)|`.
    pub floor: f64,
    pub rel_tol: f64,
    pub scan: ScanOptions,
}

impl Default for BackflowOptions {
    fn default() -> Self {
        BackflowOptions {
            bracket: (1e-3, 0.5),
            root_tol: 1e-13,
            floor: 1e-6,
            rel_tol: 1e-10,
            scan: ScanOptions::default(),
        }
    }
}

/// `t0'`: zero of `J(0, .)` in `bracket`, which must be a sign change.
pub fn locate_t0(bracket: (f64, f64), tol: f64) -> Result<RootResult> {
    let trap = Trap::new();
    let f = |t: f64| trap.value(bm_current(0.0, t));
    let opts = RootOptions {
        tol,
        probe_points: 256,
        ..Default::default()
    };
    let root = trap.finish(find_zero_with(&f, bracket.0, bracket.1, &opts))?;
    if root.classification != ZeroKind::SignChange {
        return Err(Error::BackflowSignatureInvalid {
            location: root.location,
        });
    }
    Ok(root)
}

/// `int_0^inf |J(0, s)| ds`: integral from `floor` on, plus `floor |J(0, floor)|`
/// for the bounded early-time part.
pub fn normalization(opts: &BackflowOptions) -> Result<f64> {
    let trap = Trap::new();
    let r = integrate_abs_semi_infinite(
        |t| trap.value(bm_current(0.0, t)),
        opts.floor,
        &SemiInfiniteOptions {
            rel_tol: opts.rel_tol,
            initial_width: 1.0,
            ..Default::default()
        },
        &opts.scan,
    );
    let body = trap.finish(r)?.value;
    let head = opts.floor * bm_current(0.0, opts.floor)?.abs();
    Ok(body + head)
}

/// The located zero and normalization for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Backflow {
    pub frame: DimensionlessFrame,
    pub t0: RootResult,
    pub normalization: f64,
}

impl Backflow {
    pub fn new(frame: DimensionlessFrame) -> Result<Self> {
        Self::with_options(frame, &BackflowOptions::default())
    }

    pub fn with_options(frame: DimensionlessFrame, opts: &BackflowOptions) -> Result<Self> {
        let t0 = locate_t0(opts.bracket, opts.root_tol)?;
        let normalization = normalization(opts)?;
        Ok(Backflow {
            frame,
            t0,
            normalization,
        })
    }

    pub fn t0_prime(&self) -> f64 {
        self.t0.location
    }

    pub fn t0_physical(&self) -> f64 {
        self.frame.to_physical_t(self.t0.location)
    }

    pub fn center(&self, center: WindowCenter) -> f64 {
        match center {
            WindowCenter::LocatedZero => self.t0.location,
            WindowCenter::Reported(c) => c,
        }
    }

    /// Normalized distribution `Pi_0(t') = |J(0, t')| / N` on a dimensionless grid.
    pub fn toa_distribution(&self, grid: &[f64]) -> Result<ToaDistribution> {
        if grid.first().is_some_and(|t| *t <= 0.0) {
            return Err(Error::InvalidGrid("backflow grid must be positive".into()));
        }
        let dist = toa_from_current(&BackflowCurrent, 0.0, grid, &CurrentOptions::default())?;
        normalize_with(&dist, self.normalization)
    }

    pub fn result(&self, grid: &[f64]) -> Result<BackflowResult> {
        Ok(BackflowResult {
            t0_prime: self.t0_prime(),
            t0_physical: self.t0_physical(),
            normalization: self.normalization,
            t0_root: self.t0,
            distribution: self.toa_distribution(grid)?,
        })
    }

    /// `P_0 = int Pi_0` over `[c - eps', c + eps']`, dimensionless half-width.
    pub fn detection_probability(&self, eps_prime: f64, center: WindowCenter) -> Result<DetectionProbability> {
        if !(eps_prime > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {eps_prime}")));
        }
        let c = self.center(center);
        let lo_raw = c - eps_prime;
        let clipped = lo_raw < 0.0;
        if clipped {
            log::warn!("detection window [{lo_raw}, {}] clipped at t' = 0", c + eps_prime);
        }
        let lo = lo_raw.max(0.0);
        let hi = c + eps_prime;
        let t0 = self.t0.location;
        let mut cuts = vec![lo];
        if t0 > lo && t0 < hi {
            cuts.push(t0);
        }
        cuts.push(hi);
        let trap = Trap::new();
        // |J| vanishes at t0, where its rounding noise dominates; ask for
        // P_0 to 1e-17 absolute at most.
        let opts = IntegrationOptions::new(1e-12, 1e-17 * self.normalization / cuts.len() as f64);
        let mut mass = 0.0;
        for w in cuts.windows(2) {
            // J is bounded as t' -> 0; start a hair above 0 to avoid t' = 0 itself.
            let a = if w[0] == 0.0 { 1e-300 } else { w[0] };
            let r = integrate_finite_with(&|t| trap.value(bm_current(0.0, t)).abs(), a, w[1], &opts);
            mass += trap.finish(r)?.value;
        }
        Ok(DetectionProbability {
            probability: mass / self.normalization,
            clipped,
        })
    }

    /// Physical half-width `eps` (s) with `P_0(eps) = target`, and `delta t = eps / 10`.
    pub fn epsilon_for_probability(&self, target: f64, center: WindowCenter) -> Result<(f64, f64)> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::invalid(format!("target probability must lie in (0, 1), got {target}")));
        }
        const LO: f64 = 1e-12;
        const HI: f64 = 1e-3;
        let p = |eps_s: f64| -> Result<f64> {
            Ok(self
                .detection_probability(self.frame.to_dimensionless_t(eps_s), center)?
                .probability)
        };
        // Log-spaced scan for a bracket, then bisection in log(eps).
        let n = 19;
        let mut prev = (LO, p(LO)?);
        if prev.1 >= target {
            return Err(Error::TargetUnreachable { target, lo: LO, hi: HI });
        }
        let mut bracket = None;
        for i in 1..n {
            let e = LO * (HI / LO).powf(i as f64 / (n - 1) as f64);
            let v = p(e)?;
            if v >= target {
                bracket = Some((prev.0, e));
                break;
            }
            prev = (e, v);
        }
        let (mut a, mut b) = bracket.ok_or(Error::TargetUnreachable { target, lo: LO, hi: HI })?;
        while b / a - 1.0 > 1e-12 {
            let m = (a * b).sqrt();
            if p(m)? < target {
                a = m;
            } else {
                b = m;
            }
        }
        let eps = (a * b).sqrt();
        Ok((eps, eps / 10.0))
    }

    pub fn table(&self, center: WindowCenter) -> Result<Vec<TableRow>> {
        TABLE_TARGETS
            .iter()
            .map(|&target_p| {
                let (epsilon_s, delta_t_s) = self.epsilon_for_probability(target_p, center)?;
                Ok(TableRow {
                    target_p,
                    epsilon_s,
                    delta_t_s,
                })
            })
            .collect()
    }
}

/// Columns `t_prime, current, normalized_density`.
pub fn write_fig1_csv<W: Write>(dist: &ToaDistribution, w: W) -> Result<()> {
    let norm = dist.normalization.ok_or(Error::NotNormalized)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_prime", "current", "normalized_density"])?;
    for ((t, j), d) in dist.time_grid.iter().zip(&dist.signed_rate).zip(&dist.density) {
        out.write_record([format_float(*t), format_float(*j), format_float(d / norm)])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `target_P, epsilon_s, delta_t_s`.
pub fn write_table_csv<W: Write>(rows: &[TableRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["target_P", "epsilon_s", "delta_t_s"])?;
    for r in rows {
        out.write_record([format_float(r.target_p), format_float(r.epsilon_s), format_float(r.delta_t_s)])?;
    }
    out.flush()?;
    Ok(())
}
