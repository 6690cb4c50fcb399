//! The time-of-arrival transformation `pi_a(t) = |dF_t(a)/dt|` and the
//! distribution object shared by every scenario.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Trap};
use crate::quadrature::{
    differentiate_time_within, find_zero_with, integrate_finite_with, Derivative,
    IntegrationOptions, RootOptions, RootResult, ScanOptions, ZeroKind,
};

/// A time-dependent probability density `rho(t, a)` over observable values `a`.
///
/// Implementations must be safe to evaluate from several threads at once.
pub trait DensityField: Sync {
    fn density(&self, t: f64, a: f64) -> Result<f64>;

    /// Interval outside which the density is negligible at time `t`.
    fn value_bounds(&self, t: f64) -> (f64, f64);

    /// Times at which the field may be evaluated.
    fn time_bounds(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    /// Time over which the density at a fixed value changes appreciably;
    /// used as the initial differentiation step.
    fn time_scale(&self, _t: f64) -> Option<f64> {
        None
    }
}

/// A probability current `j(t, x)`; positive values carry probability towards +x.
pub trait CurrentField: Sync {
    fn current(&self, t: f64, x: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.min.is_finite() && self.max.is_finite()) {
            v.push(format!("grid bounds must be finite (min={}, max={})", self.min, self.max));
        }
        if self.min < 0.0 {
            v.push(format!("grid.min must be >= 0, got {}", self.min));
        }
        if !(self.max > self.min) {
            v.push(format!("grid.max ({}) must exceed grid.min ({})", self.max, self.min));
        }
        if self.count < 2 {
            v.push(format!("grid.count must be >= 2, got {}", self.count));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            v.push("log-spaced grid needs grid.min > 0".to_string());
        }
        v
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::InvalidParameters(v));
        }
        Ok(match self.spacing {
            Spacing::Uniform => uniform_grid(self.min, self.max, self.count),
            Spacing::Log => log_grid(self.min, self.max, self.count),
        })
    }
}

pub fn uniform_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    (0..n)
        .map(|i| match i {
            0 => min,
            _ if i == n - 1 => max,
            _ => min + (max - min) * i as f64 / (n - 1) as f64,
        })
        .collect()
}

pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    let (la, lb) = (min.ln(), max.ln());
    (0..n)
        .map(|i| match i {
            0 => min,
            _ if i == n - 1 => max,
            _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("need at least two grid times".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidGrid("grid times must be finite and >= 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToaDistribution {
    pub time_grid: Vec<f64>,
    /// Raw (unnormalized) density, per unit time.
    pub density: Vec<f64>,
    /// Signed rate the density is the modulus of: `-dF/dt`, or the current.
    pub signed_rate: Vec<f64>,
    /// Integral of the raw density over `[0, inf)`, once computed.
    pub normalization: Option<f64>,
    pub zeros: Vec<RootResult>,
    pub normalized: bool,
    /// Grid times where numerical differentiation did not settle.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nonsmooth_times: Vec<f64>,
}

impl ToaDistribution {
    pub fn from_signed(time_grid: Vec<f64>, signed_rate: Vec<f64>, zeros: Vec<RootResult>) -> Self {
        ToaDistribution {
            density: signed_rate.iter().map(|v| v.abs()).collect(),
            time_grid,
            signed_rate,
            normalization: None,
            zeros,
            normalized: false,
            nonsmooth_times: Vec::new(),
        }
    }

    /// Density divided by the normalization, when one is known.
    pub fn normalized_density(&self) -> Option<Vec<f64>> {
        self.normalization
            .map(|n| self.density.iter().map(|d| d / n).collect())
    }

    /// The density in the distribution's current convention.
    pub fn values(&self) -> Vec<f64> {
        match (self.normalized, self.normalization) {
            (true, Some(n)) => self.density.iter().map(|d| d / n).collect(),
            _ => self.density.clone(),
        }
    }

    pub fn peak(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Never-arrival probability `1 - normalization`. Heuristic: only
    /// meaningful when the raw density is itself a probability density in time.
    pub fn never_arrival_heuristic(&self) -> Option<f64> {
        self.normalization.map(|n| 1.0 - n)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "density", "normalized_density"])?;
        let normed = self.normalized_density();
        for (i, (t, d)) in self.time_grid.iter().zip(&self.density).enumerate() {
            let n = normed.as_ref().map(|v| format_float(v[i])).unwrap_or_default();
            out.write_record([format_float(*t), format_float(*d), n])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Output(e.to_string()))
    }
}

/// Shortest round-trip decimal form; exponent notation outside `[1e-4, 1e16)`.
pub fn format_float(x: f64) -> String {
    let ax = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&ax) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfOptions {
    pub rel_tol: f64,
    /// Initial differentiation step; defaults to the field's time scale or a
    /// two-hundredth of the grid span.
    pub h0: Option<f64>,
    /// Allowed departure of the CDF (and total mass) from `[0, 1]`.
    pub cdf_slack: f64,
    pub locate_zeros: bool,
}

impl Default for CdfOptions {
    fn default() -> Self {
        CdfOptions {
            rel_tol: 1e-13,
            h0: None,
            cdf_slack: 1e-6,
            locate_zeros: true,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

/// Mass on one side of `a` at time `t`.
fn side_mass<D: DensityField + ?Sized>(
    field: &D,
    t: f64,
    a: f64,
    side: Side,
    opts: &IntegrationOptions,
) -> Result<f64> {
    let (lo, hi) = field.value_bounds(t);
    let (from, to) = match side {
        Side::Lower => (lo, a.min(hi)),
        Side::Upper => (a.max(lo), hi),
    };
    if !(to > from) {
        return Ok(0.0);
    }
    let trap = Trap::new();
    let r = integrate_finite_with(&|x| trap.value(field.density(t, x)), from, to, opts);
    let v = trap.finish(r)?.value;
    Ok(v)
}

/// `F_t(a)` and the signed time derivative `dF_t(a)/dt`.
///
/// The side of `a` holding less mass is integrated and differentiated, so the
/// absolute error scales with the small side rather than with 1.
fn cdf_rate<D: DensityField + ?Sized>(
    field: &D,
    a: f64,
    t: f64,
    h0: f64,
    opts: &CdfOptions,
) -> Result<(f64, Derivative)> {
    let int_opts = IntegrationOptions {
        rel_tol: opts.rel_tol,
        abs_tol: 1e-300,
        max_evaluations: 400_000,
    };
    let lower = side_mass(field, t, a, Side::Lower, &int_opts)?;
    let upper = side_mass(field, t, a, Side::Upper, &int_opts)?;
    let total = lower + upper;
    if (total - 1.0).abs() > opts.cdf_slack {
        return Err(Error::DensityInvalid {
            t,
            reason: format!("total mass {total} differs from 1"),
        });
    }
    if lower < -opts.cdf_slack || lower > 1.0 + opts.cdf_slack {
        return Err(Error::DensityInvalid {
            t,
            reason: format!("CDF value {lower} outside [0, 1]"),
        });
    }
    let side = if lower <= upper { Side::Lower } else { Side::Upper };
    let (tlo, thi) = field.time_bounds();
    let trap = Trap::new();
    let g = |s: f64| trap.value(side_mass(field, s, a, side, &int_opts));
    let d = trap.finish(differentiate_time_within(g, t, h0, tlo, thi))?;
    let d = match side {
        Side::Lower => d,
        Side::Upper => Derivative {
            value: -d.value,
            ..d
        },
    };
    Ok((lower, d))
}

/// TOA density `|dF_t(a)/dt|` on `time_grid`, with `F` obtained by
/// integrating the density field.
pub fn toa_from_cdf<D: DensityField + ?Sized>(
    field: &D,
    a: f64,
    time_grid: &[f64],
    opts: &CdfOptions,
) -> Result<ToaDistribution> {
    check_grid(time_grid)?;
    let span = time_grid[time_grid.len() - 1] - time_grid[0];
    let step = |t: f64| {
        opts.h0
            .or_else(|| field.time_scale(t).map(|s| 0.1 * s))
            .unwrap_or(span / 200.0)
    };
    let rates: Vec<(f64, Derivative)> = time_grid
        .par_iter()
        .map(|&t| cdf_rate(field, a, t, step(t), opts))
        .collect::<Result<_>>()?;
    let signed: Vec<f64> = rates.iter().map(|(_, d)| -d.value).collect();
    let nonsmooth_times = time_grid
        .iter()
        .zip(&rates)
        .filter(|(_, (_, d))| !d.smooth)
        .map(|(t, _)| *t)
        .collect();
    let mut zeros = Vec::new();
    if opts.locate_zeros {
        let (tlo, thi) = field.time_bounds();
        for i in bracket_indices(&signed) {
            let (l, r) = (time_grid[i], time_grid[i + 1]);
            let trap = Trap::new();
            let f = |t: f64| {
                trap.value(cdf_rate(field, a, t.clamp(tlo, thi), step(t), opts).map(|(_, d)| d.value))
            };
            let root = trap.finish(find_zero_with(&f, l, r, &zero_options(l, r)))?;
            zeros.push(root);
        }
    }
    let mut dist = ToaDistribution::from_signed(time_grid.to_vec(), signed, zeros);
    dist.nonsmooth_times = nonsmooth_times;
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurrentOptions {
    /// Extra sign scan over the grid span, for zeros the grid itself is too coarse to see.
    pub scan: Option<ScanOptions>,
}

/// TOA density `|j_t(x)|` on `time_grid`. Assumes `j_t(x) -> 0` on the far
/// side of the detector, so the current alone accounts for the CDF change.
pub fn toa_from_current<C: CurrentField + ?Sized>(
    field: &C,
    x: f64,
    time_grid: &[f64],
    opts: &CurrentOptions,
) -> Result<ToaDistribution> {
    check_grid(time_grid)?;
    let signed: Vec<f64> = time_grid
        .par_iter()
        .map(|&t| field.current(t, x))
        .collect::<Result<_>>()?;
    let trap = Trap::new();
    let j = |t: f64| trap.value(field.current(t, x));
    let mut brackets: Vec<(f64, f64)> = bracket_indices(&signed)
        .into_iter()
        .map(|i| (time_grid[i], time_grid[i + 1]))
        .collect();
    if let Some(scan) = opts.scan {
        let extra = trap.finish(crate::quadrature::sign_scan(
            &j,
            time_grid[0],
            time_grid[time_grid.len() - 1],
            &scan,
        ))?;
        brackets = merge_brackets(brackets, extra);
    }
    let mut zeros = Vec::with_capacity(brackets.len());
    for (l, r) in brackets {
        zeros.push(trap.finish(find_zero_with(&j, l, r, &zero_options(l, r)))?);
    }
    zeros.sort_by(|a, b| a.location.total_cmp(&b.location));
    zeros.dedup_by(|a, b| (a.location - b.location).abs() <= a.bracket_width.max(b.bracket_width));
    Ok(ToaDistribution::from_signed(time_grid.to_vec(), signed, zeros))
}

fn zero_options(l: f64, r: f64) -> RootOptions {
    RootOptions {
        tol: (1e-12 * r.abs()).max(1e-15 * (r - l)).max(f64::MIN_POSITIVE),
        ..Default::default()
    }
}

/// Indices `i` with a sign change between `v[i]` and `v[i+1]`, skipping exact zeros.
fn bracket_indices(v: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for i in 0..v.len() {
        if v[i] == 0.0 {
            continue;
        }
        if let Some(l) = last {
            if (v[l] < 0.0) != (v[i] < 0.0) {
                out.push(i - 1);
            }
        }
        last = Some(i);
    }
    out
}

/// Adds scan brackets not already covered by grid brackets.
fn merge_brackets(mut grid: Vec<(f64, f64)>, scan: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    for s in scan {
        if !grid.iter().any(|g| s.0 < g.1 && g.0 < s.1) {
            grid.push(s);
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    grid
}

/// Local model of the density beyond the last grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    Vanishing,
    Exponential { rate: f64 },
    PowerLaw { exponent: f64 },
}

impl TailModel {
    /// Picks whichever of the two models fitted to the last two points better
    /// predicts the third-to-last.
    pub fn fit(t: &[f64], d: &[f64]) -> TailModel {
        let n = t.len();
        if n < 3 || d[n - 1] <= 0.0 || d[n - 2] <= 0.0 {
            return TailModel::Vanishing;
        }
        let (t1, t2, t3) = (t[n - 3], t[n - 2], t[n - 1]);
        let (d1, d2, d3) = (d[n - 3], d[n - 2], d[n - 1]);
        let ratio = (d3 / d2).ln();
        let rate = -ratio / (t3 - t2);
        let exp_pred = d2 * (rate * (t2 - t1)).exp();
        let power = if t2 > 0.0 && t1 > 0.0 {
            let exponent = ratio / (t3 / t2).ln();
            Some((exponent, d2 * (t1 / t2).powf(exponent)))
        } else {
            None
        };
        let exp_err = (exp_pred / d1).ln().abs();
        match power {
            Some((exponent, pred)) if (pred / d1).ln().abs() < exp_err => {
                TailModel::PowerLaw { exponent }
            }
            _ => TailModel::Exponential { rate },
        }
    }

    /// `int_T^inf t^order d(t) dt` given `d(T) = value`, or `None` if divergent.
    pub fn moment_tail(&self, big_t: f64, value: f64, order: u32) -> Option<f64> {
        match *self {
            TailModel::Vanishing => Some(0.0),
            TailModel::Exponential { rate } if rate > 0.0 => {
                let k = rate;
                Some(match order {
                    0 => value / k,
                    1 => value * (big_t / k + 1.0 / (k * k)),
                    _ => value * (big_t * big_t / k + 2.0 * big_t / (k * k) + 2.0 / (k * k * k)),
                })
            }
            TailModel::PowerLaw { exponent } => {
                let p = exponent + order as f64 + 1.0;
                if p < 0.0 {
                    Some(value * big_t.powi(order as i32 + 1) / -p)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// `int t^order d(t) dt` over the covered region: head below the first grid
/// point, trapezoid over the grid, and the fitted tail.
fn grid_moment(t: &[f64], d: &[f64], order: u32) -> std::result::Result<f64, f64> {
    let w = |i: usize| t[i].powi(order as i32) * d[i];
    let mut sum = 0.0;
    for i in 0..t.len() - 1 {
        sum += 0.5 * (t[i + 1] - t[i]) * (w(i) + w(i + 1));
    }
    // Constant density on [0, t0].
    let head = d[0] * t[0].powi(order as i32 + 1) / (order as f64 + 1.0);
    let n = t.len() - 1;
    let model = TailModel::fit(t, d);
    match model.moment_tail(t[n], d[n], order) {
        Some(tail) => Ok(head + sum + tail),
        None => Err(match model {
            TailModel::PowerLaw { exponent } => exponent,
            _ => f64::INFINITY,
        }),
    }
}

/// Divides by the integral of the raw density over `[0, inf)`, estimated from
/// the grid (trapezoid, constant head, fitted tail).
pub fn normalize(dist: &ToaDistribution) -> Result<ToaDistribution> {
    let norm = grid_moment(&dist.time_grid, &dist.density, 0)
        .map_err(|_| Error::CannotNormalize(f64::INFINITY))?;
    normalize_with(dist, norm)
}

/// Normalizes with an externally computed integral of the raw density.
pub fn normalize_with(dist: &ToaDistribution, normalization: f64) -> Result<ToaDistribution> {
    if !(normalization.is_finite() && normalization > 0.0) {
        return Err(Error::CannotNormalize(normalization));
    }
    let mut out = dist.clone();
    out.normalization = Some(normalization);
    out.normalized = true;
    Ok(out)
}

/// Trapezoid integral of the normalized density over the grid alone.
pub fn grid_mass(dist: &ToaDistribution) -> f64 {
    let v = dist.values();
    dist.time_grid
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] + d[1]))
        .sum()
}

/// Mean and standard deviation of a normalized distribution.
pub fn moments(dist: &ToaDistribution) -> Result<(f64, f64)> {
    if !dist.normalized {
        return Err(Error::NotNormalized);
    }
    let v = dist.values();
    let t = &dist.time_grid;
    let m0 = grid_moment(t, &v, 0).map_err(|e| Error::DivergentMoment { order: 0, exponent: e })?;
    let m1 = grid_moment(t, &v, 1).map_err(|e| Error::DivergentMoment { order: 1, exponent: e })?;
    let m2 = grid_moment(t, &v, 2).map_err(|e| Error::DivergentMoment { order: 2, exponent: e })?;
    // Renormalize by the covered mass so grid truncation does not bias the mean.
    let mean = m1 / m0;
    let var = (m2 / m0 - mean * mean).max(0.0);
    Ok((mean, var.sqrt()))
}

/// Zero classification soundness: every sign-change zero has a signed rate of
/// opposite signs on either side within its bracket.
pub fn sign_change_zeros(dist: &ToaDistribution) -> impl Iterator<Item = &RootResult> {
    dist.zeros
        .iter()
        .filter(|z| z.classification == ZeroKind::SignChange)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Gaussian in `a` with mean `mu0 + v t` and fixed width.
    struct Drifting {
        mu0: f64,
        v: f64,
        sigma: f64,
    }

    impl DensityField for Drifting {
        fn density(&self, t: f64, a: f64) -> Result<f64> {
            let z = (a - self.mu0 - self.v * t) / self.sigma;
            Ok((-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt()))
        }
        fn value_bounds(&self, t: f64) -> (f64, f64) {
            let mu = self.mu0 + self.v * t;
            (mu - 40.0 * self.sigma, mu + 40.0 * self.sigma)
        }
        fn time_bounds(&self) -> (f64, f64) {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    #[test]
    fn unit_drift_peak() {
        let f = Drifting { mu0: 0.0, v: 1.0, sigma: 1.0 };
        let grid = uniform_grid(0.0, 4.0, 9);
        let d = toa_from_cdf(&f, 0.0, &grid, &CdfOptions::default()).unwrap();
        for (t, v) in grid.iter().zip(&d.density) {
            let exact = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
            assert!((v - exact).abs() < 1e-9 * exact.max(1e-3), "{t} {v} {exact}");
        }
        assert!((d.density[0] - 0.398_942_280_401_432_7).abs() < 1e-9);
    }

    #[test]
    fn static_field_has_zero_density() {
        let f = Drifting { mu0: 0.3, v: 0.0, sigma: 1.0 };
        let d = toa_from_cdf(&f, 0.0, &uniform_grid(0.0, 1.0, 5), &CdfOptions::default()).unwrap();
        assert!(d.density.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn bad_field_rejected() {
        struct Half;
        impl DensityField for Half {
            fn density(&self, _t: f64, a: f64) -> Result<f64> {
                Ok(if (0.0..0.5).contains(&a) { 1.0 } else { 0.0 })
            }
            fn value_bounds(&self, _t: f64) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        assert!(matches!(
            toa_from_cdf(&Half, 0.2, &[0.0, 1.0], &CdfOptions::default()),
            Err(Error::DensityInvalid { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        struct Zero;
        impl CurrentField for Zero {
            fn current(&self, _t: f64, _x: f64) -> Result<f64> {
                Ok(0.0)
            }
        }
        assert!(toa_from_current(&Zero, 0.0, &[0.0, 0.0], &Default::default()).is_err());
        assert!(toa_from_current(&Zero, 0.0, &[-1.0, 1.0], &Default::default()).is_err());
        let d = toa_from_current(&Zero, 0.0, &[0.0, 1.0], &Default::default()).unwrap();
        assert!(matches!(normalize(&d), Err(Error::CannotNormalize(_))));
    }

    #[test]
    fn normalize_uniform_block() {
        let grid = uniform_grid(0.0, 2.0, 2001);
        let signed: Vec<f64> = grid.iter().map(|&t| if t <= 1.0 { 0.25 } else { 0.0 }).collect();
        let d = normalize(&ToaDistribution::from_signed(grid.clone(), signed, vec![])).unwrap();
        let v = d.values();
        assert!((v[0] - 1.0).abs() < 1e-3 && (v[999] - 1.0).abs() < 1e-3);
        assert_eq!(v[1500], 0.0);
    }

    #[test]
    fn normalize_is_idempotent_on_normalized_gaussian() {
        let grid = uniform_grid(0.0, 20.0, 2001);
        let signed: Vec<f64> = grid
            .iter()
            .map(|t| (-0.5 * (t - 10.0) * (t - 10.0)).exp() / (2.0 * PI).sqrt())
            .collect();
        let d = normalize(&ToaDistribution::from_signed(grid, signed.clone(), vec![])).unwrap();
        for (a, b) in d.values().iter().zip(&signed) {
            assert!((a - b).abs() < 1e-12);
        }
        let (mean, std) = moments(&d).unwrap();
        assert!((mean - 10.0).abs() < 1e-6 && (std - 1.0).abs() < 1e-6);
    }

    #[test]
    fn heavy_tail_second_moment_diverges() {
        let grid = log_grid(1.0, 1e3, 400);
        let signed: Vec<f64> = grid.iter().map(|t| 1.5 * t.powf(-2.5)).collect();
        let d = normalize(&ToaDistribution::from_signed(grid, signed, vec![])).unwrap();
        // Constant head on [0, 1] plus unit mass in the power-law part.
        assert!((d.normalization.unwrap() - 2.5).abs() < 1e-3);
        assert!(matches!(moments(&d), Err(Error::DivergentMoment { order: 2, .. })));
        assert!(matches!(
            moments(&ToaDistribution::from_signed(vec![0.0, 1.0], vec![1.0, 1.0], vec![])),
            Err(Error::NotNormalized)
        ));
    }

    #[test]
    fn csv_and_json_layout() {
        let d = ToaDistribution::from_signed(vec![0.0, 0.5], vec![-2.0, 1e-7], vec![]);
        let d = normalize_with(&d, 2.0).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "t,density,normalized_density\n0,2,1\n0.5,1e-7,5e-8\n");
        let j: serde_json::Value = serde_json::from_str(&d.to_json().unwrap()).unwrap();
        assert_eq!(j["normalization"], 2.0);
        assert!(j["zeros"].as_array().unwrap().is_empty());
    }

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, 2.5e-5, 123456.789, -7.25e20] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
