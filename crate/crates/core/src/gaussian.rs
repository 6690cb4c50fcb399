//! Closed-form TOA densities for observables with Gaussian distributions,
//! including a particle in a uniform gravitational field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distribution::{CurrentField, DensityField};
use crate::error::{Error, Result};

/// SI parameters of a Gaussian scenario. `g = 0` describes a free particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    #[serde(default)]
    pub g: f64,
    /// Initial position spread.
    pub sigma: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub v0: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, g: f64, sigma: f64, x0: f64, v0: f64) -> Result<Self> {
        let p = PhysicalParams {
            hbar,
            mass,
            g,
            sigma,
            x0,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let fields = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("g", self.g),
            ("sigma", self.sigma),
            ("x0", self.x0),
            ("v0", self.v0),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                v.push(format!("{name} must be finite, got {value}"));
            }
        }
        if !(self.hbar > 0.0) {
            v.push(format!("hbar must be > 0, got {}", self.hbar));
        }
        if !(self.mass > 0.0) {
            v.push(format!("mass must be > 0, got {}", self.mass));
        }
        if !(self.sigma > 0.0) {
            v.push(format!("sigma must be > 0, got {}", self.sigma));
        }
        if self.g < 0.0 {
            v.push(format!("g must be >= 0, got {}", self.g));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(v))
        }
    }

    pub fn p0(&self) -> f64 {
        self.mass * self.v0
    }

    /// Momentum spread `hbar / (2 sigma)`.
    pub fn sigma_p(&self) -> f64 {
        self.hbar / (2.0 * self.sigma)
    }

    fn require_gravity(&self) -> Result<()> {
        if self.g > 0.0 {
            Ok(())
        } else {
            Err(Error::Degenerate(
                "g = 0: the classical momentum never reaches a value other than p0".into(),
            ))
        }
    }
}

/// Mean and width of a Gaussian observable as functions of time, with
/// analytic time derivatives.
pub trait GaussianMoments: Sync {
    fn mu(&self, t: f64) -> f64;
    fn sigma(&self, t: f64) -> f64;
    fn dmu_dt(&self, t: f64) -> f64;
    fn dsigma_dt(&self, t: f64) -> f64;
}

/// `mu(t) = mu0 + rate t`, constant width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMoments {
    pub mu0: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl GaussianMoments for LinearMoments {
    fn mu(&self, t: f64) -> f64 {
        self.mu0 + self.rate * t
    }
    fn sigma(&self, _t: f64) -> f64 {
        self.sigma
    }
    fn dmu_dt(&self, _t: f64) -> f64 {
        self.rate
    }
    fn dsigma_dt(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Position of a Gaussian packet released at `x0` with velocity `v0` in a
/// uniform field `g`; `g = 0` gives the free packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFallPosition {
    pub params: PhysicalParams,
}

impl FreeFallPosition {
    /// `hbar / (2 m sigma^2)`, the rate at which the packet spreads.
    fn spread_rate(&self) -> f64 {
        let p = &self.params;
        p.hbar / (2.0 * p.mass * p.sigma * p.sigma)
    }
}

impl GaussianMoments for FreeFallPosition {
    fn mu(&self, t: f64) -> f64 {
        let p = &self.params;
        p.x0 + p.v0 * t + 0.5 * p.g * t * t
    }
    fn sigma(&self, t: f64) -> f64 {
        let w = self.spread_rate() * t;
        self.params.sigma * w.hypot(1.0)
    }
    fn dmu_dt(&self, t: f64) -> f64 {
        self.params.v0 + self.params.g * t
    }
    fn dsigma_dt(&self, t: f64) -> f64 {
        let r = self.spread_rate();
        let w = r * t;
        self.params.sigma * r * w / w.hypot(1.0)
    }
}

/// Momentum in the same scenario: `p_c(t) = m g t + m v0`, width `hbar / (2 sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFallMomentum {
    pub params: PhysicalParams,
}

impl GaussianMoments for FreeFallMomentum {
    fn mu(&self, t: f64) -> f64 {
        let p = &self.params;
        p.mass * p.g * t + p.mass * p.v0
    }
    fn sigma(&self, _t: f64) -> f64 {
        self.params.sigma_p()
    }
    fn dmu_dt(&self, _t: f64) -> f64 {
        self.params.mass * self.params.g
    }
    fn dsigma_dt(&self, _t: f64) -> f64 {
        0.0
    }
}

pub fn freefall_position_moments(params: PhysicalParams) -> Result<FreeFallPosition> {
    params.validate()?;
    Ok(FreeFallPosition { params })
}

pub fn freefall_momentum_moments(params: PhysicalParams) -> Result<FreeFallMomentum> {
    params.validate()?;
    Ok(FreeFallMomentum { params })
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `pi_a(t) = phi((a - mu)/sigma) |d/dt (a - mu)/sigma|`.
pub fn gaussian_toa_density<M: GaussianMoments + ?Sized>(moments: &M, a: f64, t: f64) -> f64 {
    let mu = moments.mu(t);
    let s = moments.sigma(t);
    let z = (a - mu) / s;
    let dz = (-moments.dmu_dt(t) * s - (a - mu) * moments.dsigma_dt(t)) / (s * s);
    normal_pdf(z) * dz.abs()
}

/// Signed rate `-dF_t(a)/dt` for the same Gaussian; its modulus is the density.
pub fn gaussian_signed_rate<M: GaussianMoments + ?Sized>(moments: &M, a: f64, t: f64) -> f64 {
    let mu = moments.mu(t);
    let s = moments.sigma(t);
    let z = (a - mu) / s;
    let dz = (-moments.dmu_dt(t) * s - (a - mu) * moments.dsigma_dt(t)) / (s * s);
    -normal_pdf(z) * dz
}

/// Momentum TOA density `pi_p(t) = m g rho_t(p)`: Gaussian in `t` with mean
/// `(p - m v0)/(m g)` and width `hbar / (2 m g sigma)`.
pub fn freefall_momentum_density(params: &PhysicalParams, p: f64, t: f64) -> Result<f64> {
    params.validate()?;
    params.require_gravity()?;
    let mg = params.mass * params.g;
    let tp = (p - params.p0()) / mg;
    let tau = params.hbar / (2.0 * mg * params.sigma);
    Ok(normal_pdf((t - tp) / tau) / tau)
}

/// Mean and standard deviation of the time at which the velocity reaches `v`.
pub fn freefall_velocity_toa_stats(params: &PhysicalParams, v: f64) -> Result<(f64, f64)> {
    params.validate()?;
    params.require_gravity()?;
    let mean = (v - params.v0) / params.g;
    let std = params.hbar / (2.0 * params.mass * params.g * params.sigma);
    Ok((mean, std))
}

/// The Gaussian density `N(mu(t), sigma(t)^2)` as a field over observable values.
///
/// Its current `rho (mu' + (a - mu) sigma'/sigma)` satisfies the continuity
/// equation for any Gaussian family.
pub struct GaussianField<M> {
    pub moments: M,
    /// Half-width of the value bounds, in units of `sigma(t)`.
    pub width: f64,
}

impl<M: GaussianMoments> GaussianField<M> {
    pub fn new(moments: M) -> Self {
        GaussianField {
            moments,
            width: 40.0,
        }
    }
}

impl<M: GaussianMoments> DensityField for GaussianField<M> {
    fn density(&self, t: f64, a: f64) -> Result<f64> {
        let s = self.moments.sigma(t);
        Ok(normal_pdf((a - self.moments.mu(t)) / s) / s)
    }

    fn value_bounds(&self, t: f64) -> (f64, f64) {
        let mu = self.moments.mu(t);
        let w = self.width * self.moments.sigma(t);
        (mu - w, mu + w)
    }

    fn time_bounds(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn time_scale(&self, t: f64) -> Option<f64> {
        let s = self.moments.sigma(t);
        let a = s / self.moments.dmu_dt(t).abs();
        let b = s / self.moments.dsigma_dt(t).abs();
        let m = a.min(b);
        m.is_finite().then_some(m)
    }
}

impl<M: GaussianMoments> CurrentField for GaussianField<M> {
    fn current(&self, t: f64, x: f64) -> Result<f64> {
        let mu = self.moments.mu(t);
        let s = self.moments.sigma(t);
        let v = self.moments.dmu_dt(t) + (x - mu) * self.moments.dsigma_dt(t) / s;
        Ok(self.density(t, x)? * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 0.5, 0.0, 0.0).unwrap()
    }

    #[test]
    fn standard_normal_peak() {
        let m = LinearMoments { mu0: 0.0, rate: 1.0, sigma: 1.0 };
        assert!((gaussian_toa_density(&m, 0.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let m = LinearMoments { mu0: 0.4, rate: 0.0, sigma: 1.0 };
        assert_eq!(gaussian_toa_density(&m, 0.0, 2.0), 0.0);
    }

    #[test]
    fn validation_lists_every_violation() {
        match PhysicalParams::new(-1.0, 0.0, -2.0, 0.0, 0.0, 0.0) {
            Err(Error::InvalidParameters(v)) => assert_eq!(v.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn position_moments_initial_and_free() {
        let p = PhysicalParams::new(1.0, 2.0, 9.8, 0.3, 1.5, -0.2).unwrap();
        let m = freefall_position_moments(p).unwrap();
        assert_eq!(m.mu(0.0), 1.5);
        assert_eq!(m.sigma(0.0), 0.3);
        let free = freefall_position_moments(PhysicalParams { g: 0.0, x0: 0.0, v0: 0.0, ..p }).unwrap();
        for &t in &[0.0, 0.1, 1.0, 7.0] {
            assert_eq!(free.mu(t), 0.0);
            let expect = 0.3 * (1.0 + t * t / (4.0 * 4.0 * 0.3_f64.powi(4))).sqrt();
            assert!((free.sigma(t) - expect).abs() < 1e-14 * expect);
        }
        // Very wide packet barely spreads.
        let wide = freefall_position_moments(PhysicalParams { sigma: 1e6, ..p }).unwrap();
        assert!((wide.sigma(100.0) / 1e6 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let p = PhysicalParams::new(1.0, 0.7, 3.0, 0.2, 0.1, 0.4).unwrap();
        let m = freefall_position_moments(p).unwrap();
        let h = 1e-5;
        for &t in &[0.0, 0.05, 0.8, 3.0] {
            let dmu = (m.mu(t + h) - m.mu(t - h)) / (2.0 * h);
            let ds = (m.sigma(t + h) - m.sigma(t - h)) / (2.0 * h);
            assert!((dmu - m.dmu_dt(t)).abs() <= 1e-8 * dmu.abs().max(1.0));
            assert!((ds - m.dsigma_dt(t)).abs() <= 1e-8 * ds.abs().max(1.0));
        }
    }

    #[test]
    fn momentum_density_unit_parameters() {
        let p = unit();
        let peak = freefall_momentum_density(&p, 2.0, 2.0).unwrap();
        assert!((peak - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let (mean, std) = freefall_velocity_toa_stats(&p, 2.0).unwrap();
        assert_eq!((mean, std), (2.0, 1.0));
        let wider = PhysicalParams { sigma: 1.0, ..p };
        assert_eq!(freefall_velocity_toa_stats(&wider, 2.0).unwrap().1, 0.5);
        let g = PhysicalParams { g: 9.8, ..p };
        assert!((freefall_velocity_toa_stats(&g, 9.8).unwrap().0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_gravity_is_degenerate() {
        let p = PhysicalParams { g: 0.0, ..unit() };
        assert!(matches!(freefall_momentum_density(&p, 1.0, 1.0), Err(Error::Degenerate(_))));
        assert!(matches!(freefall_velocity_toa_stats(&p, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn momentum_density_is_mg_rho() {
        let p = PhysicalParams::new(1.3, 0.8, 2.1, 0.4, 0.0, 0.3).unwrap();
        let m = freefall_momentum_moments(p).unwrap();
        let field = GaussianField::new(m);
        let pv = 1.7;
        for i in 0..50 {
            let t = 0.05 * i as f64;
            let a = freefall_momentum_density(&p, pv, t).unwrap();
            let b = gaussian_toa_density(&m, pv, t);
            let c = p.mass * p.g * field.density(t, pv).unwrap();
            if a > 1e-300 {
                assert!((a - b).abs() <= 1e-12 * a, "{t}");
                assert!((a - c).abs() <= 1e-12 * a, "{t}");
            }
        }
    }
}
