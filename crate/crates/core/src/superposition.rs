//! Current of a superposition of two wave packets, written through each
//! packet's real and imaginary phase so that no derivative of the full wave
//! function is ever taken numerically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distribution::{
    normalize_with, toa_from_current, CurrentField, CurrentOptions, DensityField, ToaDistribution,
};
use crate::error::{Error, Result, Trap};
use crate::gaussian::PhysicalParams;
use crate::quadrature::{
    integrate_abs_semi_infinite, integrate_finite_with, IntegrationOptions, ScanOptions,
    SemiInfiniteOptions,
};

/// A packet `psi = exp(phi + i varphi)` given by its log-amplitude `phi` and
/// phase `varphi`, with analytic spatial derivatives.
pub trait PacketPhase: Sync {
    fn phi(&self, x: f64, t: f64) -> Result<f64>;
    fn varphi(&self, x: f64, t: f64) -> Result<f64>;
    fn dphi_dx(&self, x: f64, t: f64) -> Result<f64>;
    fn dvarphi_dx(&self, x: f64, t: f64) -> Result<f64>;
    fn hbar_over_m(&self) -> f64;
    /// Interval holding essentially all of `|psi|^2` at time `t`.
    fn support(&self, t: f64) -> (f64, f64);
    /// Shortest time over which the packet changes appreciably near `t`.
    fn time_scale(&self, _t: f64) -> Option<f64> {
        None
    }
    /// Angular frequency `hbar k^2 / 2m` of the carrier, if any.
    fn carrier_frequency(&self) -> f64 {
        0.0
    }
}

/// `(u, v, rho)`: amplitude velocity `hbar/m dphi/dx`, phase velocity
/// `hbar/m dvarphi/dx` and density `exp(2 phi)`.
pub fn packet_velocities<P: PacketPhase + ?Sized>(p: &P, x: f64, t: f64) -> Result<(f64, f64, f64)> {
    let k = p.hbar_over_m();
    Ok((
        k * p.dphi_dx(x, t)?,
        k * p.dvarphi_dx(x, t)?,
        (2.0 * p.phi(x, t)?).exp(),
    ))
}

/// Freely evolving Gaussian packet of initial width `sigma`, centre `a` and
/// wave number `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeGaussianPacket {
    pub hbar: f64,
    pub mass: f64,
    pub a: f64,
    pub k: f64,
    pub sigma: f64,
}

struct Evolved {
    /// `lambda(t)^2 = hbar t / m`
    lambda2: f64,
    /// `sigma(t)^2`
    width2: f64,
    centre: f64,
}

impl FreeGaussianPacket {
    fn evolved(&self, t: f64) -> Result<Evolved> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("packet time must be >= 0, got {t}")));
        }
        let lambda2 = self.hbar * t / self.mass;
        let s2 = self.sigma * self.sigma;
        Ok(Evolved {
            lambda2,
            width2: s2 + lambda2 * lambda2 / (4.0 * s2),
            centre: self.a + self.hbar * self.k * t / self.mass,
        })
    }

    pub fn width(&self, t: f64) -> Result<f64> {
        Ok(self.evolved(t)?.width2.sqrt())
    }

    pub fn centre(&self, t: f64) -> Result<f64> {
        Ok(self.evolved(t)?.centre)
    }
}

pub fn free_gaussian_packet(
    params: &PhysicalParams,
    a_j: f64,
    k_j: f64,
    sigma_j: f64,
) -> Result<FreeGaussianPacket> {
    let mut v = Vec::new();
    if !(params.hbar > 0.0) {
        v.push(format!("hbar must be > 0, got {}", params.hbar));
    }
    if !(params.mass > 0.0) {
        v.push(format!("mass must be > 0, got {}", params.mass));
    }
    if !(sigma_j > 0.0 && sigma_j.is_finite()) {
        v.push(format!("packet sigma must be > 0, got {sigma_j}"));
    }
    if !(a_j.is_finite() && k_j.is_finite()) {
        v.push(format!("packet centre and wave number must be finite (a={a_j}, k={k_j})"));
    }
    if !v.is_empty() {
        return Err(Error::InvalidParameters(v));
    }
    Ok(FreeGaussianPacket {
        hbar: params.hbar,
        mass: params.mass,
        a: a_j,
        k: k_j,
        sigma: sigma_j,
    })
}

impl PacketPhase for FreeGaussianPacket {
    fn phi(&self, x: f64, t: f64) -> Result<f64> {
        let e = self.evolved(t)?;
        let d = x - e.centre;
        Ok(-d * d / (4.0 * e.width2) - 0.25 * (2.0 * PI * e.width2).ln())
    }

    fn varphi(&self, x: f64, t: f64) -> Result<f64> {
        let e = self.evolved(t)?;
        let d = x - e.centre;
        let ratio = self.sigma / e.width2.sqrt();
        debug_assert!(ratio > 0.0 && ratio <= 1.0 + 1e-15);
        let chi = ratio.min(1.0).acos();
        let s2 = self.sigma * self.sigma;
        Ok(e.lambda2 * d * d / (8.0 * s2 * e.width2) + self.k * x
            - 0.5 * self.k * self.k * e.lambda2
            - 0.5 * chi)
    }

    fn dphi_dx(&self, x: f64, t: f64) -> Result<f64> {
        let e = self.evolved(t)?;
        Ok(-(x - e.centre) / (2.0 * e.width2))
    }

    fn dvarphi_dx(&self, x: f64, t: f64) -> Result<f64> {
        let e = self.evolved(t)?;
        let s2 = self.sigma * self.sigma;
        Ok(e.lambda2 * (x - e.centre) / (4.0 * s2 * e.width2) + self.k)
    }

    fn hbar_over_m(&self) -> f64 {
        self.hbar / self.mass
    }

    fn support(&self, t: f64) -> (f64, f64) {
        let e = self.evolved(t.max(0.0)).expect("time clamped to >= 0");
        let w = 40.0 * e.width2.sqrt();
        (e.centre - w, e.centre + w)
    }

    fn time_scale(&self, t: f64) -> Option<f64> {
        let w = self.width(t.max(0.0)).ok()?;
        let speed = (self.hbar * self.k / self.mass).abs();
        let spread = self.hbar / (2.0 * self.mass * self.sigma);
        let s = (w / speed).min(w / spread).min(self.sigma * self.sigma * self.mass / self.hbar);
        s.is_finite().then_some(s)
    }

    fn carrier_frequency(&self) -> f64 {
        self.hbar * self.k * self.k / (2.0 * self.mass)
    }
}

/// `psi = sqrt(N) (psi_1 + psi_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionState<P = FreeGaussianPacket> {
    pub packet1: P,
    pub packet2: P,
    pub norm_factor: f64,
}

impl<P: PacketPhase> SuperpositionState<P> {
    /// Fixes `N` by integrating `|psi_1 + psi_2|^2` at `t = 0` over
    /// `[min a - 12 s, max a + 12 s]`, `s` the wider packet's support scale.
    pub fn new(packet1: P, packet2: P) -> Result<Self> {
        let (l1, h1) = packet1.support(0.0);
        let (l2, h2) = packet2.support(0.0);
        // support() spans +-40 widths; the normalization window spans +-12.
        let half = 0.3 * (0.5 * (h1 - l1)).max(0.5 * (h2 - l2));
        let c1 = 0.5 * (l1 + h1);
        let c2 = 0.5 * (l2 + h2);
        let lo = c1.min(c2) - half;
        let hi = c1.max(c2) + half;
        let unnormalized = SuperpositionState {
            packet1,
            packet2,
            norm_factor: 1.0,
        };
        let mass = unnormalized.mass_between(0.0, lo, hi)?;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Degenerate(format!("superposition has norm {mass}")));
        }
        Ok(SuperpositionState {
            norm_factor: 1.0 / mass,
            ..unnormalized
        })
    }

    /// `int_lo^hi |psi|^2 dx` at time `t`.
    pub fn mass_between(&self, t: f64, lo: f64, hi: f64) -> Result<f64> {
        let trap = Trap::new();
        let opts = IntegrationOptions::new(1e-12, 1e-300);
        let r = integrate_finite_with(&|x| trap.value(self.probability_density(x, t)), lo, hi, &opts);
        Ok(trap.finish(r)?.value)
    }

    pub fn support(&self, t: f64) -> (f64, f64) {
        let (l1, h1) = self.packet1.support(t);
        let (l2, h2) = self.packet2.support(t);
        (l1.min(l2), h1.max(h2))
    }

    /// `N (rho_1 + rho_2 + 2 sqrt(rho_1 rho_2) cos(varphi_1 - varphi_2))`
    pub fn probability_density(&self, x: f64, t: f64) -> Result<f64> {
        let p1 = self.packet1.phi(x, t)?;
        let p2 = self.packet2.phi(x, t)?;
        let dphase = self.packet1.varphi(x, t)? - self.packet2.varphi(x, t)?;
        let v = (2.0 * p1).exp() + (2.0 * p2).exp() + 2.0 * (p1 + p2).exp() * dphase.cos();
        Ok(self.norm_factor * v.max(0.0))
    }
}

/// `j = N [v1 rho1 + v2 rho2 + (u1 - u2) sqrt(rho1 rho2) sin(varphi1 - varphi2)
///        + (v1 + v2) sqrt(rho1 rho2) cos(varphi1 - varphi2)]`
pub fn superposition_current<P: PacketPhase>(state: &SuperpositionState<P>, x: f64, t: f64) -> Result<f64> {
    let (u1, v1, r1) = packet_velocities(&state.packet1, x, t)?;
    let (u2, v2, r2) = packet_velocities(&state.packet2, x, t)?;
    let dphase = state.packet1.varphi(x, t)? - state.packet2.varphi(x, t)?;
    let cross = (state.packet1.phi(x, t)? + state.packet2.phi(x, t)?).exp();
    Ok(state.norm_factor
        * (v1 * r1 + v2 * r2 + (u1 - u2) * cross * dphase.sin() + (v1 + v2) * cross * dphase.cos()))
}

impl<P: PacketPhase> CurrentField for SuperpositionState<P> {
    fn current(&self, t: f64, x: f64) -> Result<f64> {
        superposition_current(self, x, t)
    }
}

impl<P: PacketPhase> DensityField for SuperpositionState<P> {
    fn density(&self, t: f64, a: f64) -> Result<f64> {
        self.probability_density(a, t)
    }

    fn value_bounds(&self, t: f64) -> (f64, f64) {
        self.support(t)
    }

    fn time_scale(&self, t: f64) -> Option<f64> {
        let beat = (self.packet1.carrier_frequency() - self.packet2.carrier_frequency()).abs();
        let mut s = f64::INFINITY;
        for v in [self.packet1.time_scale(t), self.packet2.time_scale(t)].into_iter().flatten() {
            s = s.min(v);
        }
        if beat > 0.0 {
            s = s.min(1.0 / beat);
        }
        s.is_finite().then_some(s)
    }
}

/// A single packet as a density/current field: `rho = exp(2 phi)`, `j = v rho`.
pub struct SinglePacket<P>(pub P);

impl<P: PacketPhase> DensityField for SinglePacket<P> {
    fn density(&self, t: f64, a: f64) -> Result<f64> {
        Ok((2.0 * self.0.phi(a, t)?).exp())
    }
    fn value_bounds(&self, t: f64) -> (f64, f64) {
        self.0.support(t)
    }
    fn time_scale(&self, t: f64) -> Option<f64> {
        self.0.time_scale(t)
    }
}

impl<P: PacketPhase> CurrentField for SinglePacket<P> {
    fn current(&self, t: f64, x: f64) -> Result<f64> {
        let (_, v, rho) = packet_velocities(&self.0, x, t)?;
        Ok(v * rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionToaOptions {
    pub normalize: bool,
    pub scan: ScanOptions,
    pub rel_tol: f64,
}

impl Default for SuperpositionToaOptions {
    fn default() -> Self {
        SuperpositionToaOptions {
            normalize: true,
            scan: ScanOptions::default(),
            rel_tol: 1e-9,
        }
    }
}

/// `int_0^inf |j_t(x)| dt`.
pub fn current_mass<P: PacketPhase>(state: &SuperpositionState<P>, x: f64, first_chunk: f64, opts: &SuperpositionToaOptions) -> Result<f64> {
    let trap = Trap::new();
    let r = integrate_abs_semi_infinite(
        |t| trap.value(superposition_current(state, x, t)),
        0.0,
        &SemiInfiniteOptions {
            rel_tol: opts.rel_tol,
            initial_width: first_chunk,
            ..Default::default()
        },
        &opts.scan,
    );
    Ok(trap.finish(r)?.value)
}

/// TOA distribution `|j_t(x)|` of the superposition, normalized over `[0, inf)` by default.
pub fn superposition_toa<P: PacketPhase>(
    state: &SuperpositionState<P>,
    x: f64,
    grid: &[f64],
    opts: &SuperpositionToaOptions,
) -> Result<ToaDistribution> {
    let dist = toa_from_current(state, x, grid, &CurrentOptions { scan: Some(opts.scan) })?;
    if !opts.normalize {
        return Ok(dist);
    }
    let span = grid[grid.len() - 1];
    let norm = current_mass(state, x, span.max(f64::MIN_POSITIVE), opts)?;
    normalize_with(&dist, norm)
}

/// Packet and detector parameters for one panel of the two-packet figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionPreset {
    pub hbar: f64,
    pub mass: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub a1: f64,
    pub a2: f64,
    pub k1: f64,
    pub k2: f64,
    pub x: f64,
    pub t_max: f64,
}

impl SuperpositionPreset {
    pub fn fig2_left() -> Self {
        SuperpositionPreset {
            hbar: 1.0,
            mass: 1.0,
            sigma1: 0.05,
            sigma2: 0.05,
            a1: -1.0,
            a2: -0.5,
            k1: 200.0,
            k2: 100.0,
            x: 0.0,
            t_max: 0.01,
        }
    }

    pub fn fig2_right() -> Self {
        SuperpositionPreset {
            k1: 5.0,
            k2: 1.5,
            t_max: 0.1,
            ..Self::fig2_left()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, value) in [("hbar", self.hbar), ("mass", self.mass), ("sigma1", self.sigma1), ("sigma2", self.sigma2), ("t_max", self.t_max)] {
            if !(value > 0.0 && value.is_finite()) {
                v.push(format!("{name} must be finite and > 0, got {value}"));
            }
        }
        for (name, value) in [("a1", self.a1), ("a2", self.a2), ("k1", self.k1), ("k2", self.k2), ("x", self.x)] {
            if !value.is_finite() {
                v.push(format!("{name} must be finite, got {value}"));
            }
        }
        v
    }

    pub fn state(&self) -> Result<SuperpositionState> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::InvalidParameters(v));
        }
        let params = PhysicalParams {
            hbar: self.hbar,
            mass: self.mass,
            g: 0.0,
            sigma: self.sigma1,
            x0: 0.0,
            v0: 0.0,
        };
        let p1 = free_gaussian_packet(&params, self.a1, self.k1, self.sigma1)?;
        let p2 = free_gaussian_packet(&params, self.a2, self.k2, self.sigma2)?;
        SuperpositionState::new(p1, p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 0.0, 0.05, 0.0, 0.0).unwrap()
    }

    #[test]
    fn initial_packet_is_normalized_gaussian() {
        let p = free_gaussian_packet(&unit_params(), -0.3, 7.0, 0.2).unwrap();
        for &x in &[-0.9, -0.3, 0.0, 0.4] {
            let rho = (2.0 * p.phi(x, 0.0).unwrap()).exp();
            let z = (x + 0.3) / 0.2;
            let expect = (-0.5 * z * z).exp() / (0.2 * (2.0 * PI).sqrt());
            assert!((rho - expect).abs() < 1e-14 * expect);
        }
        assert!(p.phi(0.0, -1e-3).is_err());
    }

    #[test]
    fn velocities_at_centre() {
        let p = free_gaussian_packet(&unit_params(), 0.1, 3.0, 0.05).unwrap();
        for &t in &[0.0, 0.01, 0.2] {
            let xc = p.centre(t).unwrap();
            let (u, v, _) = packet_velocities(&p, xc, t).unwrap();
            assert_eq!(u, 0.0);
            assert!((v - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_packets_quadruple_single_current() {
        let p = free_gaussian_packet(&unit_params(), -0.2, 4.0, 0.05).unwrap();
        let s = SuperpositionState { packet1: p, packet2: p, norm_factor: 0.25 };
        for &(x, t) in &[(0.0, 0.01), (-0.1, 0.05), (0.3, 0.2)] {
            let (_, v, r) = packet_velocities(&p, x, t).unwrap();
            let j = superposition_current(&s, x, t).unwrap();
            assert!((j - 4.0 * 0.25 * v * r).abs() < 1e-13 * (v * r).abs().max(1e-300));
        }
    }

    #[test]
    fn symmetric_cat_has_no_current_at_origin() {
        let par = unit_params();
        let s = SuperpositionState::new(
            free_gaussian_packet(&par, -0.5, 10.0, 0.05).unwrap(),
            free_gaussian_packet(&par, 0.5, -10.0, 0.05).unwrap(),
        )
        .unwrap();
        for i in 0..20 {
            assert!(superposition_current(&s, 0.0, 0.005 * i as f64).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn presets_match_caption() {
        let l = SuperpositionPreset::fig2_left();
        assert_eq!((l.k1, l.k2, l.a1, l.a2, l.sigma1), (200.0, 100.0, -1.0, -0.5, 0.05));
        let r = SuperpositionPreset::fig2_right();
        assert_eq!((r.k1, r.k2), (5.0, 1.5));
        let bad = SuperpositionPreset { sigma1: -1.0, k2: f64::NAN, ..r };
        assert_eq!(bad.violations().len(), 2);
    }
}
