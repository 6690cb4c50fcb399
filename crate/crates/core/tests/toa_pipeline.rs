mod common;

use common::rel_err;
use std::f64::consts::PI;
use toa_core::gaussian::{
    freefall_momentum_density, freefall_momentum_moments, freefall_position_moments, freefall_velocity_toa_stats,
    gaussian_toa_density, GaussianField, LinearMoments, PhysicalParams,
};
use toa_core::superposition::{free_gaussian_packet, SinglePacket};
use toa_core::{
    moments, normalize, toa_from_cdf, toa_from_current, uniform_grid, CdfOptions, CurrentOptions, ToaDistribution,
};

fn freefall() -> PhysicalParams {
    PhysicalParams::new(1.0, 2.0, 9.81, 0.3, 0.0, 0.5).unwrap()
}

#[test]
fn momentum_toa_from_cdf_matches_closed_form() {
    let params = freefall();
    let p = 60.0;
    let m = params.mass;
    let tp = (p / m - params.v0) / params.g;
    let tau = params.hbar / (2.0 * m * params.g * params.sigma);
    let field = GaussianField::new(freefall_momentum_moments(params).unwrap());
    let grid = uniform_grid(tp - 8.0 * tau, tp + 8.0 * tau, 500);
    let dist = toa_from_cdf(&field, p, &grid, &CdfOptions::default()).unwrap();
    for (t, d) in grid.iter().zip(&dist.density) {
        // m g rho_t(p) with rho_t Gaussian of mean m(v0 + g t), width hbar/(2 sigma).
        let sp = params.hbar / (2.0 * params.sigma);
        let z = (p - m * (params.v0 + params.g * *t)) / sp;
        let oracle = m * params.g * (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sp);
        assert!(rel_err(*d, oracle) < 1e-8, "t={t}: {d} vs {oracle}");
        assert!(rel_err(freefall_momentum_density(&params, p, *t).unwrap(), oracle) < 1e-13);
    }
    let normed = normalize(&dist).unwrap();
    let (mean, std) = moments(&normed).unwrap();
    let (m_ref, s_ref) = freefall_velocity_toa_stats(&params, p / m).unwrap();
    assert!(rel_err(mean, m_ref) < 1e-6, "{mean} vs {m_ref}");
    assert!(rel_err(std, s_ref) < 1e-6, "{std} vs {s_ref}");
}

fn compare(cdf: &ToaDistribution, cur: &ToaDistribution, tol: f64) {
    let peak = cur.peak();
    for ((t, a), b) in cdf.time_grid.iter().zip(&cdf.density).zip(&cur.density) {
        if *b > 1e-8 * peak {
            assert!(rel_err(*a, *b) < tol, "t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn cdf_route_matches_current_for_gaussian_families() {
    let lin = GaussianField::new(LinearMoments { mu0: -3.0, rate: 1.5, sigma: 0.4 });
    let grid = uniform_grid(0.2, 4.0, 50);
    let a = toa_from_cdf(&lin, 0.0, &grid, &CdfOptions::default()).unwrap();
    let b = toa_from_current(&lin, 0.0, &grid, &CurrentOptions::default()).unwrap();
    compare(&a, &b, 1e-6);

    let params = PhysicalParams::new(1.0, 1.0, 2.0, 0.5, -2.0, 0.3).unwrap();
    let pos = GaussianField::new(freefall_position_moments(params).unwrap());
    let grid = uniform_grid(0.05, 3.0, 50);
    let a = toa_from_cdf(&pos, 0.0, &grid, &CdfOptions::default()).unwrap();
    let b = toa_from_current(&pos, 0.0, &grid, &CurrentOptions::default()).unwrap();
    compare(&a, &b, 1e-6);
    for (t, d) in grid.iter().zip(&b.density) {
        assert!(rel_err(*d, gaussian_toa_density(&pos.moments, 0.0, *t)) < 1e-12);
    }
}

#[test]
fn cdf_route_matches_current_for_free_packet() {
    let params = PhysicalParams::new(1.0, 1.0, 0.0, 0.1, 0.0, 0.0).unwrap();
    let field = SinglePacket(free_gaussian_packet(&params, -1.0, 8.0, 0.1).unwrap());
    let grid = uniform_grid(0.01, 0.3, 50);
    let a = toa_from_cdf(&field, 0.0, &grid, &CdfOptions::default()).unwrap();
    let b = toa_from_current(&field, 0.0, &grid, &CurrentOptions::default()).unwrap();
    compare(&a, &b, 1e-6);
}

#[test]
fn density_is_scale_covariant() {
    let grid = uniform_grid(0.1, 5.0, 40);
    let base = GaussianField::new(LinearMoments { mu0: -2.0, rate: 1.0, sigma: 0.5 });
    let d0 = toa_from_current(&base, 0.5, &grid, &CurrentOptions::default()).unwrap();
    let c = 7.5;
    let scaled = GaussianField::new(LinearMoments { mu0: -2.0 * c, rate: c, sigma: 0.5 * c });
    let d1 = toa_from_current(&scaled, 0.5 * c, &grid, &CurrentOptions::default()).unwrap();
    for (a, b) in d0.density.iter().zip(&d1.density) {
        assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
    }
}

#[test]
fn normalization_is_idempotent_and_serializes() {
    let lin = GaussianField::new(LinearMoments { mu0: -5.0, rate: 1.0, sigma: 0.5 });
    let grid = uniform_grid(0.0, 10.0, 400);
    let dist = toa_from_current(&lin, 0.0, &grid, &CurrentOptions::default()).unwrap();
    let once = normalize(&dist).unwrap();
    let twice = normalize(&once).unwrap();
    assert!(rel_err(once.normalization.unwrap(), 1.0) < 1e-8);
    assert_eq!(once.values(), twice.values());
    let json = once.to_json().unwrap();
    let back: ToaDistribution = serde_json::from_str(&json).unwrap();
    assert_eq!(back, once);
}
