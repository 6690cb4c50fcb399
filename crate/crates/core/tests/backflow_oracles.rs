mod common;

use common::{bm_fourier, bm_phi, crel_err, rel_err, simpson, Rule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toa_core::backflow::{
    bm_current, bm_momentum_wavefunction, bm_position_state, bm_position_state_dx, normalization, Backflow,
    BackflowOptions, DimensionlessFrame, WindowCenter,
};
use toa_core::quadrature::{integrate_abs_finite, integrate_semi_infinite, IntegrationOptions, ScanOptions};

#[test]
fn closed_form_matches_fourier_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let x = rng.random_range(-5.0..5.0);
        let t = rng.random_range(0.01..1.0);
        let got = bm_position_state(x, t).unwrap();
        let oracle = bm_fourier(x, t);
        let e = crel_err(got, oracle);
        assert!(e < 1e-6, "Psi({x}, {t}) = {got} vs {oracle}, rel err {e:e}");
    }
}

#[test]
fn position_state_stays_normalized() {
    for t in [0.01, 0.1, 1.0] {
        let rho = |x: f64| bm_position_state(x, t).unwrap().norm_sqr();
        let right = integrate_semi_infinite(rho, 0.0, 1e-9).unwrap().value;
        let left = integrate_semi_infinite(|s| rho(-s), 0.0, 1e-9).unwrap().value;
        let total = left + right;
        assert!((total - 1.0).abs() < 1e-5, "norm at t'={t}: {total}");
    }
}

#[test]
fn momentum_norm_matches_gamma_integrals() {
    // phi^2 = c^2 p^2 (e^{-2p} - e^{-3p/2}/3 + e^{-p}/36), and
    // int_0^inf p^2 e^{-lp} dp = 2/l^3.
    let c2 = 324.0 / 35.0;
    let g = |l: f64| 2.0 / (l * l * l);
    let analytic = c2 * (g(2.0) - g(1.5) / 3.0 + g(1.0) / 36.0);
    assert!((analytic - 1.0).abs() < 1e-14);
    let numeric = integrate_semi_infinite(|p| bm_momentum_wavefunction(p, 1.0).powi(2), 0.0, 1e-13)
        .unwrap()
        .value;
    assert!((numeric - analytic).abs() < 1e-10, "{numeric}");
    // Independent transcription agrees pointwise, and alpha rescales as alpha^{-1/2}.
    for p in [0.1, 1.0, 3.0, 10.0] {
        assert!(rel_err(bm_momentum_wavefunction(p, 1.0), bm_phi(p)) < 1e-14);
        let alpha = 2.5;
        assert!(rel_err(bm_momentum_wavefunction(alpha * p, alpha), bm_phi(p) / alpha.sqrt()) < 1e-14);
    }
}

#[test]
fn current_matches_finite_difference_of_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let x: f64 = rng.random_range(-10.0..10.0);
        let t = rng.random_range(1e-3..5.0);
        let h = 1e-5 * (1.0 + x.abs());
        let psi = bm_position_state(x, t).unwrap();
        let fd = (bm_position_state(x + h, t).unwrap() - bm_position_state(x - h, t).unwrap()) / (2.0 * h);
        let d = bm_position_state_dx(x, t).unwrap();
        assert!((fd - d).norm() <= 1e-6 * d.norm().max(psi.norm()), "dPsi at ({x}, {t})");
        let j_fd = (psi.conj() * fd).im;
        let j = bm_current(x, t).unwrap();
        assert!((j - j_fd).abs() <= 1e-6 * psi.norm() * d.norm(), "J at ({x}, {t}): {j} vs {j_fd}");
    }
}

#[test]
fn continuity_equation_holds() {
    for &(x, t) in &[(0.0, 0.05), (0.0, 0.5), (1.5, 0.2), (-2.0, 1.0), (4.0, 2.0)] {
        let h = 1e-4 * t;
        let drho = (bm_position_state(x, t + h).unwrap().norm_sqr() - bm_position_state(x, t - h).unwrap().norm_sqr())
            / (2.0 * h);
        let k = 1e-4;
        let dj = (bm_current(x + k, t).unwrap() - bm_current(x - k, t).unwrap()) / (2.0 * k);
        let scale = drho.abs().max(dj.abs()).max(1e-6);
        assert!((drho + dj).abs() < 1e-5 * scale, "({x}, {t}): {drho} + {dj}");
    }
}

#[test]
fn absolute_current_mass_matches_simpson() {
    let (a, b) = (1e-4, 20.0);
    let g = |t: f64| bm_current(0.0, t).unwrap();
    let oracle = simpson(|t| g(t).abs(), a, b, 1_000_000);
    let got = integrate_abs_finite(g, a, b, &IntegrationOptions::new(1e-12, 1e-15), &ScanOptions::default())
        .unwrap()
        .value;
    assert!(rel_err(got, oracle) < 1e-6, "{got} vs {oracle}");
}

#[test]
fn normalization_is_insensitive_to_floor() {
    let base = normalization(&BackflowOptions::default()).unwrap();
    let halved = normalization(&BackflowOptions {
        floor: 0.5e-6,
        ..BackflowOptions::default()
    })
    .unwrap();
    assert!(rel_err(halved, base) < 1e-6, "{halved} vs {base}");
    // The part below the floor is accounted for by the constant head.
    let head = Rule::new(20).real(|t| bm_current(0.0, t).unwrap().abs(), 1e-12, 1e-6, 200);
    assert!(head < 1e-5 * base, "{head}");
}

#[test]
fn detection_probability_grows_with_window() {
    let bf = Backflow::new(DimensionlessFrame::rb87()).unwrap();
    let mut last = 0.0;
    for k in 0..12 {
        let eps = 1e-6 * 2f64.powi(k);
        let p = bf.detection_probability(eps, WindowCenter::LocatedZero).unwrap().probability;
        assert!(p >= last, "P0({eps}) = {p} < {last}");
        last = p;
    }
}
