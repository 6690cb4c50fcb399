mod common;

use common::{chi2_p_value, ks_critical, ks_statistic, normal_cdf};
use toa_core::gaussian::{freefall_momentum_density, gaussian_toa_density, GaussianField, LinearMoments, PhysicalParams};
use toa_core::quadrature::integrate_finite;
use toa_core::sampler::{
    protocol_histogram, sample_gaussian_toa, sample_observable, CdfTable, ProtocolOptions, TableOptions,
};
use toa_core::uniform_grid;

const N: usize = 200_000;

fn field() -> GaussianField<LinearMoments> {
    GaussianField::new(LinearMoments { mu0: 1.0, rate: 0.5, sigma: 0.7 })
}

#[test]
fn inverse_cdf_samples_pass_ks() {
    let f = field();
    let t = 2.0;
    let (mu, sigma) = (2.0, 0.7);
    let batch = sample_observable(&f, t, N, 42).unwrap();
    assert_eq!(batch.count, N);
    assert!((batch.mean() - mu).abs() < 4.0 * sigma / (N as f64).sqrt());
    let mut v = batch.values.clone();
    v.sort_by(f64::total_cmp);
    let d = ks_statistic(&v, |x| normal_cdf((x - mu) / sigma));
    assert!(d < ks_critical(N), "KS {d}");
}

#[test]
fn pushforward_is_uniform() {
    let f = field();
    let table = CdfTable::build(&f, 2.0, &TableOptions::default()).unwrap();
    let batch = sample_observable(&f, 2.0, N, 43).unwrap();
    let mut xi: Vec<f64> = batch.values.iter().map(|&a| table.cdf_at(a)).collect();
    xi.sort_by(f64::total_cmp);
    let d = ks_statistic(&xi, |u| u.clamp(0.0, 1.0));
    assert!(d < ks_critical(N), "KS {d}");
}

#[test]
fn shard_count_does_not_change_batches() {
    let f = field();
    let small = sample_observable(&f, 2.0, 1000, 8).unwrap();
    let big = sample_observable(&f, 2.0, 200_000, 8).unwrap();
    assert_eq!(&small.values[..], &big.values[..1000]);
}

fn freefall() -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0, 9.81, 0.05, 0.0, 0.0).unwrap()
}

#[test]
fn velocity_arrival_spread_matches() {
    let params = freefall();
    let tau = params.hbar / (2.0 * params.mass * params.g * params.sigma);
    let p = 30.0 * tau * params.mass * params.g;
    let batch = sample_gaussian_toa(&params, p, N, 1).unwrap();
    assert_eq!(batch.rejected, 0);
    let se = tau / (2.0 * N as f64).sqrt();
    assert!((batch.std() - tau).abs() < 3.0 * se, "{} vs {tau}", batch.std());
}

#[test]
fn velocity_arrival_histogram_passes_chi2() {
    let params = freefall();
    let tau = params.hbar / (2.0 * params.mass * params.g * params.sigma);
    let tp = 30.0 * tau;
    let p = tp * params.mass * params.g;
    let batch = sample_gaussian_toa(&params, p, N, 2).unwrap();
    let bins = 100;
    let (lo, hi) = (tp - 2.5 * tau, tp + 2.5 * tau);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &t in &batch.values {
        if t >= lo && t < hi {
            counts[(((t - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    let inside: usize = counts.iter().sum();
    let probs: Vec<f64> = (0..bins)
        .map(|i| {
            let a = lo + i as f64 * w;
            integrate_finite(|t| freefall_momentum_density(&params, p, t).unwrap(), a, a + w, 1e-12, 1e-15)
                .unwrap()
                .value
        })
        .collect();
    let total: f64 = probs.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &q)| {
            let e = inside as f64 * q / total;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let pv = chi2_p_value(stat, bins - 1);
    assert!(pv > 0.01, "chi2 {stat}, p {pv}");
}

#[test]
fn conditioning_matches_retained_mass() {
    let params = freefall();
    let tau = params.hbar / (2.0 * params.mass * params.g * params.sigma);
    let tp = 0.5 * tau;
    let p = tp * params.mass * params.g;
    let batch = sample_gaussian_toa(&params, p, N, 3).unwrap();
    assert!(batch.values.iter().all(|&t| t >= 0.0));
    let draws = (batch.count + batch.rejected) as f64;
    let retained = batch.count as f64 / draws;
    let expected = normal_cdf(tp / tau);
    let se = (expected * (1.0 - expected) / draws).sqrt();
    assert!((retained - expected).abs() < 3.0 * se, "{retained} vs {expected}");
}

#[test]
fn protocol_reproduces_analytic_density() {
    let m = LinearMoments { mu0: -3.0, rate: 1.0, sigma: 0.5 };
    let f = GaussianField::new(m);
    let grid = uniform_grid(1.0, 5.0, 41);
    let emp = protocol_histogram(&f, 0.0, &grid, 100_000, 9, &ProtocolOptions::default()).unwrap();
    let analytic: Vec<f64> = grid.iter().map(|&t| gaussian_toa_density(&m, 0.0, t)).collect();
    let peak = analytic.iter().cloned().fold(0.0, f64::max);
    for (i, (e, a)) in emp.distribution.density.iter().zip(&analytic).enumerate() {
        assert!((e - a).abs() < 0.05 * peak, "t={}: {e} vs {a}", grid[i]);
    }
    assert!((emp.delta_a - 0.01).abs() < 1e-3);

    let half = protocol_histogram(
        &f,
        0.0,
        &grid,
        100_000,
        9,
        &ProtocolOptions {
            delta_a: Some(0.5 * emp.delta_a),
            ..Default::default()
        },
    )
    .unwrap();
    for i in 0..grid.len() {
        let d = (half.distribution.density[i] - emp.distribution.density[i]).abs();
        let se = half.std_error[i].hypot(emp.std_error[i]);
        assert!(d <= 3.0 * se + 1e-12, "t={}: {d} vs se {se}", grid[i]);
    }
}

#[test]
fn protocol_sees_no_flux_for_static_field() {
    let f = GaussianField::new(LinearMoments { mu0: 0.2, rate: 0.0, sigma: 0.5 });
    let grid = uniform_grid(0.0, 2.0, 11);
    for crn in [true, false] {
        let emp = protocol_histogram(
            &f,
            0.0,
            &grid,
            50_000,
            4,
            &ProtocolOptions {
                common_random_numbers: crn,
                ..Default::default()
            },
        )
        .unwrap();
        let mut outside = 0;
        for (d, se) in emp.distribution.density.iter().zip(&emp.std_error) {
            if *d > 3.0 * se {
                outside += 1;
            }
        }
        // Independent streams: allow one 3-sigma excursion among the bins.
        assert!(outside <= if crn { 0 } else { 1 }, "{outside} bins away from zero");
    }
}
