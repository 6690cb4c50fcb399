//! Monte-Carlo realizations: `A_t = F_t^{-1}(xi)` with uniform `xi`, the
//! linear representation of the velocity arrival time, and the windowed
//! detector protocol.
//!
//! Random numbers come from ChaCha8 with one stream per block of
//! [`BLOCK`] draws, so results do not depend on how blocks are spread over
//! threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{format_float, DensityField, ToaDistribution};
use crate::error::{Error, Result, Trap};
use crate::gaussian::PhysicalParams;
use crate::quadrature::{integrate_finite_with, IntegrationOptions, QuadratureError};

/// Draws per random stream.
pub const BLOCK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub count: usize,
    /// Draws discarded by conditioning (negative arrival times).
    pub rejected: usize,
}

impl SampleBatch {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.count as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        let v = self.values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (self.count as f64 - 1.0);
        v.sqrt()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([i.to_string(), format_float(*v)])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` uniforms on `[0, 1)`; block `b` uses stream `base + b`.
fn uniforms(n: usize, seed: u64, base: u64) -> Vec<f64> {
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let len = BLOCK.min(n - b * BLOCK);
            let mut rng = stream_rng(seed, base + b as u64);
            (0..len).map(move |_| rng.random::<f64>())
        })
        .collect()
}

/// CDF of a density field at one time, tabulated on an adaptively refined
/// grid so that linear interpolation inverts it to within `tol` in value units.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    pub nodes: Vec<f64>,
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    /// Inversion tolerance in value units; defaults to `1e-6` times an
    /// eightieth of the field's value bounds (about `1e-6 sigma` for a
    /// Gaussian field).
    pub tol: Option<f64>,
    pub initial_nodes: usize,
    pub max_nodes: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            tol: None,
            initial_nodes: 257,
            max_nodes: 1 << 20,
        }
    }
}

impl CdfTable {
    pub fn build<D: DensityField + ?Sized>(field: &D, t: f64, opts: &TableOptions) -> Result<Self> {
        let (lo, hi) = field.value_bounds(t);
        if !(hi > lo) {
            return Err(Error::invalid(format!("empty value bounds [{lo}, {hi}]")));
        }
        let tol = opts.tol.unwrap_or(1e-6 * (hi - lo) / 80.0);
        let trap = Trap::new();
        let rho = |a: f64| trap.value(field.density(t, a));
        let int_opts = IntegrationOptions::new(1e-12, 1e-17);
        let mass = |a: f64, b: f64| -> Result<f64> {
            trap.finish(integrate_finite_with(&rho, a, b, &int_opts)).map(|r| r.value)
        };
        // (left, right, mass) intervals, refined until the midpoint of the
        // linear interpolant is within tol of the true quantile.
        let n0 = opts.initial_nodes.max(2);
        let mut pending: Vec<(f64, f64)> = (0..n0 - 1)
            .map(|i| {
                let a = lo + (hi - lo) * i as f64 / (n0 - 1) as f64;
                let b = lo + (hi - lo) * (i + 1) as f64 / (n0 - 1) as f64;
                (a, b)
            })
            .collect();
        let mut done: Vec<(f64, f64, f64)> = Vec::new();
        while let Some((a, b)) = pending.pop() {
            let m = 0.5 * (a + b);
            let left = mass(a, m)?;
            let right = mass(m, b)?;
            let total = left + right;
            let density_mid = rho(m);
            if !density_mid.is_finite() {
                return trap.finish(Err(QuadratureError::NonFinite(m)));
            }
            // Quantile error of the chord at the midpoint.
            let gap = (left - 0.5 * total).abs();
            let err = if density_mid > 0.0 { gap / density_mid } else if gap > 0.0 { b - a } else { 0.0 };
            let negligible = total < 1e-15;
            if err <= tol || negligible || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                done.push((a, m, left));
                done.push((m, b, right));
            } else if done.len() + pending.len() > opts.max_nodes {
                return Err(Error::invalid("CDF table exceeded its node budget"));
            } else {
                pending.push((a, m));
                pending.push((m, b));
            }
        }
        done.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut nodes = Vec::with_capacity(done.len() + 1);
        let mut cdf = Vec::with_capacity(done.len() + 1);
        nodes.push(lo);
        cdf.push(0.0);
        let mut acc = 0.0;
        for (_, b, m) in &done {
            acc += m;
            nodes.push(*b);
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > 1e-6 {
            return Err(Error::DensityInvalid {
                t,
                reason: format!("density integrates to {acc}, not 1"),
            });
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(CdfTable { nodes, cdf })
    }

    /// Generalized inverse `inf { a : F(a) >= xi }` of the interpolated CDF.
    pub fn quantile(&self, xi: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < xi);
        if i == 0 {
            return self.nodes[0];
        }
        if i >= self.cdf.len() {
            return self.nodes[self.nodes.len() - 1];
        }
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (a0, a1) = (self.nodes[i - 1], self.nodes[i]);
        a0 + (a1 - a0) * (xi - c0) / (c1 - c0)
    }

    /// Interpolated `F(a)`.
    pub fn cdf_at(&self, a: f64) -> f64 {
        let i = self.nodes.partition_point(|&x| x < a);
        if i == 0 {
            return 0.0;
        }
        if i >= self.nodes.len() {
            return 1.0;
        }
        let (a0, a1) = (self.nodes[i - 1], self.nodes[i]);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        c0 + (c1 - c0) * (a - a0) / (a1 - a0)
    }
}

/// `n` draws of `A_t` by inverse-CDF sampling.
pub fn sample_observable<D: DensityField + ?Sized>(field: &D, t: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    let table = CdfTable::build(field, t, &TableOptions::default())?;
    Ok(sample_table(&table, n, seed, 0))
}

fn sample_table(table: &CdfTable, n: usize, seed: u64, stream_base: u64) -> SampleBatch {
    let values: Vec<f64> = uniforms(n, seed, stream_base)
        .into_par_iter()
        .map(|xi| table.quantile(xi))
        .collect();
    SampleBatch {
        count: values.len(),
        values,
        seed,
        rejected: 0,
    }
}

/// `n` retained draws of `T = (v - xi sigma_v)/g` with standard-normal `xi`,
/// `v = p/m - v0`, `sigma_v = hbar/(2 m sigma)`; negative times are rejected
/// and counted.
pub fn sample_gaussian_toa(params: &PhysicalParams, p: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    params.validate()?;
    if !(params.g > 0.0) {
        return Err(Error::Degenerate("g = 0: arrival time undefined".into()));
    }
    let v = p / params.mass - params.v0;
    let sigma_v = params.hbar / (2.0 * params.mass * params.sigma);
    let g = params.g;
    let mut values = Vec::with_capacity(n);
    let mut rejected = 0usize;
    let mut next_block = 0u64;
    let round = rayon::current_num_threads().max(1) as u64;
    while values.len() < n {
        let blocks: Vec<Vec<f64>> = (next_block..next_block + round)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(seed, b);
                (0..BLOCK)
                    .map(|_| {
                        let xi: f64 = rng.sample(StandardNormal);
                        (v - xi * sigma_v) / g
                    })
                    .collect()
            })
            .collect();
        next_block += round;
        'outer: for block in blocks {
            for t in block {
                if t >= 0.0 {
                    values.push(t);
                    if values.len() == n {
                        break 'outer;
                    }
                } else {
                    rejected += 1;
                }
            }
        }
        if next_block > 1 << 40 {
            return Err(Error::InsufficientTrials("no non-negative arrival times drawn".into()));
        }
    }
    Ok(SampleBatch {
        count: values.len(),
        values,
        seed,
        rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOptions {
    /// Detector window width; defaults to a fiftieth of the initial
    /// standard deviation of the field, estimated from its CDF table.
    pub delta_a: Option<f64>,
    /// Reuse the same uniform stream at every grid time. The per-time
    /// estimates stay unbiased while differences across times lose most of
    /// their sampling noise.
    pub common_random_numbers: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            delta_a: None,
            common_random_numbers: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalToa {
    pub distribution: ToaDistribution,
    /// Standard error of each density value, assuming independent trials per time.
    pub std_error: Vec<f64>,
    /// Estimated `F_t(a)` at each grid time.
    pub cdf: Vec<f64>,
    /// Fraction of trials landing in the window, divided by its width.
    pub window_density: Vec<f64>,
    pub delta_a: f64,
}

impl EmpiricalToa {
    /// ToaDistribution columns plus `std_error`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let d = &self.distribution;
        let normed = d.normalized_density();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "density", "normalized_density", "std_error"])?;
        for i in 0..d.time_grid.len() {
            let n = normed.as_ref().map(|v| format_float(v[i])).unwrap_or_default();
            out.write_record([
                format_float(d.time_grid[i]),
                format_float(d.density[i]),
                n,
                format_float(self.std_error[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn table_std(table: &CdfTable) -> f64 {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in 1..table.nodes.len() {
        let p = table.cdf[i] - table.cdf[i - 1];
        let x = 0.5 * (table.nodes[i] + table.nodes[i - 1]);
        m1 += p * x;
        m2 += p * x * x;
    }
    (m2 - m1 * m1).max(0.0).sqrt()
}

/// Stylized detector: at each grid time, `trials_per_time` fresh preparations
/// are measured and a click in `[a - delta_a/2, a + delta_a/2]` is recorded.
/// `F_t(a)` is estimated with a linear ramp over the window (values below
/// count 1, inside count fractionally), and `|dF/dt|` is formed by central
/// differences across grid times (one-sided at the ends).
pub fn protocol_histogram<D: DensityField + ?Sized>(
    source: &D,
    a: f64,
    time_grid: &[f64],
    trials_per_time: usize,
    seed: u64,
    opts: &ProtocolOptions,
) -> Result<EmpiricalToa> {
    if time_grid.len() < 2 || time_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("need a strictly increasing grid of at least two times".into()));
    }
    if trials_per_time < 2 {
        return Err(Error::InsufficientTrials(format!("{trials_per_time} trials per time")));
    }
    let tables: Vec<CdfTable> = time_grid
        .iter()
        .map(|&t| CdfTable::build(source, t, &TableOptions::default()))
        .collect::<Result<_>>()?;
    let delta_a = match opts.delta_a {
        Some(d) if d > 0.0 => d,
        Some(d) => return Err(Error::invalid(format!("delta_a must be > 0, got {d}"))),
        None => table_std(&tables[0]) / 50.0,
    };
    let ramp = |x: f64| ((a + 0.5 * delta_a - x) / delta_a).clamp(0.0, 1.0);
    let blocks_per_time = trials_per_time.div_ceil(BLOCK) as u64;
    let per_time: Vec<(f64, f64, usize)> = tables
        .par_iter()
        .enumerate()
        .map(|(i, table)| {
            let base = if opts.common_random_numbers { 0 } else { i as u64 * blocks_per_time };
            let xs = uniforms(trials_per_time, seed, base);
            let mut k_sum = 0.0;
            let mut k2_sum = 0.0;
            let mut hits = 0usize;
            for xi in xs {
                let v = table.quantile(xi);
                let k = ramp(v);
                k_sum += k;
                k2_sum += k * k;
                if (v - a).abs() <= 0.5 * delta_a {
                    hits += 1;
                }
            }
            let n = trials_per_time as f64;
            let mean = k_sum / n;
            let var = (k2_sum / n - mean * mean).max(0.0) * n / (n - 1.0);
            (mean, (var / n).sqrt(), hits)
        })
        .collect();
    let f_hat: Vec<f64> = per_time.iter().map(|p| p.0).collect();
    let se: Vec<f64> = per_time.iter().map(|p| p.1).collect();
    if per_time.iter().all(|p| p.2 == 0) && f_hat.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::InsufficientTrials(
            "no trial landed in the detector window at any time".into(),
        ));
    }
    let n = time_grid.len();
    let mut signed = Vec::with_capacity(n);
    let mut std_error = Vec::with_capacity(n);
    for i in 0..n {
        let (l, r) = match i {
            0 => (0, 1),
            _ if i == n - 1 => (n - 2, n - 1),
            _ => (i - 1, i + 1),
        };
        let dt = time_grid[r] - time_grid[l];
        signed.push(-(f_hat[r] - f_hat[l]) / dt);
        std_error.push((se[r] * se[r] + se[l] * se[l]).sqrt() / dt);
    }
    let window_density = per_time
        .iter()
        .map(|p| p.2 as f64 / trials_per_time as f64 / delta_a)
        .collect();
    Ok(EmpiricalToa {
        distribution: ToaDistribution::from_signed(time_grid.to_vec(), signed, Vec::new()),
        std_error,
        cdf: f_hat,
        window_density,
        delta_a,
    })
}
