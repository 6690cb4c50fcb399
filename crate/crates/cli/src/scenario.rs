//! Runs a validated scenario and writes its artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use toa_core::backflow::{write_fig1_csv, write_table_csv, Backflow, DimensionlessFrame, WindowCenter, REPORTED_T0_PRIME};
use toa_core::gaussian::{
    freefall_momentum_moments, freefall_position_moments, freefall_velocity_toa_stats, GaussianField, PhysicalParams,
};
use toa_core::quadrature::RootResult;
use toa_core::sampler::{sample_gaussian_toa, sample_observable};
use toa_core::superposition::{free_gaussian_packet, superposition_toa, SuperpositionState, SuperpositionToaOptions};
use toa_core::{format_float, moments, normalize, toa_from_current, CurrentOptions, ToaDistribution};

use crate::config::{CenterChoice, SampleMode, ScenarioConfig, ScenarioKind};
use crate::error::{io_error, CliError};

/// What a run produced, for the one-line summary.
#[derive(Debug, Clone)]
pub struct Summary {
    pub fields: Value,
    pub files: Vec<PathBuf>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut v = self.fields.clone();
        v["files"] = json!(self.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
        v.to_string()
    }

    pub fn line(&self) -> String {
        let mut parts = Vec::new();
        if let Value::Object(map) = &self.fields {
            for (k, v) in map {
                parts.push(format!("{k}={}", compact(v)));
            }
        }
        let files: Vec<String> = self.files.iter().map(|p| p.display().to_string()).collect();
        parts.push(format!("files={}", files.join(",")));
        parts.join(" ")
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(compact).collect::<Vec<_>>().join(",")),
        Value::Object(map) => map.values().map(compact).collect::<Vec<_>>().join(":"),
        other => other.to_string(),
    }
}

fn zeros_json(zeros: &[RootResult]) -> Value {
    json!(zeros
        .iter()
        .map(|z| json!({ "t": z.location, "kind": z.classification }))
        .collect::<Vec<_>>())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn finish<W: Write>(mut w: W, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_error(path, e))
}

pub struct Runner {
    pub out_dir: PathBuf,
}

impl Runner {
    fn path(&self, cfg: &ScenarioConfig, default: &str) -> PathBuf {
        let file = cfg
            .output
            .as_ref()
            .and_then(|o| o.file.clone())
            .unwrap_or_else(|| default.to_string());
        self.out_dir.join(file)
    }

    pub fn run(&self, cfg: &ScenarioConfig) -> Result<Summary, CliError> {
        cfg.validate()?;
        std::fs::create_dir_all(&self.out_dir).map_err(|e| io_error(&self.out_dir, e))?;
        let mut summary = match cfg.kind {
            ScenarioKind::Backflow => self.backflow(cfg)?,
            ScenarioKind::Superposition => self.superposition(cfg)?,
            ScenarioKind::GaussianFreefallPosition | ScenarioKind::GaussianFreefallMomentum => self.gaussian(cfg)?,
            ScenarioKind::Sample => self.sample(cfg)?,
        };
        let mut head = json!({ "kind": cfg.kind.name() });
        if let Some(name) = &cfg.name {
            head["name"] = json!(name);
        }
        if let (Value::Object(h), Value::Object(rest)) = (&mut head, summary.fields.take()) {
            h.extend(rest);
        }
        summary.fields = head;
        Ok(summary)
    }

    fn backflow(&self, cfg: &ScenarioConfig) -> Result<Summary, CliError> {
        let b = cfg.backflow.expect("validated");
        let grid = cfg.grid.expect("validated").build()?;
        let frame = DimensionlessFrame::from_velocity(b.mass_kg, b.velocity_m_per_s)?;
        let bf = Backflow::new(frame)?;
        let result = bf.result(&grid)?;
        let fig1 = self.path(cfg, "fig1.csv");
        let mut w = create(&fig1)?;
        write_fig1_csv(&result.distribution, &mut w)?;
        finish(w, &fig1)?;
        let mut files = vec![fig1];
        let mut fields = json!({
            "t0_prime": result.t0_prime,
            "t0_s": result.t0_physical,
            "time_scale_s": frame.time_scale(),
            "normalization": result.normalization,
            "zeros": zeros_json(&result.distribution.zeros),
        });
        if b.table {
            let (main, other) = match b.window_center {
                CenterChoice::Reported => (WindowCenter::Reported(REPORTED_T0_PRIME), WindowCenter::LocatedZero),
                CenterChoice::LocatedZero => (WindowCenter::LocatedZero, WindowCenter::Reported(REPORTED_T0_PRIME)),
            };
            let rows = bf.table(main)?;
            let table = self.out_dir.join("table.csv");
            let mut w = create(&table)?;
            write_table_csv(&rows, &mut w)?;
            finish(w, &table)?;
            files.push(table);
            let alt_rows = bf.table(other)?;
            let alt_name = match other {
                WindowCenter::LocatedZero => "table_exact_zero.csv",
                WindowCenter::Reported(_) => "table_reported_center.csv",
            };
            let alt = self.out_dir.join(alt_name);
            let mut w = create(&alt)?;
            write_table_csv(&alt_rows, &mut w)?;
            finish(w, &alt)?;
            files.push(alt);
            fields["table_epsilon_s"] = json!(rows.iter().map(|r| r.epsilon_s).collect::<Vec<_>>());
        }
        Ok(Summary { fields, files })
    }

    fn superposition(&self, cfg: &ScenarioConfig) -> Result<Summary, CliError> {
        let s = cfg.superposition.expect("validated");
        let grid = cfg.grid.expect("validated").build()?;
        let params = PhysicalParams {
            hbar: s.hbar_j_s,
            mass: s.mass_kg,
            g: 0.0,
            sigma: s.sigma1_m,
            x0: 0.0,
            v0: 0.0,
        };
        let p1 = free_gaussian_packet(&params, s.a1_m, s.k1_per_m, s.sigma1_m)?;
        let p2 = free_gaussian_packet(&params, s.a2_m, s.k2_per_m, s.sigma2_m)?;
        let state = SuperpositionState::new(p1, p2)?;
        let opts = SuperpositionToaOptions {
            normalize: cfg.normalize,
            ..Default::default()
        };
        let dist = superposition_toa(&state, s.detector_m, &grid, &opts)?;
        let default = match cfg.name.as_deref() {
            Some("fig2-left") => "fig2_left.csv",
            Some("fig2-right") => "fig2_right.csv",
            _ => "superposition.csv",
        };
        let path = self.path(cfg, default);
        write_density_with_current(&dist, &path)?;
        let fields = json!({
            "normalization": dist.normalization,
            "zeros": zeros_json(&dist.zeros),
            "dimensionless": s.dimensionless,
        });
        Ok(Summary { fields, files: vec![path] })
    }

    fn gaussian(&self, cfg: &ScenarioConfig) -> Result<Summary, CliError> {
        let g = cfg.gaussian.expect("validated");
        let grid = cfg.grid.expect("validated").build()?;
        let params = PhysicalParams::new(g.hbar_j_s, g.mass_kg, g.g_m_per_s2, g.sigma_m, g.x0_m, g.v0_m_per_s)?;
        let (dist, reference) = if cfg.kind == ScenarioKind::GaussianFreefallPosition {
            let field = GaussianField::new(freefall_position_moments(params)?);
            let x = g.detector_m.expect("validated");
            (toa_from_current(&field, x, &grid, &CurrentOptions::default())?, None)
        } else {
            let field = GaussianField::new(freefall_momentum_moments(params)?);
            let p = g.detector_kg_m_per_s.expect("validated");
            let stats = freefall_velocity_toa_stats(&params, p / params.mass)?;
            (toa_from_current(&field, p, &grid, &CurrentOptions::default())?, Some(stats))
        };
        let mut fields = json!({ "zeros": zeros_json(&dist.zeros) });
        let dist = if cfg.normalize {
            let n = normalize(&dist)?;
            if n.normalization.is_some_and(|v| v < 1e-9) {
                log::warn!("only {:e} of the probability arrives; moments are not meaningful", n.normalization.unwrap());
            }
            fields["normalization"] = json!(n.normalization);
            let (mean, std) = moments(&n)?;
            fields["mean_s"] = json!(mean);
            fields["std_s"] = json!(std);
            if let Some((m, s)) = reference {
                fields["closed_form_mean_s"] = json!(m);
                fields["closed_form_std_s"] = json!(s);
            }
            n
        } else {
            dist
        };
        let path = self.path(cfg, "toa.csv");
        let mut w = create(&path)?;
        dist.write_csv(&mut w)?;
        finish(w, &path)?;
        Ok(Summary { fields, files: vec![path] })
    }

    fn sample(&self, cfg: &ScenarioConfig) -> Result<Summary, CliError> {
        let g = cfg.gaussian.expect("validated");
        let s = cfg.sample.expect("validated");
        let seed = cfg.seed.unwrap_or(0);
        let params = PhysicalParams::new(g.hbar_j_s, g.mass_kg, g.g_m_per_s2, g.sigma_m, g.x0_m, g.v0_m_per_s)?;
        let batch = match s.mode {
            SampleMode::VelocityArrival => {
                sample_gaussian_toa(&params, g.detector_kg_m_per_s.expect("validated"), s.count, seed)?
            }
            SampleMode::Position => {
                let field = GaussianField::new(freefall_position_moments(params)?);
                sample_observable(&field, s.time_s.expect("validated"), s.count, seed)?
            }
        };
        let path = self.path(cfg, "samples.csv");
        let mut w = create(&path)?;
        batch.write_csv(&mut w)?;
        finish(w, &path)?;
        let fields = json!({
            "seed": seed,
            "count": batch.count,
            "rejected": batch.rejected,
            "mean": batch.mean(),
            "std": batch.std(),
        });
        Ok(Summary { fields, files: vec![path] })
    }
}

/// `t,density,normalized_density,current`, the current being the signed rate.
fn write_density_with_current(dist: &ToaDistribution, path: &Path) -> Result<(), CliError> {
    let w = create(path)?;
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    out.write_record(["t", "density", "normalized_density", "current"]).map_err(csv_err)?;
    let normed = dist.normalized_density();
    for i in 0..dist.time_grid.len() {
        let n = normed.as_ref().map(|v| format_float(v[i])).unwrap_or_default();
        out.write_record([
            format_float(dist.time_grid[i]),
            format_float(dist.density[i]),
            n,
            format_float(dist.signed_rate[i]),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| io_error(path, e))
}
