//! Scenario configuration: TOML, SI units with the unit in each key name.

use serde::{Deserialize, Serialize};
use toa_core::backflow::{RB87_MASS, RB87_VELOCITY};
use toa_core::{GridSpec, Spacing};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    GaussianFreefallPosition,
    GaussianFreefallMomentum,
    Superposition,
    Backflow,
    Sample,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::GaussianFreefallPosition => "gaussian-freefall-position",
            ScenarioKind::GaussianFreefallMomentum => "gaussian-freefall-momentum",
            ScenarioKind::Superposition => "superposition",
            ScenarioKind::Backflow => "backflow",
            ScenarioKind::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Free-text tag carried into the summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superposition: Option<SuperpositionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backflow: Option<BackflowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Main CSV file name; each scenario has a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

/// Free-fall Gaussian packet, and the detector value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    pub hbar_j_s: f64,
    pub mass_kg: f64,
    pub g_m_per_s2: f64,
    pub sigma_m: f64,
    pub x0_m: f64,
    pub v0_m_per_s: f64,
    /// Detector position, for the position scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_m: Option<f64>,
    /// Target momentum, for the momentum scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_kg_m_per_s: Option<f64>,
}

/// Two free packets. With `dimensionless = true` the values are in units
/// where `hbar = m = 1` and the suffixes are nominal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionConfig {
    #[serde(default)]
    pub dimensionless: bool,
    pub hbar_j_s: f64,
    pub mass_kg: f64,
    pub sigma1_m: f64,
    pub sigma2_m: f64,
    pub a1_m: f64,
    pub a2_m: f64,
    pub k1_per_m: f64,
    pub k2_per_m: f64,
    pub detector_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterChoice {
    LocatedZero,
    Reported,
}

/// Backflow state in the frame set by `alpha = m v`. The time grid is in
/// dimensionless units (`dimensionless_grid` must be true).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackflowConfig {
    pub mass_kg: f64,
    pub velocity_m_per_s: f64,
    #[serde(default = "yes")]
    pub dimensionless_grid: bool,
    #[serde(default)]
    pub table: bool,
    #[serde(default = "reported")]
    pub window_center: CenterChoice,
}

fn yes() -> bool {
    true
}

fn reported() -> CenterChoice {
    CenterChoice::Reported
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// `T_v` from the momentum scenario in the `gaussian` section.
    VelocityArrival,
    /// Position draws `A_t` of the free-fall packet at `time_s`.
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub mode: SampleMode,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_s: Option<f64>,
}

fn positive(v: &mut Vec<String>, key: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        v.push(format!("{key} must be finite and > 0, got {x}"));
    }
}

fn finite(v: &mut Vec<String>, key: &str, x: f64) {
    if !x.is_finite() {
        v.push(format!("{key} must be finite, got {x}"));
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Usage("configuration is empty".into()));
        }
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        match &self.grid {
            Some(g) => v.extend(g.violations()),
            None if self.kind != ScenarioKind::Sample => v.push("missing [grid] section".into()),
            None => {}
        }
        let need_gaussian = matches!(
            self.kind,
            ScenarioKind::GaussianFreefallPosition | ScenarioKind::GaussianFreefallMomentum | ScenarioKind::Sample
        );
        if need_gaussian {
            match &self.gaussian {
                None => v.push(format!("kind {} needs a [gaussian] section", self.kind.name())),
                Some(g) => {
                    positive(&mut v, "gaussian.hbar_j_s", g.hbar_j_s);
                    positive(&mut v, "gaussian.mass_kg", g.mass_kg);
                    positive(&mut v, "gaussian.sigma_m", g.sigma_m);
                    finite(&mut v, "gaussian.x0_m", g.x0_m);
                    finite(&mut v, "gaussian.v0_m_per_s", g.v0_m_per_s);
                    if !(g.g_m_per_s2 >= 0.0 && g.g_m_per_s2.is_finite()) {
                        v.push(format!("gaussian.g_m_per_s2 must be finite and >= 0, got {}", g.g_m_per_s2));
                    }
                    let momentum = self.kind == ScenarioKind::GaussianFreefallMomentum
                        || self.sample.is_some_and(|s| s.mode == SampleMode::VelocityArrival);
                    if momentum {
                        match g.detector_kg_m_per_s {
                            None => v.push("gaussian.detector_kg_m_per_s is required".into()),
                            Some(p) => finite(&mut v, "gaussian.detector_kg_m_per_s", p),
                        }
                        if !(g.g_m_per_s2 > 0.0) {
                            v.push("gaussian.g_m_per_s2 must be > 0 for momentum arrival times".into());
                        }
                    }
                    if self.kind == ScenarioKind::GaussianFreefallPosition {
                        match g.detector_m {
                            None => v.push("gaussian.detector_m is required".into()),
                            Some(x) => finite(&mut v, "gaussian.detector_m", x),
                        }
                    }
                }
            }
        }
        if self.kind == ScenarioKind::Superposition {
            match &self.superposition {
                None => v.push("kind superposition needs a [superposition] section".into()),
                Some(s) => {
                    positive(&mut v, "superposition.hbar_j_s", s.hbar_j_s);
                    positive(&mut v, "superposition.mass_kg", s.mass_kg);
                    positive(&mut v, "superposition.sigma1_m", s.sigma1_m);
                    positive(&mut v, "superposition.sigma2_m", s.sigma2_m);
                    for (k, x) in [
                        ("superposition.a1_m", s.a1_m),
                        ("superposition.a2_m", s.a2_m),
                        ("superposition.k1_per_m", s.k1_per_m),
                        ("superposition.k2_per_m", s.k2_per_m),
                        ("superposition.detector_m", s.detector_m),
                    ] {
                        finite(&mut v, k, x);
                    }
                }
            }
        }
        if self.kind == ScenarioKind::Backflow {
            match &self.backflow {
                None => v.push("kind backflow needs a [backflow] section".into()),
                Some(b) => {
                    positive(&mut v, "backflow.mass_kg", b.mass_kg);
                    positive(&mut v, "backflow.velocity_m_per_s", b.velocity_m_per_s);
                    if !b.dimensionless_grid {
                        v.push("backflow.dimensionless_grid must be true: the grid is in units of m hbar/alpha^2".into());
                    }
                }
            }
            if let Some(g) = &self.grid {
                if g.min <= 0.0 {
                    v.push("backflow grid.min must be > 0 (the state is singular at t' = 0)".into());
                }
            }
        }
        if self.kind == ScenarioKind::Sample {
            match &self.sample {
                None => v.push("kind sample needs a [sample] section".into()),
                Some(s) => {
                    if s.count == 0 {
                        v.push("sample.count must be >= 1".into());
                    }
                    if s.mode == SampleMode::Position {
                        match s.time_s {
                            None => v.push("sample.time_s is required for mode position".into()),
                            Some(t) if !(t >= 0.0 && t.is_finite()) => {
                                v.push(format!("sample.time_s must be finite and >= 0, got {t}"))
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(v))
        }
    }
}

pub const PRESET_NAMES: [&str; 4] = ["fig1", "fig2-left", "fig2-right", "rb87-table"];

pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../presets/fig1.toml"),
        "fig2-left" => include_str!("../presets/fig2-left.toml"),
        "fig2-right" => include_str!("../presets/fig2-right.toml"),
        "rb87-table" => include_str!("../presets/rb87-table.toml"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    let text = preset_text(name).ok_or_else(|| {
        CliError::Usage(format!("unknown preset {name:?}; available: {}", PRESET_NAMES.join(", ")))
    })?;
    ScenarioConfig::parse(text)
}

/// The rubidium backflow run used by `toa backflow --rb87`.
pub fn rb87() -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::Backflow,
        name: Some("rb87".into()),
        normalize: true,
        seed: None,
        grid: Some(GridSpec {
            min: 1e-4,
            max: 10.0,
            count: 2001,
            spacing: Spacing::Log,
        }),
        output: None,
        gaussian: None,
        superposition: None,
        backflow: Some(BackflowConfig {
            mass_kg: RB87_MASS,
            velocity_m_per_s: RB87_VELOCITY,
            dimensionless_grid: true,
            table: true,
            window_center: CenterChoice::Reported,
        }),
        sample: None,
    }
}
