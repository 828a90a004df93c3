//! JSON run configuration for the `kp` binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KpError, Result};
use crate::estimates::{EstimateId, TimeBox};
use crate::evolution::SolverConfig;
use crate::grid::Grid2D;
use crate::presets::InitialData;
use crate::symbol::DispersionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Norms,
    Verify,
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Ny")]
    pub ny: usize,
    #[serde(rename = "Nt", default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[serde(rename = "Lt", default, skip_serializing_if = "Option::is_none")]
    pub lt: Option<f64>,
}

impl GridConfig {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.lx, self.ly, self.nx, self.ny)
    }

    pub fn time_box(&self) -> Option<TimeBox> {
        match (self.nt, self.lt) {
            (Some(nt), Some(lt)) => Some(TimeBox { nt, lt }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub gamma: f64,
    pub beta: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { gamma: -1.0, beta: 1.0 }
    }
}

impl PhysicsConfig {
    pub fn params(&self) -> Result<DispersionParams> {
        DispersionParams::new(self.gamma, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbPair {
    pub s: f64,
    pub b: f64,
}

fn default_besov() -> Vec<f64> {
    vec![1.0]
}

fn default_weighted() -> Vec<f64> {
    vec![0.0]
}

fn yes() -> bool {
    true
}

/// Norms of the initial datum; `xsb` entries use `ψ(t)S(t)u₀` on the grid's time box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default = "default_besov")]
    pub besov_s: Vec<f64>,
    #[serde(default = "default_weighted")]
    pub weighted_r: Vec<f64>,
    #[serde(default = "yes")]
    pub energy: bool,
    #[serde(default)]
    pub xsb: Vec<SbPair>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self {
            besov_s: default_besov(),
            weighted_r: default_weighted(),
            energy: true,
            xsb: Vec::new(),
        }
    }
}

fn default_battery() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub estimates: Vec<EstimateId>,
    #[serde(default)]
    pub seed_start: u64,
    #[serde(default = "default_battery")]
    pub battery_size: usize,
    /// Also run every inequality on the doubled grid and compare max ratios.
    #[serde(default)]
    pub refinement: bool,
}

fn default_resolution() -> usize {
    crate::counterexample::MIN_RESOLUTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    #[serde(rename = "N")]
    pub n: Vec<f64>,
    pub eps: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_data: Option<InitialData>,
    /// Record diagnostics every this many time steps.
    #[serde(default = "default_every")]
    pub diagnostics_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleConfig>,
}

fn config_err(path: &str, message: impl Into<String>) -> KpError {
    KpError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        KpError::Config { .. } => e,
        other => config_err(path, other.to_string()),
    })
}

fn required<'a, T>(v: &'a Option<T>, path: &str, mode: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| config_err(path, format!("required in {mode} mode")))
}

impl RunConfig {
    /// Parse and validate; errors carry the offending key path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(".", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Re-serialization with sorted keys.
    pub fn canonical(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn validate(&self) -> Result<()> {
        at("physics", self.physics.params())?;
        if let Some(g) = &self.grid {
            at("grid", g.grid())?;
            if g.nt.is_some() != g.lt.is_some() {
                return Err(config_err("grid", "Nt and Lt must be given together"));
            }
            if let Some(tb) = g.time_box() {
                at("grid.Nt", crate::grid::check_axis("t", tb.nt, tb.lt))?;
                if tb.lt < 2.0 {
                    return Err(config_err("grid.Lt", "the time box must contain |t| < 1"));
                }
            }
        }
        if let Some(s) = &self.solver {
            at("solver", s.validate())?;
        }
        if let Some(d) = &self.initial_data {
            at("initial_data", d.validate())?;
        }
        if self.diagnostics_every == 0 {
            return Err(config_err("diagnostics_every", "must be positive"));
        }
        match self.mode {
            Mode::Simulate => {
                required(&self.grid, "grid", "simulate")?;
                required(&self.solver, "solver", "simulate")?;
                required(&self.initial_data, "initial_data", "simulate")?;
            }
            Mode::Norms => {
                let g = required(&self.grid, "grid", "norms")?;
                required(&self.initial_data, "initial_data", "norms")?;
                let n = self.norms.clone().unwrap_or_default();
                if !n.xsb.is_empty() && g.time_box().is_none() {
                    return Err(config_err("grid.Nt", "X norms need Nt and Lt"));
                }
                if n.besov_s.iter().chain(&n.weighted_r).any(|v| !v.is_finite()) {
                    return Err(config_err("norms", "indices must be finite"));
                }
            }
            Mode::Verify => {
                let v = required(&self.verify, "verify", "verify")?;
                if v.estimates.is_empty() {
                    return Err(config_err("verify.estimates", "at least one estimate is required"));
                }
                if v.battery_size == 0 {
                    return Err(config_err("verify.battery_size", "must be positive"));
                }
                if let Some(g) = &self.grid {
                    if g.nx != g.ny || g.lx != g.ly {
                        return Err(config_err("grid", "the battery needs a square grid"));
                    }
                }
            }
            Mode::Counterexample => {
                let c = required(&self.counterexample, "counterexample", "counterexample")?;
                if c.n.is_empty() {
                    return Err(config_err("counterexample.N", "at least one N is required"));
                }
                if let Some(n) = c.n.iter().find(|n| !(**n >= crate::counterexample::MIN_N && n.is_finite())) {
                    return Err(config_err(
                        "counterexample.N",
                        format!("N must be at least {}, got {n}", crate::counterexample::MIN_N),
                    ));
                }
                if c.eps.is_empty() || c.eps.iter().any(|e| !(0.0..1.0).contains(e)) {
                    return Err(config_err("counterexample.eps", "eps values must lie in [0, 1)"));
                }
                if c.resolution < crate::counterexample::MIN_RESOLUTION {
                    return Err(config_err(
                        "counterexample.resolution",
                        format!("must be at least {}", crate::counterexample::MIN_RESOLUTION),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM: &str = r#"{
        "mode": "simulate",
        "grid": {"Lx": 25.0, "Ly": 25.0, "Nx": 32, "Ny": 32},
        "solver": {"dt": 0.01, "T": 0.1},
        "initial_data": {"preset": "gaussian", "amplitude": 0.1}
    }"#;

    #[test]
    fn minimal_simulate_config() {
        let c = RunConfig::from_json(SIM).unwrap();
        assert_eq!(c.mode, Mode::Simulate);
        assert_eq!(c.physics, PhysicsConfig::default());
        assert_eq!(c.diagnostics_every, 1);
    }

    #[test]
    fn unknown_key_reports_its_path() {
        let bad = SIM.replace("\"Ny\": 32", "\"Ny\": 32, \"Nz\": 4");
        match RunConfig::from_json(&bad) {
            Err(KpError::Config { path, .. }) => assert_eq!(path, "grid.Nz"),
            other => panic!("{other:?}"),
        }
        let bad = SIM.replace("\"T\": 0.1", "\"T\": 0.1, \"order\": 4");
        match RunConfig::from_json(&bad) {
            Err(KpError::Config { path, .. }) => assert_eq!(path, "solver.order"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ranges_are_checked() {
        let bad = SIM.replace("\"dt\": 0.01", "\"dt\": -0.01");
        assert!(matches!(RunConfig::from_json(&bad), Err(KpError::Config { path, .. }) if path == "solver"));
        let bad = SIM.replace("\"Nx\": 32", "\"Nx\": 31");
        assert!(matches!(RunConfig::from_json(&bad), Err(KpError::Config { path, .. }) if path == "grid"));
        let missing = r#"{"mode": "counterexample"}"#;
        assert!(
            matches!(RunConfig::from_json(missing), Err(KpError::Config { path, .. }) if path == "counterexample")
        );
        let small = r#"{"mode": "counterexample", "counterexample": {"N": [8], "eps": [0]}}"#;
        assert!(RunConfig::from_json(small).is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = RunConfig::from_json(SIM).unwrap();
        let text = c.canonical();
        let again = RunConfig::from_json(&text).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.canonical(), text);
        let grid_at = text.find("\"grid\"").unwrap();
        let mode_at = text.find("\"mode\"").unwrap();
        assert!(grid_at < mode_at);
    }
}
