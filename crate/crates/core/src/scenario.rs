//! Scenario configuration: JSON schema, validation and check registry.
//!
//! Configs are strict: unknown keys anywhere are schema errors, because a
//! silently ignored misspelling would invalidate a verification claim.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::{self, Datum, DatumPair, GaussianTerm, ModelParams, RawParams};
use crate::quad::QuadratureSpec;

/// All check identifiers the runner knows, in report order.
pub const CHECK_REGISTRY: &[&str] = &[
    "mode_residual",
    "energy_identity",
    "energy_absorption",
    "energy_flux",
    "energy_equivalence",
    "pointwise_decay",
    "energy_monotone",
    "reconstruction",
    "data_moment_bounds",
    "tail_envelope",
    "remainder_rates",
    "profile_rate",
    "norm_envelope",
    "norm_decay",
    "oscillation_constants",
    "appendix_probe",
];

/// Checks that need the asymptotic profile or the t^{-n/4} decay, hence a
/// positive mass (massless low-dimension norms grow instead of decaying).
const MASSIVE_ONLY: &[&str] = &[
    "tail_envelope",
    "remainder_rates",
    "profile_rate",
    "norm_envelope",
    "norm_decay",
    "oscillation_constants",
    "appendix_probe",
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("config: {0}")]
    Invalid(String),
}

impl From<catalog::CatalogError> for ScenarioError {
    fn from(e: catalog::CatalogError) -> Self {
        ScenarioError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    pub terms: Vec<GaussianTerm>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
    /// Samples inside each per-period cluster of the decay grids (m > 0).
    #[serde(default = "default_spp")]
    pub samples_per_period: usize,
}

fn default_t_min() -> f64 {
    100.0
}
fn default_t_max() -> f64 {
    10_000.0
}
fn default_ppd() -> usize {
    16
}
fn default_spp() -> usize {
    8
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_min: default_t_min(),
            t_max: default_t_max(),
            points_per_decade: default_ppd(),
            samples_per_period: default_spp(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_panels")]
    pub max_panels: usize,
    #[serde(default)]
    pub truncation_radius: Option<f64>,
    #[serde(default = "default_osc_res")]
    pub oscillation_resolution: f64,
}

fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-13
}
fn default_max_panels() -> usize {
    20_000
}
fn default_osc_res() -> f64 {
    8.0
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_panels: default_max_panels(),
            truncation_radius: None,
            oscillation_resolution: default_osc_res(),
        }
    }
}

impl QuadConfig {
    pub fn to_spec(self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_panels: self.max_panels,
            truncation_radius: self.truncation_radius,
            oscillation_resolution: self.oscillation_resolution,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

/// Undocumented fault-injection hooks for exercising the failure paths.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugConfig {
    /// Multiplies the decay-certificate prefactor C.
    #[serde(default)]
    pub certificate_c_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: RawParams,
    pub u0: DatumConfig,
    pub u1: DatumConfig,
    #[serde(default)]
    pub t_grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadConfig,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub debug: Option<DebugConfig>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ModelParams,
    pub pair: DatumPair,
    pub grid: GridConfig,
    pub quad: QuadratureSpec,
    pub checks: Vec<String>,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub seed: u64,
    pub certificate_c_scale: f64,
}

impl Scenario {
    pub fn from_config(cfg: ScenarioConfig) -> Result<Self, ScenarioError> {
        let params = catalog::validate_params(cfg.params)?;
        let u0 = Datum::new(cfg.u0.terms, params.n)?;
        let u1 = Datum::new(cfg.u1.terms, params.n)?;
        let pair = DatumPair::new(u0, u1)?;

        let g = cfg.t_grid;
        if !(g.t_min > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "t_grid.t_min must be positive for decay measurements, got {}",
                g.t_min
            )));
        }
        if !(g.t_max > g.t_min) {
            return Err(ScenarioError::Invalid(
                "t_grid.t_max must exceed t_min".into(),
            ));
        }
        if g.points_per_decade < 4 {
            return Err(ScenarioError::Invalid(format!(
                "t_grid.points_per_decade must be at least 4, got {}",
                g.points_per_decade
            )));
        }
        if g.samples_per_period < 1 {
            return Err(ScenarioError::Invalid(
                "t_grid.samples_per_period must be at least 1".into(),
            ));
        }

        let quad = cfg.quadrature.to_spec();
        quad.validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;

        let checks = if cfg.checks.is_empty() {
            default_checks(params.m)
        } else {
            for c in &cfg.checks {
                if !CHECK_REGISTRY.contains(&c.as_str()) {
                    return Err(ScenarioError::Invalid(format!(
                        "unknown check `{c}`; known checks: {}",
                        CHECK_REGISTRY.join(", ")
                    )));
                }
                if params.m == 0.0 && MASSIVE_ONLY.contains(&c.as_str()) {
                    return Err(ScenarioError::Invalid(format!(
                        "check `{c}` requires m > 0"
                    )));
                }
            }
            cfg.checks
        };

        Ok(Scenario {
            params,
            pair,
            grid: g,
            quad,
            checks,
            out_dir: cfg.outputs.dir.unwrap_or_else(|| PathBuf::from("out")),
            svg: cfg.outputs.svg,
            seed: cfg.seed.unwrap_or(0),
            certificate_c_scale: cfg
                .debug
                .and_then(|d| d.certificate_c_scale)
                .unwrap_or(1.0),
        })
    }

    pub fn from_json(json: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(json)?;
        Self::from_config(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// The default suite: every registered check applicable to the scenario's
/// mass.
pub fn default_checks(m: f64) -> Vec<String> {
    CHECK_REGISTRY
        .iter()
        .filter(|c| m > 0.0 || !MASSIVE_ONLY.contains(c))
        .map(|c| c.to_string())
        .collect()
}
