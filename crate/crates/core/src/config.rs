//! Sweep configuration files.
//!
//! ```toml
//! geometry = "demo_geometry.toml"   # relative to this file
//! eps = [0.4, 0.2, 0.1, 0.05]
//! target_h = 0.02
//! refinements = 0
//! output = "out"
//! tol = 1e-10                       # optional
//! infsup_h = 0.1                    # optional, coarse mesh for beta_h
//!
//! [data]
//! a1 = "1"
//! a2 = "1"
//! alpha = "0.1"
//! source = "1"
//! ```

use crate::data::{DataError, DataSpec, ProblemData};
use crate::geometry::{format_toml_error, FissuredMedium, GeometryError, MediumSpec};
use crate::solver::DEFAULT_TOL;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config: {0}")]
    Syntax(String),
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub geometry: PathBuf,
    pub eps: Vec<f64>,
    pub target_h: f64,
    #[serde(default)]
    pub refinements: u32,
    pub output: PathBuf,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infsup_h: Option<f64>,
    pub data: DataSpec,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl SweepConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<SweepConfig, ConfigError> {
        let mut c: SweepConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(format_toml_error(text, &e)))?;
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<SweepConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        SweepConfig::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Syntax(m) => ConfigError::Syntax(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks the ε list and mesh parameters; does not touch the file system.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.eps.is_empty() {
            return Err(ConfigError::Invalid("eps list is empty".into()));
        }
        for &e in &self.eps {
            if !(e > 0.0 && e <= 1.0) {
                return Err(ConfigError::Invalid(format!("eps value {e} is outside (0, 1]")));
            }
        }
        for w in self.eps.windows(2) {
            if !(w[1] < w[0]) {
                return Err(ConfigError::Invalid(format!("eps list must be strictly decreasing ({} then {})", w[0], w[1])));
            }
        }
        if !(self.target_h > 0.0 && self.target_h.is_finite()) {
            return Err(ConfigError::Invalid(format!("target_h {} must be positive", self.target_h)));
        }
        if let Some(h) = self.infsup_h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::Invalid(format!("infsup_h {h} must be positive")));
            }
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(ConfigError::Invalid(format!("tol {} must lie in (0, 1e-6]", self.tol)));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn geometry_path(&self) -> PathBuf {
        self.resolve(&self.geometry)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn load_medium(&self) -> Result<FissuredMedium, ConfigError> {
        let spec = MediumSpec::from_file(&self.geometry_path())?;
        Ok(crate::geometry::validate_medium(&spec)?)
    }

    pub fn problem_data(&self) -> Result<ProblemData, ConfigError> {
        Ok(ProblemData::from_spec(&self.data)?)
    }

    /// Mesh size after the requested number of halvings.
    pub fn mesh_h(&self) -> f64 {
        self.target_h / 2f64.powi(self.refinements as i32)
    }
}
