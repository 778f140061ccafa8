//! TOML run configuration.
//!
//! Complex numbers are written either as a bare number or as `[re, im]`.
//! Polarization tensors are either `{ iso = c }` or a 3×3 array of complex
//! entries.

use std::path::{Path, PathBuf};

use dimer_core::effective::SweepPath;
use dimer_core::fields::{FarFieldConvention, IncidentWave};
use dimer_core::kernels::{Mat3C, Vec3R};
use dimer_core::materials::{ModelParams, PolarizationTensors, Sign};
use dimer_core::solver::{MethodChoice, SolverOptions, DEFAULT_DENSE_CAP};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Default for ComplexValue {
    fn default() -> Self {
        ComplexValue::Real(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorValue {
    Isotropic { iso: ComplexValue },
    Full([[ComplexValue; 3]; 3]),
}

impl TensorValue {
    pub fn value(&self) -> Mat3C {
        match self {
            TensorValue::Isotropic { iso } => Mat3C::identity() * iso.value(),
            TensorValue::Full(rows) => Mat3C::from_fn(|i, j| rows[i][j].value()),
        }
    }
}

impl Default for TensorValue {
    fn default() -> Self {
        TensorValue::Isotropic { iso: ComplexValue::Real(1.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SignValue {
    #[default]
    #[serde(rename = "+", alias = "plus")]
    Plus,
    #[serde(rename = "-", alias = "minus")]
    Minus,
}

impl From<SignValue> for Sign {
    fn from(s: SignValue) -> Sign {
        match s {
            SignValue::Plus => Sign::Plus,
            SignValue::Minus => Sign::Minus,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a: f64,
    pub h: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub k: f64,
    #[serde(default)]
    pub eta0: ComplexValue,
    #[serde(default)]
    pub eta2: ComplexValue,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default = "one")]
    pub d0: f64,
    #[serde(default)]
    pub sign_c: SignValue,
    #[serde(default)]
    pub sign_d: SignValue,
    #[serde(default = "one")]
    pub eps0: f64,
    #[serde(default = "one")]
    pub mu0: f64,
}

impl ModelConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            a: self.a,
            h: self.h,
            t1: self.t1,
            t2: self.t2,
            alpha0: self.alpha0,
            beta0: self.beta0,
            k: self.k,
            eta0: self.eta0.value(),
            eta2: self.eta2.value(),
            c0: self.c0,
            d0: self.d0,
            sign_c: self.sign_c.into(),
            sign_d: self.sign_d.into(),
            eps0: self.eps0,
            mu0: self.mu0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorsConfig {
    #[serde(default)]
    pub p011: TensorValue,
    #[serde(default)]
    pub p012: TensorValue,
    #[serde(default)]
    pub p021: TensorValue,
    #[serde(default)]
    pub p022: TensorValue,
}

impl TensorsConfig {
    pub fn tensors(&self) -> PolarizationTensors {
        PolarizationTensors { p011: self.p011.value(), p012: self.p012.value(), p021: self.p021.value(), p022: self.p022.value() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    #[default]
    Lattice,
    Random,
    File,
}

fn default_attempts() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub kind: GeometryKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_override: Option<usize>,
    /// Shared dimer axis, normalized on use. A random cluster without one
    /// draws each axis at random; a lattice defaults to `z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            kind: GeometryKind::Lattice,
            seed: 0,
            count_override: None,
            orientation: None,
            path: None,
            max_attempts: default_attempts(),
        }
    }
}

impl GeometryConfig {
    pub fn axis(&self) -> Option<Vec3R> {
        self.orientation.map(|[x, y, z]| Vec3R::new(x, y, z).normalize())
    }
}

/// Incidence direction from polar and azimuthal angles; `psi` rotates the
/// polarization from `e_θ` toward `e_φ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    #[serde(default)]
    pub polar: f64,
    #[serde(default)]
    pub azimuth: f64,
    #[serde(default)]
    pub psi: f64,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    500
}

fn default_cap() -> usize {
    DEFAULT_DENSE_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_method")]
    pub method: MethodChoice,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_cap")]
    pub dense_cap: usize,
}

fn default_method() -> MethodChoice {
    MethodChoice::Auto
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { method: MethodChoice::Auto, tol: default_tol(), max_iter: default_max_iter(), dense_cap: default_cap() }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { method: self.method, tol: self.tol, max_iter: self.max_iter, dense_cap: self.dense_cap }
    }
}

fn default_n_theta() -> usize {
    16
}

fn default_n_phi() -> usize {
    32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldConfig {
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default)]
    pub convention: FarFieldConvention,
}

impl Default for FarFieldConfig {
    fn default() -> Self {
        FarFieldConfig { n_theta: default_n_theta(), n_phi: default_n_phi(), convention: FarFieldConvention::default() }
    }
}

fn default_full_inverse() -> SweepPath {
    SweepPath::FullInverse
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    #[serde(default = "default_full_inverse")]
    pub path: SweepPath,
}

impl Default for EffectiveConfig {
    fn default() -> Self {
        EffectiveConfig { path: SweepPath::FullInverse }
    }
}

fn default_a_values() -> Vec<f64> {
    vec![1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9]
}

fn default_dominant() -> SweepPath {
    SweepPath::Dominant
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_a_values")]
    pub a_values: Vec<f64>,
    #[serde(default = "default_dominant")]
    pub path: SweepPath,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { a_values: default_a_values(), path: SweepPath::Dominant }
    }
}

/// Axes of the regime grid. An empty axis takes the model's own value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default)]
    pub t1: Vec<f64>,
    #[serde(default)]
    pub t2: Vec<f64>,
    #[serde(default)]
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory used when neither `--out` nor the environment names one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default)]
    pub tensors: TensorsConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub incident: IncidentConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub farfield: FarFieldConfig,
    #[serde(default)]
    pub effective: EffectiveConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub check: CheckConfig,
}

impl RunConfig {
    /// Parses and validates; relative geometry paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(p) = &cfg.geometry.path {
            if p.is_relative() {
                cfg.geometry.path = Some(base.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Err(e) = self.model.params().validate() {
            return bad(e.to_string());
        }
        if let Err(e) = self.model.params().scaling().validate() {
            return bad(e.to_string());
        }
        if self.geometry.kind == GeometryKind::File {
            match &self.geometry.path {
                None => return bad("geometry.kind = \"file\" needs geometry.path".into()),
                Some(p) if !p.is_file() => return bad(format!("geometry file {} does not exist", p.display())),
                Some(_) => {}
            }
        }
        if let Some(o) = self.geometry.orientation {
            if !(o.iter().all(|v| v.is_finite()) && o.iter().any(|&v| v != 0.0)) {
                return bad("geometry.orientation must be a finite nonzero vector".into());
            }
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver.tol must be positive and solver.max_iter nonzero".into());
        }
        if self.farfield.n_theta < 2 || self.farfield.n_phi < 3 {
            return bad("farfield grid needs n_theta >= 2 and n_phi >= 3".into());
        }
        if self.sweep.a_values.iter().any(|&a| !(a > 0.0)) {
            return bad("sweep.a_values must be positive".into());
        }
        let axes = [&self.check.h, &self.check.t1, &self.check.t2, &self.check.k];
        if axes.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return bad("check axes must be finite".into());
        }
        Ok(())
    }

    /// Hash of the canonical TOML form, excluding the output directory.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { output_dir: None, ..self.clone() }.to_toml();
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn incident_wave(&self) -> Result<IncidentWave, dimer_core::Error> {
        let i = &self.incident;
        Ok(IncidentWave::from_angles(i.polar, i.azimuth, i.psi, self.model.k)?)
    }
}
