//! Run configuration: defaults, an optional TOML file, and command-line overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::energy::XiSpec;
use crate::error::{Error, Result};
use crate::field::{FdScheme, Grid};
use crate::models::{default_states, Family, ModelSpec, Sign, SolutionType};
use crate::symmetry::SymmetryKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative error for the algebra identities.
    pub tau_alg: f64,
    /// Relative error for `exp(a + b) = exp(a) exp(b)`.
    pub tau_exp: f64,
    /// Singularity scale: `|z1² + z2²| ≤ sigma · max(1, ‖a‖²)`.
    pub sigma: f64,
    pub tau_fd: f64,
    pub tau_cr_analytic: f64,
    pub tau_cr_fd: f64,
    pub tau_constraint: f64,
    pub tau_e: f64,
    pub tau_agree: f64,
    pub tau_ase: f64,
    pub tau_sym: f64,
    pub eps_den: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_alg: 1e-12,
            tau_exp: 1e-10,
            sigma: 1e-12,
            tau_fd: 1e-5,
            tau_cr_analytic: 1e-6,
            tau_cr_fd: 1e-4,
            tau_constraint: 1e-12,
            tau_e: 1e-8,
            tau_agree: 1e-4,
            tau_ase: 1e-4,
            tau_sym: 1e-9,
            eps_den: 1e-10,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 12] {
        [
            ("tau-alg", self.tau_alg),
            ("tau-exp", self.tau_exp),
            ("sigma", self.sigma),
            ("tau-fd", self.tau_fd),
            ("tau-cr-analytic", self.tau_cr_analytic),
            ("tau-cr-fd", self.tau_cr_fd),
            ("tau-constraint", self.tau_constraint),
            ("tau-e", self.tau_e),
            ("tau-agree", self.tau_agree),
            ("tau-ase", self.tau_ase),
            ("tau-sym", self.tau_sym),
            ("eps-den", self.eps_den),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.entries() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(Error::config("format", format!("expected json or text, got `{s}`"))),
        }
    }
}

/// Groups of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Algebra,
    Matrix,
    Cr,
    Constraints,
    Energy,
    Ase,
    Invariance,
    Classify,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 8] = [
        SuiteKind::Algebra,
        SuiteKind::Matrix,
        SuiteKind::Cr,
        SuiteKind::Constraints,
        SuiteKind::Energy,
        SuiteKind::Ase,
        SuiteKind::Invariance,
        SuiteKind::Classify,
    ];
    pub const ALGEBRA: [SuiteKind; 2] = [SuiteKind::Algebra, SuiteKind::Matrix];
    pub const MODEL: [SuiteKind; 5] = [
        SuiteKind::Cr,
        SuiteKind::Constraints,
        SuiteKind::Energy,
        SuiteKind::Ase,
        SuiteKind::Invariance,
    ];
}

/// Model selection with every field optional, as it appears in files and on the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModelArgs {
    pub family: Option<Family>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    #[serde(rename = "type")]
    pub solution_type: Option<SolutionType>,
    pub sign: Option<Sign>,
    pub beta3: Option<Sign>,
    pub beta4: Option<Sign>,
}

impl ModelArgs {
    pub fn is_empty(&self) -> bool {
        *self == ModelArgs::default()
    }

    /// Fields set in `over` win.
    pub fn merged(&self, over: &ModelArgs) -> ModelArgs {
        ModelArgs {
            family: over.family.or(self.family),
            a: over.a.or(self.a),
            b: over.b.or(self.b),
            solution_type: over.solution_type.or(self.solution_type),
            sign: over.sign.or(self.sign),
            beta3: over.beta3.or(self.beta3),
            beta4: over.beta4.or(self.beta4),
        }
    }

    pub fn to_spec(&self) -> Result<ModelSpec> {
        let family = self.family.ok_or_else(|| Error::config("family", "a model family is required"))?;
        let ty = self.solution_type.unwrap_or(SolutionType::I);
        let sign = self.sign.unwrap_or(Sign::Plus);
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::config(name, format!("required for the {family} oscillator")))
        };
        let spec = match family {
            Family::Harmonic => ModelSpec::harmonic(need(self.a, "a")?, ty, sign),
            Family::Inverted => ModelSpec::inverted(need(self.b, "b")?, ty, sign),
            Family::Isotonic => ModelSpec::isotonic(
                need(self.a, "a")?,
                need(self.b, "b")?,
                ty,
                sign,
                self.beta3.unwrap_or(Sign::Plus),
                self.beta4.unwrap_or(Sign::Plus),
            ),
        };
        spec.validate().map_err(|e| Error::config("model", e.to_string()))?;
        Ok(spec)
    }
}

/// Contents of a `--config` file. Keys mirror the command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub matrix_samples: Option<usize>,
    pub energy_points: Option<usize>,
    pub grid_range: Option<f64>,
    pub grid_points: Option<usize>,
    pub exclusion_radius: Option<f64>,
    pub fd_step: Option<f64>,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub timing: Option<bool>,
    pub op: Option<SymmetryKind>,
    pub tolerances: Option<Tolerances>,
    pub family: Option<Family>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    #[serde(rename = "type")]
    pub solution_type: Option<SolutionType>,
    pub sign: Option<Sign>,
    pub beta3: Option<Sign>,
    pub beta4: Option<Sign>,
    pub models: Option<Vec<ModelArgs>>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The single-model keys.
    pub fn model(&self) -> ModelArgs {
        ModelArgs {
            family: self.family,
            a: self.a,
            b: self.b,
            solution_type: self.solution_type,
            sign: self.sign,
            beta3: self.beta3,
            beta4: self.beta4,
        }
    }

    /// Fields set in `over` win.
    pub fn merged(self, over: FileConfig) -> FileConfig {
        FileConfig {
            seed: over.seed.or(self.seed),
            samples: over.samples.or(self.samples),
            matrix_samples: over.matrix_samples.or(self.matrix_samples),
            energy_points: over.energy_points.or(self.energy_points),
            grid_range: over.grid_range.or(self.grid_range),
            grid_points: over.grid_points.or(self.grid_points),
            exclusion_radius: over.exclusion_radius.or(self.exclusion_radius),
            fd_step: over.fd_step.or(self.fd_step),
            xi1: over.xi1.or(self.xi1),
            xi2: over.xi2.or(self.xi2),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            workers: over.workers.or(self.workers),
            timing: over.timing.or(self.timing),
            op: over.op.or(self.op),
            tolerances: over.tolerances.or(self.tolerances),
            family: over.family.or(self.family),
            a: over.a.or(self.a),
            b: over.b.or(self.b),
            solution_type: over.solution_type.or(self.solution_type),
            sign: over.sign.or(self.sign),
            beta3: over.beta3.or(self.beta3),
            beta4: over.beta4.or(self.beta4),
            models: over.models.or(self.models),
        }
    }
}

/// A fully resolved, validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub suites: Vec<SuiteKind>,
    pub models: Vec<ModelSpec>,
    pub ops: Vec<SymmetryKind>,
    pub seed: u64,
    pub samples: usize,
    pub matrix_samples: usize,
    pub energy_points: usize,
    pub grid_range: f64,
    pub grid_points: usize,
    pub exclusion_radius: f64,
    pub fd_step: f64,
    pub tolerances: Tolerances,
    pub xi: XiSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
    /// Include wall-clock times in reports (breaks byte-for-byte reproducibility).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suites: SuiteKind::ALL.to_vec(),
            models: default_states(),
            ops: vec![SymmetryKind::PTi, SymmetryKind::PTii],
            seed: 0,
            samples: 10_000,
            matrix_samples: 1_000,
            energy_points: 50,
            grid_range: Grid::DEFAULT_RANGE,
            grid_points: Grid::DEFAULT_POINTS,
            exclusion_radius: 0.5,
            fd_step: FdScheme::DEFAULT_STEP,
            tolerances: Tolerances::default(),
            xi: XiSpec::default(),
            out: None,
            format: Format::Json,
            workers: 1,
            timing: false,
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with `file`; the model list comes from `models`, then the
    /// single-model keys, then the built-in six states.
    pub fn resolve(suites: &[SuiteKind], file: FileConfig) -> Result<Self> {
        let d = RunConfig::default();
        let single = file.model();
        let models = if let Some(list) = &file.models {
            list.iter()
                .map(|m| m.merged(&single).to_spec())
                .collect::<Result<Vec<_>>>()?
        } else if !single.is_empty() {
            vec![single.to_spec()?]
        } else {
            d.models.clone()
        };
        let cfg = RunConfig {
            suites: suites.to_vec(),
            models,
            ops: file.op.map(|o| vec![o]).unwrap_or(d.ops),
            seed: file.seed.unwrap_or(d.seed),
            samples: file.samples.unwrap_or(d.samples),
            matrix_samples: file.matrix_samples.unwrap_or(d.matrix_samples),
            energy_points: file.energy_points.unwrap_or(d.energy_points),
            grid_range: file.grid_range.unwrap_or(d.grid_range),
            grid_points: file.grid_points.unwrap_or(d.grid_points),
            exclusion_radius: file.exclusion_radius.unwrap_or(d.exclusion_radius),
            fd_step: file.fd_step.unwrap_or(d.fd_step),
            tolerances: file.tolerances.unwrap_or(d.tolerances),
            xi: XiSpec {
                xi1: file.xi1.unwrap_or(d.xi.xi1),
                xi2: file.xi2.unwrap_or(d.xi.xi2),
            },
            out: file.out,
            format: file.format.unwrap_or(d.format),
            workers: file.workers.unwrap_or(d.workers),
            timing: file.timing.unwrap_or(d.timing),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        self.xi.validate()?;
        FdScheme::new(self.fd_step)?;
        if !(self.grid_range > 0.0 && self.grid_range.is_finite()) {
            return Err(Error::config("grid-range", format!("must be positive, got {}", self.grid_range)));
        }
        if self.grid_points < 3 {
            return Err(Error::config("grid-points", format!("need at least 3, got {}", self.grid_points)));
        }
        if !(self.exclusion_radius >= 0.0 && self.exclusion_radius.is_finite()) {
            return Err(Error::config("exclusion-radius", "must be non-negative"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        for (name, n) in [("samples", self.samples), ("matrix-samples", self.matrix_samples), ("energy-points", self.energy_points)] {
            if n == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        for op in &self.ops {
            if !matches!(op, SymmetryKind::PTi | SymmetryKind::PTii) {
                return Err(Error::config("op", format!("only pti and ptii can be classified, got {op}")));
            }
        }
        let pt_in_play = self.suites.iter().any(|s| matches!(s, SuiteKind::Classify | SuiteKind::Invariance));
        if pt_in_play && !self.models.is_empty() {
            self.xi.validate_for_pt()?;
        }
        for m in &self.models {
            m.validate().map_err(|e| Error::config("model", e.to_string()))?;
            if m.is_singular_family() && self.grid_for(m).points().is_err() {
                return Err(Error::config("exclusion-radius", "excludes every grid point"));
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> FdScheme {
        FdScheme { h: self.fd_step }
    }

    /// Sampling grid; isotonic models get the exclusion disc around `w1 = 0`, `w2 = 0`.
    pub fn grid_for(&self, spec: &ModelSpec) -> Grid {
        Grid::symmetric(self.grid_range, self.grid_points)
            .with_exclusion(spec.is_singular_family().then_some(self.exclusion_radius))
    }

    pub fn echo(&self) -> serde_json::Value {
        let tol: serde_json::Map<String, serde_json::Value> = self
            .tolerances
            .entries()
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        json!({
            "suites": self.suites,
            "models": self.models.iter().map(|m| m.label()).collect::<Vec<_>>(),
            "ops": self.ops.iter().map(|o| o.name()).collect::<Vec<_>>(),
            "seed": self.seed,
            "samples": self.samples,
            "matrix-samples": self.matrix_samples,
            "energy-points": self.energy_points,
            "grid-range": self.grid_range,
            "grid-points": self.grid_points,
            "exclusion-radius": self.exclusion_radius,
            "fd-step": self.fd_step,
            "xi1": self.xi.xi1,
            "xi2": self.xi.xi2,
            "workers": self.workers,
            "tolerances": tol,
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "harmonic" => Ok(Family::Harmonic),
            "inverted" => Ok(Family::Inverted),
            "isotonic" => Ok(Family::Isotonic),
            _ => Err(Error::config("family", format!("expected harmonic, inverted or isotonic, got `{s}`"))),
        }
    }
}

impl FromStr for SolutionType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(SolutionType::I),
            "II" | "ii" | "2" => Ok(SolutionType::II),
            _ => Err(Error::config("type", format!("expected I or II, got `{s}`"))),
        }
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            _ => Err(Error::config("sign", format!("expected plus or minus, got `{s}`"))),
        }
    }
}
