//! Run configuration files and their resolution against the catalog.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kepler_ermakov::funcs::FnSpec;
use kepler_ermakov::integrate::StepController;
use kepler_ermakov::params::ParameterSet;
use kepler_ermakov::state::{sample_states, validate_state, PhaseState, SampleBox};
use kepler_ermakov::systems::{recipe, registry, SystemInfo, SystemModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// A JSON run description. Everything except `system` is optional; omitted
/// parameters, functions, sampling box and horizon come from the system's
/// built-in recipe.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: String,
    #[serde(default)]
    pub params: ParameterSet,
    /// User functions by slot name, chosen from the built-in library.
    #[serde(default)]
    pub functions: BTreeMap<String, FnSpec>,
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub constraint: Option<Constraint>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// Invariants to track; all cataloged ones when absent.
    #[serde(default)]
    pub invariants: Option<Vec<String>>,
    /// Number of sampled states for checks.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default)]
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

/// Solve one velocity so that the energy takes a target value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    /// Coordinate whose velocity is solved for.
    pub solve: String,
    #[serde(default)]
    pub energy: f64,
    /// Preferred sign of the solved velocity.
    #[serde(default = "one")]
    pub sign: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub h_init: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Integrate once per grid point and report invariant drifts.
    #[default]
    Drift,
    /// Solve for the f(R) power-law exponent at each `mu`.
    FrExponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub kind: SweepKind,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

/// Command-line flags that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_OUT: &str = "out";

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fold command-line overrides into the file contents.
    pub fn with_overrides(mut self, ov: &Overrides) -> Self {
        if let Some(s) = &ov.system {
            self.system = s.clone();
        }
        if ov.seed.is_some() {
            self.seed = ov.seed;
        }
        if ov.tol.is_some() {
            self.integrator.tol = ov.tol;
        }
        if ov.out.is_some() {
            self.out = ov.out.clone();
        }
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Validate against the registry and build the model.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let info = lookup(&self.system)?;
        for (name, _) in self.params.iter() {
            if !info.params.iter().any(|p| p == name) {
                return Err(CliError::Config(format!(
                    "`{}` has no parameter `{name}` (declared: {:?})",
                    info.name, info.params
                )));
            }
        }
        let extra_slots: &[&str] = if info.name == "riemannian_ke" { &["Gu", "Sigma"] } else { &[] };
        for name in self.functions.keys() {
            if !info.functions.iter().any(|(f, _)| f == name) && !extra_slots.contains(&name.as_str()) {
                return Err(CliError::Config(format!("`{}` has no function slot `{name}`", info.name)));
            }
        }
        let mut r = recipe(&info.name).map_err(config)?;
        for (name, value) in self.params.iter() {
            r.params.set(name, value);
        }
        for (name, spec) in &self.functions {
            r.functions.insert(name.clone(), spec.clone());
        }
        let model = r.build().map_err(config)?;
        let mut ctl = StepController::with_tol(self.integrator.tol.unwrap_or(DEFAULT_TOL));
        if let Some(h) = self.integrator.h_init {
            ctl.h_init = h;
        }
        if let Some(n) = self.integrator.max_steps {
            ctl.max_steps = n;
        }
        ctl.validate().map_err(config)?;
        let t_end = self.integrator.t_end.unwrap_or(r.t_end);
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(CliError::Config(format!("t_end = {t_end} must be positive")));
        }
        Ok(Resolved {
            info,
            params: r.params,
            functions: r.functions,
            model,
            sample: r.sample,
            t_end,
            ctl,
            seed: self.seed(),
        })
    }
}

/// A configuration checked against the registry, with recipe defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub info: SystemInfo,
    pub params: ParameterSet,
    pub functions: BTreeMap<String, FnSpec>,
    pub model: SystemModel,
    pub sample: SampleBox,
    pub t_end: f64,
    pub ctl: StepController,
    pub seed: u64,
}

impl Resolved {
    /// The configured initial state, or the first sample from the recipe box.
    pub fn initial_state(&self, cfg: &RunConfig) -> CliResult<PhaseState> {
        let s = match &cfg.initial {
            Some(init) => PhaseState::new(init.t, init.q.clone(), init.v.clone()),
            None => self.samples(1)?.remove(0),
        };
        validate_state(&self.model, &s).map_err(|e| CliError::Config(format!("initial state rejected: {e}")))
    }

    pub fn samples(&self, count: usize) -> CliResult<Vec<PhaseState>> {
        sample_states(&self.model, self.seed, count, &self.sample).map_err(config)
    }

    pub fn coordinate_index(&self, name: &str) -> CliResult<usize> {
        self.info
            .coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Config(format!("`{}` has no coordinate `{name}` (coordinates: {:?})", self.info.name, self.info.coords)))
    }
}

pub fn lookup(system: &str) -> CliResult<SystemInfo> {
    if system.is_empty() {
        return Err(CliError::Config("no system given".into()));
    }
    registry()
        .into_iter()
        .find(|i| i.name == system)
        .ok_or_else(|| CliError::Config(format!("unknown system `{system}`")))
}

pub(crate) fn config(e: kepler_ermakov::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipe_defaults_fill_gaps() {
        let cfg = RunConfig::from_json(r#"{"system": "ke3d_I", "params": {"mu": 1.0}}"#).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.params.get("mu"), Some(1.0));
        assert!(r.functions.contains_key("f"));
    }

    #[test]
    fn unknown_fields_and_params_are_rejected() {
        assert!(RunConfig::from_json(r#"{"system": "ke3d_I", "colour": 1}"#).is_err());
        let cfg = RunConfig::from_json(r#"{"system": "ke3d_I", "params": {"nu": 1.0}}"#).unwrap();
        assert!(matches!(cfg.resolve(), Err(CliError::Config(_))));
    }
}
