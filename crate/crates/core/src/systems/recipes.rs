//! Registry metadata and demo configurations for every catalog entry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::FnSpec;
use crate::params::ParameterSet;
use crate::state::SampleBox;

use super::{build_system, SystemModel, UserFunctions};

/// Catalog names in registry order.
pub const SYSTEM_NAMES: [&str; 16] = [
    "ermakov2d_general",
    "weak_ke2d",
    "ke2d_cartesian",
    "ke2d",
    "ke3d_I",
    "ke3d_II",
    "calogero_moser",
    "damianou",
    "riemannian_ke",
    "frw4",
    "lorentz3",
    "hyperbolic3",
    "scalar_cosmo_raw",
    "scalar_cosmo_u",
    "fr_cosmo_raw",
    "fr_cosmo_uvw",
];

/// Static description of a catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub params: Vec<String>,
    /// Function name and arity.
    pub functions: Vec<(String, usize)>,
    pub hamiltonian: bool,
    pub description: String,
}

fn info(
    name: &str,
    coords: &[&str],
    params: &[&str],
    functions: &[(&str, usize)],
    hamiltonian: bool,
    description: &str,
) -> SystemInfo {
    SystemInfo {
        name: name.into(),
        dim: coords.len(),
        coords: coords.iter().map(|s| s.to_string()).collect(),
        params: params.iter().map(|s| s.to_string()).collect(),
        functions: functions.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
        hamiltonian,
        description: description.into(),
    }
}

/// Every catalog entry with its required parameters and functions.
pub fn registry() -> Vec<SystemInfo> {
    vec![
        info(
            "ermakov2d_general",
            &["x", "y"],
            &[],
            &[("F", 1), ("Omega2", 4)],
            false,
            "general planar Ermakov system with velocity-dependent frequency",
        ),
        info("weak_ke2d", &["x", "y"], &[], &[("H", 2), ("f", 1), ("g", 1)], false, "weak planar Kepler-Ermakov system"),
        info(
            "ke2d_cartesian",
            &["x", "y"],
            &["mu"],
            &[("h", 1), ("f", 1), ("g", 1)],
            false,
            "autonomous planar Kepler-Ermakov system in Cartesian form",
        ),
        info(
            "ke2d",
            &["r", "theta"],
            &["mu", "c"],
            &[("f", 1), ("g", 1)],
            true,
            "polar Hamiltonian Kepler-Ermakov system with C(θ) = c + sec²θ f(tan θ) + csc²θ g(tan θ)",
        ),
        info("ke3d_I", &["R", "phi", "theta"], &["mu"], &[("f", 2)], true, "3D Kepler-Ermakov system with oscillator, μ ≠ 0"),
        info("ke3d_II", &["R", "phi", "theta"], &[], &[("f", 2)], true, "3D Kepler-Ermakov system without oscillator"),
        info("calogero_moser", &["x", "y", "z"], &["mu"], &[], true, "three-body Calogero-Moser system with optional oscillator"),
        info("damianou", &["x", "y", "z"], &[], &[], true, "three-particle system with potential 1/(x − y − z)²"),
        info(
            "riemannian_ke",
            &["u", "y1", "y2"],
            &["mu"],
            &[("W", 2)],
            true,
            "Kepler-Ermakov system on a cone over a user metric (default: unit sphere); Gu and Sigma instead of W give the forced form",
        ),
        info("frw4", &["u", "x", "y", "z"], &["mu"], &[("V", 3)], true, "Kepler-Ermakov system on a flat FRW-type Lorentzian cone"),
        info("lorentz3", &["u", "x", "y"], &["mu"], &[("V", 2)], true, "three-dimensional Lorentzian Kepler-Ermakov system"),
        info("hyperbolic3", &["R", "phi", "theta"], &["mu"], &[("g", 2)], true, "Kepler-Ermakov system over the hyperbolic plane"),
        info(
            "scalar_cosmo_raw",
            &["a", "beta", "phi"],
            &["k", "V0", "c", "rho0"],
            &[],
            true,
            "LRS scalar-field cosmology with exponential potential and dust",
        ),
        info(
            "scalar_cosmo_u",
            &["u", "z", "beta"],
            &["k", "V0", "c", "rho0"],
            &[],
            true,
            "scalar-field cosmology in Kepler-Ermakov variables",
        ),
        info("fr_cosmo_raw", &["a", "R", "beta"], &["Lambda", "n"], &[], true, "LRS f(R) cosmology with f = (R − 2Λ)^n"),
        info("fr_cosmo_uvw", &["u", "v", "w"], &["Lambda"], &[], true, "f(R) cosmology in Kepler-Ermakov variables"),
    ]
}

/// A ready-to-run configuration: parameters, library functions, a sampling
/// box away from singular sets and a horizon over which motion stays regular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub system: String,
    pub params: ParameterSet,
    pub functions: BTreeMap<String, FnSpec>,
    pub sample: SampleBox,
    pub t_end: f64,
}

impl Recipe {
    pub fn user_functions(&self) -> Result<UserFunctions> {
        build_functions(&self.system, &self.functions)
    }

    pub fn build(&self) -> Result<SystemModel> {
        build_system(&self.system, &self.params, &self.user_functions()?)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.set(name, value);
        self
    }

    pub fn with_function(mut self, name: &str, spec: FnSpec) -> Self {
        self.functions.insert(name.to_string(), spec);
        self
    }
}

/// Build named library functions with the arities the registry declares.
pub fn build_functions(system: &str, specs: &BTreeMap<String, FnSpec>) -> Result<UserFunctions> {
    let entry = registry()
        .into_iter()
        .find(|i| i.name == system)
        .ok_or_else(|| Error::UnknownSystem(system.to_string()))?;
    let mut out = UserFunctions::new();
    for (name, spec) in specs {
        let arity = match name.as_str() {
            // Alternative functions of the forced Riemannian form.
            "Gu" | "Sigma" if system == "riemannian_ke" => 2,
            _ => entry.functions.iter().find(|(n, _)| n == name).map(|(_, a)| *a).ok_or_else(|| {
                Error::InvalidFunction(format!("`{system}` takes no function named `{name}`"))
            })?,
        };
        out.insert(name, spec.build(arity)?);
    }
    Ok(out)
}

fn constant(value: f64) -> FnSpec {
    FnSpec::Constant { value }
}

fn cosine(coef: f64, index: usize) -> FnSpec {
    FnSpec::Cosine { k: 1.0, coef, offset: 0.0, index }
}

fn sum(terms: Vec<FnSpec>) -> FnSpec {
    FnSpec::Sum { terms }
}

fn quadric(half_sq: f64, lin: Vec<f64>, inner: FnSpec) -> FnSpec {
    FnSpec::Quadric { half_sq, lin, inner: Box::new(inner) }
}

fn square(coef: f64) -> FnSpec {
    FnSpec::Power { n: 2.0, coef, index: None }
}

/// Demo configuration for a catalog entry.
pub fn recipe(name: &str) -> Result<Recipe> {
    let p = |xs: &[(&str, f64)]| xs.iter().fold(ParameterSet::new(), |ps, (k, v)| ps.with(k, *v));
    let f = |xs: Vec<(&str, FnSpec)>| xs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>();
    let bx = SampleBox::new;
    let (params, functions, sample) = match name {
        "ermakov2d_general" => (
            p(&[]),
            f(vec![("F", FnSpec::Power { n: 1.0, coef: 0.2, index: None }), ("Omega2", constant(0.25))]),
            bx(vec![(0.8, 1.2), (-0.5, 0.5)], vec![(-0.3, 0.3), (-0.3, 0.3)]),
        ),
        "weak_ke2d" => (
            p(&[]),
            f(vec![("H", constant(1.0)), ("f", constant(0.2)), ("g", FnSpec::Zero)]),
            bx(vec![(0.8, 1.2), (-0.5, 0.5)], vec![(-0.2, 0.2), (0.6, 0.9)]),
        ),
        "ke2d_cartesian" => (
            p(&[("mu", 0.2)]),
            f(vec![("h", constant(0.1)), ("f", constant(0.2)), ("g", FnSpec::Zero)]),
            bx(vec![(0.8, 1.2), (-0.5, 0.5)], vec![(-0.2, 0.2), (0.6, 0.9)]),
        ),
        "ke2d" => (
            p(&[("mu", 0.2), ("c", 0.5)]),
            f(vec![("f", FnSpec::Zero), ("g", FnSpec::Zero)]),
            bx(vec![(0.8, 1.5), (0.1, 1.4)], vec![(-0.3, 0.3), (-0.5, 0.5)]),
        ),
        "ke3d_I" | "ke3d_II" | "riemannian_ke" => {
            let mut params = p(&[("mu", 0.2)]);
            if name == "ke3d_II" {
                params = p(&[]);
            }
            let key = if name == "riemannian_ke" { "W" } else { "f" };
            (
                params,
                f(vec![(key, sum(vec![constant(0.3), cosine(0.1, 0)]))]),
                bx(vec![(0.8, 1.5), (1.1, 2.0), (0.0, 6.0)], vec![(-0.2, 0.2), (-0.1, 0.1), (0.15, 0.3)]),
            )
        }
        "calogero_moser" => (
            p(&[("mu", 0.5)]),
            f(vec![]),
            bx(vec![(-1.5, -0.7), (-0.3, 0.3), (0.7, 1.5)], vec![(-0.3, 0.3); 3]),
        ),
        "damianou" => (
            p(&[]),
            f(vec![]),
            bx(vec![(1.5, 2.5), (-0.5, 0.5), (-0.5, 0.5)], vec![(-0.2, 0.2); 3]),
        ),
        "frw4" => (
            p(&[("mu", 0.2)]),
            f(vec![("V", quadric(0.0, vec![1.0, 0.0, 0.0], sum(vec![constant(0.3), square(0.05)])))]),
            bx(vec![(1.0, 1.5), (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)], vec![(0.0, 0.2), (-0.1, 0.1), (-0.1, 0.1), (-0.1, 0.1)]),
        ),
        "lorentz3" => (
            p(&[("mu", 0.2)]),
            f(vec![("V", quadric(0.0, vec![-2.0, 1.0], sum(vec![constant(0.3), square(0.05)])))]),
            bx(vec![(1.0, 1.5), (-0.5, 0.5), (-0.5, 0.5)], vec![(0.0, 0.2), (-0.1, 0.1), (-0.1, 0.1)]),
        ),
        "hyperbolic3" => (
            p(&[("mu", 0.2)]),
            f(vec![("g", sum(vec![constant(0.3), cosine(0.05, 1)]))]),
            bx(vec![(0.8, 1.5), (0.8, 1.5), (0.0, 6.0)], vec![(-0.2, 0.2), (-0.1, 0.1), (-0.1, 0.1)]),
        ),
        "scalar_cosmo_raw" | "scalar_cosmo_u" => {
            // Expanding branch: the scale factor grows roughly like e^{μt}.
            let sample = if name == "scalar_cosmo_raw" {
                bx(vec![(1.5, 2.0), (-0.5, 0.5), (-0.5, 0.5)], vec![(0.05, 0.15), (-0.03, 0.03), (-0.03, 0.03)])
            } else {
                bx(vec![(2.0, 3.0), (-0.5, 0.5), (-0.5, 0.5)], vec![(0.05, 0.15), (-0.03, 0.03), (-0.03, 0.03)])
            };
            (p(&[("k", 1.0), ("V0", 0.05), ("c", 0.5), ("rho0", 0.1)]), f(vec![]), sample)
        }
        "fr_cosmo_raw" => (
            p(&[("Lambda", 0.06), ("n", 0.875)]),
            f(vec![]),
            // Image of the fr_cosmo_uvw box: u ≈ 1.5, v ≈ −0.2, v̇ < 0.
            bx(vec![(0.6, 0.7), (0.14, 0.2), (-0.5, 0.5)], vec![(-0.01, 0.0), (-0.05, -0.03), (-0.1, 0.1)]),
        ),
        "fr_cosmo_uvw" => (
            p(&[("Lambda", 0.06)]),
            f(vec![]),
            // v̇ < 0 keeps clear of the finite-time runaway of v″ ∝ e^{12v}.
            bx(vec![(1.3, 1.8), (-0.3, -0.1), (-0.5, 0.5)], vec![(0.0, 0.1), (-0.1, -0.03), (-0.1, 0.1)]),
        ),
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(Recipe { system: name.to_string(), params, functions, sample, t_end: 5.0 })
}
