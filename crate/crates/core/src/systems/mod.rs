//! The system catalog.
//!
//! Every model exposes a kinetic metric, a potential when it is Hamiltonian,
//! and an analytic acceleration evaluator. Hamiltonian models also carry the
//! Lagrangian in the form it is written down, which the dynamics module
//! differentiates independently as an oracle.

mod catalog;
mod engines;
mod recipes;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use catalog::build_system;
pub use engines::ConeData;
pub use recipes::{recipe, registry, Recipe, SystemInfo, SYSTEM_NAMES};

use crate::error::{Error, Result};
use crate::funcs::Func;
use crate::geometry::{HomotheticData, MetricSpec};
use crate::params::ParameterSet;
use crate::state::{validate_state, PhaseState};

pub(crate) type AccelFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync>;
pub(crate) type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub(crate) type SingularFn = Arc<dyn Fn(&[f64]) -> Option<String> + Send + Sync>;

/// A Lagrangian `L(t, q, v)`.
pub type LagrangianFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// Named user functions plus an optional metric for the generic Riemannian model.
#[derive(Debug, Clone, Default)]
pub struct UserFunctions {
    funcs: BTreeMap<String, Func>,
    metric: Option<MetricSpec>,
}

impl UserFunctions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, f: Func) -> Self {
        self.funcs.insert(name.to_string(), f);
        self
    }

    pub fn insert(&mut self, name: &str, f: Func) {
        self.funcs.insert(name.to_string(), f);
    }

    pub fn with_metric(mut self, m: MetricSpec) -> Self {
        self.metric = Some(m);
        self
    }

    pub fn set_metric(&mut self, m: MetricSpec) {
        self.metric = Some(m);
    }

    pub fn get(&self, name: &str) -> Option<&Func> {
        self.funcs.get(name)
    }

    pub fn metric(&self) -> Option<&MetricSpec> {
        self.metric.as_ref()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.funcs.keys().map(String::as_str)
    }

    pub(crate) fn require(&self, system: &str, name: &str, arity: usize) -> Result<Func> {
        let f = self
            .funcs
            .get(name)
            .ok_or_else(|| Error::MissingFunction { system: system.to_string(), name: name.to_string() })?;
        if f.arity() != arity {
            return Err(Error::InvalidFunction(format!(
                "`{name}` of `{system}` takes {arity} arguments, got arity {}",
                f.arity()
            )));
        }
        Ok(f.clone())
    }
}

/// The reduced form `V = −½ μ² u² + W(y)/u²` of a cone potential, with the
/// sign `eps` of the angular kinetic block.
#[derive(Debug, Clone)]
pub struct PotentialDescriptor {
    pub w: Func,
    pub mu2: f64,
    pub eps: f64,
}

/// A named dynamical system.
#[derive(Clone)]
pub struct SystemModel {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub kinetic: MetricSpec,
    pub homothety: Option<HomotheticData>,
    /// `μ_eff²` in `V = −μ_eff² H + (part of degree −2 under the HV)`.
    pub mu_eff2: Option<f64>,
    pub params: ParameterSet,
    pub functions: UserFunctions,
    pub cone: Option<ConeData>,
    potential: Option<ScalarFn>,
    lagrangian: Option<LagrangianFn>,
    accel: AccelFn,
    singular: SingularFn,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("coords", &self.coords)
            .field("hamiltonian", &self.is_hamiltonian())
            .field("params", &self.params)
            .finish()
    }
}

impl SystemModel {
    pub fn is_hamiltonian(&self) -> bool {
        self.potential.is_some()
    }

    /// Accelerations at a validated state.
    pub fn eval_rhs(&self, s: &PhaseState) -> Result<Vec<f64>> {
        validate_state(self, s)?;
        let a = (self.accel)(s.t, &s.q, &s.v)?;
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularState {
                system: self.name.clone(),
                reason: format!("non-finite acceleration at q = {:?}", s.q),
            });
        }
        Ok(a)
    }

    pub fn singular_reason(&self, q: &[f64]) -> Option<String> {
        (self.singular)(q)
    }

    pub fn potential_energy(&self, q: &[f64]) -> Result<f64> {
        self.potential.as_ref().map(|p| p(q)).ok_or_else(|| Error::NotHamiltonian(self.name.clone()))
    }

    /// `½ G_ij v^i v^j`.
    pub fn kinetic_energy(&self, q: &[f64], v: &[f64]) -> Result<f64> {
        if !self.is_hamiltonian() {
            return Err(Error::NotHamiltonian(self.name.clone()));
        }
        Ok(0.5 * self.kinetic.dot(q, v, v))
    }

    /// The Lagrangian as written for the model.
    pub fn lagrangian(&self) -> Result<LagrangianFn> {
        self.lagrangian.clone().ok_or_else(|| Error::NotHamiltonian(self.name.clone()))
    }

    pub fn homothety(&self) -> Result<&HomotheticData> {
        self.homothety.as_ref().ok_or_else(|| Error::NoHomothety(self.name.clone()))
    }

    pub fn potential_descriptor(&self) -> Option<PotentialDescriptor> {
        self.cone.as_ref().map(|c| PotentialDescriptor {
            w: c.w.clone(),
            mu2: c.m / c.kappa,
            eps: c.kappa.signum() * f64::from(c.h.signature.first().copied().unwrap_or(1)),
        })
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name)
    }

    /// A model given only by its accelerations, on flat coordinates.
    pub fn forced(
        name: &str,
        dim: usize,
        accel: impl Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> SystemModel {
        SystemModel {
            name: name.to_string(),
            dim,
            coords: (0..dim).map(|i| format!("q{i}")).collect(),
            kinetic: crate::geometry::flat(dim, 1.0),
            homothety: None,
            mu_eff2: None,
            params: ParameterSet::new(),
            functions: UserFunctions::new(),
            cone: None,
            potential: None,
            lagrangian: None,
            accel: Arc::new(move |t, q, v| Ok(accel(t, q, v))),
            singular: Arc::new(|_| None),
        }
    }

    /// `L = ½|v|² − V(q)` on flat coordinates, with `∇V` supplied.
    pub fn mechanical(
        name: &str,
        dim: usize,
        potential: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> SystemModel {
        let pot: ScalarFn = Arc::new(potential);
        let p2 = pot.clone();
        let mut m = SystemModel::forced(name, dim, move |_, q, _| grad(q).into_iter().map(|g| -g).collect());
        m.lagrangian = Some(Arc::new(move |_, q, v| 0.5 * v.iter().map(|x| x * x).sum::<f64>() - p2(q)));
        m.potential = Some(pot);
        m
    }

    /// `ü = μ²u + J/u³`, the radial reduction of every catalog cone model.
    pub fn ermakov_pinney(mu: f64, j: f64) -> SystemModel {
        let mut m = SystemModel::mechanical(
            "ermakov_pinney",
            1,
            move |q| -0.5 * mu * mu * q[0] * q[0] + 0.5 * j / (q[0] * q[0]),
            move |q| vec![-mu * mu * q[0] - j / q[0].powi(3)],
        );
        m.coords = vec!["u".into()];
        m.homothety = Some(HomotheticData::new(|q| q.to_vec(), |q| 0.5 * q[0] * q[0], 1.0));
        m.mu_eff2 = Some(mu * mu);
        m.params = ParameterSet::new().with("mu", mu).with("J", j);
        m.singular = Arc::new(|q| (q[0] <= crate::state::DELTA_SING).then(|| format!("u = {} is at the origin", q[0])));
        m
    }
}

pub(crate) struct ModelParts {
    pub name: &'static str,
    pub coords: Vec<String>,
    pub kinetic: MetricSpec,
    pub potential: Option<ScalarFn>,
    pub lagrangian: Option<LagrangianFn>,
    pub accel: AccelFn,
    pub homothety: Option<HomotheticData>,
    pub mu_eff2: Option<f64>,
    pub singular: SingularFn,
    pub params: ParameterSet,
    pub functions: UserFunctions,
    pub cone: Option<ConeData>,
}

impl ModelParts {
    pub fn finish(self) -> SystemModel {
        SystemModel {
            name: self.name.to_string(),
            dim: self.coords.len(),
            coords: self.coords,
            kinetic: self.kinetic,
            homothety: self.homothety,
            mu_eff2: self.mu_eff2,
            params: self.params,
            functions: self.functions,
            cone: self.cone,
            potential: self.potential,
            lagrangian: self.lagrangian,
            accel: self.accel,
            singular: self.singular,
        }
    }
}
