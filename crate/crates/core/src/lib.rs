//! Numerical laboratory for autonomous Kepler–Ermakov systems.
//!
//! A catalog of Ermakov-type dynamical systems on flat, Riemannian and
//! Lorentzian backgrounds, with their first integrals, point symmetries and
//! the coordinate maps between them, together with the numerical tools to
//! test each claim: an adaptive integrator, a finite-difference Lagrangian
//! oracle, Poisson brackets, and symmetry-condition residuals.
//!
//! ```
//! use kepler_ermakov::prelude::*;
//!
//! let sys = recipe("ke3d_I")?.build()?;
//! let s0 = PhaseState::new(0.0, vec![1.0, 1.3, 0.5], vec![0.1, 0.05, 0.2]);
//! let traj = integrate(&sys, &s0, 2.0, &StepController::default())?;
//! let j = find_invariant(&sys, "J")?;
//! assert!(drift(&traj, &j) < 1e-8);
//! # Ok::<(), kepler_ermakov::Error>(())
//! ```

pub mod brackets;
pub mod dynamics;
pub mod error;
pub mod funcs;
pub mod geometry;
pub mod integrate;
pub mod invariants;
pub mod numeric;
pub mod params;
pub mod state;
pub mod symmetry;
pub mod systems;
pub mod transforms;

pub use error::{Error, Result};

/// The names most programs need.
pub mod prelude {
    pub use crate::dynamics::{energy, lagrangian_accel_oracle, solve_constraint, to_canonical, CanonicalState};
    pub use crate::error::{Error, Result};
    pub use crate::funcs::{FnSpec, Func};
    pub use crate::integrate::{integrate, rk4_fixed, StepController};
    pub use crate::invariants::{catalog_invariants, drift, find_invariant, general_ermakov, InvariantSpec};
    pub use crate::params::ParameterSet;
    pub use crate::state::{sample_states, PhaseState, SampleBox, Trajectory};
    pub use crate::systems::{build_system, recipe, registry, Recipe, SystemModel, UserFunctions, SYSTEM_NAMES};
}

/// Guide chapters, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/systems.md")]
    mod systems {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/brackets.md")]
    mod brackets {}
    #[doc = include_str!("../../../book/src/symmetries.md")]
    mod symmetries {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
