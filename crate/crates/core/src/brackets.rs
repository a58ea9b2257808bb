//! Numerical Poisson brackets in canonical coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dynamics::{from_canonical, CanonicalState};
use crate::error::{Error, Result};
use crate::invariants::InvariantSpec;
use crate::numeric::fd;
use crate::systems::SystemModel;

/// Step base for single brackets.
pub const BRACKET_STEP: f64 = 1e-4;
/// Step base for brackets that will be differentiated again.
pub const NESTED_STEP: f64 = 1e-3;

type PhaseFn = Arc<dyn Fn(&CanonicalState) -> f64 + Send + Sync>;

/// A named function on canonical phase space.
#[derive(Clone)]
pub struct PhaseFunction {
    pub name: String,
    f: PhaseFn,
    /// Step base to use when this function is differentiated; wider for
    /// functions that are themselves finite-difference brackets.
    pub step: f64,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseFunction({})", self.name)
    }
}

impl PhaseFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(&CanonicalState) -> f64 + Send + Sync + 'static) -> Self {
        PhaseFunction { name: name.into(), f: Arc::new(f), step: BRACKET_STEP }
    }

    pub fn eval(&self, c: &CanonicalState) -> f64 {
        (self.f)(c)
    }

    /// Coordinate `q_i`.
    pub fn coordinate(i: usize) -> Self {
        PhaseFunction::new(format!("q{i}"), move |c| c.q[i])
    }

    /// Momentum `p_i`.
    pub fn momentum(i: usize) -> Self {
        PhaseFunction::new(format!("p{i}"), move |c| c.p[i])
    }

    /// An invariant of `system` read through the inverse Legendre map.
    /// Evaluates to NaN where the map fails.
    pub fn from_invariant(system: &SystemModel, inv: &InvariantSpec) -> Self {
        let (sys, inv2) = (system.clone(), inv.clone());
        let mut out = PhaseFunction::new(inv.name.clone(), move |c| match from_canonical(&sys, c) {
            Ok(s) => inv2.eval(&s),
            Err(_) => f64::NAN,
        });
        out.step = inv.bracket_step;
        out
    }

    /// Pointwise product, for Leibniz-rule checks.
    pub fn product(&self, other: &PhaseFunction) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let mut out = PhaseFunction::new(format!("{}*{}", self.name, other.name), move |c| a.eval(c) * b.eval(c));
        out.step = self.step.max(other.step);
        out
    }

    /// `α F + β G`.
    pub fn linear(alpha: f64, f: &PhaseFunction, beta: f64, g: &PhaseFunction) -> Self {
        let (a, b) = (f.clone(), g.clone());
        let mut out =
            PhaseFunction::new(format!("{alpha}*{}+{beta}*{}", f.name, g.name), move |c| alpha * a.eval(c) + beta * b.eval(c));
        out.step = f.step.max(g.step);
        out
    }
}

fn phase_gradient(f: &PhaseFunction, at: &CanonicalState, base: f64) -> Vec<f64> {
    let z = at.flat();
    fd::gradient(|y| f.eval(&CanonicalState::from_flat(at.t, y)), &z, base)
}

/// `Σ_i (∂F/∂q_i ∂G/∂p_i − ∂F/∂p_i ∂G/∂q_i)` with Richardson-extrapolated
/// central differences at step base `base`.
pub fn poisson_with_step(f: &PhaseFunction, g: &PhaseFunction, at: &CanonicalState, base: f64) -> Result<f64> {
    let n = at.q.len();
    if at.p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: at.p.len() });
    }
    let df = phase_gradient(f, at, base);
    let dg = phase_gradient(g, at, base);
    let mut s = 0.0;
    for i in 0..n {
        s += df[i] * dg[n + i] - df[n + i] * dg[i];
    }
    if !s.is_finite() {
        return Err(Error::SingularState {
            system: format!("{{{}, {}}}", f.name, g.name),
            reason: format!("bracket is not finite at q = {:?}", at.q),
        });
    }
    Ok(s)
}

/// Canonical Poisson bracket `{F, G}` at a point, differenced with the wider
/// of the two functions' step bases.
pub fn poisson(f: &PhaseFunction, g: &PhaseFunction, at: &CanonicalState) -> Result<f64> {
    poisson_with_step(f, g, at, f.step.max(g.step))
}

/// Entry `(i, j)` is the max over `states` of `|{F_i, F_j}|`.
pub fn involution_matrix(funcs: &[PhaseFunction], states: &[CanonicalState]) -> Result<DMatrix<f64>> {
    let k = funcs.len();
    let mut m = DMatrix::zeros(k, k);
    for s in states {
        for i in 0..k {
            for j in i + 1..k {
                let b = poisson(&funcs[i], &funcs[j], s)?.abs();
                if b > m[(i, j)] {
                    m[(i, j)] = b;
                    m[(j, i)] = b;
                }
            }
        }
    }
    Ok(m)
}

/// `{F, G}` as a new phase function, differenced with the wider nested step
/// so it can itself be bracketed.
pub fn nested_bracket(f: &PhaseFunction, g: &PhaseFunction) -> PhaseFunction {
    let (a, b) = (f.clone(), g.clone());
    let mut out = PhaseFunction::new(format!("{{{}, {}}}", f.name, g.name), move |c| {
        poisson_with_step(&a, &b, c, NESTED_STEP).unwrap_or(f64::NAN)
    });
    out.step = NESTED_STEP;
    out
}

/// Step base for directional derivatives along a translation.
pub const TRANSLATION_STEP: f64 = 1e-2;

/// `{c·p, G} = −c·∇_q G` as a new phase function.
///
/// The momentum of a translation generates a shift in configuration space,
/// so the bracket is a one-variable derivative along `c`. It is differenced
/// with Richardson extrapolation at a wide step, which keeps repeated
/// brackets of this kind accurate.
pub fn translation_bracket(c: &[f64], g: &PhaseFunction) -> PhaseFunction {
    let (dir, inner) = (c.to_vec(), g.clone());
    let mut out = PhaseFunction::new(format!("{{{c:?}.p, {}}}", g.name), move |at| {
        let scale = at.q.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut shifted = at.clone();
        let d = fd::richardson(
            |s| {
                for (k, q) in shifted.q.iter_mut().enumerate() {
                    *q = at.q[k] + s * dir[k];
                }
                inner.eval(&shifted)
            },
            0.0,
            TRANSLATION_STEP * scale,
        );
        -d
    });
    out.step = NESTED_STEP;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_pair_and_oscillator() {
        let at = CanonicalState::new(0.0, vec![0.3], vec![-1.2]);
        let b = poisson(&PhaseFunction::coordinate(0), &PhaseFunction::momentum(0), &at).unwrap();
        assert!((b - 1.0).abs() < 1e-10);
        let h = PhaseFunction::new("H", |c| 0.5 * (c.p[0] * c.p[0] + c.q[0] * c.q[0]));
        let at = CanonicalState::new(0.0, vec![0.0], vec![2.0]);
        let b = poisson(&h, &PhaseFunction::coordinate(0), &at).unwrap();
        assert!((b + 2.0).abs() < 1e-10);
    }

    #[test]
    fn exact_antisymmetry() {
        let f = PhaseFunction::new("f", |c| c.q[0].sin() * c.p[1] + c.p[0].powi(3));
        let g = PhaseFunction::new("g", |c| c.q[1] * c.p[0].exp());
        let at = CanonicalState::new(0.0, vec![0.4, -0.2], vec![0.1, 0.9]);
        assert_eq!(poisson(&f, &g, &at).unwrap(), -poisson(&g, &f, &at).unwrap());
        assert_eq!(poisson(&f, &f, &at).unwrap(), 0.0);
    }

    #[test]
    fn translation_bracket_matches_general_bracket() {
        let g = PhaseFunction::new("g", |c| c.q[0] * c.q[1] * c.p[0] + c.q[1].powi(3));
        let c = [1.0, 2.0];
        let p = PhaseFunction::new("c.p", move |s| c[0] * s.p[0] + c[1] * s.p[1]);
        let at = CanonicalState::new(0.0, vec![0.4, -0.7], vec![1.3, 0.2]);
        let fast = translation_bracket(&c, &g).eval(&at);
        let slow = poisson(&p, &g, &at).unwrap();
        assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
    }
}
