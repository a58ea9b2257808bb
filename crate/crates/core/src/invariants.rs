//! First integrals: the combined Ermakov invariant, the time-dependent
//! Noether integrals, per-system catalogs, and drift along trajectories.

use std::fmt;
use std::sync::Arc;

use crate::brackets::{translation_bracket, PhaseFunction, BRACKET_STEP, NESTED_STEP};
use crate::dynamics::{energy, to_canonical};
use crate::error::{Error, Result};
use crate::funcs::Func;
use crate::numeric::quad;
use crate::state::{PhaseState, Trajectory};
use crate::symmetry::flat_killing_symmetries;
use crate::systems::SystemModel;

/// Absolute tolerance of the quadrature behind `∫ F dλ` integrals.
pub const QUAD_TOL: f64 = 1e-12;
/// Lower limit of the quadrature behind `∫ F dλ` integrals.
pub const LAMBDA_REF: f64 = 1.0;

type Evaluator = Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>;

/// A named phase-space function, flagged with whether it is expected to be
/// conserved (negative controls are not).
#[derive(Clone)]
pub struct InvariantSpec {
    pub name: String,
    eval: Evaluator,
    pub time_dependent: bool,
    pub expected_conserved: bool,
    /// Step base for Poisson brackets of this function.
    pub bracket_step: f64,
}

impl fmt::Debug for InvariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvariantSpec")
            .field("name", &self.name)
            .field("time_dependent", &self.time_dependent)
            .field("expected_conserved", &self.expected_conserved)
            .finish()
    }
}

impl InvariantSpec {
    pub fn new(name: impl Into<String>, eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static) -> Self {
        InvariantSpec {
            name: name.into(),
            eval: Arc::new(eval),
            time_dependent: false,
            expected_conserved: true,
            bracket_step: BRACKET_STEP,
        }
    }

    pub fn time_dependent(mut self) -> Self {
        self.time_dependent = true;
        self
    }

    /// Mark as a negative control.
    pub fn not_conserved(mut self) -> Self {
        self.expected_conserved = false;
        self
    }

    pub fn eval(&self, s: &PhaseState) -> f64 {
        (self.eval)(s)
    }
}

/// `J = 4EH − Ḣ² + 4μ²H²`.
pub fn general_ermakov(e: f64, h: f64, hdot: f64, mu: f64) -> f64 {
    combined_invariant(e, h, hdot, mu * mu)
}

/// `J = 4EH − Ḣ² + 4μ²H²` with `μ²` of either sign.
pub fn combined_invariant(e: f64, h: f64, hdot: f64, mu2: f64) -> f64 {
    4.0 * e * h - hdot * hdot + 4.0 * mu2 * h * h
}

/// `I₁ = 2tE − Ḣ`, `I₂ = t²E − tḢ + H`.
pub fn polynomial_integrals(e: f64, h: f64, hdot: f64, t: f64) -> (f64, f64) {
    (2.0 * t * e - hdot, t * t * e - t * hdot + h)
}

/// `I± = e^{±2μt}(E/μ ∓ Ḣ + 2μH)`.
pub fn exponential_integrals(e: f64, h: f64, hdot: f64, mu: f64, t: f64) -> Result<(f64, f64)> {
    if mu == 0.0 {
        return Err(Error::ZeroMu);
    }
    let ep = (2.0 * mu * t).exp();
    let em = (-2.0 * mu * t).exp();
    Ok((ep * (e / mu - hdot + 2.0 * mu * h), em * (e / mu + hdot + 2.0 * mu * h)))
}

/// Polynomial pair when `μ = 0`, exponential pair otherwise.
pub fn noether_time_integrals(e: f64, h: f64, hdot: f64, mu: f64, t: f64) -> (f64, f64) {
    if mu == 0.0 {
        polynomial_integrals(e, h, hdot, t)
    } else {
        exponential_integrals(e, h, hdot, mu, t).expect("mu is nonzero")
    }
}

/// `(E, H, Ḣ)` at a state.
pub fn energy_and_homothety(system: &SystemModel, s: &PhaseState) -> Result<(f64, f64, f64)> {
    let hv = system.homothety()?;
    let e = energy(system, s)?;
    Ok((e, hv.h(&s.q), hv.h_dot(&system.kinetic, &s.q, &s.v)))
}

/// The combined invariant of a system with a gradient HV.
pub fn ermakov_invariant(system: &SystemModel, s: &PhaseState) -> Result<f64> {
    let mu2 = system.mu_eff2.ok_or_else(|| Error::NoHomothety(system.name.clone()))?;
    let (e, h, hd) = energy_and_homothety(system, s)?;
    Ok(combined_invariant(e, h, hd, mu2))
}

/// Largest `|Q(t) − Q(t₀)| / max(1, |Q(t₀)|)` along the trajectory.
/// Non-finite values give `∞`.
pub fn drift(traj: &Trajectory, inv: &InvariantSpec) -> f64 {
    let q0 = inv.eval(traj.first());
    let scale = q0.abs().max(1.0);
    let mut worst = 0.0f64;
    for s in traj.states() {
        let d = (inv.eval(s) - q0).abs() / scale;
        if !d.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(d);
    }
    worst
}

fn ok_or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

/// `½(xẏ − yẋ)² + ∫_{λ₀}^{y/x} F(λ) dλ`.
pub fn quadrature_invariant(name: &str, integrand: impl Fn(f64) -> f64 + Send + Sync + 'static, lambda0: f64) -> InvariantSpec {
    InvariantSpec::new(name, move |s| {
        let (x, y) = (s.q[0], s.q[1]);
        let l = x * s.v[1] - y * s.v[0];
        0.5 * l * l + quad::integrate(&integrand, lambda0, y / x, QUAD_TOL)
    })
}

/// Integrand `λf(λ) − λ⁻³g(λ)` of the planar Kepler–Ermakov invariant.
pub fn ke_integrand(f: &Func, g: &Func) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let (f, g) = (f.clone(), g.clone());
    move |lam| lam * f.eval1(lam) - g.eval1(lam) / lam.powi(3)
}

fn energy_spec(system: &SystemModel) -> InvariantSpec {
    let sys = system.clone();
    InvariantSpec::new("E", move |s| ok_or_nan(energy(&sys, s)))
}

fn combined_specs(system: &SystemModel, out: &mut Vec<InvariantSpec>) {
    let Some(mu2) = system.mu_eff2 else { return };
    if system.homothety.is_none() {
        return;
    }
    let sys = system.clone();
    out.push(InvariantSpec::new("J", move |s| ok_or_nan(ermakov_invariant(&sys, s))));
    let parts = |sys: &SystemModel, s: &PhaseState| energy_and_homothety(sys, s);
    if mu2 == 0.0 {
        for (name, k) in [("I1", 0), ("I2", 1)] {
            let sys = system.clone();
            out.push(
                InvariantSpec::new(name, move |s| match parts(&sys, s) {
                    Ok((e, h, hd)) => {
                        let p = polynomial_integrals(e, h, hd, s.t);
                        if k == 0 { p.0 } else { p.1 }
                    }
                    Err(_) => f64::NAN,
                })
                .time_dependent(),
            );
        }
    } else if mu2 > 0.0 {
        let mu = mu2.sqrt();
        for (name, k) in [("I+", 0), ("I-", 1)] {
            let sys = system.clone();
            out.push(
                InvariantSpec::new(name, move |s| match parts(&sys, s).and_then(|(e, h, hd)| exponential_integrals(e, h, hd, mu, s.t)) {
                    Ok(p) => {
                        if k == 0 { p.0 } else { p.1 }
                    }
                    Err(_) => f64::NAN,
                })
                .time_dependent(),
            );
        }
    }
}

fn local_spec(system: &SystemModel, out: &mut Vec<InvariantSpec>) {
    if let Some(cone) = system.cone.clone() {
        out.push(InvariantSpec::new("J_local", move |s| cone.local_invariant(&s.q, &s.v)));
    }
}

fn momentum_spec(system: &SystemModel, name: &str, index: usize) -> InvariantSpec {
    let sys = system.clone();
    InvariantSpec::new(name, move |s| to_canonical(&sys, s).map(|c| c.p[index]).unwrap_or(f64::NAN))
}

fn calogero_specs(system: &SystemModel, out: &mut Vec<InvariantSpec>) {
    let mu = system.param("mu").unwrap_or(0.0);
    let total_p = |s: &PhaseState| s.v.iter().sum::<f64>();
    let total_q = |s: &PhaseState| s.q.iter().sum::<f64>();
    if mu != 0.0 {
        out.push(InvariantSpec::new("J2", move |s| total_p(s).powi(2) + mu * mu * total_q(s).powi(2)));
        return;
    }
    let i1 = InvariantSpec::new("I1'", move |s| total_p(s));
    out.push(i1.clone());
    out.push(InvariantSpec::new("I2'", move |s| s.t * total_p(s) - total_q(s)).time_dependent());
    // Φ = {I′₁, {J, I′₁}}. I′₁ is the momentum of the translation along
    // (1, 1, 1), so both brackets are directional derivatives.
    let sys = system.clone();
    let j = InvariantSpec::new("J", move |s| ok_or_nan(ermakov_invariant(&sys, s)));
    let fj = PhaseFunction::from_invariant(system, &j);
    let along = [1.0; 3];
    let d_j = translation_bracket(&along, &fj);
    let j_i1 = PhaseFunction::linear(-1.0, &d_j, 0.0, &d_j);
    let phi = translation_bracket(&along, &j_i1);
    let sys = system.clone();
    let mut spec = InvariantSpec::new("Phi", move |s| to_canonical(&sys, s).map(|c| phi.eval(&c)).unwrap_or(f64::NAN));
    spec.bracket_step = NESTED_STEP;
    out.push(spec);
}

fn damianou_specs(out: &mut Vec<InvariantSpec>) {
    out.push(InvariantSpec::new("I_Y1", |s| s.v[0] + s.v[1]));
    out.push(InvariantSpec::new("I_Y2", |s| s.v[0] + s.v[2]));
    out.push(InvariantSpec::new("I_Y3", |s| s.t * (s.v[0] + s.v[1]) - (s.q[0] + s.q[1])).time_dependent());
    out.push(InvariantSpec::new("I_Y4", |s| s.t * (s.v[0] + s.v[2]) - (s.q[0] + s.q[2])).time_dependent());
    out.push(InvariantSpec::new("I_Y5", |s| {
        let (x, y, z) = (s.q[0], s.q[1], s.q[2]);
        (y - z) * s.v[0] - (x + z) * s.v[1] + (x + y) * s.v[2]
    }));
}

/// `u⁴|x′|² − 2V` (conserved) and the `+2V` variant as a negative control.
fn lorentzian_specs(system: &SystemModel, out: &mut Vec<InvariantSpec>) -> Result<()> {
    let label = if system.dim == 4 { "J_G4" } else { "J_G3" };
    let v = system.functions.require(&system.name, "V", system.dim - 1)?;
    let sq = |s: &PhaseState| s.q[0].powi(4) * s.v[1..].iter().map(|x| x * x).sum::<f64>();
    let v1 = v.clone();
    out.push(InvariantSpec::new(label, move |s| sq(s) - 2.0 * v1.eval(&s.q[1..])));
    out.push(InvariantSpec::new(format!("{label}_paper"), move |s| sq(s) + 2.0 * v.eval(&s.q[1..])).not_conserved());
    if let Some(spec) = system.functions.get("V").and_then(|f| f.spec()).cloned() {
        for (name, field) in flat_killing_symmetries(&spec, system.dim - 1) {
            out.push(InvariantSpec::new(name, move |s| {
                let xi = field.eval(&s.q[1..]);
                s.q[0].powi(2) * xi.iter().zip(&s.v[1..]).map(|(a, b)| a * b).sum::<f64>()
            }));
        }
    }
    Ok(())
}

fn planar_specs(system: &SystemModel, out: &mut Vec<InvariantSpec>) -> Result<()> {
    let name = system.name.as_str();
    match name {
        "ermakov2d_general" => {
            let f = system.functions.require(name, "F", 1)?;
            out.push(quadrature_invariant("J", move |l| f.eval1(l), LAMBDA_REF));
        }
        _ => {
            let f = system.functions.require(name, "f", 1)?;
            let g = system.functions.require(name, "g", 1)?;
            out.push(quadrature_invariant("J", ke_integrand(&f, &g), LAMBDA_REF));
        }
    }
    Ok(())
}

/// Every integral asserted for a catalog system.
pub fn catalog_invariants(system: &SystemModel) -> Result<Vec<InvariantSpec>> {
    let mut out = Vec::new();
    if system.is_hamiltonian() {
        out.push(energy_spec(system));
        combined_specs(system, &mut out);
        local_spec(system, &mut out);
    }
    match system.name.as_str() {
        "ermakov2d_general" | "weak_ke2d" | "ke2d_cartesian" => planar_specs(system, &mut out)?,
        "ke2d" | "ke3d_I" | "ke3d_II" | "hyperbolic3" | "scalar_cosmo_raw" | "fr_cosmo_raw" | "scalar_cosmo_u"
        | "fr_cosmo_uvw" | "frw4" | "lorentz3" | "calogero_moser" | "damianou" => {}
        "riemannian_ke" => {
            if system.cone.is_none() {
                let h = system.kinetic.clone();
                let sigma = system.functions.require("riemannian_ke", "Sigma", system.dim - 1)?;
                // u⁴ h(y′, y′) + 2Σ, read off the cone metric as u² g_AB y′y′.
                out.push(InvariantSpec::new("J", move |s| {
                    let mut dv = s.v.clone();
                    dv[0] = 0.0;
                    s.q[0].powi(2) * h.dot(&s.q, &dv, &dv) + 2.0 * sigma.eval(&s.q[1..])
                }));
            }
        }
        other => return Err(Error::UnknownSystem(other.to_string())),
    }
    match system.name.as_str() {
        "calogero_moser" => calogero_specs(system, &mut out),
        "damianou" => damianou_specs(&mut out),
        "frw4" | "lorentz3" => lorentzian_specs(system, &mut out)?,
        "scalar_cosmo_u" => {
            out.push(InvariantSpec::new("I1", |s| s.q[0].powi(2) * s.v[2]));
            out.push(InvariantSpec::new("I2", |s| s.q[0].powi(2) * s.v[1]));
            out.push(InvariantSpec::new("I3", |s| s.q[0].powi(2) * (s.q[1] * s.v[2] - s.q[2] * s.v[1])));
        }
        "fr_cosmo_uvw" => {
            out.push(InvariantSpec::new("I_w", |s| s.q[0].powi(2) * s.v[2]));
            let jf = |s: &PhaseState| s.q[0].powi(4) * (s.v[1].powi(2) + s.v[2].powi(2));
            out.push(InvariantSpec::new("J_f", move |s| jf(s) - (12.0 * s.q[1]).exp() / 21.0));
            out.push(InvariantSpec::new("J_f_paper", move |s| jf(s) + (12.0 * s.q[1]).exp() / 21.0).not_conserved());
        }
        "scalar_cosmo_raw" | "fr_cosmo_raw" => {
            let idx = system.coords.iter().position(|c| c == "beta").expect("raw cosmologies have a beta coordinate");
            out.push(momentum_spec(system, "I_beta", idx));
        }
        _ => {}
    }
    Ok(out)
}

/// Look up one cataloged invariant by name.
pub fn find_invariant(system: &SystemModel, name: &str) -> Result<InvariantSpec> {
    catalog_invariants(system)?
        .into_iter()
        .find(|i| i.name == name)
        .ok_or_else(|| Error::InvalidParameter { name: name.into(), reason: format!("not an invariant of `{}`", system.name) })
}

/// Names of cataloged invariants asserted to be pairwise in involution.
///
/// Time-dependent integrals and negative controls are never included. For the
/// Lorentzian cones only the first Killing-vector integral is kept, since
/// the Killing algebra itself need not be abelian.
pub fn involution_set(system: &SystemModel) -> Result<Vec<String>> {
    let all = catalog_invariants(system)?;
    let pick = |names: &[&str]| -> Vec<String> {
        names.iter().filter(|n| all.iter().any(|i| i.name == **n)).map(|n| n.to_string()).collect()
    };
    let names = match system.name.as_str() {
        "fr_cosmo_uvw" => pick(&["E", "I_w", "J_f"]),
        "scalar_cosmo_u" => pick(&["E", "I1", "I2"]),
        "calogero_moser" if system.param("mu").unwrap_or(0.0) == 0.0 => pick(&["E", "I1'", "Phi"]),
        // J and J2 do not commute.
        "calogero_moser" => pick(&["E", "J2"]),
        "damianou" => pick(&["E", "I_Y1", "I_Y2"]),
        "frw4" | "lorentz3" => {
            let label = if system.dim == 4 { "J_G4" } else { "J_G3" };
            let mut out = pick(&["E", label]);
            let kv = all.iter().find(|i| i.name.starts_with("I_") && i.expected_conserved && !i.time_dependent);
            out.extend(kv.map(|i| i.name.clone()));
            out
        }
        _ => all
            .iter()
            .filter(|i| i.expected_conserved && !i.time_dependent && i.name != "J_local")
            .map(|i| i.name.clone())
            .collect(),
    };
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_arithmetic() {
        assert_eq!(general_ermakov(2.0, 3.0, 5.0, 0.0), -1.0);
        let (i1, i2) = polynomial_integrals(2.0, 3.0, 5.0, 0.7);
        assert!((i1 + 2.2).abs() < 1e-14 && (i2 - 0.48).abs() < 1e-14);
        let (ip, im) = exponential_integrals(2.0, 3.0, 5.0, 1.0, 0.0).unwrap();
        assert_eq!((ip, im), (3.0, 13.0));
        assert_eq!(ip * im - 4.0, general_ermakov(2.0, 3.0, 5.0, 1.0));
        assert_eq!(exponential_integrals(1.0, 1.0, 1.0, 0.0, 1.0), Err(Error::ZeroMu));
        assert_eq!(noether_time_integrals(0.0, 0.4, 0.0, 0.0, 3.0), (0.0, 0.4));
    }
}
