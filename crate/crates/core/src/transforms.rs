//! Invertible chart maps between systems, with exact chain-rule velocity
//! transport, and a numerical flow-conjugacy check.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrate::{integrate, StepController};
use crate::state::PhaseState;
use crate::systems::SystemModel;

type MapFn = Arc<dyn Fn(&PhaseState) -> Result<PhaseState> + Send + Sync>;

/// A map `(t, q, v) → (T, Q, V)` and its inverse.
#[derive(Clone)]
pub struct ChartTransform {
    pub name: String,
    pub domain: String,
    forward: MapFn,
    inverse: MapFn,
}

impl fmt::Debug for ChartTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChartTransform({}; {})", self.name, self.domain)
    }
}

impl ChartTransform {
    pub fn new(
        name: impl Into<String>,
        domain: impl Into<String>,
        forward: impl Fn(&PhaseState) -> Result<PhaseState> + Send + Sync + 'static,
        inverse: impl Fn(&PhaseState) -> Result<PhaseState> + Send + Sync + 'static,
    ) -> Self {
        ChartTransform { name: name.into(), domain: domain.into(), forward: Arc::new(forward), inverse: Arc::new(inverse) }
    }

    pub fn identity() -> Self {
        ChartTransform::new("identity", "everywhere", |s| Ok(s.clone()), |s| Ok(s.clone()))
    }

    pub fn forward(&self, s: &PhaseState) -> Result<PhaseState> {
        (self.forward)(s)
    }

    pub fn inverse(&self, s: &PhaseState) -> Result<PhaseState> {
        (self.inverse)(s)
    }

    /// The inverse map as a transform of its own.
    pub fn inverted(&self) -> Self {
        ChartTransform {
            name: format!("inverse of {}", self.name),
            domain: self.domain.clone(),
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `ρ(t)`-rescaling; see [`TimeScaling`].
    pub fn time_scaling(scaling: TimeScaling) -> Self {
        let (a, b) = (scaling.clone(), scaling.clone());
        ChartTransform::new(
            scaling.name.clone(),
            "scale factor positive",
            move |s| a.apply(s),
            move |s| b.unapply(s),
        )
    }

    pub fn scalar_cosmo(k: f64, c: f64) -> Result<Self> {
        let m = ScalarCosmoMap::new(k, c)?;
        Ok(ChartTransform::new(
            "scalar-field minisuperspace to cone",
            "a > 0, c/√(6k) ∈ (−1, 1) ∪ (1, ∞)",
            move |s| m.forward(s),
            move |s| m.inverse(s),
        ))
    }

    pub fn fr(lambda: f64) -> Self {
        ChartTransform::new(
            "f(R) minisuperspace to cone",
            "a > 0, R > 2Λ",
            move |s| fr_map(lambda, s),
            move |s| fr_map_inverse(lambda, s),
        )
    }
}

type ScalarOfTime = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form time rescaling `X = x/ρ(t)`, `T = ∫ρ⁻² dt`, so that
/// `dX/dT = ρẋ − xρ̇`.
#[derive(Clone)]
pub struct TimeScaling {
    pub name: String,
    rho: ScalarOfTime,
    rho_dot: ScalarOfTime,
    new_time: ScalarOfTime,
    old_time: ScalarOfTime,
    error: fn(f64) -> Error,
}

impl fmt::Debug for TimeScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeScaling({})", self.name)
    }
}

impl TimeScaling {
    /// `ρ ≡ 1`.
    pub fn constant() -> Self {
        TimeScaling {
            name: "rho = 1".into(),
            rho: Arc::new(|_| 1.0),
            rho_dot: Arc::new(|_| 0.0),
            new_time: Arc::new(|t| t),
            old_time: Arc::new(|t| t),
            error: Error::RhoNonPositive,
        }
    }

    /// `ρ = e^{μt}`, a solution of `ρ̈ = μ²ρ`, with
    /// `T = (1 − e^{−2μt})/(2μ)`. Maps `ẍ = μ²x + F(x)` with `F` of degree
    /// −3 to `X″ = F(X)`.
    pub fn exponential(mu: f64) -> Self {
        if mu == 0.0 {
            return TimeScaling::constant();
        }
        TimeScaling {
            name: format!("rho = exp({mu} t)"),
            rho: Arc::new(move |t| (mu * t).exp()),
            rho_dot: Arc::new(move |t| mu * (mu * t).exp()),
            new_time: Arc::new(move |t| -(-2.0 * mu * t).exp_m1() / (2.0 * mu)),
            old_time: Arc::new(move |big_t| -(-2.0 * mu * big_t).ln_1p() / (2.0 * mu)),
            error: Error::RhoNonPositive,
        }
    }

    /// `ν = √(1 − μ²T²)`, a solution of `ν″ + μ²/ν³ = 0`, with
    /// `s = atanh(μT)/μ`. Maps `X″ = F(X)` to `x̄″ = μ²x̄ + F(x̄)`.
    pub fn pinney(mu: f64) -> Self {
        if mu == 0.0 {
            let mut c = TimeScaling::constant();
            c.error = Error::NuNonPositive;
            c.name = "nu = 1".into();
            return c;
        }
        let m2 = mu * mu;
        TimeScaling {
            name: format!("nu = sqrt(1 - {m2} T^2)"),
            rho: Arc::new(move |t| (1.0 - m2 * t * t).sqrt()),
            rho_dot: Arc::new(move |t| -m2 * t / (1.0 - m2 * t * t).sqrt()),
            new_time: Arc::new(move |t| (mu * t).atanh() / mu),
            old_time: Arc::new(move |s| (mu * s).tanh() / mu),
            error: Error::NuNonPositive,
        }
    }

    pub fn rho(&self, t: f64) -> f64 {
        (self.rho)(t)
    }

    fn checked_rho(&self, t: f64) -> Result<(f64, f64)> {
        let r = (self.rho)(t);
        if !(r > 0.0) {
            return Err((self.error)(t));
        }
        Ok((r, (self.rho_dot)(t)))
    }

    pub fn apply(&self, s: &PhaseState) -> Result<PhaseState> {
        let (r, rd) = self.checked_rho(s.t)?;
        let big_t = (self.new_time)(s.t);
        if !big_t.is_finite() {
            return Err((self.error)(s.t));
        }
        Ok(PhaseState {
            t: big_t,
            q: s.q.iter().map(|x| x / r).collect(),
            v: s.q.iter().zip(&s.v).map(|(x, v)| r * v - x * rd).collect(),
        })
    }

    pub fn unapply(&self, s: &PhaseState) -> Result<PhaseState> {
        let t = (self.old_time)(s.t);
        if !t.is_finite() {
            return Err((self.error)(s.t));
        }
        let (r, rd) = self.checked_rho(t)?;
        let q: Vec<f64> = s.q.iter().map(|x| x * r).collect();
        let v = q.iter().zip(&s.v).map(|(x, v)| (v + x * rd / r) / r).collect();
        Ok(PhaseState { t, q, v })
    }
}

/// `X = x/ρ`, `T = ∫ρ⁻²dt`, `dX/dT = ρẋ − xρ̇`.
pub fn rho_transform(rho: &TimeScaling, s: &PhaseState) -> Result<PhaseState> {
    rho.apply(s)
}

/// `x̄ = X/ν`, `s = ∫ν⁻²dT` with `ν = √(1 − μ²T²)`.
pub fn nu_transform(mu: f64, s: &PhaseState) -> Result<PhaseState> {
    TimeScaling::pinney(mu).apply(s)
}

/// `(a, β, φ) ↔ (u, z, β)` through `a³ = e^{x+y}`, `φ = ⅓√(6/k)(x − y)`,
/// `(1 − c̄)x = ln(|1 − c̄| u e^z/√2)`, `(1 + c̄)y = ln((1 + c̄) u e^{−z}/√2)`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarCosmoMap {
    cbar: f64,
    s: f64,
}

impl ScalarCosmoMap {
    pub fn new(k: f64, c: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::InvalidParameter { name: "k".into(), reason: "must be positive".into() });
        }
        let cbar = c / (6.0 * k).sqrt();
        if (cbar - 1.0).abs() < 1e-12 {
            return Err(Error::DegenerateCoupling);
        }
        if cbar <= -1.0 {
            return Err(Error::DomainViolation(format!("c̄ = {cbar} ≤ −1 makes ln((1 + c̄)…) undefined")));
        }
        Ok(ScalarCosmoMap { cbar, s: (k / 6.0).sqrt() })
    }

    /// Offsets in `P = (1 − c̄)x + (1 + c̄)y = 2 ln u + p0`, `Q = (1 − c̄)x − (1 + c̄)y = 2z + q0`.
    fn offsets(&self) -> (f64, f64) {
        let cb = self.cbar;
        ((1.0 - cb * cb).abs().ln() - 2f64.ln(), ((1.0 - cb).abs() / (1.0 + cb)).ln())
    }

    pub fn forward(&self, st: &PhaseState) -> Result<PhaseState> {
        let (a, beta, phi) = (st.q[0], st.q[1], st.q[2]);
        if !(a > 0.0) {
            return Err(Error::DomainViolation(format!("a = {a} must be positive")));
        }
        let cb = self.cbar;
        let la = a.ln();
        let x = 1.5 * (la + self.s * phi);
        let y = 1.5 * (la - self.s * phi);
        let xd = 1.5 * (st.v[0] / a + self.s * st.v[2]);
        let yd = 1.5 * (st.v[0] / a - self.s * st.v[2]);
        let (p0, q0) = self.offsets();
        let big_p = (1.0 - cb) * x + (1.0 + cb) * y;
        let big_q = (1.0 - cb) * x - (1.0 + cb) * y;
        let u = (0.5 * (big_p - p0)).exp();
        let z = 0.5 * (big_q - q0);
        let ud = 0.5 * u * ((1.0 - cb) * xd + (1.0 + cb) * yd);
        let zd = 0.5 * ((1.0 - cb) * xd - (1.0 + cb) * yd);
        Ok(PhaseState { t: st.t, q: vec![u, z, beta], v: vec![ud, zd, st.v[1]] })
    }

    pub fn inverse(&self, st: &PhaseState) -> Result<PhaseState> {
        let (u, z, beta) = (st.q[0], st.q[1], st.q[2]);
        if !(u > 0.0) {
            return Err(Error::DomainViolation(format!("u = {u} must be positive")));
        }
        let cb = self.cbar;
        let (p0, q0) = self.offsets();
        let big_p = 2.0 * u.ln() + p0;
        let big_q = 2.0 * z + q0;
        let (pd, qd) = (2.0 * st.v[0] / u, 2.0 * st.v[1]);
        let x = (big_p + big_q) / (2.0 * (1.0 - cb));
        let y = (big_p - big_q) / (2.0 * (1.0 + cb));
        let xd = (pd + qd) / (2.0 * (1.0 - cb));
        let yd = (pd - qd) / (2.0 * (1.0 + cb));
        let a = ((x + y) / 3.0).exp();
        let phi = (x - y) / (3.0 * self.s);
        Ok(PhaseState {
            t: st.t,
            q: vec![a, beta, phi],
            v: vec![a * (xd + yd) / 3.0, st.v[2], (xd - yd) / (3.0 * self.s)],
        })
    }
}

/// `(a, β, φ) → (u, z, β)`.
pub fn scalar_cosmo_map(k: f64, c: f64, s: &PhaseState) -> Result<PhaseState> {
    ScalarCosmoMap::new(k, c)?.forward(s)
}

/// `a = A√(u e^v)` with `A = (21/4)^{−1/3}`.
pub fn fr_scale() -> f64 {
    (21.0f64 / 4.0).powf(-1.0 / 3.0)
}

/// `(a, R, β) → (u, v, w)` inverting `a = A√(u e^v)`, `R = 2Λ + e^{12v}/u⁴`,
/// `β = √2 w`.
pub fn fr_map(lambda: f64, s: &PhaseState) -> Result<PhaseState> {
    let (a, r, beta) = (s.q[0], s.q[1], s.q[2]);
    if !(a > 0.0) {
        return Err(Error::DomainViolation(format!("a = {a} must be positive")));
    }
    if !(r - 2.0 * lambda > 0.0) {
        return Err(Error::DomainViolation(format!("R − 2Λ = {} must be positive", r - 2.0 * lambda)));
    }
    let l1 = 2.0 * (a / fr_scale()).ln();
    let l2 = (r - 2.0 * lambda).ln();
    let (l1d, l2d) = (2.0 * s.v[0] / a, s.v[1] / (r - 2.0 * lambda));
    let u = ((12.0 * l1 - l2) / 16.0).exp();
    let v = (4.0 * l1 + l2) / 16.0;
    Ok(PhaseState {
        t: s.t,
        q: vec![u, v, beta / 2f64.sqrt()],
        v: vec![u * (12.0 * l1d - l2d) / 16.0, (4.0 * l1d + l2d) / 16.0, s.v[2] / 2f64.sqrt()],
    })
}

/// `(u, v, w) → (a, R, β)`.
pub fn fr_map_inverse(lambda: f64, s: &PhaseState) -> Result<PhaseState> {
    let (u, v, w) = (s.q[0], s.q[1], s.q[2]);
    if !(u > 0.0) {
        return Err(Error::DomainViolation(format!("u = {u} must be positive")));
    }
    let a = fr_scale() * (u * v.exp()).sqrt();
    let e = (12.0 * v).exp() / u.powi(4);
    let (ud, vd) = (s.v[0], s.v[1]);
    Ok(PhaseState {
        t: s.t,
        q: vec![a, 2.0 * lambda + e, 2f64.sqrt() * w],
        v: vec![0.5 * a * (ud / u + vd), e * (12.0 * vd - 4.0 * ud / u), 2f64.sqrt() * s.v[2]],
    })
}

/// Integrate `sys_a` from `s0` to `t_end` and `sys_b` from the mapped initial
/// state to the mapped final time; returns the largest component difference
/// between the mapped end state of `a` and the end state of `b`.
pub fn conjugacy_check(
    sys_a: &SystemModel,
    sys_b: &SystemModel,
    map: &ChartTransform,
    s0: &PhaseState,
    t_end: f64,
    tol: f64,
) -> Result<f64> {
    let ctl = StepController::with_tol(tol);
    let end_a = map.forward(integrate(sys_a, s0, t_end, &ctl)?.last())?;
    let b0 = map.forward(s0)?;
    let end_b = if end_a.t > b0.t { integrate(sys_b, &b0, end_a.t, &ctl)?.last().clone() } else { b0 };
    let dev = end_a
        .q
        .iter()
        .zip(&end_b.q)
        .chain(end_a.v.iter().zip(&end_b.v))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_rho_at_origin() {
        let out = rho_transform(&TimeScaling::exponential(0.7), &PhaseState::new(0.0, vec![1.0, 2.0], vec![0.0, 0.0])).unwrap();
        assert_eq!(out.t, 0.0);
        assert_eq!(out.q, vec![1.0, 2.0]);
        assert!((out.v[0] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn pinney_guard() {
        let err = nu_transform(1.0, &PhaseState::new(1.5, vec![1.0], vec![0.0])).unwrap_err();
        assert_eq!(err, Error::NuNonPositive(1.5));
    }

    #[test]
    fn fr_reference_point() {
        let s = fr_map_inverse(0.0, &PhaseState::new(0.0, vec![1.0, 0.0, 0.0], vec![0.0; 3])).unwrap();
        assert!((s.q[0] - fr_scale()).abs() < 1e-15);
        assert_eq!(s.q[1], 1.0);
        assert_eq!(s.q[2], 0.0);
    }
}
