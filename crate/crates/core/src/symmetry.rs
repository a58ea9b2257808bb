//! Pointwise residuals of Noether point-symmetry conditions, Lie-symmetry
//! force conditions, the planar Lagrangian constraint, and the f(R) Noether
//! condition.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::dynamics::{energy, to_canonical};
use crate::error::{Error, Result};
use crate::funcs::{FnSpec, Func};
use crate::geometry::HomotheticData;
use crate::invariants::InvariantSpec;
use crate::numeric::{fd, roots};
use crate::state::{PhaseState, DELTA_SING};
use crate::systems::{LagrangianFn, SystemModel};

type TimeScalar = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
type TimeVector = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Generator `ξ(t,q) ∂_t + η^i(t,q) ∂_i` with its gauge function.
#[derive(Clone)]
pub struct PointSymmetry {
    pub name: String,
    xi: TimeScalar,
    eta: TimeVector,
    gauge: TimeScalar,
}

impl fmt::Debug for PointSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSymmetry({})", self.name)
    }
}

impl PointSymmetry {
    pub fn new(
        name: impl Into<String>,
        xi: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        eta: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        gauge: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PointSymmetry { name: name.into(), xi: Arc::new(xi), eta: Arc::new(eta), gauge: Arc::new(gauge) }
    }

    /// `∂_t` with zero gauge.
    pub fn time_translation(n: usize) -> Self {
        PointSymmetry::new("X1 = d/dt", |_, _| 1.0, move |_, _| vec![0.0; n], |_, _| 0.0)
    }

    pub fn xi(&self, t: f64, q: &[f64]) -> f64 {
        (self.xi)(t, q)
    }

    pub fn eta(&self, t: f64, q: &[f64]) -> Vec<f64> {
        (self.eta)(t, q)
    }

    pub fn gauge(&self, t: f64, q: &[f64]) -> f64 {
        (self.gauge)(t, q)
    }

    /// Same generator with a different gauge (for negative controls).
    pub fn with_gauge(&self, gauge: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        PointSymmetry { name: format!("{} (regauged)", self.name), xi: self.xi.clone(), eta: self.eta.clone(), gauge: Arc::new(gauge) }
    }
}

/// Total derivative `∂_t f + v^j ∂_j f` of a function of `(t, q)`.
fn total_derivative(f: impl Fn(f64, &[f64]) -> f64, t: f64, q: &[f64], v: &[f64]) -> f64 {
    let mut z = vec![t];
    z.extend_from_slice(q);
    let packed = |z: &[f64]| f(z[0], &z[1..]);
    let grad = fd::gradient(packed, &z, 1e-5);
    grad[0] + grad[1..].iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
}

/// Terms of the Noether condition, in order
/// `ξ L_t, η·L_q, η^{[1]}·L_v, L Dξ, −Dg`.
pub fn noether_terms<L>(l: &L, sym: &PointSymmetry, t: f64, q: &[f64], v: &[f64]) -> Result<[f64; 5]>
where
    L: Fn(f64, &[f64], &[f64]) -> f64 + ?Sized,
{
    let n = q.len();
    let mut z = vec![t];
    z.extend_from_slice(q);
    z.extend_from_slice(v);
    let grad = fd::gradient(|z: &[f64]| l(z[0], &z[1..=n], &z[n + 1..]), &z, 1e-5);
    let (lt, lq, lv) = (grad[0], &grad[1..=n], &grad[n + 1..]);
    let xi = sym.xi(t, q);
    let eta = sym.eta(t, q);
    let dxi = total_derivative(|t, q| sym.xi(t, q), t, q, v);
    let deta: Vec<f64> = (0..n).map(|i| total_derivative(|t, q| sym.eta(t, q)[i], t, q, v)).collect();
    let dg = total_derivative(|t, q| sym.gauge(t, q), t, q, v);
    let prolong: Vec<f64> = (0..n).map(|i| deta[i] - v[i] * dxi).collect();
    let terms = [
        xi * lt,
        eta.iter().zip(lq).map(|(a, b)| a * b).sum(),
        prolong.iter().zip(lv).map(|(a, b)| a * b).sum(),
        l(t, q, v) * dxi,
        -dg,
    ];
    if terms.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularState { system: sym.name.clone(), reason: format!("non-finite Noether terms at q = {q:?}") });
    }
    Ok(terms)
}

/// `ξ L_t + η·L_q + η^{[1]}·L_v + L Dξ/Dt − Dg/Dt`, with
/// `η^{[1]} = Dη/Dt − v Dξ/Dt`.
pub fn noether_residual<L>(l: &L, sym: &PointSymmetry, t: f64, q: &[f64], v: &[f64]) -> Result<f64>
where
    L: Fn(f64, &[f64], &[f64]) -> f64 + ?Sized,
{
    Ok(noether_terms(l, sym, t, q, v)?.iter().sum())
}

/// `|residual| / max(1, largest term)`.
pub fn noether_residual_scaled<L>(l: &L, sym: &PointSymmetry, t: f64, q: &[f64], v: &[f64]) -> Result<f64>
where
    L: Fn(f64, &[f64], &[f64]) -> f64 + ?Sized,
{
    let terms = noether_terms(l, sym, t, q, v)?;
    let scale = terms.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    Ok(terms.iter().sum::<f64>().abs() / scale)
}

/// Noether integral `ξE − η·p + g` of a symmetry of `system`.
pub fn noether_integral(system: &SystemModel, sym: &PointSymmetry, s: &PhaseState) -> Result<f64> {
    let e = energy(system, s)?;
    let p = to_canonical(system, s)?.p;
    let eta = sym.eta(s.t, &s.q);
    Ok(sym.xi(s.t, &s.q) * e - eta.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() + sym.gauge(s.t, &s.q))
}

/// The Noether integral as a trackable invariant.
pub fn noether_invariant(system: &SystemModel, sym: &PointSymmetry) -> InvariantSpec {
    let (sys, sy) = (system.clone(), sym.clone());
    InvariantSpec::new(format!("I[{}]", sym.name), move |s| noether_integral(&sys, &sy, s).unwrap_or(f64::NAN)).time_dependent()
}

/// `L_H F + d F + a₁ H` with `L_H F^i = H^j ∂_j F^i − F^j ∂_j H^i`.
pub fn lie_force_residual(
    force: impl Fn(&[f64]) -> Vec<f64>,
    hv: &HomotheticData,
    d: f64,
    a1: f64,
    q: &[f64],
) -> Result<Vec<f64>> {
    let f = force(q);
    let h = hv.field(q);
    let df = fd::jacobian(&force, q, 1e-5);
    let dh = fd::jacobian(|p| hv.field(p), q, 1e-5);
    let n = q.len();
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = d * f[i] + a1 * h[i];
            for j in 0..n {
                s += h[j] * df[i][j] - f[j] * dh[i][j];
            }
            s
        })
        .collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularState { system: "force".into(), reason: format!("non-finite force at q = {q:?}") });
    }
    Ok(out)
}

fn check_theta(theta: f64) -> Result<()> {
    if (2.0 * theta).sin().abs() <= DELTA_SING {
        return Err(Error::SingularState {
            system: "ke2d".into(),
            reason: format!("θ = {theta} is within {DELTA_SING:e} of a multiple of π/2"),
        });
    }
    Ok(())
}

/// `sin²θ f′(tan θ) + cos²θ g′(tan θ)`.
pub fn ke_constraint_residual(f: &Func, g: &Func, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    let lam = theta.tan();
    Ok(s * s * f.deriv1(lam) + c * c * g.deriv1(lam))
}

fn is_zero(f: &Func) -> bool {
    matches!(f.spec(), Some(FnSpec::Zero) | Some(FnSpec::Constant { value: 0.0 }))
}

/// Points of `(−π/2, π/2)` away from `0` and `±π/2` where the constraint is checked.
fn constraint_grid() -> Vec<f64> {
    let m = 48;
    (0..m)
        .map(|i| -FRAC_PI_2 + 0.05 + (FRAC_PI_2 - 0.1) * 2.0 * (i as f64 + 0.5) / m as f64)
        .filter(|t| t.abs() > 0.05)
        .collect()
}

/// `C(θ) = c + sec²θ f(tan θ) + csc²θ g(tan θ)` with analytic `C′`, after
/// checking the constraint on a grid of angles.
pub fn build_c(f: &Func, g: &Func, c: f64) -> Result<Func> {
    for theta in constraint_grid() {
        let (s, co) = theta.sin_cos();
        let lam = theta.tan();
        let (a, b) = (s * s * f.deriv1(lam), co * co * g.deriv1(lam));
        let r = a + b;
        if !(r.abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0)) {
            return Err(Error::ConstraintViolated(format!(
                "sin²θ f′(tan θ) + cos²θ g′(tan θ) = {r:e} at θ = {theta}"
            )));
        }
    }
    let (fz, gz) = (is_zero(f), is_zero(g));
    let (f1, g1, f2, g2) = (f.clone(), g.clone(), f.clone(), g.clone());
    let value = move |th: f64| {
        let mut out = c;
        if !fz {
            out += f1.eval1(th.tan()) / th.cos().powi(2);
        }
        if !gz {
            out += g1.eval1(th.tan()) / th.sin().powi(2);
        }
        out
    };
    let deriv = move |th: f64| {
        let (s, co) = th.sin_cos();
        let t = s / co;
        let sec2 = 1.0 / (co * co);
        let csc2 = 1.0 / (s * s);
        let mut out = 0.0;
        if !fz {
            out += 2.0 * sec2 * t * f2.eval1(t) + sec2 * sec2 * f2.deriv1(t);
        }
        if !gz {
            out += -2.0 * csc2 * (co / s) * g2.eval1(t) + csc2 * sec2 * g2.deriv1(t);
        }
        out
    };
    Ok(Func::new(1, move |x| value(x[0])).with_grad(move |x| vec![deriv(x[0])]).labeled("C(theta)"))
}

/// `−4 f′ R + (7/2) f + 12 μ² f′`, the Noether condition of the exponential
/// homothetic symmetries of the f(R) Lagrangian.
pub fn fr_noether_residual(f: &Func, mu: f64, r: f64) -> f64 {
    let fp = f.deriv1(r);
    -4.0 * fp * r + 3.5 * f.eval1(r) + 12.0 * mu * mu * fp
}

/// `(R − 2Λ)^n` with analytic derivative.
pub fn fr_power(lambda: f64, n: f64) -> Func {
    Func::new(1, move |x| (x[0] - 2.0 * lambda).powf(n))
        .with_grad(move |x| vec![n * (x[0] - 2.0 * lambda).powf(n - 1.0)])
        .labeled(format!("(R - {})^{n}", 2.0 * lambda))
}

/// Exponent `n` for which `f = (R − 2Λ)^n` with `2Λ = 3μ²` satisfies the
/// Noether condition (`f = R^n` when `μ = 0`).
pub fn find_fr_exponent(mu: f64) -> Result<f64> {
    let lambda = 1.5 * mu * mu;
    let r = 2.0 * lambda + 3.0;
    let resid = |n: f64| fr_noether_residual(&fr_power(lambda, n), mu, r);
    roots::brent(resid, 0.1, 2.0, 1e-15, 200)
}

/// Rotation generators of the unit sphere in `(φ, θ)`.
pub fn so3_generator(index: usize, phi: f64, theta: f64) -> Result<[f64; 2]> {
    let (st, ct) = theta.sin_cos();
    let cot = phi.cos() / phi.sin();
    match index {
        1 => Ok([st, ct * cot]),
        2 => Ok([ct, -st * cot]),
        3 => Ok([0.0, 1.0]),
        _ => Err(Error::InvalidParameter { name: "ck_index".into(), reason: format!("{index} is not in 1..=3") }),
    }
}

/// `CK^i ∂_i f` for `f(φ, θ)` with `p = 0`.
pub fn so3_condition_residual(f: &Func, index: usize, phi: f64, theta: f64) -> Result<f64> {
    if phi.sin().abs() <= DELTA_SING {
        return Err(Error::SingularState { system: "sphere".into(), reason: format!("φ = {phi} is at a pole") });
    }
    let ck = so3_generator(index, phi, theta)?;
    let df = f.grad(&[phi, theta]);
    Ok(ck[0] * df[0] + ck[1] * df[1])
}

/// An affine vector field `ξ(y) = M y + b` on a flat block.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    pub m: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl AffineField {
    pub fn translation(b: Vec<f64>) -> Self {
        let n = b.len();
        AffineField { m: vec![vec![0.0; n]; n], b }
    }

    /// Rotation `ξ = M (y − c)` for antisymmetric `M`.
    pub fn rotation(m: Vec<Vec<f64>>, center: &[f64]) -> Self {
        let b = m.iter().map(|row| -row.iter().zip(center).map(|(a, c)| a * c).sum::<f64>()).collect();
        AffineField { m, b }
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        self.m.iter().zip(&self.b).map(|(row, bi)| bi + row.iter().zip(y).map(|(a, c)| a * c).sum::<f64>()).collect()
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// `−e_k × (·)` in 3D, `y∂_x − x∂_y` in 2D (`k` ignored).
fn rotation_matrix(n: usize, k: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        return vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
    }
    let mut m = vec![vec![0.0; 3]; 3];
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    // −e_k × y has components (y_j at i, −y_i at j) up to orientation.
    m[i][j] = 1.0;
    m[j][i] = -1.0;
    m
}

fn rotation_name(n: usize, k: usize) -> &'static str {
    if n == 2 {
        return "xy";
    }
    ["yz", "zx", "xy"][k]
}

fn axis_name(k: usize) -> &'static str {
    ["x", "y", "z"][k]
}

fn axis_aligned(v: &[f64]) -> Option<usize> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() > 1e-14).collect();
    (nz.len() == 1).then(|| nz[0])
}

/// Euclidean Killing vectors of a flat block that leave a library potential
/// invariant, named after the integral `u² ξ·y′` they generate.
///
/// Recognized shapes: constants (all translations and rotations), functions
/// of one coordinate or of a linear form (translations orthogonal to it, and
/// in 3D the rotation about it), functions of `|y|²` (rotations), and
/// functions of `½s|y|² + l·y` (rotations about `−l/s`).
pub fn flat_killing_symmetries(spec: &FnSpec, n: usize) -> Vec<(String, AffineField)> {
    if !(n == 2 || n == 3) {
        return Vec::new();
    }
    let all_rotations = |center: &[f64], suffix: &str| -> Vec<(String, AffineField)> {
        let ks: Vec<usize> = if n == 2 { vec![2] } else { vec![0, 1, 2] };
        ks.into_iter()
            .map(|k| (format!("I_{}{suffix}", rotation_name(n, k)), AffineField::rotation(rotation_matrix(n, k), center)))
            .collect()
    };
    let origin = vec![0.0; n];
    if spec.is_constant() {
        let mut out: Vec<_> = (0..n).map(|k| (format!("I_{}", axis_name(k)), AffineField::translation(unit(n, k)))).collect();
        out.extend(all_rotations(&origin, ""));
        return out;
    }
    match spec {
        FnSpec::Power { index: None, .. } => all_rotations(&origin, ""),
        FnSpec::Power { index: Some(i), .. } | FnSpec::Exponential { index: i, .. } | FnSpec::Cosine { index: i, .. } => {
            if *i < n {
                linear_form_symmetries(&unit(n, *i))
            } else {
                Vec::new()
            }
        }
        FnSpec::Linear { coeffs, .. } if coeffs.len() == n => linear_form_symmetries(coeffs),
        FnSpec::Quadric { half_sq, lin, .. } if lin.len() == n => {
            if *half_sq == 0.0 {
                if lin.iter().all(|x| *x == 0.0) {
                    flat_killing_symmetries(&FnSpec::Zero, n)
                } else {
                    linear_form_symmetries(lin)
                }
            } else {
                let center: Vec<f64> = lin.iter().map(|l| -l / half_sq).collect();
                if center.iter().all(|c| *c == 0.0) {
                    all_rotations(&origin, "")
                } else if n == 2 {
                    vec![("I_abxy".to_string(), AffineField::rotation(rotation_matrix(2, 2), &center))]
                } else {
                    all_rotations(&center, "_c")
                }
            }
        }
        _ => Vec::new(),
    }
}

fn linear_form_symmetries(l: &[f64]) -> Vec<(String, AffineField)> {
    let n = l.len();
    let norm2: f64 = l.iter().map(|x| x * x).sum();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut e = unit(n, k);
        let d: f64 = e.iter().zip(l).map(|(a, b)| a * b).sum::<f64>() / norm2;
        for (ei, li) in e.iter_mut().zip(l) {
            *ei -= d * li;
        }
        for b in &basis {
            let d: f64 = e.iter().zip(b).map(|(a, c)| a * c).sum();
            for (ei, bi) in e.iter_mut().zip(b) {
                *ei -= d * bi;
            }
        }
        let len = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-9 && basis.len() < n - 1 {
            basis.push(e.into_iter().map(|x| x / len).collect());
        }
    }
    let mut out = Vec::new();
    for (idx, b) in basis.into_iter().enumerate() {
        let (name, xi) = match axis_aligned(&b) {
            Some(k) => (format!("I_{}", axis_name(k)), unit(n, k)),
            None if n == 2 && b[0].abs() > 1e-14 => {
                let xi = vec![1.0, b[1] / b[0]];
                ("I_xby".to_string(), xi)
            }
            None => (format!("I_t{}", idx + 1), b),
        };
        out.push((name, AffineField::translation(xi)));
    }
    if n == 3 {
        // ξ = l × y preserves l·y.
        let m = vec![vec![0.0, -l[2], l[1]], vec![l[2], 0.0, -l[0]], vec![-l[1], l[0], 0.0]];
        let name = match axis_aligned(l) {
            Some(k) => format!("I_{}", rotation_name(3, k)),
            None => "I_rot".to_string(),
        };
        let field = match axis_aligned(l) {
            Some(k) => AffineField::rotation(rotation_matrix(3, k), &[0.0; 3]),
            None => AffineField { m, b: vec![0.0; 3] },
        };
        out.push((name, field));
    }
    out
}

/// The `sl(2,R)` generators built from `∂_t` and a gradient HV `X` with
/// gradient function `H` when `V = −μ²H + (degree −2 part)`:
/// polynomial in `t` when `μ² = 0`, exponential when `μ² > 0`.
pub fn sl2_symmetries(system: &SystemModel) -> Result<Vec<PointSymmetry>> {
    let n = system.dim;
    let hv = system.homothety()?.clone();
    let mu2 = system.mu_eff2.ok_or_else(|| Error::NoHomothety(system.name.clone()))?;
    let mut out = vec![PointSymmetry::time_translation(n)];
    if mu2 == 0.0 {
        let h2 = hv.clone();
        out.push(PointSymmetry::new("X2 = 2t d/dt + X", |t, _| 2.0 * t, move |_, q| h2.field(q), |_, _| 0.0));
        let (h3, h4) = (hv.clone(), hv.clone());
        out.push(PointSymmetry::new(
            "X3 = t^2 d/dt + t X",
            |t, _| t * t,
            move |t, q| h3.field(q).into_iter().map(|x| t * x).collect(),
            move |_, q| h4.h(q),
        ));
    } else if mu2 > 0.0 {
        let mu = mu2.sqrt();
        for sign in [1.0, -1.0] {
            let (h1, h2) = (hv.clone(), hv.clone());
            let name = if sign > 0.0 { "X+ = e^{2mu t}(d/dt + mu X)" } else { "X- = e^{-2mu t}(d/dt - mu X)" };
            out.push(PointSymmetry::new(
                name,
                move |t, _| (2.0 * sign * mu * t).exp(),
                move |t, q| {
                    let e = (2.0 * sign * mu * t).exp();
                    h1.field(q).into_iter().map(|x| sign * mu * e * x).collect()
                },
                move |t, q| 2.0 * mu2 * (2.0 * sign * mu * t).exp() * h2.h(q),
            ));
        }
    }
    Ok(out)
}

fn kv_symmetry(name: &str, field: AffineField, n: usize) -> PointSymmetry {
    PointSymmetry::new(
        format!("{name} generator"),
        |_, _| 0.0,
        move |_, q| {
            let mut eta = vec![0.0; n];
            eta[1..].copy_from_slice(&field.eval(&q[1..]));
            eta
        },
        |_, _| 0.0,
    )
}

/// Every point symmetry the catalog asserts for `system`, with gauges.
pub fn catalog_symmetries(system: &SystemModel) -> Result<Vec<PointSymmetry>> {
    let n = system.dim;
    let mut out = if system.homothety.is_some() && system.mu_eff2.is_some() && system.is_hamiltonian() {
        sl2_symmetries(system)?
    } else if system.is_hamiltonian() {
        vec![PointSymmetry::time_translation(n)]
    } else {
        return Err(Error::NotHamiltonian(system.name.clone()));
    };
    let z = move |_: f64, _: &[f64]| 0.0;
    match system.name.as_str() {
        "frw4" | "lorentz3" => {
            if let Some(spec) = system.functions.get("V").and_then(|f| f.spec()) {
                for (name, field) in flat_killing_symmetries(spec, n - 1) {
                    out.push(kv_symmetry(&name, field, n));
                }
            }
        }
        "damianou" => {
            out.push(PointSymmetry::new("Y1 = dx + dy", z, |_, _| vec![1.0, 1.0, 0.0], z));
            out.push(PointSymmetry::new("Y2 = dx + dz", z, |_, _| vec![1.0, 0.0, 1.0], z));
            out.push(PointSymmetry::new("Y3 = t(dx + dy)", z, |t, _| vec![t, t, 0.0], |_, q| q[0] + q[1]));
            out.push(PointSymmetry::new("Y4 = t(dx + dz)", z, |t, _| vec![t, 0.0, t], |_, q| q[0] + q[2]));
            out.push(PointSymmetry::new(
                "Y5 = (y - z)dx - (x + z)dy + (x + y)dz",
                z,
                |_, q| vec![q[1] - q[2], -(q[0] + q[2]), q[0] + q[1]],
                z,
            ));
        }
        "calogero_moser" => {
            let mu = system.param("mu").unwrap_or(0.0);
            if mu == 0.0 {
                out.push(PointSymmetry::new("d1 + d2 + d3", z, |_, _| vec![1.0; 3], z));
                out.push(PointSymmetry::new("t(d1 + d2 + d3)", z, |t, _| vec![t; 3], |_, q| q.iter().sum()));
            } else {
                // Attractive oscillator: trigonometric translations of the centre of mass.
                for (name, phase) in [("cos(mu t)(d1+d2+d3)", 0.0), ("sin(mu t)(d1+d2+d3)", FRAC_PI_2)] {
                    out.push(PointSymmetry::new(
                        name,
                        z,
                        move |t, _| vec![(mu * t - phase).cos(); 3],
                        move |t, q| -mu * (mu * t - phase).sin() * q.iter().sum::<f64>(),
                    ));
                }
            }
        }
        "scalar_cosmo_u" => {
            let h = system.kinetic.eval(&[1.0, 0.0, 0.0]);
            let (h1, h2) = (h[(1, 1)], h[(2, 2)]);
            out.push(PointSymmetry::new("d_beta", z, |_, _| vec![0.0, 0.0, 1.0], z));
            out.push(PointSymmetry::new("d_z", z, |_, _| vec![0.0, 1.0, 0.0], z));
            out.push(PointSymmetry::new("rotation of (z, beta)", z, move |_, q| vec![0.0, h2 * q[2], -h1 * q[1]], z));
        }
        "fr_cosmo_uvw" => out.push(PointSymmetry::new("d_w", z, |_, _| vec![0.0, 0.0, 1.0], z)),
        "fr_cosmo_raw" | "scalar_cosmo_raw" => {
            let idx = system.coords.iter().position(|c| c == "beta").expect("raw cosmologies have a beta coordinate");
            out.push(PointSymmetry::new("d_beta", z, move |_, _| unit(3, idx), z));
        }
        _ => {}
    }
    Ok(out)
}

/// Translation-symmetric Cartesian Kepler–Ermakov Lagrangian
/// `L = ½|v|² + ½μ²|q|² − F(ζ)/(x − (a/b)y)²`, `ζ = (bz − cy)/(x − (a/b)y)`,
/// with its symmetries `e^{±μt} a·∂` and gauges `±μ e^{±μt} a·q`.
pub fn translation_example(mu: f64, dir: [f64; 3], big_f: Func) -> Result<(LagrangianFn, Vec<PointSymmetry>)> {
    let [a, b, c] = dir;
    if b == 0.0 {
        return Err(Error::InvalidParameter { name: "b".into(), reason: "must be nonzero".into() });
    }
    if mu == 0.0 {
        return Err(Error::ZeroMu);
    }
    let l: LagrangianFn = Arc::new(move |_, q, v| {
        let d = q[0] - a / b * q[1];
        let zeta = (b * q[2] - c * q[1]) / d;
        0.5 * v.iter().map(|x| x * x).sum::<f64>() + 0.5 * mu * mu * q.iter().map(|x| x * x).sum::<f64>()
            - big_f.eval1(zeta) / (d * d)
    });
    let syms = [1.0, -1.0]
        .into_iter()
        .map(|s| {
            PointSymmetry::new(
                if s > 0.0 { "X+ = e^{mu t} a.d" } else { "X- = e^{-mu t} a.d" },
                |_, _| 0.0,
                move |t, _| dir.iter().map(|x| (s * mu * t).exp() * x).collect(),
                move |t, q| s * mu * (s * mu * t).exp() * (a * q[0] + b * q[1] + c * q[2]),
            )
        })
        .collect();
    Ok((l, syms))
}
