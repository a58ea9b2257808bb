use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::funcs::{FnSpec, Func};
use crate::geometry::{self, HomotheticData, MetricSpec};
use crate::params::ParameterSet;
use crate::state::DELTA_SING;
use crate::symmetry::build_c;

use super::engines::{cone_singular, mass_matrix_accel, ConeData};
use super::{ModelParts, SystemModel, UserFunctions};

/// Build a catalog system by name.
///
/// Required parameters and functions per system are listed by
/// [`registry`](super::registry). Function arguments follow coordinate order,
/// so for example `f` of `ke3d_I` is `f(φ, θ)`.
pub fn build_system(name: &str, params: &ParameterSet, functions: &UserFunctions) -> Result<SystemModel> {
    let model = match name {
        "ermakov2d_general" => ermakov2d_general(params, functions)?,
        "weak_ke2d" => weak_ke2d(params, functions)?,
        "ke2d_cartesian" => ke2d_cartesian(params, functions)?,
        "ke2d" => ke2d(params, functions)?,
        "ke3d_I" => ke3d("ke3d_I", params, functions)?,
        "ke3d_II" => ke3d("ke3d_II", params, functions)?,
        "calogero_moser" => calogero_moser(params, functions)?,
        "damianou" => damianou(params, functions)?,
        "riemannian_ke" => riemannian_ke(params, functions)?,
        "frw4" => lorentzian("frw4", 3, params, functions)?,
        "lorentz3" => lorentzian("lorentz3", 2, params, functions)?,
        "hyperbolic3" => hyperbolic3(params, functions)?,
        "scalar_cosmo_raw" => scalar_cosmo_raw(params, functions)?,
        "scalar_cosmo_u" => scalar_cosmo_u(params, functions)?,
        "fr_cosmo_raw" => fr_cosmo_raw(params, functions)?,
        "fr_cosmo_uvw" => fr_cosmo_uvw(params, functions)?,
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(model.finish())
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn is_zero(f: &Func) -> bool {
    matches!(f.spec(), Some(FnSpec::Zero) | Some(FnSpec::Constant { value: 0.0 }))
}

fn plane_singular(check_y: bool) -> super::SingularFn {
    Arc::new(move |q: &[f64]| {
        if q[0].abs() <= DELTA_SING {
            return Some(format!("|x| = {} is within {DELTA_SING:e} of x = 0", q[0].abs()));
        }
        if check_y && q[1].abs() <= DELTA_SING {
            return Some(format!("|y| = {} is within {DELTA_SING:e} of y = 0", q[1].abs()));
        }
        None
    })
}

fn non_hamiltonian(
    name: &'static str,
    coords: &[&str],
    params: &ParameterSet,
    functions: &UserFunctions,
    accel: super::AccelFn,
    singular: super::SingularFn,
) -> ModelParts {
    ModelParts {
        name,
        coords: names(coords),
        kinetic: geometry::flat(coords.len(), 1.0),
        potential: None,
        lagrangian: None,
        accel,
        homothety: None,
        mu_eff2: None,
        singular,
        params: params.clone(),
        functions: functions.clone(),
        cone: None,
    }
}

/// ẍ = −Ω²x + F(y/x)/(x²y), ÿ = −Ω²y with Ω² = Ω²(x, y, ẋ, ẏ).
fn ermakov2d_general(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "ermakov2d_general";
    let big_f = functions.require(name, "F", 1)?;
    let omega2 = functions.require(name, "Omega2", 4)?;
    let accel: super::AccelFn = Arc::new(move |_, q, v| {
        let (x, y) = (q[0], q[1]);
        let w2 = omega2.eval(&[x, y, v[0], v[1]]);
        Ok(vec![-w2 * x + big_f.eval1(y / x) / (x * x * y), -w2 * y])
    });
    Ok(non_hamiltonian(name, &["x", "y"], params, functions, accel, plane_singular(false)))
}

/// ẍ = −x H(x,y)/r³ + f(y/x)/x³, ÿ = −y H(x,y)/r³ + g(y/x)/y³.
fn weak_ke2d(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "weak_ke2d";
    let hh = functions.require(name, "H", 2)?;
    let f = functions.require(name, "f", 1)?;
    let g = functions.require(name, "g", 1)?;
    let check_y = !is_zero(&g);
    let accel: super::AccelFn = Arc::new(move |_, q, _| {
        let (x, y) = (q[0], q[1]);
        let r3 = (x * x + y * y).powf(1.5);
        let lam = y / x;
        let hv = hh.eval(q);
        Ok(vec![-x * hv / r3 + f.eval1(lam) / x.powi(3), -y * hv / r3 + g.eval1(lam) / y.powi(3)])
    });
    Ok(non_hamiltonian(name, &["x", "y"], params, functions, accel, plane_singular(check_y)))
}

/// ẍ = μ²x − h(λ)/r³ + f(λ)/x³, ÿ = μ²y − λh(λ)/r³ + g(λ)/y³, λ = y/x.
fn ke2d_cartesian(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "ke2d_cartesian";
    let mu = params.require(name, "mu")?;
    let h = functions.require(name, "h", 1)?;
    let f = functions.require(name, "f", 1)?;
    let g = functions.require(name, "g", 1)?;
    let check_y = !is_zero(&g);
    let accel: super::AccelFn = Arc::new(move |_, q, _| {
        let (x, y) = (q[0], q[1]);
        let r3 = (x * x + y * y).powf(1.5);
        let lam = y / x;
        let hl = h.eval1(lam);
        Ok(vec![
            mu * mu * x - hl / r3 + f.eval1(lam) / x.powi(3),
            mu * mu * y - lam * hl / r3 + g.eval1(lam) / y.powi(3),
        ])
    });
    Ok(non_hamiltonian(name, &["x", "y"], params, functions, accel, plane_singular(check_y)))
}

fn cone_model(
    name: &'static str,
    coords: Vec<String>,
    data: ConeData,
    params: &ParameterSet,
    functions: &UserFunctions,
    singular: super::SingularFn,
    accel: Option<super::AccelFn>,
) -> ModelParts {
    let parts = data.parts();
    let dim = coords.len();
    ModelParts {
        name,
        coords,
        kinetic: parts.kinetic,
        potential: Some(parts.potential),
        lagrangian: Some(parts.lagrangian),
        accel: accel.unwrap_or(parts.accel),
        homothety: Some(data.homothety(dim)),
        mu_eff2: Some(data.mu_eff2()),
        singular,
        params: params.clone(),
        functions: functions.clone(),
        cone: Some(data),
    }
}

/// Polar form: L = ½(ṙ² + r²θ̇²) + ½μ²r² − C(θ)/(2r²).
fn ke2d(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "ke2d";
    let mu = params.require(name, "mu")?;
    let c = params.or_default("c", 0.0);
    let f = functions.require(name, "f", 1)?;
    let g = functions.require(name, "g", 1)?;
    let trivial = is_zero(&f) && is_zero(&g);
    let big_c = build_c(&f, &g, c)?;
    let half_c = {
        let (c1, c2) = (big_c.clone(), big_c.clone());
        Func::new(1, move |y| 0.5 * c1.eval(y)).with_grad(move |y| vec![0.5 * c2.deriv1(y[0])])
    };
    let data = ConeData { kappa: 1.0, m: mu * mu, h: geometry::flat(1, 1.0), w: half_c };
    let cc = big_c.clone();
    let accel: super::AccelFn = Arc::new(move |_, q, v| {
        let (r, th) = (q[0], q[1]);
        let (dr, dth) = (v[0], v[1]);
        Ok(vec![
            r * dth * dth + mu * mu * r + cc.eval1(th) / r.powi(3),
            -2.0 * dr * dth / r - cc.deriv1(th) / (2.0 * r.powi(4)),
        ])
    });
    let singular = cone_singular(move |y| {
        if !trivial && (2.0 * y[0]).sin().abs() <= DELTA_SING {
            return Some(format!("θ = {} is within {DELTA_SING:e} of a multiple of π/2", y[0]));
        }
        None
    });
    let mut functions = functions.clone();
    functions.insert("C", big_c);
    Ok(cone_model(name, names(&["r", "theta"]), data, params, &functions, singular, Some(accel)))
}

fn sin_singular(y: &[f64]) -> Option<String> {
    if y[0].sin().abs() <= DELTA_SING {
        return Some(format!("|sin φ| = {} is within {DELTA_SING:e} of the pole", y[0].sin().abs()));
    }
    None
}

/// Spherical coordinates (R, φ, θ), L = ½(Ṙ² + R²φ̇² + R²sin²φ θ̇²) + ½μ²R² − f(φ,θ)/R².
fn ke3d(name: &'static str, params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let mu = if name == "ke3d_I" { params.require_nonzero(name, "mu")? } else { 0.0 };
    let f = functions.require(name, "f", 2)?;
    let data = ConeData { kappa: 1.0, m: mu * mu, h: geometry::sphere2(), w: f.clone() };
    let accel: super::AccelFn = Arc::new(move |_, q, v| Ok(ke3d_accel(mu, &f, q, v)));
    Ok(cone_model(name, names(&["R", "phi", "theta"]), data, params, functions, cone_singular(sin_singular), Some(accel)))
}

pub(crate) fn ke3d_accel(mu: f64, f: &Func, q: &[f64], v: &[f64]) -> Vec<f64> {
    let (r, ph) = (q[0], q[1]);
    let (dr, dph, dth) = (v[0], v[1], v[2]);
    let (s, c) = ph.sin_cos();
    let fv = f.eval(&q[1..]);
    let gf = f.grad(&q[1..]);
    vec![
        r * (dph * dph + s * s * dth * dth) + mu * mu * r + 2.0 * fv / r.powi(3),
        -2.0 * dr * dph / r + s * c * dth * dth - gf[0] / r.powi(4),
        -2.0 * dr * dth / r - 2.0 * c / s * dph * dth - gf[1] / (r.powi(4) * s * s),
    ]
}

fn euclidean_hv() -> HomotheticData {
    HomotheticData::new(|q| q.to_vec(), |q| 0.5 * q.iter().map(|x| x * x).sum::<f64>(), 1.0)
}

/// L = ½|v|² − ½μ²|q|² − Σ_{i<j} 1/(q_i − q_j)².
fn calogero_moser(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "calogero_moser";
    let mu = params.require(name, "mu")?;
    let pot = move |q: &[f64]| {
        0.5 * mu * mu * q.iter().map(|x| x * x).sum::<f64>()
            + (q[0] - q[1]).powi(-2)
            + (q[0] - q[2]).powi(-2)
            + (q[1] - q[2]).powi(-2)
    };
    let accel: super::AccelFn = Arc::new(move |_, q, _| {
        Ok((0..3)
            .map(|i| {
                let mut a = -mu * mu * q[i];
                for j in 0..3 {
                    if j != i {
                        a += 2.0 / (q[i] - q[j]).powi(3);
                    }
                }
                a
            })
            .collect())
    });
    let singular: super::SingularFn = Arc::new(|q| {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (q[i] - q[j]).abs() <= DELTA_SING {
                return Some(format!("particles {i} and {j} coincide"));
            }
        }
        None
    });
    Ok(ModelParts {
        name,
        coords: names(&["x", "y", "z"]),
        kinetic: geometry::flat(3, 1.0),
        potential: Some(Arc::new(pot)),
        lagrangian: Some(Arc::new(move |_, q, v| 0.5 * v.iter().map(|x| x * x).sum::<f64>() - pot(q))),
        accel,
        homothety: Some(euclidean_hv()),
        mu_eff2: Some(-mu * mu),
        singular,
        params: params.clone(),
        functions: functions.clone(),
        cone: None,
    })
}

/// L = ½|v|² − 1/(x²(1 − y/x − z/x)²) = ½|v|² − 1/(x − y − z)².
fn damianou(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "damianou";
    let lag = |q: &[f64], v: &[f64]| {
        let x = q[0];
        0.5 * v.iter().map(|a| a * a).sum::<f64>() - 1.0 / (x * x * (1.0 - q[1] / x - q[2] / x).powi(2))
    };
    let accel: super::AccelFn = Arc::new(|_, q, _| {
        let s3 = (q[0] - q[1] - q[2]).powi(3);
        Ok(vec![2.0 / s3, -2.0 / s3, -2.0 / s3])
    });
    let singular: super::SingularFn = Arc::new(|q| {
        let s = q[0] - q[1] - q[2];
        if s.abs() <= DELTA_SING || q[0].abs() <= DELTA_SING {
            return Some(format!("x − y − z = {s} or x = {} is within {DELTA_SING:e} of zero", q[0]));
        }
        None
    });
    Ok(ModelParts {
        name,
        coords: names(&["x", "y", "z"]),
        kinetic: geometry::flat(3, 1.0),
        potential: Some(Arc::new(|q| (q[0] - q[1] - q[2]).powi(-2))),
        lagrangian: Some(Arc::new(move |_, q, v| lag(q, v))),
        accel,
        homothety: Some(euclidean_hv()),
        mu_eff2: Some(0.0),
        singular,
        params: params.clone(),
        functions: functions.clone(),
        cone: None,
    })
}

fn metric_singular(h: MetricSpec) -> super::SingularFn {
    cone_singular(move |y| {
        let det = h.eval(y).determinant();
        if !(det.abs() > geometry::METRIC_DET_TOL) {
            return Some(format!("angular metric is degenerate (|det h| = {:e})", det.abs()));
        }
        None
    })
}

/// Cone over a user metric `h` (default: unit 2-sphere). Hamiltonian with
/// `W`, otherwise forced by `G^u` and `Σ`.
fn riemannian_ke(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "riemannian_ke";
    let mu = params.require(name, "mu")?;
    let h = functions.metric().cloned().unwrap_or_else(geometry::sphere2);
    let n = h.dim;
    let mut coords = vec!["u".to_string()];
    coords.extend((1..=n).map(|i| format!("y{i}")));
    let singular = metric_singular(h.clone());
    if functions.get("W").is_some() {
        let w = functions.require(name, "W", n)?;
        let data = ConeData { kappa: 1.0, m: mu * mu, h, w };
        return Ok(cone_model(name, coords, data, params, functions, singular, None));
    }
    let gu = functions.get("Gu").cloned();
    let sigma = functions.get("Sigma").cloned();
    let (gu, sigma) = match (gu, sigma) {
        (Some(a), Some(b)) => (a, b),
        (None, _) => return Err(Error::MissingFunction { system: name.into(), name: "W (or Gu and Sigma)".into() }),
        (_, None) => return Err(Error::MissingFunction { system: name.into(), name: "Sigma".into() }),
    };
    for (label, f) in [("Gu", &gu), ("Sigma", &sigma)] {
        if f.arity() != n {
            return Err(Error::InvalidFunction(format!("`{label}` takes {n} arguments")));
        }
    }
    // Same equations as the cone engine with κ = 1, except that the radial
    // force G^u/u³ is independent of the angular potential Σ.
    let data = ConeData { kappa: 1.0, m: mu * mu, h: h.clone(), w: sigma };
    let accel: super::AccelFn = Arc::new(move |_, q, v| {
        let mut a = data.accel(q, v)?;
        let u = q[0];
        a[0] += (gu.eval(&q[1..]) - 2.0 * data.w.eval(&q[1..])) / u.powi(3);
        Ok(a)
    });
    let mut parts = non_hamiltonian(name, &[], params, functions, accel, singular);
    parts.coords = coords;
    parts.kinetic = geometry::cone(1.0, h);
    parts.homothety = Some(geometry::cone_homothety(1.0, n + 1));
    Ok(parts)
}

/// L = ½(u′² − u²|x′|²) + ½μ²u² − V(x)/u² on a flat Lorentzian cone.
fn lorentzian(name: &'static str, n: usize, params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let mu = params.require(name, "mu")?;
    let v = functions.require(name, "V", n)?;
    let data = ConeData { kappa: 1.0, m: mu * mu, h: geometry::flat(n, -1.0), w: v };
    let coords = if n == 3 { names(&["u", "x", "y", "z"]) } else { names(&["u", "x", "y"]) };
    Ok(cone_model(name, coords, data, params, functions, cone_singular(|_| None), None))
}

/// L = ½(Ṙ² + R²φ̇² + R²sinh²φ θ̇²) + ½μ²R² − g(φ,θ)/R².
fn hyperbolic3(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "hyperbolic3";
    let mu = params.require(name, "mu")?;
    let g = functions.require(name, "g", 2)?;
    let data = ConeData { kappa: 1.0, m: mu * mu, h: geometry::hyperbolic2(), w: g };
    let singular = cone_singular(|y| {
        if y[0].sinh().abs() <= DELTA_SING {
            return Some(format!("|sinh φ| = {} is within {DELTA_SING:e} of zero", y[0].sinh().abs()));
        }
        None
    });
    Ok(cone_model(name, names(&["R", "phi", "theta"]), data, params, functions, singular, None))
}

/// Scalar-field parameters shared by both scalar-cosmology models.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScalarParams {
    pub k: f64,
    pub v0: f64,
    pub c: f64,
    pub rho0: f64,
}

impl ScalarParams {
    pub fn from(name: &str, p: &ParameterSet) -> Result<Self> {
        let k = p.require(name, "k")?;
        if k <= 0.0 {
            return Err(Error::InvalidParameter { name: "k".into(), reason: "must be positive".into() });
        }
        Ok(ScalarParams { k, v0: p.require(name, "V0")?, c: p.require(name, "c")?, rho0: p.require(name, "rho0")? })
    }

    /// c̄ = c / √(6k).
    pub fn cbar(&self) -> f64 {
        self.c / (6.0 * self.k).sqrt()
    }

    pub fn check_coupling(&self) -> Result<f64> {
        let cb = self.cbar();
        if (cb - 1.0).abs() < 1e-12 {
            return Err(Error::DegenerateCoupling);
        }
        if cb <= -1.0 {
            return Err(Error::DomainViolation(format!("c̄ = {cb} ≤ −1")));
        }
        Ok(cb)
    }
}

/// (a, β, φ) with lapse N² = e^{cφ}:
/// L = e^{−cφ/2}[−3aȧ² + ¾a³β̇² + ½k a³φ̇²] − kV₀a³e^{−cφ/2} − ρ₀e^{cφ/2}/a³.
fn scalar_cosmo_raw(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "scalar_cosmo_raw";
    let sp = ScalarParams::from(name, params)?;
    let ScalarParams { k, v0, c, rho0 } = sp;
    let metric = MetricSpec::new(3, vec![-1, 1, 1], move |q| {
        let (a, ph) = (q[0], q[2]);
        let e = (-0.5 * c * ph).exp();
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-6.0 * a * e, 1.5 * a.powi(3) * e, k * a.powi(3) * e]))
    })
    .with_derivatives(move |q| {
        let (a, ph) = (q[0], q[2]);
        let e = (-0.5 * c * ph).exp();
        let da = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-6.0 * e, 4.5 * a * a * e, 3.0 * k * a * a * e]));
        let dph = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            3.0 * c * a * e,
            -0.75 * c * a.powi(3) * e,
            -0.5 * c * k * a.powi(3) * e,
        ]));
        vec![da, DMatrix::zeros(3, 3), dph]
    });
    let pot = move |q: &[f64]| {
        let (a, ph) = (q[0], q[2]);
        k * v0 * a.powi(3) * (-0.5 * c * ph).exp() + rho0 * (0.5 * c * ph).exp() / a.powi(3)
    };
    let grad_v = move |q: &[f64]| {
        let (a, ph) = (q[0], q[2]);
        let (em, ep) = ((-0.5 * c * ph).exp(), (0.5 * c * ph).exp());
        vec![
            3.0 * k * v0 * a * a * em - 3.0 * rho0 * ep / a.powi(4),
            0.0,
            -0.5 * c * k * v0 * a.powi(3) * em + 0.5 * c * rho0 * ep / a.powi(3),
        ]
    };
    let m2 = metric.clone();
    let accel: super::AccelFn = Arc::new(move |_, q, v| mass_matrix_accel(&m2, &grad_v(q), q, v));
    let lagrangian = move |_: f64, q: &[f64], v: &[f64]| {
        let (a, ph) = (q[0], q[2]);
        let e = (-0.5 * c * ph).exp();
        (-3.0 * a * v[0] * v[0] + 0.75 * a.powi(3) * v[1] * v[1] + 0.5 * k * a.powi(3) * v[2] * v[2]) * e - pot(q)
    };
    let denom = 6.0 * k - c * c;
    let homothety = (denom.abs() > 1e-12).then(|| {
        HomotheticData::new(
            move |q| vec![4.0 * k * q[0] / denom, 0.0, 4.0 * c / denom],
            move |q| -8.0 * k * q[0].powi(3) * (-0.5 * c * q[2]).exp() / denom,
            1.0,
        )
    });
    let singular: super::SingularFn = Arc::new(|q| {
        (q[0] <= DELTA_SING).then(|| format!("scale factor a = {} is within {DELTA_SING:e} of zero", q[0]))
    });
    Ok(ModelParts {
        name,
        coords: names(&["a", "beta", "phi"]),
        kinetic: metric,
        potential: Some(Arc::new(pot)),
        lagrangian: Some(Arc::new(lagrangian)),
        accel,
        mu_eff2: homothety.as_ref().map(|_| v0 * denom / 8.0),
        homothety,
        singular,
        params: params.clone(),
        functions: functions.clone(),
        cone: None,
    })
}

/// Image of `scalar_cosmo_raw` in (u, z, β):
/// L = ε[−⅔u̇² + ⅔u²ż²] + ⅜|1−c̄²|u²β̇² − ½kV₀|1−c̄²|u² − 2ρ₀/(|1−c̄²|u²),
/// ε = sign(1 − c̄).
fn scalar_cosmo_u(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "scalar_cosmo_u";
    let sp = ScalarParams::from(name, params)?;
    let cb = sp.check_coupling()?;
    let eps = (1.0 - cb).signum();
    let w = (1.0 - cb * cb).abs();
    let data = ConeData {
        kappa: -4.0 / 3.0 * eps,
        m: -sp.k * sp.v0 * w,
        h: geometry::constant_diagonal(vec![-1.0, -9.0 / 16.0 * w * eps]),
        w: Func::constant(2, 2.0 * sp.rho0 / w),
    };
    Ok(cone_model(name, names(&["u", "z", "beta"]), data, params, functions, cone_singular(|_| None), None))
}

/// f(R) = (R − 2Λ)^n and its first three derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerLawF {
    pub lambda: f64,
    pub n: f64,
}

impl PowerLawF {
    pub fn d(&self, r: f64, order: i32) -> f64 {
        let x = r - 2.0 * self.lambda;
        let n = self.n;
        match order {
            0 => x.powf(n),
            1 => n * x.powf(n - 1.0),
            2 => n * (n - 1.0) * x.powf(n - 2.0),
            _ => n * (n - 1.0) * (n - 2.0) * x.powf(n - 3.0),
        }
    }
}

/// (a, R, β): L = 6af′ȧ² + 6a²f″ȧṘ − (3/2)f′a³β̇² + a³(f′R − f).
fn fr_cosmo_raw(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "fr_cosmo_raw";
    let lambda = params.require(name, "Lambda")?;
    let n = params.or_default("n", 0.875);
    if n == 0.0 || n == 1.0 {
        return Err(Error::ZeroSecondDerivative);
    }
    let f = PowerLawF { lambda, n };
    let metric = MetricSpec::new(3, vec![1, -1, -1], move |q| {
        let (a, r) = (q[0], q[1]);
        let (f1, f2) = (f.d(r, 1), f.d(r, 2));
        DMatrix::from_row_slice(3, 3, &[12.0 * a * f1, 6.0 * a * a * f2, 0.0, 6.0 * a * a * f2, 0.0, 0.0, 0.0, 0.0, -3.0 * a.powi(3) * f1])
    })
    .with_derivatives(move |q| {
        let (a, r) = (q[0], q[1]);
        let (f1, f2, f3) = (f.d(r, 1), f.d(r, 2), f.d(r, 3));
        vec![
            DMatrix::from_row_slice(3, 3, &[12.0 * f1, 12.0 * a * f2, 0.0, 12.0 * a * f2, 0.0, 0.0, 0.0, 0.0, -9.0 * a * a * f1]),
            DMatrix::from_row_slice(3, 3, &[12.0 * a * f2, 6.0 * a * a * f3, 0.0, 6.0 * a * a * f3, 0.0, 0.0, 0.0, 0.0, -3.0 * a.powi(3) * f2]),
            DMatrix::zeros(3, 3),
        ]
    });
    let pot = move |q: &[f64]| {
        let (a, r) = (q[0], q[1]);
        -a.powi(3) * (f.d(r, 1) * r - f.d(r, 0))
    };
    let grad_v = move |q: &[f64]| {
        let (a, r) = (q[0], q[1]);
        vec![-3.0 * a * a * (f.d(r, 1) * r - f.d(r, 0)), -a.powi(3) * f.d(r, 2) * r, 0.0]
    };
    let m2 = metric.clone();
    let accel: super::AccelFn = Arc::new(move |_, q, v| mass_matrix_accel(&m2, &grad_v(q), q, v));
    let lagrangian = move |_: f64, q: &[f64], v: &[f64]| {
        let (a, r) = (q[0], q[1]);
        let (f1, f2) = (f.d(r, 1), f.d(r, 2));
        6.0 * a * f1 * v[0] * v[0] + 6.0 * a * a * f2 * v[0] * v[1] - 1.5 * f1 * a.powi(3) * v[2] * v[2] - pot(q)
    };
    let homothety = HomotheticData::new(
        move |q| vec![0.5 * q[0], 0.5 * f.d(q[1], 1) / f.d(q[1], 2), 0.0],
        move |q| 3.0 * q[0].powi(3) * f.d(q[1], 1),
        1.0,
    );
    let singular: super::SingularFn = Arc::new(move |q| {
        if q[0] <= DELTA_SING {
            return Some(format!("scale factor a = {} is within {DELTA_SING:e} of zero", q[0]));
        }
        if q[1] - 2.0 * lambda <= DELTA_SING {
            return Some(format!("R − 2Λ = {} is within {DELTA_SING:e} of zero", q[1] - 2.0 * lambda));
        }
        None
    });
    Ok(ModelParts {
        name,
        coords: names(&["a", "R", "beta"]),
        kinetic: metric,
        potential: Some(Arc::new(pot)),
        lagrangian: Some(Arc::new(lagrangian)),
        accel,
        homothety: Some(homothety),
        mu_eff2: (n == 0.875).then_some(2.0 * lambda / 3.0),
        singular,
        params: params.clone(),
        functions: functions.clone(),
        cone: None,
    })
}

/// (u, v, w): L = ½u̇² − ½u²(v̇² + ẇ²) + (Λ/3)u² − e^{12v}/(42u²).
fn fr_cosmo_uvw(params: &ParameterSet, functions: &UserFunctions) -> Result<ModelParts> {
    let name = "fr_cosmo_uvw";
    let lambda = params.require(name, "Lambda")?;
    let w = FnSpec::Exponential { k: 12.0, coef: 1.0 / 42.0, index: 0 }.build(2)?;
    let data = ConeData { kappa: 1.0, m: 2.0 * lambda / 3.0, h: geometry::flat(2, -1.0), w };
    Ok(cone_model(name, names(&["u", "v", "w"]), data, params, functions, cone_singular(|_| None), None))
}
