//! Metrics, Christoffel symbols, and residual checks for homothetic vectors,
//! gradient functions and Killing tensors.
//!
//! Lorentzian metrics go through the same code paths as Riemannian ones; the
//! signature is metadata only.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::fd;

type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type DerivFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
type GammaFn = Arc<dyn Fn(&[f64]) -> Christoffel + Send + Sync>;
type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Determinant threshold below which a metric counts as singular.
pub const METRIC_DET_TOL: f64 = 1e-12;

/// Finite-difference step for metric derivatives: `max(1e-5, 1e-5 |q_i|)`.
pub fn metric_step(x: f64) -> f64 {
    fd::scaled_step(1e-5, x)
}

/// A metric evaluator with optional analytic first derivatives and
/// Christoffel symbols.
#[derive(Clone)]
pub struct MetricSpec {
    pub dim: usize,
    pub signature: Vec<i8>,
    g: MatFn,
    dg: Option<DerivFn>,
    gamma: Option<GammaFn>,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpec")
            .field("dim", &self.dim)
            .field("signature", &self.signature)
            .field("analytic_dg", &self.dg.is_some())
            .field("analytic_christoffel", &self.gamma.is_some())
            .finish()
    }
}

/// Christoffel symbols `Γ^i_jk`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// Sets `Γ^i_jk` and its mirror `Γ^i_kj`.
    pub fn set_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        self.data[(i * n + j) * n + k] = v;
        self.data[(i * n + k) * n + j] = v;
    }

    /// `Γ^i_jk v^j v^k` for each `i`.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..self.n {
                    for k in 0..self.n {
                        s += self.get(i, j, k) * v[j] * v[k];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        crate::numeric::max_abs(&self.data)
    }
}

impl MetricSpec {
    pub fn new(dim: usize, signature: Vec<i8>, g: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        MetricSpec { dim, signature, g: Arc::new(g), dg: None, gamma: None }
    }

    /// Supplies analytic partials: element `k` is `∂_k g`.
    pub fn with_derivatives(mut self, dg: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static) -> Self {
        self.dg = Some(Arc::new(dg));
        self
    }

    pub fn with_christoffel(mut self, gamma: impl Fn(&[f64]) -> Christoffel + Send + Sync + 'static) -> Self {
        self.gamma = Some(Arc::new(gamma));
        self
    }

    /// Drop analytic data so that every derivative is differenced.
    pub fn differenced(&self) -> Self {
        MetricSpec { dim: self.dim, signature: self.signature.clone(), g: self.g.clone(), dg: None, gamma: None }
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.gamma.is_some()
    }

    pub fn eval(&self, q: &[f64]) -> DMatrix<f64> {
        (self.g)(q)
    }

    /// Inverse metric, failing when `|det g| <= 1e-12`.
    pub fn inverse(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.eval(q);
        let det = g.determinant();
        if !det.is_finite() || det.abs() <= METRIC_DET_TOL {
            return Err(Error::SingularMetric { det: det.abs() });
        }
        g.try_inverse().ok_or(Error::SingularMetric { det: det.abs() })
    }

    /// Partials `∂_k g_ij`, analytic when available.
    pub fn derivatives(&self, q: &[f64]) -> Vec<DMatrix<f64>> {
        if let Some(dg) = &self.dg {
            return dg(q);
        }
        (0..self.dim)
            .map(|k| {
                let h = metric_step(q[k]);
                let mut p = q.to_vec();
                p[k] = q[k] + h;
                let gp = self.eval(&p);
                p[k] = q[k] - h;
                let gm = self.eval(&p);
                (gp - gm) / (2.0 * h)
            })
            .collect()
    }

    /// Quadratic form `g_ij a^i b^j`.
    pub fn dot(&self, q: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let g = self.eval(q);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += g[(i, j)] * a[i] * b[j];
            }
        }
        s
    }
}

/// Christoffel symbols of the second kind at `q`.
pub fn christoffel(metric: &MetricSpec, q: &[f64]) -> Result<Christoffel> {
    let ginv = metric.inverse(q)?;
    if let Some(gamma) = &metric.gamma {
        return Ok(gamma(q));
    }
    let n = metric.dim;
    let dg = metric.derivatives(q);
    let mut out = Christoffel::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(i, l)] * (dg[k][(l, j)] + dg[j][(l, k)] - dg[l][(j, k)]);
                }
                out.set_sym(i, j, k, 0.5 * s);
            }
        }
    }
    Ok(out)
}

/// A homothetic vector field `X`, its gradient function `H` and factor `ψ`.
#[derive(Clone)]
pub struct HomotheticData {
    field: VecFn,
    h: ScalarFn,
    pub psi: f64,
}

impl fmt::Debug for HomotheticData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomotheticData(psi = {})", self.psi)
    }
}

impl HomotheticData {
    pub fn new(
        field: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        psi: f64,
    ) -> Self {
        HomotheticData { field: Arc::new(field), h: Arc::new(h), psi }
    }

    pub fn field(&self, q: &[f64]) -> Vec<f64> {
        (self.field)(q)
    }

    pub fn h(&self, q: &[f64]) -> f64 {
        (self.h)(q)
    }

    /// `Ḣ = ∂_i H v^i`, using `∂_i H = g_ij X^j` (exact for a gradient HV).
    pub fn h_dot(&self, metric: &MetricSpec, q: &[f64], v: &[f64]) -> f64 {
        metric.dot(q, v, &self.field(q))
    }

    /// Same vector field scaled by `s` (for negative controls).
    pub fn scaled(&self, s: f64) -> Self {
        let f = self.field.clone();
        HomotheticData { field: Arc::new(move |q| f(q).into_iter().map(|x| s * x).collect()), h: self.h.clone(), psi: self.psi }
    }

    /// Same field with a different gradient function.
    pub fn with_h(&self, h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        HomotheticData { field: self.field.clone(), h: Arc::new(h), psi: self.psi }
    }
}

/// `(L_X g)_ij − 2ψ g_ij`.
pub fn homothety_residual(metric: &MetricSpec, hv: &HomotheticData, q: &[f64]) -> Result<DMatrix<f64>> {
    metric.inverse(q)?;
    let n = metric.dim;
    let g = metric.eval(q);
    let dg = metric.derivatives(q);
    let x = hv.field(q);
    let dx = fd::jacobian(|p| hv.field(p), q, 1e-5);
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += x[k] * dg[k][(i, j)] + g[(k, j)] * dx[k][i] + g[(i, k)] * dx[k][j];
            }
            r[(i, j)] = s - 2.0 * hv.psi * g[(i, j)];
        }
    }
    Ok(r)
}

/// `g_ij X^j − ∂_i H`.
pub fn gradient_check(metric: &MetricSpec, hv: &HomotheticData, q: &[f64]) -> Result<Vec<f64>> {
    metric.inverse(q)?;
    let g = metric.eval(q);
    let x = hv.field(q);
    let dh = fd::gradient(|p| hv.h(p), q, 1e-5);
    Ok((0..metric.dim).map(|i| (0..metric.dim).map(|j| g[(i, j)] * x[j]).sum::<f64>() - dh[i]).collect())
}

/// A symmetric rank-2 tensor field `K_ij(q)`.
#[derive(Clone)]
pub struct KillingTensorSpec {
    k: MatFn,
}

impl KillingTensorSpec {
    pub fn new(k: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        KillingTensorSpec { k: Arc::new(k) }
    }

    pub fn eval(&self, q: &[f64]) -> DMatrix<f64> {
        (self.k)(q)
    }

    /// The metric itself, which is always a Killing tensor.
    pub fn from_metric(metric: &MetricSpec) -> Self {
        let m = metric.clone();
        KillingTensorSpec::new(move |q| m.eval(q))
    }
}

/// `K_ij = 2H g_ij − X_i X_j` for a gradient HV with `ψ = 1`, the Killing
/// tensor behind the quadratic part of the combined Ermakov invariant.
pub fn ermakov_killing_tensor(metric: &MetricSpec, hv: &HomotheticData) -> KillingTensorSpec {
    let (m, hv) = (metric.clone(), hv.clone());
    KillingTensorSpec::new(move |q| {
        let g = m.eval(q);
        let x = &g * DVector::from_vec(hv.field(q));
        &g * (2.0 * hv.h(q)) - &x * x.transpose()
    })
}

/// Fully symmetric rank-3 array, flattened as `[(i*n + j)*n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> f64 {
        crate::numeric::max_abs(&self.data)
    }
}

/// `∇_(i K_jk)`: the symmetrized covariant derivative of `K`.
pub fn killing_tensor_residual(metric: &MetricSpec, kt: &KillingTensorSpec, q: &[f64]) -> Result<Tensor3> {
    let n = metric.dim;
    let gamma = christoffel(metric, q)?;
    let k0 = kt.eval(q);
    let dk: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let h = metric_step(q[l]);
            let mut p = q.to_vec();
            let mut at = |dx: f64| {
                p[l] = q[l] + dx;
                kt.eval(&p)
            };
            let (p1, m1, p2, m2) = (at(h), at(-h), at(0.5 * h), at(-0.5 * h));
            ((p2 - m2) / h * 4.0 - (p1 - m1) / (2.0 * h)) / 3.0
        })
        .collect();
    let nabla = |i: usize, j: usize, k: usize| {
        let mut s = dk[i][(j, k)];
        for l in 0..n {
            s -= gamma.get(l, i, j) * k0[(l, k)] + gamma.get(l, i, k) * k0[(j, l)];
        }
        s
    };
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                data[(i * n + j) * n + k] = (nabla(i, j, k) + nabla(j, k, i) + nabla(k, i, j)) / 3.0;
            }
        }
    }
    Ok(Tensor3 { n, data })
}

/// Flat metric `sign * I_n`.
pub fn flat(n: usize, sign: f64) -> MetricSpec {
    let s = if sign < 0.0 { -1 } else { 1 };
    MetricSpec::new(n, vec![s; n], move |_| DMatrix::identity(n, n) * sign)
        .with_derivatives(move |_| vec![DMatrix::zeros(n, n); n])
        .with_christoffel(move |_| Christoffel::zeros(n))
}

/// Constant diagonal metric.
pub fn constant_diagonal(diag: Vec<f64>) -> MetricSpec {
    let n = diag.len();
    let sig = diag.iter().map(|d| if *d < 0.0 { -1 } else { 1 }).collect();
    MetricSpec::new(n, sig, move |_| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone())))
        .with_derivatives(move |_| vec![DMatrix::zeros(n, n); n])
        .with_christoffel(move |_| Christoffel::zeros(n))
}

/// Unit 2-sphere `dφ² + sin²φ dθ²` in coordinates `(φ, θ)`.
pub fn sphere2() -> MetricSpec {
    MetricSpec::new(2, vec![1, 1], |y| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, y[0].sin().powi(2)]))
        .with_derivatives(|y| {
            let s2 = (2.0 * y[0]).sin();
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, s2]), DMatrix::zeros(2, 2)]
        })
        .with_christoffel(|y| {
            let (s, c) = y[0].sin_cos();
            let mut g = Christoffel::zeros(2);
            g.set_sym(0, 1, 1, -s * c);
            g.set_sym(1, 0, 1, c / s);
            g
        })
}

/// Unit hyperbolic plane `dφ² + sinh²φ dθ²` in coordinates `(φ, θ)`.
pub fn hyperbolic2() -> MetricSpec {
    MetricSpec::new(2, vec![1, 1], |y| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, y[0].sinh().powi(2)]))
        .with_derivatives(|y| {
            let s2 = (2.0 * y[0]).sinh();
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, s2]), DMatrix::zeros(2, 2)]
        })
        .with_christoffel(|y| {
            let (s, c) = (y[0].sinh(), y[0].cosh());
            let mut g = Christoffel::zeros(2);
            g.set_sym(0, 1, 1, -s * c);
            g.set_sym(1, 0, 1, c / s);
            g
        })
}

/// Cone metric `κ (du² + u² h_AB dy^A dy^B)` over `h`, coordinates `(u, y)`.
pub fn cone(kappa: f64, h: MetricSpec) -> MetricSpec {
    let n = h.dim + 1;
    let mut sig = vec![if kappa < 0.0 { -1 } else { 1 }];
    sig.extend(h.signature.iter().map(|s| if kappa < 0.0 { -s } else { *s }));
    let h1 = h.clone();
    let h2 = h.clone();
    MetricSpec::new(n, sig, move |q| {
        let u = q[0];
        let hy = h1.eval(&q[1..]);
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = kappa;
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                g[(a + 1, b + 1)] = kappa * u * u * hy[(a, b)];
            }
        }
        g
    })
    .with_derivatives(move |q| {
        let u = q[0];
        let hy = h2.eval(&q[1..]);
        let dh = h2.derivatives(&q[1..]);
        let mut out = vec![DMatrix::zeros(n, n); n];
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                out[0][(a + 1, b + 1)] = 2.0 * kappa * u * hy[(a, b)];
                for c in 0..n - 1 {
                    out[c + 1][(a + 1, b + 1)] = kappa * u * u * dh[c][(a, b)];
                }
            }
        }
        out
    })
}

/// The gradient HV `u ∂_u` of a cone metric, `H = κ u² / 2`, `ψ = 1`.
pub fn cone_homothety(kappa: f64, n: usize) -> HomotheticData {
    HomotheticData::new(
        move |q| {
            let mut x = vec![0.0; n];
            x[0] = q[0];
            x
        },
        move |q| 0.5 * kappa * q[0] * q[0],
        1.0,
    )
}

/// Flat space in spherical coordinates `(R, φ, θ)`.
pub fn flat_spherical() -> MetricSpec {
    cone(1.0, sphere2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn sphere_symbols() {
        let s = sphere2();
        let g = christoffel(&s, &[FRAC_PI_2, 0.3]).unwrap();
        assert!(g.get(0, 1, 1).abs() < 1e-15);
        let g = christoffel(&s, &[FRAC_PI_4, 0.3]).unwrap();
        assert!((g.get(1, 0, 1) - 1.0).abs() < 1e-15);
        assert!((g.get(1, 1, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn differenced_matches_analytic() {
        for (m, y) in [(sphere2(), [0.9, 0.2]), (hyperbolic2(), [0.7, -1.0])] {
            let a = christoffel(&m, &y).unwrap();
            let d = christoffel(&m.differenced(), &y).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let (x, z) = (a.get(i, j, k), d.get(i, j, k));
                        assert!((x - z).abs() <= 1e-6 * x.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn flat_symbols_vanish() {
        let g = christoffel(&flat(3, 1.0).differenced(), &[0.3, 1.0, -2.0]).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn singular_metric_detected() {
        let g = christoffel(&sphere2(), &[0.0, 0.0]);
        assert!(matches!(g, Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn cone_hv_and_gradient() {
        let m = cone(1.0, sphere2());
        let hv = cone_homothety(1.0, 3);
        let q = [2.0, 0.8, 1.7];
        assert!(homothety_residual(&m, &hv, &q).unwrap().amax() <= 1e-10);
        assert!(crate::numeric::max_abs(&gradient_check(&m, &hv, &q).unwrap()) <= 1e-10);
    }

    #[test]
    fn doubled_field_is_not_homothetic() {
        let m = cone(1.0, sphere2());
        let hv = cone_homothety(1.0, 3).scaled(2.0);
        let r = homothety_residual(&m, &hv, &[2.0, 0.8, 1.7]).unwrap();
        // L_{2u∂u} g = 4 g, minus 2g leaves 2g.
        assert!((r[(0, 0)] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn missing_half_in_gradient_function() {
        let m = cone(1.0, sphere2());
        let hv = cone_homothety(1.0, 3).with_h(|q| q[0] * q[0]);
        let r = gradient_check(&m, &hv, &[2.0, 0.8, 1.7]).unwrap();
        assert!((r[0] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn metric_is_its_own_killing_tensor() {
        let m = flat_spherical();
        let kt = KillingTensorSpec::from_metric(&m);
        assert!(killing_tensor_residual(&m, &kt, &[1.3, 0.7, 0.2]).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn angular_killing_tensor() {
        let m = flat_spherical();
        let good = KillingTensorSpec::new(|q| {
            let r4 = q[0].powi(4);
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, r4, 0.0, 0.0, 0.0, r4 * q[1].sin().powi(2)])
        });
        assert!(killing_tensor_residual(&m, &good, &[1.3, 0.7, 0.2]).unwrap().max_abs() <= 1e-6);
        let bad = KillingTensorSpec::new(|q| {
            let r3 = q[0].powi(3);
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, r3, 0.0, 0.0, 0.0, r3 * q[1].sin().powi(2)])
        });
        // K_φφ = R³: ∇_R K_φφ = R², ∇_φ K_Rφ = ∇_φ K_φR = −R², symmetrized −R²/3.
        let r = killing_tensor_residual(&m, &bad, &[1.3, 0.7, 0.2]).unwrap();
        assert!((r.get(0, 1, 1) + 1.3f64.powi(2) / 3.0).abs() < 1e-6);
    }
}
