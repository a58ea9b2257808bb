//! Shared evaluators: the cone form used by most Hamiltonian models and the
//! mass-matrix solve used by the raw cosmological Lagrangians.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::funcs::Func;
use crate::geometry::{christoffel, cone, cone_homothety, MetricSpec};
use crate::numeric;
use crate::state::DELTA_SING;

use super::{AccelFn, LagrangianFn, ScalarFn, SingularFn};

/// `L = ½κ(u′² + u² h_AB y′^A y′^B) + ½ m u² − W(y)/u²`.
#[derive(Debug, Clone)]
pub struct ConeData {
    pub kappa: f64,
    pub m: f64,
    pub h: MetricSpec,
    pub w: Func,
}

pub(crate) struct ConeParts {
    pub kinetic: MetricSpec,
    pub potential: ScalarFn,
    pub lagrangian: LagrangianFn,
    pub accel: AccelFn,
}

impl ConeData {
    /// `u″ = u h(y′,y′) + (m/κ) u + 2W/(κu³)`,
    /// `y″ = −2u′y′/u − Γ(h) y′y′ − h⁻¹∇W/(κu⁴)`.
    pub fn accel(&self, q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let (u, y) = (q[0], &q[1..]);
        let (du, dy) = (v[0], &v[1..]);
        let k = self.kappa;
        let hy = self.h.eval(y);
        let hinv = self.h.inverse(y)?;
        let gamma = christoffel(&self.h, y)?;
        let gw = self.w.grad(y);
        let n = y.len();
        let mut hvv = 0.0;
        for a in 0..n {
            for b in 0..n {
                hvv += hy[(a, b)] * dy[a] * dy[b];
            }
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(u * hvv + self.m / k * u + 2.0 * self.w.eval(y) / (k * u.powi(3)));
        let gyy = gamma.contract(dy);
        for a in 0..n {
            let force: f64 = (0..n).map(|b| hinv[(a, b)] * gw[b]).sum();
            out.push(-2.0 * du * dy[a] / u - gyy[a] - force / (k * u.powi(4)));
        }
        Ok(out)
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        -0.5 * self.m * q[0] * q[0] + self.w.eval(&q[1..]) / (q[0] * q[0])
    }

    pub(crate) fn parts(&self) -> ConeParts {
        let kinetic = cone(self.kappa, self.h.clone());
        let c1 = self.clone();
        let c2 = self.clone();
        let c3 = self.clone();
        ConeParts {
            kinetic,
            potential: Arc::new(move |q| c1.potential(q)),
            lagrangian: Arc::new(move |_, q, v| {
                let (u, y) = (q[0], &q[1..]);
                let hy = c2.h.eval(y);
                let n = y.len();
                let mut hvv = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        hvv += hy[(a, b)] * v[a + 1] * v[b + 1];
                    }
                }
                0.5 * c2.kappa * (v[0] * v[0] + u * u * hvv) + 0.5 * c2.m * u * u - c2.w.eval(y) / (u * u)
            }),
            accel: Arc::new(move |_, q, v| c3.accel(q, v)),
        }
    }

    pub fn homothety(&self, dim: usize) -> crate::geometry::HomotheticData {
        cone_homothety(self.kappa, dim)
    }

    pub fn mu_eff2(&self) -> f64 {
        self.m / self.kappa
    }

    /// Local form of the combined invariant, `κ² u⁴ h(y′,y′) + 2κW`.
    pub fn local_invariant(&self, q: &[f64], v: &[f64]) -> f64 {
        let (u, y) = (q[0], &q[1..]);
        let hvv = self.h.dot(y, &v[1..], &v[1..]);
        self.kappa * self.kappa * u.powi(4) * hvv + 2.0 * self.kappa * self.w.eval(y)
    }
}

/// Singular-set check `u ≤ δ` plus an extra predicate on the angular block.
pub(crate) fn cone_singular(extra: impl Fn(&[f64]) -> Option<String> + Send + Sync + 'static) -> SingularFn {
    Arc::new(move |q| {
        if q[0] <= DELTA_SING {
            return Some(format!("u = {} is within {DELTA_SING:e} of the origin u = 0", q[0]));
        }
        extra(&q[1..])
    })
}

/// Solve `G q̈ = ½ ∂_i G_jk v^j v^k − ∂_k G_ij v^j v^k − ∂_i V`.
pub(crate) fn mass_matrix_accel(metric: &MetricSpec, grad_v: &[f64], q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = q.len();
    let g: DMatrix<f64> = metric.eval(q);
    let dg = metric.derivatives(q);
    let mut rhs = vec![0.0; n];
    for (i, r) in rhs.iter_mut().enumerate() {
        let mut s = -grad_v[i];
        for j in 0..n {
            for k in 0..n {
                s += (0.5 * dg[i][(j, k)] - dg[k][(i, j)]) * v[j] * v[k];
            }
        }
        *r = s;
    }
    numeric::solve(&g, &rhs, 1e-10)
}
