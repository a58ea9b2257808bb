//! User-supplied scalar functions.
//!
//! Models take arbitrary functions (f, g, h, F, W, Σ, ...). They are built
//! either from closures or from the serializable [`FnSpec`] library, which is
//! what configuration files use. Every function carries a gradient: analytic
//! for library specs, five-point differences for bare closures.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fd;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A scalar function of a fixed number of arguments.
#[derive(Clone)]
pub struct Func {
    arity: usize,
    value: ValueFn,
    grad: Option<GradFn>,
    label: String,
    spec: Option<Arc<FnSpec>>,
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Func({}, arity {})", self.label, self.arity)
    }
}

impl Func {
    pub fn new(arity: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Func { arity, value: Arc::new(f), grad: None, label: "closure".into(), spec: None }
    }

    /// One-argument convenience constructor.
    pub fn unary(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Func::new(1, move |x| f(x[0]))
    }

    pub fn with_grad(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Func::new(arity, move |_| c)
            .with_grad(move |x| vec![0.0; x.len()])
            .labeled(format!("constant({c})"))
    }

    pub fn zero(arity: usize) -> Self {
        Func::constant(arity, 0.0).labeled("zero")
    }

    /// The library description this function was built from, if any.
    pub fn spec(&self) -> Option<&FnSpec> {
        self.spec.as_deref()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn eval1(&self, x: f64) -> f64 {
        (self.value)(&[x])
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(x),
            None => (0..x.len())
                .map(|i| {
                    let h = fd::scaled_step(1e-3, x[i]);
                    let mut y = x.to_vec();
                    fd::five_point(
                        |xi| {
                            y[i] = xi;
                            (self.value)(&y)
                        },
                        x[i],
                        h,
                    )
                })
                .collect(),
        }
    }

    /// Derivative of a one-argument function.
    pub fn deriv1(&self, x: f64) -> f64 {
        self.grad(&[x])[0]
    }
}

/// Serializable description of a library function.
///
/// Multi-argument semantics: `power` without `index` acts on `|x|^2`, the
/// other one-variable kinds act on `x[index]` (default 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnSpec {
    Zero,
    Constant {
        value: f64,
    },
    Power {
        n: f64,
        #[serde(default = "one")]
        coef: f64,
        #[serde(default)]
        index: Option<usize>,
    },
    Exponential {
        k: f64,
        #[serde(default = "one")]
        coef: f64,
        #[serde(default)]
        index: usize,
    },
    Cosine {
        #[serde(default = "one")]
        k: f64,
        #[serde(default = "one")]
        coef: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        index: usize,
    },
    /// `coupling * Σ_{i<j} 1/(x_i - x_j)^2`.
    Calogero {
        #[serde(default = "one")]
        coupling: f64,
    },
    /// `Σ c_i x_i + offset`.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `inner(half_sq * |x|^2 / 2 + lin · x)`, the potentials of the
    /// Killing-vector table (functions of a translation or rotation invariant).
    Quadric {
        #[serde(default)]
        half_sq: f64,
        lin: Vec<f64>,
        inner: Box<FnSpec>,
    },
    Sum {
        terms: Vec<FnSpec>,
    },
}

fn one() -> f64 {
    1.0
}

impl FnSpec {
    /// Build the function for `arity` arguments.
    pub fn build(&self, arity: usize) -> Result<Func> {
        let label = serde_json::to_string(self).unwrap_or_default();
        let func = match self.clone() {
            FnSpec::Zero => Func::zero(arity),
            FnSpec::Constant { value } => Func::constant(arity, value),
            FnSpec::Power { n, coef, index } => match index {
                Some(i) => {
                    check_index(i, arity)?;
                    Func::new(arity, move |x| coef * x[i].powf(n)).with_grad(move |x| {
                        let mut g = vec![0.0; x.len()];
                        g[i] = coef * n * x[i].powf(n - 1.0);
                        g
                    })
                }
                None if arity == 1 => Func::new(1, move |x| coef * x[0].powf(n))
                    .with_grad(move |x| vec![coef * n * x[0].powf(n - 1.0)]),
                None => Func::new(arity, move |x| coef * norm2(x).powf(n)).with_grad(move |x| {
                    let s = norm2(x);
                    let d = coef * n * s.powf(n - 1.0) * 2.0;
                    x.iter().map(|xi| d * xi).collect()
                }),
            },
            FnSpec::Exponential { k, coef, index } => {
                check_index(index, arity)?;
                Func::new(arity, move |x| coef * (k * x[index]).exp()).with_grad(move |x| {
                    let mut g = vec![0.0; x.len()];
                    g[index] = coef * k * (k * x[index]).exp();
                    g
                })
            }
            FnSpec::Cosine { k, coef, offset, index } => {
                check_index(index, arity)?;
                Func::new(arity, move |x| coef * (k * x[index] + offset).cos()).with_grad(move |x| {
                    let mut g = vec![0.0; x.len()];
                    g[index] = -coef * k * (k * x[index] + offset).sin();
                    g
                })
            }
            FnSpec::Calogero { coupling } => Func::new(arity, move |x| {
                let mut s = 0.0;
                for i in 0..x.len() {
                    for j in i + 1..x.len() {
                        s += (x[i] - x[j]).powi(-2);
                    }
                }
                coupling * s
            })
            .with_grad(move |x| {
                let mut g = vec![0.0; x.len()];
                for i in 0..x.len() {
                    for j in i + 1..x.len() {
                        let d = -2.0 * coupling * (x[i] - x[j]).powi(-3);
                        g[i] += d;
                        g[j] -= d;
                    }
                }
                g
            }),
            FnSpec::Linear { coeffs, offset } => {
                if coeffs.len() != arity {
                    return Err(Error::InvalidFunction(format!(
                        "linear: {} coefficients for {arity} arguments",
                        coeffs.len()
                    )));
                }
                let c2 = coeffs.clone();
                Func::new(arity, move |x| offset + coeffs.iter().zip(x).map(|(c, xi)| c * xi).sum::<f64>())
                    .with_grad(move |_| c2.clone())
            }
            FnSpec::Quadric { half_sq, lin, inner } => {
                if lin.len() != arity {
                    return Err(Error::InvalidFunction(format!(
                        "quadric: {} linear coefficients for {arity} arguments",
                        lin.len()
                    )));
                }
                let g = inner.build(1)?;
                let g2 = g.clone();
                let l2 = lin.clone();
                let arg = move |x: &[f64], lin: &[f64]| {
                    0.5 * half_sq * norm2(x) + lin.iter().zip(x).map(|(c, xi)| c * xi).sum::<f64>()
                };
                Func::new(arity, move |x| g.eval1(arg(x, &lin))).with_grad(move |x| {
                    let d = g2.deriv1(arg(x, &l2));
                    x.iter().zip(&l2).map(|(xi, li)| d * (half_sq * xi + li)).collect()
                })
            }
            FnSpec::Sum { terms } => {
                let parts = terms.iter().map(|t| t.build(arity)).collect::<Result<Vec<_>>>()?;
                let p2 = parts.clone();
                Func::new(arity, move |x| parts.iter().map(|p| p.eval(x)).sum()).with_grad(move |x| {
                    let mut g = vec![0.0; x.len()];
                    for p in &p2 {
                        for (gi, pi) in g.iter_mut().zip(p.grad(x)) {
                            *gi += pi;
                        }
                    }
                    g
                })
            }
        };
        let mut func = func.labeled(label);
        func.spec = Some(Arc::new(self.clone()));
        Ok(func)
    }

    /// Whether the function is constant (used to enumerate Killing symmetries).
    pub fn is_constant(&self) -> bool {
        match self {
            FnSpec::Zero | FnSpec::Constant { .. } => true,
            FnSpec::Sum { terms } => terms.iter().all(FnSpec::is_constant),
            _ => false,
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn check_index(i: usize, arity: usize) -> Result<()> {
    if i >= arity {
        return Err(Error::InvalidFunction(format!("index {i} out of range for {arity} arguments")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_grad_matches(spec: FnSpec, arity: usize, x: &[f64]) {
        let f = spec.build(arity).unwrap();
        let plain = Func::new(arity, {
            let f = f.clone();
            move |x| f.eval(x)
        });
        let (a, n) = (f.grad(x), plain.grad(x));
        for (ai, ni) in a.iter().zip(&n) {
            assert!((ai - ni).abs() < 1e-8 * ai.abs().max(1.0), "{spec:?}: {a:?} vs {n:?}");
        }
    }

    #[test]
    fn analytic_gradients_agree_with_differences() {
        let x = [0.7, -1.3, 2.1];
        assert_grad_matches(FnSpec::Power { n: 1.5, coef: 2.0, index: None }, 3, &x);
        assert_grad_matches(FnSpec::Power { n: 3.0, coef: 1.0, index: Some(1) }, 3, &x);
        assert_grad_matches(FnSpec::Exponential { k: 0.4, coef: 1.5, index: 2 }, 3, &x);
        assert_grad_matches(FnSpec::Cosine { k: 2.0, coef: 0.3, offset: 0.1, index: 0 }, 3, &x);
        assert_grad_matches(FnSpec::Calogero { coupling: 1.0 }, 3, &x);
        assert_grad_matches(
            FnSpec::Quadric {
                half_sq: 1.0,
                lin: vec![0.5, -0.2, 0.0],
                inner: Box::new(FnSpec::Power { n: 2.0, coef: 1.0, index: None }),
            },
            3,
            &x,
        );
    }

    #[test]
    fn calogero_value() {
        let f = FnSpec::Calogero { coupling: 1.0 }.build(3).unwrap();
        let v = f.eval(&[0.0, 1.0, 3.0]);
        assert!((v - (1.0 + 1.0 / 9.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = FnSpec::Sum {
            terms: vec![FnSpec::Constant { value: 0.5 }, FnSpec::Cosine { k: 1.0, coef: 0.2, offset: 0.0, index: 0 }],
        };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<FnSpec>(&j).unwrap(), s);
    }

    #[test]
    fn bad_index_is_rejected() {
        assert!(FnSpec::Exponential { k: 1.0, coef: 1.0, index: 3 }.build(2).is_err());
    }
}
