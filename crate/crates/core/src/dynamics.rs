//! Lagrangian oracle for accelerations, the Legendre transform, and
//! Hamiltonian-constraint solving.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, fd, roots};
use crate::state::{validate_state, PhaseState};
use crate::systems::SystemModel;

/// First-partial step base, `h₂ = 1e-5 · max(1, |x|)`.
pub const FIRST_STEP: f64 = 1e-5;
/// Step base for second partials.
pub const SECOND_STEP: f64 = 1e-4;
/// Mass matrices with `|det| ≤ MASS_DET_TOL` are degenerate.
pub const MASS_DET_TOL: f64 = 1e-10;

/// Time, coordinates and conjugate momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CanonicalState {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Self {
        CanonicalState { t, q, p }
    }

    /// `(q, p)` flattened, the layout bracket stencils perturb.
    pub fn flat(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub fn from_flat(t: f64, z: &[f64]) -> Self {
        let n = z.len() / 2;
        CanonicalState { t, q: z[..n].to_vec(), p: z[n..].to_vec() }
    }
}

/// Variables of `L(t, q, v)` packed as `[t, q..., v...]`.
struct Packed<'a, L> {
    l: &'a L,
    n: usize,
}

impl<L: Fn(f64, &[f64], &[f64]) -> f64> Packed<'_, L> {
    fn eval(&self, z: &[f64]) -> f64 {
        (self.l)(z[0], &z[1..=self.n], &z[self.n + 1..])
    }

    /// Mixed second partial by nested central differences at steps `h` and
    /// `h/2`, Richardson-extrapolated.
    fn second(&self, z: &[f64], i: usize, j: usize) -> f64 {
        let d1 = self.nested(z, i, j, 1.0);
        let d2 = self.nested(z, i, j, 0.5);
        (4.0 * d2 - d1) / 3.0
    }

    fn nested(&self, z: &[f64], i: usize, j: usize, scale: f64) -> f64 {
        let hi = scale * fd::scaled_step(SECOND_STEP, z[i]);
        let hj = scale * fd::scaled_step(SECOND_STEP, z[j]);
        let mut y = z.to_vec();
        let mut at = |si: f64, sj: f64| {
            y.copy_from_slice(z);
            y[i] += si * hi;
            y[j] += sj * hj;
            self.eval(&y)
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * hi * hj)
    }
}

/// Accelerations from the Euler–Lagrange equations of `l`, solving
/// `M q̈ = ∂L/∂q − (∂²L/∂v∂q) v − ∂²L/∂v∂t` with every partial differenced
/// and Richardson-extrapolated.
pub fn lagrangian_accel_oracle<L>(l: &L, s: &PhaseState) -> Result<Vec<f64>>
where
    L: Fn(f64, &[f64], &[f64]) -> f64,
{
    let n = s.q.len();
    let pk = Packed { l, n };
    let mut z = Vec::with_capacity(2 * n + 1);
    z.push(s.t);
    z.extend_from_slice(&s.q);
    z.extend_from_slice(&s.v);
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let vi = n + 1 + i;
        for j in i..n {
            let mij = pk.second(&z, vi, n + 1 + j);
            m[(i, j)] = mij;
            m[(j, i)] = mij;
        }
        let mut r = fd::partial(|y| pk.eval(y), &z, 1 + i, FIRST_STEP);
        for j in 0..n {
            r -= pk.second(&z, vi, 1 + j) * s.v[j];
        }
        r -= pk.second(&z, vi, 0);
        rhs[i] = r;
    }
    numeric::solve(&m, &rhs, MASS_DET_TOL)
}

/// `E = v·∂L/∂v − L`. For `L = ½ G v v − V` this is `½ G v v + V`, which is
/// what is evaluated.
pub fn energy(system: &SystemModel, s: &PhaseState) -> Result<f64> {
    Ok(system.kinetic_energy(&s.q, &s.v)? + system.potential_energy(&s.q)?)
}

/// `v·∂L/∂v − L` with the momentum differenced from the written Lagrangian.
pub fn energy_from_lagrangian(system: &SystemModel, s: &PhaseState) -> Result<f64> {
    let l = system.lagrangian()?;
    let p: Vec<f64> = (0..s.v.len())
        .map(|i| fd::partial(|v| l(s.t, &s.q, v), &s.v, i, FIRST_STEP))
        .collect();
    Ok(p.iter().zip(&s.v).map(|(a, b)| a * b).sum::<f64>() - l(s.t, &s.q, &s.v))
}

fn mass_matrix(system: &SystemModel, q: &[f64]) -> Result<DMatrix<f64>> {
    if !system.is_hamiltonian() {
        return Err(Error::NotHamiltonian(system.name.clone()));
    }
    Ok(system.kinetic.eval(q))
}

/// `p = G(q) v`.
pub fn to_canonical(system: &SystemModel, s: &PhaseState) -> Result<CanonicalState> {
    let g = mass_matrix(system, &s.q)?;
    let det = g.determinant();
    if !(det.abs() > MASS_DET_TOL) {
        return Err(Error::DegenerateMassMatrix { det: det.abs() });
    }
    let p = &g * nalgebra::DVector::from_column_slice(&s.v);
    Ok(CanonicalState { t: s.t, q: s.q.clone(), p: p.iter().copied().collect() })
}

/// `v = G(q)⁻¹ p`.
pub fn from_canonical(system: &SystemModel, c: &CanonicalState) -> Result<PhaseState> {
    let g = mass_matrix(system, &c.q)?;
    let v = numeric::solve(&g, &c.p, MASS_DET_TOL)?;
    Ok(PhaseState { t: c.t, q: c.q.clone(), v })
}

/// Velocity search interval for constraint solving.
pub const CONSTRAINT_RANGE: f64 = 10.0;

/// Set velocity `j` so that the energy equals `target`.
///
/// `E` is quadratic in `v_j`, so there are at most two roots; `sign_hint`
/// selects the branch to the right (`≥ 0`) or left (`< 0`) of the vertex.
pub fn solve_constraint(system: &SystemModel, s: &PhaseState, j: usize, target: f64, sign_hint: f64) -> Result<PhaseState> {
    let s = validate_state(system, s)?;
    if j >= s.v.len() {
        return Err(Error::DimensionMismatch { expected: s.v.len(), got: j + 1 });
    }
    let g = |x: f64| -> f64 {
        let mut t = s.clone();
        t.v[j] = x;
        energy(system, &t).map(|e| e - target).unwrap_or(f64::NAN)
    };
    let cur = s.v[j];
    if g(cur).abs() <= 1e-13 * target.abs().max(1.0) {
        return Ok(s);
    }
    // Exact quadratic through three samples.
    let (gm, g0, gp) = (g(-1.0), g(0.0), g(1.0));
    let a = 0.5 * (gp + gm) - g0;
    let b = 0.5 * (gp - gm);
    let vertex = if a.abs() > 1e-300 { (-b / (2.0 * a)).clamp(-CONSTRAINT_RANGE, CONSTRAINT_RANGE) } else { 0.0 };
    let (lo, hi) = if a.abs() <= 1e-300 {
        (-CONSTRAINT_RANGE, CONSTRAINT_RANGE)
    } else if sign_hint >= 0.0 {
        (vertex, CONSTRAINT_RANGE)
    } else {
        (-CONSTRAINT_RANGE, vertex)
    };
    let (flo, fhi) = (g(lo), g(hi));
    let root = if flo == 0.0 {
        lo
    } else if fhi == 0.0 {
        hi
    } else if flo.signum() != fhi.signum() {
        roots::brent(g, lo, hi, 1e-15, 200)?
    } else {
        return Err(Error::NoRoot(format!(
            "energy of `{}` does not reach {target} for velocity {j} in [{lo}, {hi}]",
            system.name
        )));
    };
    let mut out = s;
    out.v[j] = root;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_and_oscillator() {
        let free = |_: f64, _: &[f64], v: &[f64]| 0.5 * (v[0] * v[0] + v[1] * v[1]);
        let a = lagrangian_accel_oracle(&free, &PhaseState::new(0.3, vec![1.0, -2.0], vec![0.4, 0.1])).unwrap();
        assert!(a.iter().all(|x| x.abs() < 1e-8));
        let osc = |_: f64, q: &[f64], v: &[f64]| 0.5 * v[0] * v[0] - 0.5 * q[0] * q[0];
        let a = lagrangian_accel_oracle(&osc, &PhaseState::new(0.0, vec![1.0], vec![0.0])).unwrap();
        assert!((a[0] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn explicit_time_dependence_enters_through_mixed_partial() {
        // L = ½ e^{t} v² gives q̈ = −v.
        let l = |t: f64, _: &[f64], v: &[f64]| 0.5 * t.exp() * v[0] * v[0];
        let a = lagrangian_accel_oracle(&l, &PhaseState::new(0.2, vec![0.0], vec![0.7])).unwrap();
        assert!((a[0] + 0.7).abs() < 1e-7, "{a:?}");
    }

    #[test]
    fn degenerate_mass_matrix_is_reported() {
        let l = |_: f64, q: &[f64], v: &[f64]| v[0] * q[1];
        let err = lagrangian_accel_oracle(&l, &PhaseState::new(0.0, vec![1.0, 1.0], vec![1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateMassMatrix { .. }));
    }
}
