//! Fixed-step RK4 and adaptive Dormand–Prince 5(4) for `q̈ = a(t, q, q̇)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{validate_state, PhaseState, StepStats, Trajectory};
use crate::systems::SystemModel;

/// Adaptive step-size settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepController {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub safety: f64,
    pub max_steps: usize,
}

impl Default for StepController {
    fn default() -> Self {
        StepController::with_tol(1e-11)
    }
}

impl StepController {
    /// Same absolute and relative tolerance, standard step bounds.
    pub fn with_tol(tol: f64) -> Self {
        StepController {
            abs_tol: tol,
            rel_tol: tol,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 0.5,
            safety: 0.9,
            max_steps: 2_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidController(msg.to_string()));
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(0.0 < self.h_min && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad("need 0 < h_min <= h_init <= h_max");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety factor must lie in (0, 1]");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

fn deriv(system: &SystemModel, t: f64, y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len() / 2;
    let s = PhaseState { t, q: y[..n].to_vec(), v: y[n..].to_vec() };
    let a = system.eval_rhs(&s)?;
    let mut out = Vec::with_capacity(2 * n);
    out.extend_from_slice(&y[n..]);
    out.extend(a);
    Ok(out)
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += h * c * ki;
        }
    }
    out
}

fn pack(s: &PhaseState) -> Vec<f64> {
    s.q.iter().chain(&s.v).copied().collect()
}

fn unpack(t: f64, y: &[f64]) -> PhaseState {
    let n = y.len() / 2;
    PhaseState { t, q: y[..n].to_vec(), v: y[n..].to_vec() }
}

/// One classical RK4 step.
pub fn rk4_step(system: &SystemModel, s: &PhaseState, h: f64) -> Result<PhaseState> {
    if !(h > 0.0) {
        return Err(Error::InvalidController(format!("step {h} must be positive")));
    }
    let s = validate_state(system, s)?;
    let y = pack(&s);
    let t = s.t;
    let k1 = deriv(system, t, &y)?;
    let k2 = deriv(system, t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]))?;
    let k3 = deriv(system, t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]))?;
    let k4 = deriv(system, t + h, &axpy(&y, h, &[(1.0, &k3)]))?;
    let y1: Vec<f64> = (0..y.len()).map(|i| y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
    Ok(unpack(t + h, &y1))
}

/// `n` fixed RK4 steps of size `(t_end − t₀)/n`.
pub fn rk4_fixed(system: &SystemModel, s0: &PhaseState, t_end: f64, n: usize) -> Result<Trajectory> {
    let h = (t_end - s0.t) / n as f64;
    let mut states = vec![validate_state(system, s0)?];
    for i in 0..n {
        let mut next = rk4_step(system, &states[i], h)?;
        if i + 1 == n {
            next.t = t_end;
        }
        states.push(next);
    }
    Trajectory::new(states, StepStats { accepted: n, rejected: 0, h_min: h, h_max: h })
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Adaptive integration from `s0.t` to exactly `t_end`, recording every
/// accepted step.
pub fn integrate(system: &SystemModel, s0: &PhaseState, t_end: f64, ctl: &StepController) -> Result<Trajectory> {
    let run = integrate_partial(system, s0, t_end, ctl)?;
    match run.error {
        Some(e) => Err(e),
        None => Trajectory::new(run.states, run.stats),
    }
}

/// Outcome of an integration that may have stopped early.
#[derive(Debug)]
pub struct PartialRun {
    /// Every accepted state, starting with the initial one.
    pub states: Vec<PhaseState>,
    pub stats: StepStats,
    /// Why the run stopped before `t_end`, if it did.
    pub error: Option<Error>,
}

/// Like [`integrate`], but a failure mid-run still returns the accepted
/// prefix. Invalid settings or an invalid initial state are plain errors.
pub fn integrate_partial(system: &SystemModel, s0: &PhaseState, t_end: f64, ctl: &StepController) -> Result<PartialRun> {
    ctl.validate()?;
    let s0 = validate_state(system, s0)?;
    if !(t_end > s0.t) {
        return Err(Error::InvalidController(format!("t_end = {t_end} must exceed t0 = {}", s0.t)));
    }
    let mut states = vec![s0];
    let mut stats = StepStats { accepted: 0, rejected: 0, h_min: f64::INFINITY, h_max: 0.0 };
    let error = dopri(system, t_end, ctl, &mut states, &mut stats).err();
    if stats.accepted == 0 {
        stats.h_min = 0.0;
    }
    Ok(PartialRun { states, stats, error })
}

fn dopri(
    system: &SystemModel,
    t_end: f64,
    ctl: &StepController,
    states: &mut Vec<PhaseState>,
    stats: &mut StepStats,
) -> Result<()> {
    let s0 = &states[0];
    let mut t = s0.t;
    let mut y = pack(s0);
    let mut h = ctl.h_init.min(t_end - t);
    let mut k1 = deriv(system, t, &y)?;
    let mut err_prev = 1e-4_f64;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Error::MaxStepsExceeded(ctl.max_steps));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = deriv(system, t + C[1] * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = deriv(system, t + C[2] * h, &axpy(&y, h, &[(A3[0], &k1), (A3[1], &k2)]))?;
        let k4 = deriv(system, t + C[3] * h, &axpy(&y, h, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]))?;
        let k5 = deriv(
            system,
            t + C[4] * h,
            &axpy(&y, h, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
        )?;
        let k6 = deriv(
            system,
            t + C[5] * h,
            &axpy(&y, h, &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)]),
        )?;
        let y_new = axpy(&y, h, &[(B[0], &k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)]);
        let t_new = if last { t_end } else { t + h };
        let k7 = deriv(system, t_new, &y_new)?;
        let ks: [&[f64]; 7] = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e: f64 = (0..7).map(|s| E[s] * ks[s][i]).sum::<f64>() * h;
            let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            stats.h_min = stats.h_min.min(h);
            stats.h_max = stats.h_max.max(h);
            states.push(unpack(t, &y));
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (ctl.safety * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            err_prev = err.max(1e-4);
            h = (h * fac).clamp(ctl.h_min, ctl.h_max);
        } else {
            stats.rejected += 1;
            let fac = (ctl.safety * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h *= fac;
            if h < ctl.h_min {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controller_validation() {
        assert!(StepController::default().validate().is_ok());
        let mut c = StepController::default();
        c.h_min = 1.0;
        assert!(matches!(c.validate(), Err(Error::InvalidController(_))));
        c = StepController::default();
        c.abs_tol = 0.0;
        assert!(c.validate().is_err());
    }
}
