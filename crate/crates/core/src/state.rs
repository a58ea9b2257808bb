use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::SystemModel;

/// Margin around singular surfaces (u = 0, sin φ = 0, x = 0, ...).
pub const DELTA_SING: f64 = 1e-6;

/// Time plus coordinates and velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhaseState {
    pub fn new(t: f64, q: Vec<f64>, v: Vec<f64>) -> Self {
        PhaseState { t, q, v }
    }

    pub fn at_rest(q: Vec<f64>) -> Self {
        let n = q.len();
        PhaseState { t: 0.0, q, v: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// Integrator bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub h_min: f64,
    pub h_max: f64,
}

/// Accepted states in strictly increasing time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<PhaseState>,
    stats: StepStats,
}

impl Trajectory {
    /// Fails on an empty list or when times do not strictly increase.
    pub fn new(states: Vec<PhaseState>, stats: StepStats) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParameter { name: "trajectory".into(), reason: "empty".into() });
        }
        if states.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidParameter { name: "trajectory".into(), reason: "times not increasing".into() });
        }
        Ok(Trajectory { states, stats })
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn stats(&self) -> &StepStats {
        &self.stats
    }

    pub fn first(&self) -> &PhaseState {
        &self.states[0]
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Return `s` unchanged if it has the right dimension, is finite, and lies
/// at least `DELTA_SING` away from the system's singular set.
pub fn validate_state(system: &SystemModel, s: &PhaseState) -> Result<PhaseState> {
    for len in [s.q.len(), s.v.len()] {
        if len != system.dim {
            return Err(Error::DimensionMismatch { expected: system.dim, got: len });
        }
    }
    if !s.is_finite() {
        return Err(Error::NonFinite(format!("state of `{}`", system.name)));
    }
    if let Some(reason) = system.singular_reason(&s.q) {
        return Err(Error::SingularState { system: system.name.clone(), reason });
    }
    Ok(s.clone())
}

/// Per-coordinate sampling ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub q: Vec<(f64, f64)>,
    pub v: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(q: Vec<(f64, f64)>, v: Vec<(f64, f64)>) -> Self {
        SampleBox { q, v }
    }

    /// Same velocity range for every component.
    pub fn uniform_v(q: Vec<(f64, f64)>, v: (f64, f64)) -> Self {
        let n = q.len();
        SampleBox { q, v: vec![v; n] }
    }
}

const MAX_TRIES_PER_STATE: usize = 1000;

/// Draw `count` valid states uniformly from `bx` at `t = 0`.
///
/// Each call seeds its own ChaCha8 generator from `seed`, so results depend
/// only on the arguments.
pub fn sample_states(system: &SystemModel, seed: u64, count: usize, bx: &SampleBox) -> Result<Vec<PhaseState>> {
    if bx.q.len() != system.dim || bx.v.len() != system.dim {
        return Err(Error::DimensionMismatch { expected: system.dim, got: bx.q.len().min(bx.v.len()) });
    }
    for (lo, hi) in bx.q.iter().chain(&bx.v) {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyBox(format!("range [{lo}, {hi}] is inverted or not finite")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| if lo == hi { lo } else { rng.random_range(lo..hi) };
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        if tries >= MAX_TRIES_PER_STATE * count.max(1) {
            return Err(Error::EmptyBox(format!("no valid state of `{}` found in the box", system.name)));
        }
        tries += 1;
        let q: Vec<f64> = bx.q.iter().map(|r| draw(&mut rng, *r)).collect();
        let v: Vec<f64> = bx.v.iter().map(|r| draw(&mut rng, *r)).collect();
        let s = PhaseState::new(0.0, q, v);
        if validate_state(system, &s).is_ok() {
            out.push(s);
        }
    }
    Ok(out)
}
