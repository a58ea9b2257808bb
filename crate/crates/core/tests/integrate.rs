//! Integrator accuracy against closed-form motions.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use kepler_ermakov::integrate::{integrate_partial, rk4_step};
use kepler_ermakov::prelude::*;

fn oscillator() -> SystemModel {
    SystemModel::mechanical("oscillator", 1, |q| 0.5 * q[0] * q[0], |q| vec![q[0]])
}

#[test]
fn rk4_is_exact_on_free_motion() {
    let free = SystemModel::forced("free", 1, |_, _, _| vec![0.0]);
    let s = rk4_step(&free, &PhaseState::new(0.0, vec![0.0], vec![1.0]), 0.5).unwrap();
    assert_eq!((s.t, s.q[0], s.v[0]), (0.5, 0.5, 1.0));
}

#[test]
fn rk4_single_oscillator_step() {
    let s = rk4_step(&oscillator(), &PhaseState::new(0.0, vec![1.0], vec![0.0]), 0.1).unwrap();
    assert_abs_diff_eq!(s.q[0], 0.1f64.cos(), epsilon = 1e-8);
}

#[test]
fn rk4_refuses_singular_start() {
    let sys = SystemModel::ermakov_pinney(0.0, 1.0);
    let err = rk4_step(&sys, &PhaseState::new(0.0, vec![0.0], vec![1.0]), 0.1).unwrap_err();
    assert!(matches!(err, Error::SingularState { .. }), "{err}");
}

#[test]
fn rk4_is_fourth_order() {
    let sys = oscillator();
    let s0 = PhaseState::new(0.0, vec![1.0], vec![0.0]);
    let err = |n| {
        let end = rk4_fixed(&sys, &s0, 2.0 * PI, n).unwrap().last().clone();
        (end.q[0] - 1.0).abs().max(end.v[0].abs())
    };
    let ratio = err(64) / err(128);
    assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn adaptive_half_period() {
    let traj = integrate(&oscillator(), &PhaseState::new(0.0, vec![1.0], vec![0.0]), PI, &StepController::with_tol(1e-11)).unwrap();
    assert_abs_diff_eq!(traj.last().q[0], -1.0, epsilon = 1e-8);
    assert_eq!(traj.last().t, PI);
    assert!(traj.states().windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn ermakov_pinney_closed_form() {
    // u(t)² = u₀² + 2u₀u₀′t + (u₀′² + J/u₀²)t² solves ü = J/u³.
    let closed = |u0: f64, du0: f64, j: f64, t: f64| (u0 * u0 + 2.0 * u0 * du0 * t + (du0 * du0 + j / (u0 * u0)) * t * t).sqrt();
    let sys = SystemModel::ermakov_pinney(0.0, 1.0);
    let traj = integrate(&sys, &PhaseState::new(0.0, vec![1.0], vec![0.0]), 1.0, &StepController::default()).unwrap();
    assert_abs_diff_eq!(traj.last().q[0], 2f64.sqrt(), epsilon = 1e-8);

    let sys = SystemModel::ermakov_pinney(0.0, 0.6);
    let traj = integrate(&sys, &PhaseState::new(0.0, vec![1.3], vec![-0.4]), 3.0, &StepController::default()).unwrap();
    for s in traj.states() {
        assert_abs_diff_eq!(s.q[0], closed(1.3, -0.4, 0.6, s.t), epsilon = 1e-8);
    }
}

#[test]
fn free_polar_motion_keeps_angular_momentum() {
    let sys = recipe("ke2d").unwrap().with_param("mu", 0.0).with_param("c", 0.0).build().unwrap();
    let s0 = PhaseState::new(0.0, vec![1.0, 0.6], vec![0.3, 0.4]);
    let traj = integrate(&sys, &s0, 5.0, &StepController::default()).unwrap();
    let l = |s: &PhaseState| s.q[0] * s.q[0] * s.v[1];
    let l0 = l(&s0);
    for s in traj.states() {
        assert!((l(s) - l0).abs() <= 1e-9, "t = {}: {}", s.t, l(s) - l0);
    }
}

#[test]
fn result_does_not_depend_on_first_step() {
    let sys = recipe("ke3d_I").unwrap().build().unwrap();
    let s0 = PhaseState::new(0.0, vec![1.1, 1.4, 0.3], vec![0.1, 0.05, 0.2]);
    let tol = 1e-11;
    let end = |h: f64| {
        let ctl = StepController { h_init: h, ..StepController::with_tol(tol) };
        integrate(&sys, &s0, 3.0, &ctl).unwrap().last().clone()
    };
    let (a, b) = (end(1e-3), end(1e-1));
    assert_eq!(a.t, 3.0);
    for (x, y) in a.q.iter().chain(&a.v).zip(b.q.iter().chain(&b.v)) {
        assert!((x - y).abs() <= 10.0 * tol * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn collapse_keeps_the_regular_prefix() {
    // Free fall into the origin with zero Ermakov term reaches u = 0 at t = 1.
    let sys = SystemModel::ermakov_pinney(0.0, 0.0);
    let run = integrate_partial(&sys, &PhaseState::new(0.0, vec![1.0], vec![-1.0]), 2.0, &StepController::default()).unwrap();
    assert!(run.error.is_some());
    let last = run.states.last().unwrap();
    assert!(last.t < 1.0 && last.q[0] > 0.0);
    assert!(integrate(&sys, &PhaseState::new(0.0, vec![1.0], vec![-1.0]), 2.0, &StepController::default()).is_err());
}

#[test]
fn bad_controller_is_rejected() {
    let ctl = StepController { h_min: 1.0, ..StepController::default() };
    let err = integrate(&oscillator(), &PhaseState::new(0.0, vec![1.0], vec![0.0]), 1.0, &ctl).unwrap_err();
    assert!(matches!(err, Error::InvalidController(_)));
}
