//! First integrals: closed-form values, catalog contents, and drift controls.

use std::f64::consts::FRAC_PI_2;

use approx::assert_abs_diff_eq;
use kepler_ermakov::invariants::{
    combined_invariant, energy_and_homothety, exponential_integrals, noether_time_integrals, polynomial_integrals,
    ke_integrand, quadrature_invariant,
};
use kepler_ermakov::prelude::*;
use kepler_ermakov::state::StepStats;

fn names(sys: &SystemModel) -> Vec<String> {
    catalog_invariants(sys).unwrap().into_iter().map(|i| i.name).collect()
}

fn run(sys: &SystemModel, s0: &PhaseState, t_end: f64) -> Trajectory {
    integrate(sys, s0, t_end, &StepController::default()).unwrap()
}

#[test]
fn ke3d_meridian_state() {
    let sys = recipe("ke3d_I").unwrap().with_param("mu", 1.0).with_function("f", FnSpec::Zero).build().unwrap();
    let s = PhaseState::new(0.0, vec![1.0, FRAC_PI_2, 0.0], vec![0.0, 1.0, 0.0]);
    let (e, h, hd) = energy_and_homothety(&sys, &s).unwrap();
    assert_abs_diff_eq!(e, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(h, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(hd, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(find_invariant(&sys, "J").unwrap().eval(&s), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(find_invariant(&sys, "J_local").unwrap().eval(&s), 1.0, epsilon = 1e-14);
}

#[test]
fn frw4_null_direction() {
    let sys = recipe("frw4").unwrap().with_param("mu", 0.0).with_function("V", FnSpec::Zero).build().unwrap();
    let s = PhaseState::new(0.0, vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]);
    assert_abs_diff_eq!(find_invariant(&sys, "J").unwrap().eval(&s), -1.0, epsilon = 1e-14);
    // The local form is written with the Euclidean sum, so it is −J.
    assert_abs_diff_eq!(find_invariant(&sys, "J_G4").unwrap().eval(&s), 1.0, epsilon = 1e-14);
}

#[test]
fn polynomial_branch_arithmetic() {
    assert_eq!(general_ermakov(2.0, 3.0, 5.0, 0.0), -1.0);
    let (i1, i2) = polynomial_integrals(2.0, 3.0, 5.0, 0.7);
    assert_abs_diff_eq!(i1, -2.2, epsilon = 1e-14);
    assert_abs_diff_eq!(i2, 0.48, epsilon = 1e-14);
    assert_abs_diff_eq!(4.0 * i2 * 2.0 - i1 * i1, -1.0, epsilon = 1e-13);
    assert_eq!(polynomial_integrals(0.0, 0.8, 0.0, 4.2), (0.0, 0.8));
}

#[test]
fn exponential_branch_arithmetic() {
    let (ip, im) = exponential_integrals(2.0, 3.0, 5.0, 1.0, 0.0).unwrap();
    assert_eq!((ip, im), (3.0, 13.0));
    assert_eq!(ip * im - 4.0, 35.0);
    assert_eq!(general_ermakov(2.0, 3.0, 5.0, 1.0), 35.0);
    assert_eq!(combined_invariant(2.0, 3.0, 5.0, 1.0), 35.0);
    assert_eq!(noether_time_integrals(2.0, 3.0, 5.0, 1.0, 0.0), (3.0, 13.0));
    assert_eq!(exponential_integrals(2.0, 3.0, 5.0, 0.0, 0.0), Err(Error::ZeroMu));
}

#[test]
fn calogero_without_oscillator_lists_its_integrals() {
    let sys = recipe("calogero_moser").unwrap().with_param("mu", 0.0).build().unwrap();
    let got = names(&sys);
    for want in ["E", "J", "I1'", "I2'", "Phi"] {
        assert!(got.iter().any(|n| n == want), "{want} missing from {got:?}");
    }
    let s = PhaseState::new(0.0, vec![0.3, -1.0, 1.4], vec![0.2, 0.1, -0.5]);
    assert_abs_diff_eq!(find_invariant(&sys, "I1'").unwrap().eval(&s), -0.2, epsilon = 1e-15);
}

#[test]
fn lorentz3_linear_potential_gives_xby() {
    let sys = recipe("lorentz3").unwrap().build().unwrap();
    let inv = find_invariant(&sys, "I_xby").unwrap();
    let s = PhaseState::new(0.0, vec![1.5, 0.2, 0.3], vec![0.1, 0.4, -0.3]);
    assert_abs_diff_eq!(inv.eval(&s), 2.25 * (0.4 + 2.0 * -0.3), epsilon = 1e-14);
}

#[test]
fn scalar_cosmology_integrals() {
    let sys = recipe("scalar_cosmo_u").unwrap().build().unwrap();
    let got = names(&sys);
    for want in ["E", "J", "I1", "I2", "I3"] {
        assert!(got.iter().any(|n| n == want), "{want} missing from {got:?}");
    }
    let s = PhaseState::new(0.0, vec![2.0, 0.1, 0.3], vec![0.0, 0.5, 0.25]);
    assert_abs_diff_eq!(find_invariant(&sys, "I1").unwrap().eval(&s), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(find_invariant(&sys, "I2").unwrap().eval(&s), 2.0, epsilon = 1e-15);
}

#[test]
fn constant_function_has_no_drift() {
    let states = (0..4).map(|k| PhaseState::new(k as f64, vec![k as f64], vec![1.0])).collect();
    let traj = Trajectory::new(states, StepStats::default()).unwrap();
    assert_eq!(drift(&traj, &InvariantSpec::new("one", |_| 1.0)), 0.0);
}

#[test]
fn lorentzian_sign_control() {
    let sys = recipe("frw4")
        .unwrap()
        .with_function("V", FnSpec::Power { n: 2.0, coef: 1.0, index: Some(0) })
        .build()
        .unwrap();
    let s0 = PhaseState::new(0.0, vec![1.2, 0.5, 0.1, -0.2], vec![0.1, 0.05, 0.02, 0.03]);
    let traj = run(&sys, &s0, 3.0);
    let good = drift(&traj, &find_invariant(&sys, "J_G4").unwrap());
    let bad = drift(&traj, &find_invariant(&sys, "J_G4_paper").unwrap());
    assert!(good <= 1e-8, "J_G4 drift {good:e}");
    assert!(bad > 1e-3, "+2V variant drift {bad:e}");
}

#[test]
fn constant_angular_potential_reduces_to_angular_momentum() {
    let c = 0.5;
    let sys = recipe("ke2d").unwrap().with_param("c", c).build().unwrap();
    let j = find_invariant(&sys, "J").unwrap();
    let s0 = PhaseState::new(0.0, vec![1.1, 0.7], vec![0.2, 0.4]);
    for s in run(&sys, &s0, 5.0).states() {
        let l = s.q[0] * s.q[0] * s.v[1];
        assert!((j.eval(s) - c - l * l).abs() <= 1e-9, "t = {}", s.t);
    }
}

#[test]
fn combined_and_local_forms_agree_on_cones() {
    for name in ["riemannian_ke", "ke3d_I", "hyperbolic3", "frw4", "lorentz3"] {
        let rec = recipe(name).unwrap();
        let sys = rec.build().unwrap();
        let (j, jl) = (find_invariant(&sys, "J").unwrap(), find_invariant(&sys, "J_local").unwrap());
        for s in sample_states(&sys, 3, 50, &rec.sample).unwrap() {
            let (a, b) = (j.eval(&s), jl.eval(&s));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn quadrature_reference_point_only_shifts_the_value() {
    let sys = recipe("weak_ke2d").unwrap().build().unwrap();
    let rec = recipe("weak_ke2d").unwrap();
    let (f, g) = (sys.functions.get("f").unwrap(), sys.functions.get("g").unwrap());
    let a = quadrature_invariant("Ja", ke_integrand(f, g), 1.0);
    let b = quadrature_invariant("Jb", ke_integrand(f, g), 2.0);
    let s0 = &sample_states(&sys, 1, 1, &rec.sample).unwrap()[0];
    let traj = run(&sys, s0, rec.t_end);
    let shift = a.eval(s0) - b.eval(s0);
    for s in traj.states() {
        assert!((a.eval(s) - b.eval(s) - shift).abs() <= 1e-9);
    }
    assert!((drift(&traj, &a) - drift(&traj, &b)).abs() <= 1e-9);
}

#[test]
fn time_dependent_integrals_use_trajectory_time() {
    let sys = recipe("ke3d_I").unwrap().build().unwrap();
    let ip = find_invariant(&sys, "I+").unwrap();
    assert!(ip.time_dependent);
    let s = PhaseState::new(0.0, vec![1.1, 1.2, 0.4], vec![0.1, 0.05, 0.2]);
    let later = PhaseState { t: 1.0, ..s.clone() };
    assert_ne!(ip.eval(&s), ip.eval(&later));
}
