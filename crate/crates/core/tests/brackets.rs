//! Involution of cataloged integrals under the numerical Poisson bracket.

use kepler_ermakov::brackets::{involution_matrix, nested_bracket, poisson, PhaseFunction};
use kepler_ermakov::invariants::involution_set;
use kepler_ermakov::prelude::*;

fn setup(name: &str, count: usize) -> (SystemModel, Vec<CanonicalState>, Vec<PhaseState>) {
    let rec = recipe(name).unwrap();
    let sys = rec.build().unwrap();
    let states = sample_states(&sys, 11, count, &rec.sample).unwrap();
    let canon = states.iter().map(|s| to_canonical(&sys, s).unwrap()).collect();
    (sys, canon, states)
}

fn functions(sys: &SystemModel, names: &[&str]) -> Vec<PhaseFunction> {
    names.iter().map(|n| PhaseFunction::from_invariant(sys, &find_invariant(sys, n).unwrap())).collect()
}

fn max_off_diagonal(m: &nalgebra::DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)]);
            }
        }
    }
    worst
}

#[test]
fn f_r_integrals_are_in_involution() {
    let (sys, canon, _) = setup("fr_cosmo_uvw", 20);
    let m = involution_matrix(&functions(&sys, &["E", "I_w", "J_f"]), &canon).unwrap();
    assert!(max_off_diagonal(&m) <= 1e-6, "{m}");
}

#[test]
fn scalar_cosmology_has_an_involutive_triple() {
    let (sys, canon, _) = setup("scalar_cosmo_u", 20);
    let set = involution_set(&sys).unwrap();
    assert_eq!(set.len(), 3);
    let names: Vec<&str> = set.iter().map(String::as_str).collect();
    let m = involution_matrix(&functions(&sys, &names), &canon).unwrap();
    assert!(max_off_diagonal(&m) <= 1e-6, "{m}");
}

#[test]
fn calogero_nested_integral_is_in_involution_and_conserved() {
    let rec = recipe("calogero_moser").unwrap().with_param("mu", 0.0);
    let sys = rec.build().unwrap();
    let states = sample_states(&sys, 4, 5, &rec.sample).unwrap();
    let canon: Vec<_> = states.iter().map(|s| to_canonical(&sys, s).unwrap()).collect();
    let m = involution_matrix(&functions(&sys, &["E", "I1'", "Phi"]), &canon).unwrap();
    assert!(max_off_diagonal(&m) <= 1e-5, "{m}");

    let phi = find_invariant(&sys, "Phi").unwrap();
    let traj = integrate(&sys, &states[0], 2.0, &StepController::default()).unwrap();
    let d = drift(&traj, &phi);
    assert!(d <= 1e-6, "Phi drift {d:e}");
}

#[test]
fn nested_self_bracket_vanishes() {
    let f = PhaseFunction::new("f", |c| c.q[0] * c.p[1] + c.q[1].sin() * c.p[0] * c.p[0]);
    let ff = nested_bracket(&f, &f);
    let at = CanonicalState::new(0.0, vec![0.3, -0.8], vec![1.1, 0.4]);
    assert_eq!(poisson(&f, &ff, &at).unwrap(), 0.0);
}

#[test]
fn singleton_pair_matrix() {
    let funcs = [PhaseFunction::coordinate(0), PhaseFunction::momentum(0)];
    let m = involution_matrix(&funcs, &[CanonicalState::new(0.0, vec![0.5], vec![-0.2])]).unwrap();
    assert!((m[(0, 1)] - 1.0).abs() <= 1e-10 && m[(0, 0)] == 0.0);
}

#[test]
fn conserved_integrals_commute_with_the_energy() {
    for name in ["ke3d_I", "hyperbolic3", "damianou", "lorentz3", "fr_cosmo_raw", "scalar_cosmo_raw"] {
        let (sys, canon, _) = setup(name, 5);
        let invs = catalog_invariants(&sys).unwrap();
        let e = PhaseFunction::from_invariant(&sys, &invs[0]);
        for inv in invs.iter().skip(1).filter(|i| i.expected_conserved && !i.time_dependent) {
            let q = PhaseFunction::from_invariant(&sys, inv);
            for c in &canon {
                let b = poisson(&e, &q, c).unwrap();
                assert!(b.abs() <= 1e-6, "{name}: {{E, {}}} = {b:e}", inv.name);
            }
        }
    }
}
