//! Every cataloged invariant stays constant along sampled trajectories of its
//! demo configuration, and every negative control drifts.

use kepler_ermakov::prelude::*;

const SEED: u64 = 20;
const TOL: f64 = 1e-8;

fn drifts(name: &str) -> Vec<(String, bool, f64)> {
    let rec = recipe(name).unwrap();
    let sys = rec.build().unwrap();
    let invs = catalog_invariants(&sys).unwrap();
    let states = sample_states(&sys, SEED, 5, &rec.sample).unwrap();
    let mut out: Vec<(String, bool, f64)> = invs.iter().map(|i| (i.name.clone(), i.expected_conserved, 0.0)).collect();
    for s0 in &states {
        let traj = match integrate(&sys, s0, rec.t_end, &StepController::with_tol(1e-11)) {
            Ok(t) => t,
            Err(e) => {
                println!("{name} from {s0:?}: {e}");
                return vec![("integration".into(), true, f64::INFINITY)];
            }
        };
        for (k, inv) in invs.iter().enumerate() {
            out[k].2 = out[k].2.max(drift(&traj, inv));
        }
    }
    out
}

#[test]
fn catalog_invariants_are_conserved() {
    let mut bad = Vec::new();
    for name in SYSTEM_NAMES {
        for (inv, expected, d) in drifts(name) {
            println!("{name:18} {inv:10} expected={expected:5} drift={d:.3e}");
            if expected && !(d <= TOL) {
                bad.push(format!("{name}/{inv}: {d:e}"));
            }
            if !expected && !(d > 1e-3) {
                bad.push(format!("{name}/{inv} (control): {d:e}"));
            }
        }
    }
    assert!(bad.is_empty(), "{bad:#?}");
}
