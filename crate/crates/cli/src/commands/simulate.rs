//! `kelab simulate`: one trajectory, a CSV and a manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use kepler_ermakov::dynamics::{energy, solve_constraint};
use kepler_ermakov::funcs::FnSpec;
use kepler_ermakov::integrate::{integrate_partial, StepController};
use kepler_ermakov::invariants::{drift, InvariantSpec};
use kepler_ermakov::params::ParameterSet;
use kepler_ermakov::state::{PhaseState, StepStats, Trajectory};
use serde::Serialize;

use super::{say, select_invariants};
use crate::config::{Resolved, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt_num, timestamp, write_json, Table, SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: String,
    pub command: String,
    pub system: String,
    pub params: ParameterSet,
    pub functions: BTreeMap<String, FnSpec>,
    pub seed: u64,
    pub t_end: f64,
    pub integrator: StepController,
    pub initial: PhaseState,
    pub constraint: Option<ConstraintRecord>,
    pub status: String,
    pub error: Option<String>,
    pub steps: StepStats,
    pub final_t: f64,
    pub rows: usize,
    pub csv: String,
    pub invariants: Vec<DriftRecord>,
    pub notes: Vec<String>,
    pub timestamp: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintRecord {
    pub coordinate: String,
    pub solved_velocity: String,
    pub energy_target: f64,
    pub energy_residual: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftRecord {
    pub name: String,
    pub time_dependent: bool,
    pub expected_conserved: bool,
    pub initial: String,
    pub drift: String,
}

/// Result of a single integration with its tracked invariants.
pub struct Simulation {
    pub initial: PhaseState,
    pub constraint: Option<ConstraintRecord>,
    pub states: Vec<PhaseState>,
    pub stats: StepStats,
    pub error: Option<kepler_ermakov::Error>,
    pub invariants: Vec<InvariantSpec>,
    pub drifts: Vec<f64>,
}

/// Prepare the initial state (solving the constraint if asked) and integrate.
pub fn run_simulation(cfg: &RunConfig, r: &Resolved) -> CliResult<Simulation> {
    let invariants = select_invariants(&r.model, cfg.invariants.as_deref())?;
    let mut s0 = r.initial_state(cfg)?;
    let mut constraint = None;
    if let Some(c) = &cfg.constraint {
        let j = r.coordinate_index(&c.solve)?;
        s0 = solve_constraint(&r.model, &s0, j, c.energy, c.sign)
            .map_err(|e| CliError::Numeric(format!("constraint solve for {}': {e}", c.solve)))?;
        let e = energy(&r.model, &s0).map_err(|e| CliError::Numeric(e.to_string()))?;
        constraint = Some(ConstraintRecord {
            coordinate: c.solve.clone(),
            solved_velocity: fmt_num(s0.v[j]),
            energy_target: c.energy,
            energy_residual: fmt_num(e - c.energy),
        });
    }
    let run = integrate_partial(&r.model, &s0, s0.t + r.t_end, &r.ctl).map_err(|e| CliError::Config(e.to_string()))?;
    let traj = Trajectory::new(run.states.clone(), run.stats.clone()).map_err(|e| CliError::Numeric(e.to_string()))?;
    let drifts = invariants.iter().map(|i| drift(&traj, i)).collect();
    Ok(Simulation { initial: s0, constraint, states: run.states, stats: run.stats, error: run.error, invariants, drifts })
}

/// Notes on parameter regimes the catalog treats by convention.
pub fn regime_notes(r: &Resolved) -> Vec<String> {
    let mut notes = Vec::new();
    if r.info.name.starts_with("scalar_cosmo") {
        if let (Some(c), Some(k)) = (r.params.get("c"), r.params.get("k")) {
            let cbar = c / (6.0 * k).sqrt();
            if cbar > 1.0 {
                notes.push(format!("c/sqrt(6k) = {cbar} > 1: the map uses the absolute-value branch |1 - c/sqrt(6k)|"));
            }
        }
    }
    notes
}

pub fn trajectory_table(r: &Resolved, sim: &Simulation) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(r.info.coords.iter().cloned());
    header.extend(r.info.coords.iter().map(|c| format!("{c}_dot")));
    header.extend(sim.invariants.iter().map(|i| i.name.clone()));
    let mut table = Table::new(header);
    for s in &sim.states {
        let mut row = vec![fmt_num(s.t)];
        row.extend(s.q.iter().chain(&s.v).map(|x| fmt_num(*x)));
        row.extend(sim.invariants.iter().map(|i| fmt_num(i.eval(s))));
        table.push(row);
    }
    table
}

pub fn manifest(cfg: &RunConfig, r: &Resolved, sim: &Simulation, csv_name: &str) -> Manifest {
    let invariants = sim
        .invariants
        .iter()
        .zip(&sim.drifts)
        .map(|(i, d)| DriftRecord {
            name: i.name.clone(),
            time_dependent: i.time_dependent,
            expected_conserved: i.expected_conserved,
            initial: fmt_num(i.eval(&sim.initial)),
            drift: fmt_num(*d),
        })
        .collect();
    Manifest {
        schema_version: SCHEMA_VERSION.into(),
        command: "simulate".into(),
        system: r.info.name.clone(),
        params: r.params.clone(),
        functions: r.functions.clone(),
        seed: cfg.seed(),
        t_end: r.t_end,
        integrator: r.ctl,
        initial: sim.initial.clone(),
        constraint: sim.constraint.clone(),
        status: if sim.error.is_none() { "ok" } else { "failed" }.into(),
        error: sim.error.as_ref().map(|e| e.to_string()),
        steps: sim.stats.clone(),
        final_t: sim.states.last().map_or(f64::NAN, |s| s.t),
        rows: sim.states.len(),
        csv: csv_name.into(),
        invariants,
        notes: regime_notes(r),
        timestamp: timestamp(),
    }
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let r = cfg.resolve()?;
    let sim = run_simulation(cfg, &r)?;
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let csv_name = format!("{}.csv", r.info.name);
    trajectory_table(&r, &sim).write(&dir.join(&csv_name))?;
    let man = manifest(cfg, &r, &sim, &csv_name);
    let man_path = dir.join(format!("{}.manifest.json", r.info.name));
    write_json(&man_path, &man)?;
    report(out, &man, &dir.join(&csv_name), &man_path);
    match &sim.error {
        Some(e) => Err(CliError::Numeric(e.to_string())),
        None => Ok(()),
    }
}

fn report(out: &mut dyn Write, man: &Manifest, csv: &Path, manifest: &Path) {
    say(out, format!("{}: {} rows to t = {}, status {}", man.system, man.rows, man.final_t, man.status));
    if let Some(c) = &man.constraint {
        say(out, format!("  solved {}' = {} (energy residual {})", c.coordinate, c.solved_velocity, c.energy_residual));
    }
    for d in &man.invariants {
        let tag = if d.expected_conserved { "" } else { " (control)" };
        say(out, format!("  drift {:<10} {}{tag}", d.name, d.drift));
    }
    for n in &man.notes {
        say(out, format!("  note: {n}"));
    }
    say(out, format!("  wrote {} and {}", csv.display(), manifest.display()));
}
