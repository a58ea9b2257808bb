//! `kelab check`: numerical certificates with pass/fail verdicts.

use std::io::Write;
use std::str::FromStr;

use clap::ValueEnum;
use kepler_ermakov::brackets::{involution_matrix, PhaseFunction};
use kepler_ermakov::dynamics::{lagrangian_accel_oracle, to_canonical};
use kepler_ermakov::integrate::integrate;
use kepler_ermakov::invariants::{drift, involution_set};
use kepler_ermakov::numeric::max_abs;
use kepler_ermakov::state::PhaseState;
use kepler_ermakov::symmetry::{catalog_symmetries, noether_residual_scaled};
use kepler_ermakov::state::sample_states;
use kepler_ermakov::systems::{build_system, recipe, SystemModel, SYSTEM_NAMES};
use kepler_ermakov::transforms::{conjugacy_check, ChartTransform};
use kepler_ermakov::params::ParameterSet;
use kepler_ermakov::systems::UserFunctions;
use serde::Serialize;

use super::{say, select_invariants};
use crate::config::{config, Resolved, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt_num, timestamp, write_json, Table, SCHEMA_VERSION};

pub const DRIFT_TOL: f64 = 1e-8;
pub const CONTROL_FLOOR: f64 = 1e-3;
pub const INVOLUTION_TOL: f64 = 1e-5;
pub const NOETHER_TOL: f64 = 1e-8;
pub const CONJUGACY_TOL: f64 = 1e-6;
pub const CONJUGACY_HORIZON: f64 = 2.0;
pub const ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Invariants,
    Involution,
    Symmetry,
    Conjugacy,
    Oracle,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Invariants => "invariants",
            CheckKind::Involution => "involution",
            CheckKind::Symmetry => "symmetry",
            CheckKind::Conjugacy => "conjugacy",
            CheckKind::Oracle => "oracle",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            CheckKind::Invariants => 5,
            CheckKind::Involution => 20,
            CheckKind::Symmetry => 50,
            CheckKind::Conjugacy => 3,
            CheckKind::Oracle => 100,
        }
    }
}

impl FromStr for CheckKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        <CheckKind as ValueEnum>::from_str(s, true).map_err(|_| CliError::Config(format!("unknown check `{s}`")))
    }
}

/// How a measured value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    /// Negative controls must move by more than the threshold.
    #[serde(rename = ">")]
    Exceeds,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub system: String,
    pub name: String,
    pub value: String,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckEntry {
    pub fn new(system: &str, name: impl Into<String>, value: f64, relation: Relation, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::Exceeds => value > tolerance,
        };
        CheckEntry { system: system.into(), name: name.into(), value: fmt_num(value), relation, tolerance, pass, error: None }
    }

    pub fn failed(system: &str, name: impl Into<String>, relation: Relation, tolerance: f64, err: impl ToString) -> Self {
        let mut e = CheckEntry::new(system, name, f64::INFINITY, relation, tolerance);
        e.pass = false;
        e.error = Some(err.to_string());
        e
    }

    pub fn measured(&self) -> f64 {
        self.value.parse().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub schema_version: String,
    pub check: CheckKind,
    pub system: String,
    pub seed: u64,
    pub samples: usize,
    pub entries: Vec<CheckEntry>,
    pub passed: usize,
    pub failed: usize,
    pub timestamp: String,
}

/// Drift of every selected invariant, maximized over sampled initial states.
pub fn check_invariants(cfg: &RunConfig, r: &Resolved, samples: usize) -> CliResult<Vec<CheckEntry>> {
    let invs = select_invariants(&r.model, cfg.invariants.as_deref())?;
    let states = r.samples(samples)?;
    let mut worst = vec![0.0f64; invs.len()];
    let mut errors: Vec<Option<String>> = vec![None; invs.len()];
    for s in &states {
        match integrate(&r.model, s, s.t + r.t_end, &r.ctl) {
            Ok(traj) => {
                for (k, inv) in invs.iter().enumerate() {
                    worst[k] = worst[k].max(drift(&traj, inv));
                }
            }
            Err(e) => errors.iter_mut().for_each(|x| *x = Some(e.to_string())),
        }
    }
    Ok(invs
        .iter()
        .enumerate()
        .map(|(k, inv)| {
            let (rel, tol) =
                if inv.expected_conserved { (Relation::AtMost, DRIFT_TOL) } else { (Relation::Exceeds, CONTROL_FLOOR) };
            match &errors[k] {
                Some(e) => CheckEntry::failed(&r.info.name, &inv.name, rel, tol, e),
                None => CheckEntry::new(&r.info.name, &inv.name, worst[k], rel, tol),
            }
        })
        .collect())
}

/// Pairwise canonical brackets. Returns the entries and the full matrix.
pub fn check_involution(cfg: &RunConfig, r: &Resolved, samples: usize) -> CliResult<(Vec<CheckEntry>, Table)> {
    let names = match &cfg.invariants {
        Some(n) => n.clone(),
        None => involution_set(&r.model).map_err(config)?,
    };
    let invs = select_invariants(&r.model, Some(&names))?;
    if let Some(td) = invs.iter().find(|i| i.time_dependent) {
        return Err(CliError::Config(format!("`{}` depends on time explicitly; brackets need autonomous functions", td.name)));
    }
    let funcs: Vec<PhaseFunction> = invs.iter().map(|i| PhaseFunction::from_invariant(&r.model, i)).collect();
    let states = r
        .samples(samples)?
        .iter()
        .map(|s| to_canonical(&r.model, s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let m = involution_matrix(&funcs, &states).map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let mut entries = Vec::new();
    for i in 0..names.len() {
        let mut row = vec![names[i].clone()];
        row.extend((0..names.len()).map(|j| fmt_num(m[(i, j)])));
        table.push(row);
        for j in i + 1..names.len() {
            let label = format!("{{{}, {}}}", names[i], names[j]);
            entries.push(CheckEntry::new(&r.info.name, label, m[(i, j)], Relation::AtMost, INVOLUTION_TOL));
        }
    }
    Ok((entries, table))
}

/// Scale-aware Noether residual of every cataloged point symmetry.
pub fn check_symmetry(r: &Resolved, samples: usize) -> CliResult<Vec<CheckEntry>> {
    let syms = catalog_symmetries(&r.model).map_err(config)?;
    let l = r.model.lagrangian().map_err(config)?;
    let states = r.samples(samples)?;
    Ok(syms
        .iter()
        .map(|sym| {
            let mut worst = 0.0f64;
            for s in &states {
                match noether_residual_scaled(&|t, q: &[f64], v: &[f64]| l(t, q, v), sym, s.t, &s.q, &s.v) {
                    Ok(x) => worst = worst.max(x),
                    Err(e) => return CheckEntry::failed(&r.info.name, &sym.name, Relation::AtMost, NOETHER_TOL, e),
                }
            }
            CheckEntry::new(&r.info.name, &sym.name, worst, Relation::AtMost, NOETHER_TOL)
        })
        .collect())
}

/// The cone-variable image of a raw cosmology and the chart map into it.
pub fn conjugate_pair(r: &Resolved) -> CliResult<(SystemModel, ChartTransform)> {
    let p = &r.params;
    let need = |name: &str| p.get(name).ok_or_else(|| CliError::Config(format!("missing parameter `{name}`")));
    match r.info.name.as_str() {
        "scalar_cosmo_raw" => {
            let target = build_system("scalar_cosmo_u", p, &UserFunctions::new()).map_err(config)?;
            let map = ChartTransform::scalar_cosmo(need("k")?, need("c")?).map_err(config)?;
            Ok((target, map))
        }
        "fr_cosmo_raw" => {
            let lambda = need("Lambda")?;
            let params = ParameterSet::new().with("Lambda", lambda);
            let target = build_system("fr_cosmo_uvw", &params, &UserFunctions::new()).map_err(config)?;
            Ok((target, ChartTransform::fr(lambda)))
        }
        other => Err(CliError::Config(format!(
            "no conjugate chart is cataloged for `{other}` (use scalar_cosmo_raw or fr_cosmo_raw)"
        ))),
    }
}

/// Flow conjugacy between a raw cosmology and its cone form.
pub fn check_conjugacy(cfg: &RunConfig, r: &Resolved, samples: usize) -> CliResult<Vec<CheckEntry>> {
    let (target, map) = conjugate_pair(r)?;
    let horizon = cfg.integrator.t_end.unwrap_or(CONJUGACY_HORIZON);
    let tol = r.ctl.abs_tol;
    Ok(r
        .samples(samples)?
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let label = format!("state {k} -> {}", target.name);
            match conjugacy_check(&r.model, &target, &map, s, s.t + horizon, tol) {
                Ok(dev) => CheckEntry::new(&r.info.name, label, dev, Relation::AtMost, CONJUGACY_TOL),
                Err(e) => CheckEntry::failed(&r.info.name, label, Relation::AtMost, CONJUGACY_TOL, e),
            }
        })
        .collect())
}

/// `max ‖a − b‖∞ / max(1, ‖a‖∞)` between analytic and differenced accelerations.
pub fn oracle_error(model: &SystemModel, states: &[PhaseState]) -> kepler_ermakov::Result<f64> {
    let l = model.lagrangian()?;
    let mut worst = 0.0f64;
    for s in states {
        let a = model.eval_rhs(s)?;
        let b = lagrangian_accel_oracle(&|t, q: &[f64], v: &[f64]| l(t, q, v), s)?;
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        worst = worst.max(max_abs(&diff) / max_abs(&a).max(1.0));
    }
    Ok(worst)
}

fn oracle_entry(model: &SystemModel, states: &[PhaseState]) -> CheckEntry {
    match oracle_error(model, states) {
        Ok(x) => CheckEntry::new(&model.name, "analytic vs Lagrangian", x, Relation::AtMost, ORACLE_TOL),
        Err(e) => CheckEntry::failed(&model.name, "analytic vs Lagrangian", Relation::AtMost, ORACLE_TOL, e),
    }
}

/// Oracle agreement on every Hamiltonian catalog recipe.
pub fn check_oracle_all(seed: u64, samples: usize) -> CliResult<Vec<CheckEntry>> {
    let mut out = Vec::new();
    for name in SYSTEM_NAMES {
        let rec = recipe(name).map_err(config)?;
        let model = rec.build().map_err(config)?;
        if !model.is_hamiltonian() {
            continue;
        }
        let states = sample_states(&model, seed, samples, &rec.sample).map_err(config)?;
        out.push(oracle_entry(&model, &states));
    }
    Ok(out)
}

pub fn run(kind: CheckKind, cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let samples = cfg.samples.unwrap_or(kind.default_samples());
    if samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    let dir = cfg.out_dir();
    let all = cfg.system == "all";
    if all && kind != CheckKind::Oracle {
        return Err(CliError::Config("`all` is only supported by the oracle check".into()));
    }
    let resolved = if all { None } else { Some(cfg.resolve()?) };
    let mut matrix = None;
    let entries = match (kind, &resolved) {
        (CheckKind::Oracle, None) => check_oracle_all(cfg.seed(), samples)?,
        (_, None) => unreachable!("only the oracle check runs without a resolved system"),
        (CheckKind::Invariants, Some(r)) => check_invariants(cfg, r, samples)?,
        (CheckKind::Involution, Some(r)) => {
            let (e, m) = check_involution(cfg, r, samples)?;
            matrix = Some(m);
            e
        }
        (CheckKind::Symmetry, Some(r)) => check_symmetry(r, samples)?,
        (CheckKind::Conjugacy, Some(r)) => check_conjugacy(cfg, r, samples)?,
        (CheckKind::Oracle, Some(r)) => {
            if !r.model.is_hamiltonian() {
                return Err(CliError::Config(format!("`{}` has no Lagrangian to difference", r.info.name)));
            }
            vec![oracle_entry(&r.model, &r.samples(samples)?)]
        }
    };
    let system = resolved.as_ref().map_or("all".to_string(), |r| r.info.name.clone());
    let failed = entries.iter().filter(|e| !e.pass).count();
    let report = CheckReport {
        schema_version: SCHEMA_VERSION.into(),
        check: kind,
        system: system.clone(),
        seed: cfg.seed(),
        samples,
        passed: entries.len() - failed,
        failed,
        entries,
        timestamp: timestamp(),
    };
    ensure_dir(&dir)?;
    let path = dir.join(format!("check_{}_{system}.json", kind.name()));
    write_json(&path, &report)?;
    if let Some(m) = matrix {
        m.write(&dir.join(format!("involution_{system}.csv")))?;
    }
    for e in &report.entries {
        let rel = match e.relation {
            Relation::AtMost => "<=",
            Relation::Exceeds => ">",
        };
        let verdict = if e.pass { "PASS" } else { "FAIL" };
        let extra = e.error.as_deref().map(|x| format!(" ({x})")).unwrap_or_default();
        say(out, format!("{verdict} {:<18} {:<28} {} {rel} {:e}{extra}", e.system, e.name, e.value, e.tolerance));
    }
    say(out, format!("{} passed, {} failed; report {}", report.passed, report.failed, path.display()));
    if failed > 0 {
        return Err(CliError::CheckFailed { failed, total: report.entries.len() });
    }
    Ok(())
}
