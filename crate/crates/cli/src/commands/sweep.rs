//! `kelab sweep`: one row per point of a parameter grid.

use std::io::Write;
use std::thread;

use kepler_ermakov::symmetry::{find_fr_exponent, fr_noether_residual, fr_power};
use serde::Serialize;

use super::say;
use super::simulate::run_simulation;
use crate::config::{lookup, RunConfig, SweepKind, SweepSpec};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt_num, timestamp, write_json, Table, SCHEMA_VERSION};

/// Residual sample points for the recovered f(R), offset from `R = 2Λ`.
const FR_OFFSETS: [f64; 3] = [1.0, 3.0, 8.0];

/// Cartesian product of the axes, first axis slowest.
pub fn grid_points(spec: &SweepSpec) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in &spec.axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, Default)]
struct Row {
    ok: bool,
    status: String,
    cells: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepManifest {
    pub schema_version: String,
    pub command: String,
    pub kind: SweepKind,
    pub system: String,
    pub axes: Vec<String>,
    pub rows: usize,
    pub succeeded: usize,
    pub seed: u64,
    pub csv: String,
    pub timestamp: String,
}

fn drift_row(cfg: &RunConfig, spec: &SweepSpec, point: &[f64]) -> Row {
    let mut c = cfg.clone();
    for (axis, v) in spec.axes.iter().zip(point) {
        c.params.set(&axis.param, *v);
    }
    let run = c.resolve().and_then(|r| run_simulation(&c, &r));
    match run {
        Ok(sim) => {
            let cells = sim.invariants.iter().zip(&sim.drifts).map(|(i, d)| (format!("drift_{}", i.name), fmt_num(*d))).collect();
            match sim.error {
                None => Row { ok: true, status: "ok".into(), cells },
                Some(e) => Row { ok: false, status: format!("failed: {e}"), cells },
            }
        }
        Err(e) => Row { ok: false, status: format!("failed: {e}"), cells: Vec::new() },
    }
}

fn fr_row(spec: &SweepSpec, point: &[f64]) -> Row {
    let Some(k) = spec.axes.iter().position(|a| a.param == "mu") else {
        return Row { ok: false, status: "failed: the fr_exponent sweep needs a `mu` axis".into(), cells: Vec::new() };
    };
    let mu = point[k];
    match find_fr_exponent(mu) {
        Ok(n) => {
            let lambda = 1.5 * mu * mu;
            let f = fr_power(lambda, n);
            let res = FR_OFFSETS.iter().map(|d| fr_noether_residual(&f, mu, 2.0 * lambda + d).abs()).fold(0.0, f64::max);
            Row {
                ok: true,
                status: "ok".into(),
                cells: vec![("n".into(), fmt_num(n)), ("Lambda".into(), fmt_num(lambda)), ("residual".into(), fmt_num(res))],
            }
        }
        Err(e) => Row { ok: false, status: format!("failed: {e}"), cells: Vec::new() },
    }
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let spec = cfg.sweep.clone().ok_or_else(|| CliError::Config("a sweep needs a `sweep` section with axes".into()))?;
    let points = grid_points(&spec);
    if spec.axes.is_empty() || points.is_empty() {
        return Err(CliError::Config("empty parameter grid".into()));
    }
    let label = match spec.kind {
        SweepKind::Drift => {
            let info = lookup(&cfg.system)?;
            if let Some(a) = spec.axes.iter().find(|a| !info.params.contains(&a.param)) {
                return Err(CliError::Config(format!("`{}` has no parameter `{}`", info.name, a.param)));
            }
            info.name
        }
        SweepKind::FrExponent => "fr_exponent".to_string(),
    };
    let rows: Vec<Row> = thread::scope(|scope| {
        let handles: Vec<_> = points
            .iter()
            .map(|p| {
                let spec = &spec;
                scope.spawn(move || match spec.kind {
                    SweepKind::Drift => drift_row(cfg, spec, p),
                    SweepKind::FrExponent => fr_row(spec, p),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_default()).collect()
    });

    // Union of result columns in order of first appearance along the grid.
    let mut columns: Vec<String> = Vec::new();
    for row in &rows {
        for (name, _) in &row.cells {
            if !columns.contains(name) {
                columns.push(name.clone());
            }
        }
    }
    let mut header: Vec<String> = spec.axes.iter().map(|a| a.param.clone()).collect();
    header.push("status".into());
    header.extend(columns.iter().cloned());
    let mut table = Table::new(header);
    for (p, row) in points.iter().zip(&rows) {
        let mut cells: Vec<String> = p.iter().map(|x| fmt_num(*x)).collect();
        cells.push(row.status.replace(',', ";"));
        cells.extend(columns.iter().map(|c| row.cells.iter().find(|(n, _)| n == c).map(|(_, v)| v.clone()).unwrap_or_default()));
        table.push(cells);
    }

    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let csv_name = format!("sweep_{label}.csv");
    table.write(&dir.join(&csv_name))?;
    let succeeded = rows.iter().filter(|r| r.ok).count();
    let man = SweepManifest {
        schema_version: SCHEMA_VERSION.into(),
        command: "sweep".into(),
        kind: spec.kind.clone(),
        system: label.clone(),
        axes: spec.axes.iter().map(|a| a.param.clone()).collect(),
        rows: rows.len(),
        succeeded,
        seed: cfg.seed(),
        csv: csv_name.clone(),
        timestamp: timestamp(),
    };
    write_json(&dir.join(format!("sweep_{label}.manifest.json")), &man)?;
    say(out, table.render().trim_end());
    say(out, format!("{succeeded} of {} rows succeeded; wrote {}", rows.len(), dir.join(&csv_name).display()));
    if succeeded == 0 {
        return Err(CliError::Numeric("every sweep row failed".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Axis;

    #[test]
    fn grid_is_row_major() {
        let spec = SweepSpec {
            kind: SweepKind::Drift,
            axes: vec![
                Axis { param: "a".into(), values: vec![1.0, 2.0] },
                Axis { param: "b".into(), values: vec![3.0, 4.0, 5.0] },
            ],
        };
        let g = grid_points(&spec);
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![1.0, 4.0]);
        assert_eq!(g[3], vec![2.0, 3.0]);
    }
}
