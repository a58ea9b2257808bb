pub mod check;
pub mod list;
pub mod simulate;
pub mod sweep;

use std::io::Write;

use kepler_ermakov::invariants::{catalog_invariants, InvariantSpec};
use kepler_ermakov::systems::SystemModel;

use crate::error::{CliError, CliResult};

/// Cataloged invariants, optionally restricted to `names` in the given order.
pub(crate) fn select_invariants(model: &SystemModel, names: Option<&[String]>) -> CliResult<Vec<InvariantSpec>> {
    let all = catalog_invariants(model).unwrap_or_default();
    match names {
        None => Ok(all),
        Some(names) => names
            .iter()
            .map(|n| {
                all.iter().find(|i| &i.name == n).cloned().ok_or_else(|| {
                    let known: Vec<_> = all.iter().map(|i| i.name.as_str()).collect();
                    CliError::Config(format!("`{}` has no invariant `{n}` (cataloged: {known:?})", model.name))
                })
            })
            .collect(),
    }
}

pub(crate) fn say(out: &mut dyn Write, line: impl AsRef<str>) {
    // Console output is informational; a closed pipe must not abort a run.
    let _ = writeln!(out, "{}", line.as_ref());
}
