//! `kelab list`: the system registry.

use std::io::Write;

use kepler_ermakov::invariants::catalog_invariants;
use kepler_ermakov::systems::{recipe, registry};
use serde::Serialize;

use super::say;
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct ListEntry {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub params: Vec<String>,
    pub functions: Vec<FunctionSlot>,
    pub hamiltonian: bool,
    /// Invariants cataloged for the default recipe.
    pub invariants: Vec<String>,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionSlot {
    pub name: String,
    pub arity: usize,
}

/// Registry entries whose name contains `filter`.
pub fn entries(filter: Option<&str>) -> Vec<ListEntry> {
    registry()
        .into_iter()
        .filter(|i| filter.is_none_or(|f| i.name.contains(f)))
        .map(|i| {
            let invariants = recipe(&i.name)
                .and_then(|r| r.build())
                .and_then(|m| catalog_invariants(&m))
                .map(|v| v.into_iter().map(|x| x.name).collect())
                .unwrap_or_default();
            ListEntry {
                dim: i.dim,
                coords: i.coords,
                params: i.params,
                functions: i.functions.into_iter().map(|(name, arity)| FunctionSlot { name, arity }).collect(),
                hamiltonian: i.hamiltonian,
                invariants,
                description: i.description,
                name: i.name,
            }
        })
        .collect()
}

pub fn run(filter: Option<&str>, json: bool, out: &mut dyn Write) -> CliResult<()> {
    let list = entries(filter);
    if json {
        say(out, serde_json::to_string_pretty(&list).unwrap_or_default());
        return Ok(());
    }
    for e in &list {
        let funcs: Vec<String> = e.functions.iter().map(|f| format!("{}/{}", f.name, f.arity)).collect();
        say(
            out,
            format!(
                "{:<18} dim={} params={{{}}} functions={{{}}} invariants={{{}}}",
                e.name,
                e.dim,
                e.params.join(", "),
                funcs.join(", "),
                e.invariants.join(", ")
            ),
        );
    }
    Ok(())
}
