use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named real parameters of a model (`mu`, `k`, `V0`, `c`, `Lambda`, ...).
///
/// All parameters are dimensionless reals; there is no unit system.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterSet(BTreeMap<String, f64>);

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// A parameter the system cannot run without.
    pub fn require(&self, system: &str, name: &str) -> Result<f64> {
        let v = self.get(name).ok_or_else(|| Error::MissingParameter {
            system: system.to_string(),
            name: name.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::InvalidParameter { name: name.to_string(), reason: "not finite".into() });
        }
        Ok(v)
    }

    /// A required parameter that must also be nonzero (e.g. `mu` of type-I systems).
    pub fn require_nonzero(&self, system: &str, name: &str) -> Result<f64> {
        let v = self.require(system, name)?;
        if v == 0.0 {
            return Err(Error::ZeroParameter { system: system.to_string(), name: name.to_string() });
        }
        Ok(v)
    }

    pub fn or_default(&self, name: &str, default: f64) -> f64 {
        self.get(name).unwrap_or(default)
    }
}

impl<const N: usize> From<[(&str, f64); N]> for ParameterSet {
    fn from(pairs: [(&str, f64); N]) -> Self {
        let mut p = ParameterSet::new();
        for (k, v) in pairs {
            p.set(k, v);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_and_zero_are_distinct_errors() {
        let p = ParameterSet::from([("mu", 0.0)]);
        assert!(matches!(p.require("x", "k"), Err(Error::MissingParameter { .. })));
        assert!(matches!(p.require_nonzero("x", "mu"), Err(Error::ZeroParameter { .. })));
        assert_eq!(p.require("x", "mu").unwrap(), 0.0);
    }

    #[test]
    fn serializes_in_key_order() {
        let p = ParameterSet::from([("mu", 1.0), ("k", 2.0)]);
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"k":2.0,"mu":1.0}"#);
    }
}
