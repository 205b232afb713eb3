//! Validated access to JSON hyperparameter maps.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};

pub type Hyperparameters = BTreeMap<String, Value>;

/// Consumes entries from a hyperparameter map; leftovers are rejected by
/// [`ParamReader::finish`].
pub(crate) struct ParamReader<'a> {
    owner: &'a str,
    map: BTreeMap<String, Value>,
}

impl<'a> ParamReader<'a> {
    pub fn new(owner: &'a str, map: &Hyperparameters) -> Self {
        Self {
            owner,
            map: map.clone(),
        }
    }

    fn bad(&self, name: &str, why: impl std::fmt::Display) -> Error {
        Error::Config(format!("{}: hyperparameter '{name}' {why}", self.owner))
    }

    pub fn f64(&mut self, name: &str, default: f64, min: f64, max: f64) -> Result<f64> {
        let Some(v) = self.map.remove(name) else {
            return Ok(default);
        };
        let x = v
            .as_f64()
            .ok_or_else(|| self.bad(name, format!("must be a number, got {v}")))?;
        if !(x >= min && x <= max) {
            return Err(self.bad(name, format!("= {x} outside [{min}, {max}]")));
        }
        Ok(x)
    }

    pub fn opt_f64(&mut self, name: &str, min: f64, max: f64) -> Result<Option<f64>> {
        if self.map.contains_key(name) {
            self.f64(name, 0.0, min, max).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn usize(&mut self, name: &str, default: usize, min: usize, max: usize) -> Result<usize> {
        let Some(v) = self.map.remove(name) else {
            return Ok(default);
        };
        let x = v
            .as_u64()
            .ok_or_else(|| self.bad(name, format!("must be a non-negative integer, got {v}")))?;
        let x = usize::try_from(x).map_err(|_| self.bad(name, "is too large"))?;
        if x < min || x > max {
            return Err(self.bad(name, format!("= {x} outside [{min}, {max}]")));
        }
        Ok(x)
    }

    pub fn string(&mut self, name: &str, default: &str, allowed: &[&str]) -> Result<String> {
        let Some(v) = self.map.remove(name) else {
            return Ok(default.to_string());
        };
        let s = v
            .as_str()
            .ok_or_else(|| self.bad(name, format!("must be a string, got {v}")))?;
        if !allowed.contains(&s) {
            return Err(self.bad(name, format!("= '{s}' not one of {allowed:?}")));
        }
        Ok(s.to_string())
    }

    pub fn object(&mut self, name: &str) -> Result<Hyperparameters> {
        match self.map.remove(name) {
            None => Ok(Hyperparameters::new()),
            Some(Value::Object(m)) => Ok(m.into_iter().collect()),
            Some(v) => Err(self.bad(name, format!("must be an object, got {v}"))),
        }
    }

    pub fn finish(self) -> Result<()> {
        if let Some(name) = self.map.keys().next() {
            return Err(Error::Config(format!(
                "{}: unknown hyperparameter '{name}'",
                self.owner
            )));
        }
        Ok(())
    }
}
