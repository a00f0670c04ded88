//! Structured experiment results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::lattice::MomentumGrid;

/// One pass/fail check with the number it was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    /// Human-readable condition, e.g. `"< 1e-6"`.
    pub condition: String,
    pub pass: bool,
}

/// Result of one experiment: echoed inputs, computed quantities, verdicts
/// and the tolerances they were judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    /// The identity or inequality under test, written out.
    pub relation: String,
    pub grid: Option<MomentumGrid>,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, Value>,
    pub quantities: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(experiment: impl Into<String>, relation: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            relation: relation.into(),
            grid: None,
            seed: None,
            inputs: BTreeMap::new(),
            quantities: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn with_grid(mut self, grid: MomentumGrid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.inputs.insert(key.to_owned(), to_value(value));
        self
    }

    pub fn quantity(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.quantities.insert(key.to_owned(), to_value(value));
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_owned(), value);
        self
    }

    /// Records `value < limit`.
    pub fn check_below(&mut self, name: &str, value: f64, limit: f64) -> bool {
        let pass = value < limit;
        self.push(name, value, format!("< {limit:e}"), pass)
    }

    /// Records `value <= limit`.
    pub fn check_at_most(&mut self, name: &str, value: f64, limit: f64) -> bool {
        let pass = value <= limit;
        self.push(name, value, format!("<= {limit:e}"), pass)
    }

    /// Records `value >= limit`.
    pub fn check_at_least(&mut self, name: &str, value: f64, limit: f64) -> bool {
        let pass = value >= limit;
        self.push(name, value, format!(">= {limit:e}"), pass)
    }

    /// Records `value > limit`.
    pub fn check_above(&mut self, name: &str, value: f64, limit: f64) -> bool {
        let pass = value > limit;
        self.push(name, value, format!("> {limit:e}"), pass)
    }

    /// Records an arbitrary boolean condition.
    pub fn check(&mut self, name: &str, value: f64, condition: &str, pass: bool) -> bool {
        self.push(name, value, condition.to_owned(), pass)
    }

    fn push(&mut self, name: &str, value: f64, condition: String, pass: bool) -> bool {
        self.verdicts.push(Verdict {
            name: name.to_owned(),
            value,
            condition,
            pass,
        });
        pass
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    /// Appends the verdicts of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut v in other.verdicts {
            v.name = format!("{prefix}.{}", v.name);
            self.verdicts.push(v);
        }
        for (k, v) in other.quantities {
            self.quantities.insert(format!("{prefix}.{k}"), v);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

fn to_value(value: impl Serialize) -> Value {
    match serde_json::to_value(value) {
        Ok(Value::Number(n)) if n.as_f64().is_some_and(|f| !f.is_finite()) => Value::Null,
        Ok(v) => v,
        Err(_) => Value::Null,
    }
}
