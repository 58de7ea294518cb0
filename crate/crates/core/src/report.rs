//! Machine-readable verification reports: named residuals against named
//! tolerances, plus a digest of the inputs so identical runs are
//! reproducible byte for byte (modulo `elapsed_ms`).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One residual with the tolerance it is judged against.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

/// Aggregated result of a command or verification suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: serde_json::Value,
    pub residuals: Vec<NamedResidual>,
    pub pass: bool,
    pub seed: u64,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64) -> Report {
        Report {
            command: command.into(),
            inputs_digest: String::new(),
            results: serde_json::Value::Object(Default::default()),
            residuals: Vec::new(),
            pass: false,
            seed,
            elapsed_ms: 0.0,
        }
    }

    /// Record a residual; `pass` is recomputed at [`Self::finalize`].
    pub fn push_residual(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.residuals.push(NamedResidual { name: name.into(), value, tolerance });
    }

    /// Attach a structured result value.
    pub fn insert_result(&mut self, key: &str, value: impl Serialize) {
        if let (serde_json::Value::Object(map), Ok(v)) =
            (&mut self.results, serde_json::to_value(value))
        {
            map.insert(key.to_string(), v);
        }
    }

    /// Digest the inputs that determine the run.
    pub fn set_inputs_digest(&mut self, parts: &[&str]) {
        let mut hasher = Sha256::new();
        for p in parts {
            hasher.update(p.as_bytes());
            hasher.update([0u8]);
        }
        let digest = hasher.finalize();
        self.inputs_digest = digest.iter().map(|b| format!("{b:02x}")).collect();
    }

    /// Sort residuals by name and decide `pass`: every residual must lie
    /// strictly below its tolerance (non-finite values fail).
    pub fn finalize(&mut self, elapsed_ms: f64) {
        self.residuals.sort_by(|a, b| a.name.cmp(&b.name));
        self.pass = self
            .residuals
            .iter()
            .all(|r| r.value.is_finite() && r.value < r.tolerance);
        self.elapsed_ms = elapsed_ms;
    }

    /// Merge another report's residuals under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: &Report) {
        for r in &other.residuals {
            self.residuals.push(NamedResidual {
                name: format!("{prefix}.{}", r.name),
                value: r.value,
                tolerance: r.tolerance,
            });
        }
        self.insert_result(prefix, &other.results);
    }

    /// Largest value of a residual by exact name, if present.
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }
}
