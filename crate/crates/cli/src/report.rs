use std::collections::BTreeMap;
use std::time::Instant;

use forestcalc::Error;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Exact residuals as `p/q` strings, zero on success.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Pass,
            residuals: Vec::new(),
            detail: None,
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Fail,
            residuals: Vec::new(),
            detail: Some(detail.into()),
        }
    }

    pub fn from_bool(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let mut c = if ok { Check::pass(name) } else { Check::fail(name, "") };
        c.detail = Some(detail.into());
        c
    }

    pub fn with_residuals(mut self, residuals: Vec<String>) -> Self {
        self.residuals = residuals;
        self
    }
}

/// Identity and inequality failures become failing checks; anything else
/// stays an error.
pub fn failure_as_check<T>(name: &str, result: forestcalc::Result<T>) -> anyhow::Result<std::result::Result<T, Check>> {
    match result {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::IdentityFailure { .. } | Error::InequalityFailure { .. })) => {
            Ok(Err(Check::fail(name, e.to_string())))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub config_hash: String,
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(flatten)]
    pub data: Map<String, Value>,
    pub timings: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

/// Collects checks, data and timings while a command runs.
#[derive(Default)]
pub struct Recorder {
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
    pub timings: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

impl Recorder {
    pub fn put(&mut self, key: &str, value: impl Serialize) -> anyhow::Result<()> {
        self.data.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.timings.insert(label.to_string(), start.elapsed().as_secs_f64());
        out
    }

    pub fn finish(self, command: Vec<String>, config: &Value) -> RunReport {
        let status = if self.checks.iter().all(|c| c.status == Status::Pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        RunReport {
            command,
            config_hash: config_hash(config),
            status,
            checks: self.checks,
            data: self.data,
            timings: self.timings,
            artifacts: self.artifacts,
        }
    }
}

pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}
