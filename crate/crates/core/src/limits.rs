//! Size bounds for the exponential-cost enumerations.
//!
//! Defaults can be overridden through the `FORESTCALC_LIMIT` environment
//! variable, either as a single integer (vertex bound for tree and forest
//! enumeration) or as a comma separated `key=value` list with keys
//! `trees`, `tau`, `mayer`, `fermion`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

static CURRENT: OnceLock<Limits> = OnceLock::new();

/// Limits in force for this process: the installed value, else the
/// environment, else the defaults.
pub fn current() -> Limits {
    *CURRENT.get_or_init(|| Limits::from_env().unwrap_or_default())
}

/// Installs process-wide limits. Returns `false` if limits were already fixed.
pub fn install(limits: Limits) -> bool {
    CURRENT.set(limits).is_ok()
}

pub const LIMIT_ENV: &str = "FORESTCALC_LIMIT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Vertex count for tree and forest enumeration.
    pub max_vertices: usize,
    /// Number of link variables in a box integral (τ! simplices).
    pub max_tau: usize,
    /// Polymer sequence length in the Mayer expansion.
    pub max_mayer_k: usize,
    /// Perturbative order of the fermionic expansions.
    pub max_fermion_order: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_vertices: 8,
            max_tau: 7,
            max_mayer_k: 6,
            max_fermion_order: 4,
        }
    }
}

impl Limits {
    /// Defaults, overridden by `FORESTCALC_LIMIT` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(LIMIT_ENV) {
            Ok(spec) => Self::parse(&spec),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut limits = Self::default();
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(limits);
        }
        if let Ok(n) = spec.parse::<usize>() {
            limits.max_vertices = n;
            return Ok(limits);
        }
        for item in spec.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad limit entry '{item}'")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad limit value '{value}'")))?;
            match key.trim() {
                "trees" => limits.max_vertices = value,
                "tau" => limits.max_tau = value,
                "mayer" => limits.max_mayer_k = value,
                "fermion" => limits.max_fermion_order = value,
                other => return Err(Error::Parse(format!("unknown limit key '{other}'"))),
            }
        }
        Ok(limits)
    }

    pub(crate) fn check(what: &'static str, value: usize, limit: usize) -> Result<()> {
        if value > limit {
            Err(Error::SizeLimit { what, value, limit })
        } else {
            Ok(())
        }
    }
}
