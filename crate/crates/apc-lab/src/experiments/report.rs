use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::experiments::ScalingFit;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub h: f64,
    pub dt: f64,
    pub seed: u64,
    pub channel: i32,
    pub mu_c: f64,
}

/// JSON record of one sweep: parameters, one row per run, fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub kind: String,
    pub parameters: serde_json::Value,
    pub rows: Vec<serde_json::Value>,
    pub fits: BTreeMap<String, ScalingFit>,
    pub fingerprint: Fingerprint,
}

impl SweepReport {
    pub fn new(kind: &str, parameters: serde_json::Value, fingerprint: Fingerprint) -> Self {
        SweepReport { schema_version: SCHEMA_VERSION, kind: kind.to_string(), parameters, rows: Vec::new(), fits: BTreeMap::new(), fingerprint }
    }

    pub fn push_rows<T: Serialize>(&mut self, rows: &[T]) -> serde_json::Result<()> {
        for r in rows {
            self.rows.push(serde_json::to_value(r)?);
        }
        Ok(())
    }
}
