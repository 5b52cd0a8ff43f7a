//! The report envelope wrapped around every command's output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const TOOL: &str = "spdecrit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// `None` when the measurement was not finite.
    pub measured: Option<f64>,
    /// Human-readable acceptance condition.
    pub threshold: String,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, pass: bool, threshold: impl Into<String>) -> Self {
        let finite = measured.is_finite();
        Self {
            name: name.into(),
            pass: pass && finite,
            measured: finite.then_some(measured),
            threshold: threshold.into(),
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, measured <= bound, format!("<= {bound:e}"))
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, measured >= bound, format!(">= {bound:e}"))
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, measured, (lo..=hi).contains(&measured), format!("in [{lo}, {hi}]"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<P> {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Every resolved parameter, as text.
    pub config: BTreeMap<String, String>,
    /// UTC time of the run; the only field allowed to differ between reruns.
    pub timestamp: String,
    #[serde(flatten)]
    pub payload: P,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl<P: Serialize> Envelope<P> {
    pub fn new(command: &str, config: BTreeMap<String, String>, payload: P, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            payload,
            checks,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Serialized envelope without the timestamp: equal for equal configs.
    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(map) = v.as_object_mut() {
            map.remove("timestamp");
        }
        serde_json::to_vec(&v).expect("values serialize")
    }
}
