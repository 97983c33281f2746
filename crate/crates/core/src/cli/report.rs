//! Report layout and serialization helpers.
//!
//! Rationals travel as `"p/q"` strings and reals are rounded to 12
//! significant digits before writing, so reports are stable across platforms.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::space::{format_rational, ProbabilityCharge, Rational};

/// Bumped whenever the report layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;
/// Significant digits kept for reals.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `serde(with = ...)` adapter for rationals as `"p/q"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        crate::space::parse_rational(&text).map_err(D::Error::custom)
    }
}

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    rational_str::serialize(r, s)
}

pub fn ser_probability<S: Serializer>(p: &ProbabilityCharge, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.weights().iter().map(format_rational))
}

pub fn ser_opt_probability<S: Serializer>(p: &Option<ProbabilityCharge>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Some(p) => ser_probability(p, s),
        None => s.serialize_none(),
    }
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_real(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Decimal text of a real with at most 12 significant digits.
pub fn format_real(x: f64) -> String {
    let r = round_real(x);
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{r:.1}")
    } else {
        format!("{r}")
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_real(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Serializes any section into a JSON value with rounded reals.
pub fn section<T: Serialize>(value: &T) -> Result<Value> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    Ok(round_value(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    NotOk,
}

/// The structured output of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    /// Echo of the configuration.
    pub config: Value,
    pub status: RunStatus,
    /// Named result sections (properties, extrema, candidate, ...).
    pub sections: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
    /// Wall-clock milliseconds per stage; excluded from comparisons.
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            config,
            status: RunStatus::Ok,
            sections: BTreeMap::new(),
            messages: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn insert<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.sections.insert(name.to_string(), section(value)?);
        Ok(())
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.messages.push(message.into());
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.status = RunStatus::NotOk;
        self.note(message);
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    /// The report without timings, for golden and determinism comparisons.
    pub fn comparable(&self) -> RunReport {
        RunReport { timings: BTreeMap::new(), ..self.clone() }
    }
}

/// Parses and validates a report: known fields only and a matching schema
/// version.
pub fn validate_report(text: &str) -> Result<RunReport> {
    let report: RunReport = serde_json::from_str(text).map_err(|e| Error::Config(format!("report does not match the schema: {e}")))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!("schema version {} is not {SCHEMA_VERSION}", report.schema_version)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_real(0.1 + 0.2), 0.3);
        assert_eq!(round_real(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(format_real(4.0), "4.0");
        assert_eq!(format_real(std::f64::consts::E - 1.0), "1.71828182846");
    }

    #[test]
    fn rational_round_trip() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W {
            #[serde(with = "rational_str")]
            r: Rational,
        }
        let w = W { r: Rational::new(3, 4) };
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"r":"3/4"}"#);
        assert_eq!(serde_json::from_str::<W>(&text).unwrap(), w);
    }

    #[test]
    fn report_validation() {
        let mut r = RunReport::new("analyze", 42, Value::Null);
        r.insert("x", &0.1f64).unwrap();
        let text = r.to_json().unwrap();
        assert_eq!(validate_report(&text).unwrap(), r);
        assert!(validate_report(&text.replace("\"seed\"", "\"sneed\"")).is_err());
        assert!(validate_report(&text.replace("\"schema_version\": 1", "\"schema_version\": 9")).is_err());
    }
}
