//! Check records, reports, and their JSON / text encodings.
//!
//! JSON output is deterministic: keys keep declaration order, floats are written
//! with 17 significant digits, and non-finite numbers become `null` (read back as NaN).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Format;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Outcome::Pass
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub params: Value,
    pub verdict: Outcome,
    #[serde(with = "nan_as_null")]
    pub max_residual: f64,
    #[serde(with = "nan_as_null")]
    pub tolerance: f64,
    pub evaluated: usize,
    pub skipped: usize,
    #[serde(default)]
    pub detail: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub config_echo: Value,
    pub checks: Vec<CheckRecord>,
    pub summary: Outcome,
}

impl Report {
    /// Sorts the checks by name and derives the summary.
    pub fn new(config_echo: Value, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let summary = Outcome::from_bool(checks.iter().all(|c| c.verdict.passed()));
        Report {
            schema_version: SCHEMA_VERSION.into(),
            config_echo,
            checks,
            summary,
        }
    }

    pub fn empty() -> Self {
        Report::new(Value::Null, Vec::new())
    }

    pub fn passed(&self) -> bool {
        self.summary.passed()
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn write_f64(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v:.16e}");
    } else {
        out.push_str("null");
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                write_f64(out, n.as_f64().unwrap_or(f64::NAN));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
            }
            out.push('\n');
            pad(out, depth);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
            }
            out.push('\n');
            pad(out, depth);
            out.push('}');
        }
    }
}

pub fn to_json(r: &Report) -> Result<String> {
    let v = serde_json::to_value(r).map_err(|e| Error::Io(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn short(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3e}")
    } else {
        "-".into()
    }
}

pub fn to_text(r: &Report) -> String {
    let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<6}{:<width$}  {:>10}  {:>10}  {:>7}  {:>7}", "", "check", "residual", "tolerance", "points", "skipped");
    for c in &r.checks {
        let tag = if c.verdict.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{tag:<6}{:<width$}  {:>10}  {:>10}  {:>7}  {:>7}",
            c.name,
            short(c.max_residual),
            short(c.tolerance),
            c.evaluated,
            c.skipped
        );
    }
    let passed = r.checks.iter().filter(|c| c.verdict.passed()).count();
    let _ = writeln!(
        out,
        "summary: {} ({passed}/{} checks passed)",
        if r.passed() { "pass" } else { "fail" },
        r.checks.len()
    );
    out
}

pub fn emit_report(r: &Report, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Json => to_json(r)?.into_bytes(),
        Format::Text => to_text(r).into_bytes(),
    })
}

pub fn parse_report(bytes: &[u8]) -> Result<Report> {
    serde_json::from_slice(bytes).map_err(|e| Error::Io(format!("invalid report: {e}")))
}

pub fn write_report(r: &Report, format: Format, path: &Path) -> Result<()> {
    std::fs::write(path, emit_report(r, format)?)?;
    Ok(())
}
