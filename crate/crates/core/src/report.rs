//! Run reports: deterministic JSON and CSV serialization, plus plain CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::params::ProblemParams;

/// Significant digits of every number written by this module.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEqual,
    #[serde(rename = ">=")]
    GreaterEqual,
}

/// One numeric result checked against a named tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance_name: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: Comparison, tolerance_name: &str, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::Less => value < tolerance,
            Comparison::LessEqual => value <= tolerance,
            Comparison::GreaterEqual => value >= tolerance,
        };
        Self {
            name: name.to_string(),
            value,
            comparison,
            tolerance_name: tolerance_name.to_string(),
            tolerance,
            passed,
        }
    }

    /// `count <= 0`, for checks counting violations.
    pub fn zero(name: &str, count: usize, tolerance_name: &str) -> Self {
        Self::new(name, count as f64, Comparison::LessEqual, tolerance_name, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub params: Option<ProblemParams>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub tolerances: BTreeMap<String, f64>,
    pub passed: bool,
    /// Wall time in seconds; the only field that differs between identical runs.
    pub elapsed: f64,
}

impl RunReport {
    pub fn new(command: &str, params: Option<ProblemParams>, results: Value, checks: Vec<Check>) -> Self {
        let tolerances = checks.iter().map(|c| (c.tolerance_name.clone(), c.tolerance)).collect();
        let passed = checks.iter().all(|c| c.passed);
        Self { command: command.to_string(), params, results, checks, tolerances, passed, elapsed: 0.0 }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Formats with [`SIGNIFICANT_DIGITS`] significant digits in the shortest round-trip form.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{r:e}")
    } else if r == r.trunc() {
        format!("{r:.1}")
    } else {
        format!("{r}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if !(n.is_i64() || n.is_u64()) {
                    if let Some(m) = serde_json::Number::from_f64(round_sig(x)) {
                        *n = m;
                    }
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Converts a serializable value to JSON with every float rounded; non-finite floats become strings.
pub fn to_rounded_value<T: Serialize>(x: &T) -> Value {
    let mut v = serde_json::to_value(x).unwrap_or(Value::Null);
    round_value(&mut v);
    v
}

/// `f64` that serializes as a string when it is not finite.
pub fn json_num(x: f64) -> Value {
    match serde_json::Number::from_f64(round_sig(x)) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_num(x)),
    }
}

pub const CSV_HEADER: &str = "check,value,comparison,tolerance_name,tolerance,passed";

pub fn serialize_report(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&to_rounded_value(report)).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for c in &report.checks {
                let cmp = match c.comparison {
                    Comparison::Less => "<",
                    Comparison::LessEqual => "<=",
                    Comparison::GreaterEqual => ">=",
                };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    c.name,
                    fmt_num(c.value),
                    cmp,
                    c.tolerance_name,
                    fmt_num(c.tolerance),
                    c.passed
                );
            }
            s
        }
    }
}

/// Numeric table rendered as CSV with LF line endings.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|&x| fmt_num(x)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    std::fs::write(path, csv_table(header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let checks = vec![
            Check::new("a", 1.0 / 3.0, Comparison::Less, "tol-a", 1e-6),
            Check::zero("b", 0, "tol-b"),
        ];
        RunReport::new("demo", ProblemParams::new(3, 0.5, 0.0, 2.0).ok(), serde_json::json!({"x": 2.0 / 3.0}), checks)
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(2.0 / 3.0 * 1e-20), 6.66666666667e-21);
        assert_eq!(fmt_num(2.0), "2.0");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert_eq!(fmt_num(-3.487868498012345e-16), "-3.48786849801e-16");
        assert_eq!(fmt_num(2.5e20), "2.5e20");
        assert_eq!(json_num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn json_is_deterministic() {
        let a = serialize_report(&sample(), Format::Json);
        let b = serialize_report(&sample(), Format::Json);
        assert_eq!(a, b);
        assert!(a.contains("0.333333333333") && !a.contains("0.3333333333333"));
        let back: RunReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back.checks.len(), 2);
        assert!(!back.passed);
    }

    #[test]
    fn csv_header_and_rows() {
        let s = serialize_report(&sample(), Format::Csv);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("a,0.333333333333,<,tol-a,1e-6,false"));
        assert_eq!(lines.next(), Some("b,0.0,<=,tol-b,0.0,true"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn tolerances_collected_from_checks() {
        let r = sample();
        assert_eq!(r.tolerances.len(), 2);
        assert_eq!(r.tolerances["tol-a"], 1e-6);
        assert_eq!(r.failed_checks().count(), 1);
    }
}
