//! Line-delimited JSON reports: one header, then check and data records,
//! then a summary.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use ybx_core::ResidualReport;

use crate::complex::C;
use crate::error::YbxError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub record: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub equation: String,
    pub residual_abs: f64,
    pub residual_rel: f64,
    #[serde(rename = "scalar_R")]
    pub scalar_r: Option<C>,
    #[serde(rename = "scalar_Rbar")]
    pub scalar_rbar: Option<C>,
    /// 1-based.
    pub worst_index: Vec<usize>,
    pub tol: f64,
    pub pass: bool,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl CheckRecord {
    pub fn from_report(rep: &ResidualReport, trial: Option<usize>) -> Self {
        Self {
            record: "check",
            trial,
            equation: rep.equation.clone(),
            residual_abs: rep.max_abs,
            residual_rel: rep.relative,
            scalar_r: rep.scalar_r.map(C),
            scalar_rbar: rep.scalar_rbar.map(C),
            worst_index: rep.worst_index.iter().map(|i| i + 1).collect(),
            tol: rep.tol,
            pass: rep.pass,
            extra: Map::new(),
        }
    }

    /// A check on a single absolute quantity, e.g. a commutator norm.
    pub fn absolute(equation: &str, value: f64, tol: f64, trial: Option<usize>) -> Self {
        Self {
            record: "check",
            trial,
            equation: equation.to_string(),
            residual_abs: value,
            residual_rel: value,
            scalar_r: None,
            scalar_rbar: None,
            worst_index: Vec::new(),
            tol,
            pass: value <= tol,
            extra: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Check(CheckRecord),
    Data(Value),
}

impl Record {
    pub fn data(name: &str, body: Value) -> Self {
        let mut m = Map::new();
        m.insert("record".into(), json!("data"));
        m.insert("name".into(), json!(name));
        if let Value::Object(fields) = body {
            m.extend(fields);
        } else {
            m.insert("value".into(), body);
        }
        Record::Data(Value::Object(m))
    }

    fn to_value(&self) -> Value {
        match self {
            Record::Check(c) => serde_json::to_value(c).expect("record serialises"),
            Record::Data(v) => v.clone(),
        }
    }
}

impl From<CheckRecord> for Record {
    fn from(c: CheckRecord) -> Self {
        Record::Check(c)
    }
}

/// Records of one command. `pass` is false iff some check failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub records: Vec<Record>,
}

impl Outcome {
    pub fn push(&mut self, r: impl Into<Record>) {
        self.records.push(r.into());
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Check(c) => Some(c),
            Record::Data(_) => None,
        })
    }

    pub fn pass(&self) -> bool {
        self.checks().all(|c| c.pass)
    }

    /// Renders header, records and summary as newline-terminated JSON lines.
    pub fn render(&self, command: &str, seed: u64) -> String {
        let mut out = String::new();
        let mut line = |v: &Value| {
            out.push_str(&serde_json::to_string(v).expect("record serialises"));
            out.push('\n');
        };
        line(&json!({"record": "header", "command": command, "seed": seed, "version": env!("CARGO_PKG_VERSION")}));
        for r in &self.records {
            line(&r.to_value());
        }
        let total = self.checks().count();
        let passed = self.checks().filter(|c| c.pass).count();
        line(&json!({"record": "summary", "checks": total, "passed": passed, "failed": total - passed, "pass": self.pass()}));
        out
    }
}

pub fn write_report(text: &str, output: Option<&Path>) -> Result<(), YbxError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| YbxError::Io { path: path.to_path_buf(), source: e }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| YbxError::Io { path: "<stdout>".into(), source: e })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ybx_core::Complex64;

    #[test]
    fn indices_become_one_based() {
        let rep = ResidualReport::from_parts("x", 0.5, 1.0, vec![0, 2], 1e-3).with_r(Complex64::new(2.0, -1.0));
        let rec = CheckRecord::from_report(&rep, Some(3));
        assert_eq!(rec.worst_index, vec![1, 3]);
        let v = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["scalar_R"], json!([2.0, -1.0]));
        assert_eq!(v["scalar_Rbar"], Value::Null);
        assert_eq!(v["pass"], json!(false));
        assert_eq!(v["trial"], json!(3));
    }

    #[test]
    fn summary_counts() {
        let mut out = Outcome::default();
        out.push(CheckRecord::absolute("a", 0.0, 1e-9, None));
        out.push(CheckRecord::absolute("b", 1.0, 1e-9, None).with("note", json!("big")));
        out.push(Record::data("table", json!({"rows": [1, 2]})));
        assert!(!out.pass());
        let text = out.render("test", 9);
        let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0]["seed"], json!(9));
        assert_eq!(lines[2]["note"], json!("big"));
        assert_eq!(lines[3]["rows"], json!([1, 2]));
        assert_eq!(lines[4]["failed"], json!(1));
    }
}
