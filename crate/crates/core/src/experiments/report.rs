use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use super::config::{Command, ExperimentConfig};

/// One computed case.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub case: String,
    /// Acceptance criteria this record feeds.
    pub criteria: Vec<u8>,
    pub config_hash: String,
    pub inputs: Value,
    pub values: Value,
    pub reference: Option<f64>,
    /// `None` for records that are reported but not asserted.
    pub passed: Option<bool>,
    pub error: Option<String>,
    /// Wall time; kept out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

/// An asserted aggregate.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub config_hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub records: Vec<Record>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Map<String, Value>,
    /// `(series, h, value)` rows for the CSV output.
    #[serde(skip)]
    pub series: Vec<(String, f64, f64)>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Report {
            command: config.command,
            config: config.clone(),
            config_hash: config.hash(),
            records: Vec::new(),
            checks: Vec::new(),
            summary: serde_json::Map::new(),
            series: Vec::new(),
        }
    }

    /// Appends a record stamped with the config hash.
    pub fn record(&mut self, case: impl Into<String>, criteria: &[u8], inputs: Value, values: Value) -> &mut Record {
        self.records.push(Record {
            case: case.into(),
            criteria: criteria.to_vec(),
            config_hash: self.config_hash.clone(),
            inputs,
            values,
            reference: None,
            passed: None,
            error: None,
            runtime: Duration::ZERO,
        });
        self.records.last_mut().unwrap()
    }

    pub fn failure(&mut self, case: impl Into<String>, criteria: &[u8], inputs: Value, error: impl ToString, runtime: Duration) {
        let r = self.record(case, criteria, inputs, Value::Null);
        r.passed = Some(false);
        r.error = Some(error.to_string());
        r.runtime = runtime;
    }

    pub fn check(&mut self, criterion: u8, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { criterion, name: name.to_string(), passed, detail, config_hash: self.config_hash.clone() });
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary serializes"));
    }

    /// There is at least one check, every check passes and no record failed.
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed) && self.records.iter().all(|r| r.passed != Some(false))
    }

    pub fn check_for(&self, criterion: u8) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.criterion == criterion)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,h,value\n");
        for (name, h, v) in &self.series {
            let _ = writeln!(out, "{name},{h},{v}");
        }
        out
    }

    /// Aligned columns: records, then checks.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "capax {}  config {}  seed {}", self.command, self.config_hash, self.config.seed);
        let _ = writeln!(out);
        let mut rows = vec![["case", "crit", "values", "ref", "pass", "time"].map(String::from).to_vec()];
        for r in &self.records {
            let values = match &r.error {
                Some(e) => format!("error: {e}"),
                None => flatten(&r.values),
            };
            rows.push(vec![
                r.case.clone(),
                r.criteria.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                values,
                r.reference.map_or(String::from("-"), |x| format!("{x:.6}")),
                match r.passed {
                    Some(true) => "ok".into(),
                    Some(false) => "FAIL".into(),
                    None => "-".into(),
                },
                format!("{:.2}s", r.runtime.as_secs_f64()),
            ]);
        }
        table(&mut out, &rows);
        let _ = writeln!(out);
        let mut rows = vec![["crit", "check", "result", "detail"].map(String::from).to_vec()];
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            rows.push(vec![c.criterion.to_string(), c.name.clone(), verdict.into(), c.detail.clone()]);
        }
        table(&mut out, &rows);
        let total: f64 = self.records.iter().map(|r| r.runtime.as_secs_f64()).sum();
        let _ = writeln!(out, "\n{} in {:.1}s", if self.passed() { "PASS" } else { "FAIL" }, total);
        out
    }

    /// Writes the JSON to `path`, the text report next to it with extension `txt`, and the
    /// CSV with extension `csv` when there are series rows.
    pub fn write(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_json())?;
        fs::write(path.with_extension("txt"), self.to_text())?;
        if !self.series.is_empty() {
            fs::write(path.with_extension("csv"), self.to_csv())?;
        }
        Ok(())
    }
}

fn table(out: &mut String, rows: &[Vec<String>]) {
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c + 1 == cols {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<w$}  ", w = widths[c]);
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
}

/// `key=value` pairs of the scalar fields of an object.
fn flatten(v: &Value) -> String {
    match v {
        Value::Object(m) => m
            .iter()
            .filter_map(|(k, x)| match x {
                Value::Number(n) => n.as_f64().map(|f| format!("{k}={}", short(f))),
                Value::Bool(b) => Some(format!("{k}={b}")),
                Value::String(s) => Some(format!("{k}={s}")),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join(" "),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn short(f: f64) -> String {
    if f == f.trunc() && f.abs() < 1e9 {
        format!("{f}")
    } else if f.abs() >= 1e-3 && f.abs() < 1e5 {
        format!("{f:.5}")
    } else {
        format!("{f:.3e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn records_carry_the_hash_and_text_aligns() {
        let cfg = ExperimentConfig::new(Command::Duality);
        let mut r = Report::new(&cfg);
        r.record("a", &[5], json!({"n": 3}), json!({"product": 1.0000001, "ok": true})).passed = Some(true);
        r.failure("longer-name", &[5, 6], json!({}), "boom", Duration::from_millis(3));
        r.check(5, "duality", false, "1 failure".into());
        assert!(r.records.iter().all(|x| x.config_hash == cfg.hash()));
        assert!(!r.passed());
        let text = r.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[2].find("crit"), lines[3].find('5'));
        assert!(text.contains("error: boom"));
        let json = r.to_json();
        assert!(!json.contains("runtime"));
        assert_eq!(json, r.to_json());
    }
}
