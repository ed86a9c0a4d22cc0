use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

pub const VERSION: &str = env!("PSSMP_VERSION");

/// Headered table written as RFC 4180 CSV.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form; empty for missing values.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Artifacts {
    pub report: Value,
    pub data: Option<Table>,
    /// Additional named CSV files.
    pub extra: Vec<(&'static str, Table)>,
    pub pass: Option<bool>,
    /// Process exit code for a completed run.
    pub code: i32,
}

impl Artifacts {
    pub fn new(report: Value) -> Self {
        Self { report, data: None, extra: Vec::new(), pass: None, code: 0 }
    }
}

/// Full report with the resolved config and version string embedded.
pub fn envelope(command: &str, config: &Value, result: Value) -> Value {
    json!({ "version": VERSION, "command": command, "config": config, "result": result })
}

pub fn write_dir(dir: &Path, command: &str, config: &Value, art: &Artifacts) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let report = envelope(command, config, art.report.clone());
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let mut files = vec!["report.json"];
    if let Some(t) = &art.data {
        t.write(&dir.join("data.csv"))?;
        files.push("data.csv");
    }
    for (name, t) in &art.extra {
        t.write(&dir.join(name))?;
        files.push(name);
    }
    let manifest = json!({ "version": VERSION, "command": command, "config": config, "files": files, "pass": art.pass });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
