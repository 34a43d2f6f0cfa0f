//! CSV and JSON report emission.
//!
//! Every file carries the schema version, a SHA-256 hash of the inputs and
//! the seed. Output bytes depend only on the report contents.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::write_file;
use crate::sweep::{Aggregate, SweepConfig, SweepRow, COLUMNS};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format `{s}`"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub schema: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: SweepConfig,
    pub aggregate: Aggregate,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn new(config: SweepConfig, rows: Vec<SweepRow>, aggregate: Aggregate) -> Self {
        SweepReport {
            schema: SCHEMA_VERSION.into(),
            config_hash: config.hash(),
            seed: config.master_seed,
            config,
            aggregate,
            rows,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = header_line("sweep", &self.config_hash, self.seed);
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for row in &self.rows {
            let v = serde_json::to_value(row).expect("row serializes");
            let cells: Vec<String> = COLUMNS.iter().map(|c| cell(&v[*c])).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn header_line(kind: &str, hash: &str, seed: u64) -> String {
    format!("# concatgv {kind} schema={SCHEMA_VERSION} config_hash={hash} seed={seed}\n")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes a rendered report to `path`.
pub fn report_emit(report: &SweepReport, format: Format, path: &Path) -> Result<()> {
    write_file(path, &report.render(format))
}

/// Wraps a subcommand result with schema, input hash, seed and budget.
pub fn envelope(kind: &str, seed: u64, budget: u128, params: Value, result: Value) -> Value {
    let hash = sha256_hex(params.to_string().as_bytes());
    json!({
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "config_hash": hash,
        "seed": seed,
        "budget": budget.to_string(),
        "params": params,
        "result": result,
    })
}

/// Renders an [`envelope`] as pretty JSON, or as `key,value` CSV with
/// dotted keys for nested fields.
pub fn render_envelope(env: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(env).expect("value serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let kind = env["kind"].as_str().unwrap_or("report");
            let hash = env["config_hash"].as_str().unwrap_or("");
            let seed = env["seed"].as_u64().unwrap_or(0);
            let mut out = header_line(kind, hash, seed);
            out.push_str("key,value\n");
            let mut flat = Vec::new();
            flatten("", env, &mut flat);
            for (k, v) in flat {
                if k == "schema" || k == "kind" || k == "config_hash" || k == "seed" {
                    continue;
                }
                let _ = writeln!(out, "{k},{v}");
            }
            out
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

/// Two-column `delta rate` data for plotting.
pub fn curve_dat(title: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("# {title} schema={SCHEMA_VERSION}\n# delta rate\n");
    for (d, r) in points {
        let _ = writeln!(out, "{d} {r}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::run_sweep;

    fn report(trials: usize, seed: u64) -> SweepReport {
        let mut cfg = SweepConfig::new(2, 4, 4, 2, trials, seed);
        cfg.run_nice = true;
        cfg.run_soft = true;
        let (rows, agg) = run_sweep(&cfg).unwrap();
        SweepReport::new(cfg, rows, agg)
    }

    #[test]
    fn empty_rows_header_only() {
        let csv = report(0, 1).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("# concatgv sweep schema=v1 config_hash="));
        assert!(lines[0].ends_with(" seed=1"));
    }

    #[test]
    fn column_count_matches_schema() {
        let csv = report(4, 2).to_csv();
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), COLUMNS.len());
        }
        assert_eq!(COLUMNS.len(), 21);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let r = report(5, 3);
        let a = r.to_json();
        let back = SweepReport::from_json(&a).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), a);
    }

    #[test]
    fn same_seed_same_bytes() {
        assert_eq!(report(6, 9).to_csv(), report(6, 9).to_csv());
        assert_ne!(report(6, 9).to_csv(), report(6, 10).to_csv());
    }

    #[test]
    fn envelope_csv_flattens() {
        let env = envelope(
            "demo",
            4,
            1 << 20,
            json!({"n": 3}),
            json!({"ok": true, "per_weight": [[1, 0.5]]}),
        );
        let csv = render_envelope(&env, Format::Csv);
        assert!(csv.starts_with("# concatgv demo schema=v1 config_hash="));
        assert!(csv.contains("\nresult.ok,true\n"));
        assert!(csv.contains("\nresult.per_weight.0.1,0.5\n"));
        assert!(csv.contains("\nbudget,1048576\n"));
    }

    #[test]
    fn format_parse() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
