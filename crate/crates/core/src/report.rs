//! Result persistence: versioned JSON records, JSONL streams, CSV tables and
//! plain-text plot data.
//!
//! Every JSON object written here carries `schema_version` and `kind`. Keys are
//! emitted in sorted order and floats in shortest round-trip form, so a rerun
//! with the same inputs reproduces the same bytes.

use std::io::{BufRead, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::lab::proof::{MonomialRow, MonomialSup};

pub const SCHEMA_VERSION: &str = "1.0";
const SCHEMA_MAJOR: u64 = 1;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Accepts any `1.x` version string.
pub fn check_schema_version(v: &str) -> Result<()> {
    let major = v.split('.').next().and_then(|m| m.parse::<u64>().ok());
    match major {
        Some(SCHEMA_MAJOR) => Ok(()),
        _ => Err(Error::SchemaVersion(v.to_string())),
    }
}

/// Serializes `body` as an object tagged with `kind` and the schema version.
pub fn envelope<T: Serialize>(kind: &str, body: &T) -> Result<Value> {
    let mut map = match serde_json::to_value(body)? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    map.insert("kind".into(), Value::String(kind.into()));
    map.insert("schema_version".into(), Value::String(SCHEMA_VERSION.into()));
    Ok(Value::Object(map))
}

/// Checks the version tag of a parsed record.
pub fn check_record(v: &Value) -> Result<()> {
    match v.get("schema_version").and_then(Value::as_str) {
        Some(s) => check_schema_version(s),
        None => Err(Error::SchemaVersion("<missing>".into())),
    }
}

pub fn kind_of(v: &Value) -> Option<&str> {
    v.get("kind").and_then(Value::as_str)
}

/// Command identity shared by run records and stream summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool_version: String,
    pub command: String,
    pub params: Value,
}

impl RunInfo {
    pub fn new(command: &str, params: Value) -> Self {
        RunInfo {
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            params,
        }
    }
}

/// A whole command run as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: String,
    pub tool_version: String,
    pub command: String,
    pub params: Value,
    /// Seconds since the Unix epoch; the only field that varies between reruns.
    pub timestamp: u64,
    pub payloads: Vec<Value>,
}

impl RunRecord {
    pub fn new(info: RunInfo, payloads: Vec<Value>) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION.into(),
            tool_version: info.tool_version,
            command: info.command,
            params: info.params,
            timestamp: unix_now(),
            payloads,
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        check_record(&v)?;
        let rec: RunRecord = serde_json::from_value(v)?;
        for p in &rec.payloads {
            check_record(p)?;
        }
        Ok(rec)
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Line-per-record writer; each line is flushed as written so a reader sees
/// records in logical order even if the run dies.
pub struct JsonlWriter<W: Write> {
    out: W,
    written: u64,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(out: W) -> Self {
        JsonlWriter { out, written: 0 }
    }

    pub fn write_value(&mut self, v: &Value) -> Result<()> {
        serde_json::to_writer(&mut self.out, v)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        self.written += 1;
        Ok(())
    }

    pub fn write<T: Serialize>(&mut self, kind: &str, body: &T) -> Result<()> {
        self.write_value(&envelope(kind, body)?)
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    /// Closing line of a complete stream.
    pub fn summary<T: Serialize>(mut self, info: &RunInfo, stats: &T) -> Result<W> {
        let mut v = envelope("summary", stats)?;
        merge(&mut v, info)?;
        self.write_value(&v)?;
        Ok(self.out)
    }

    /// Closing line of a stream cut short by `err`.
    pub fn truncate(mut self, info: &RunInfo, err: &Error) -> Result<W> {
        let mut v = envelope(
            "truncated",
            &serde_json::json!({
                "error": err.to_string(),
                "exit_code": err.exit_code(),
                "records_written": self.written,
            }),
        )?;
        merge(&mut v, info)?;
        self.write_value(&v)?;
        Ok(self.out)
    }
}

fn merge<T: Serialize>(v: &mut Value, extra: &T) -> Result<()> {
    if let (Value::Object(dst), Value::Object(src)) = (v, serde_json::to_value(extra)?) {
        dst.extend(src);
    }
    Ok(())
}

/// Parses a JSONL stream, rejecting unknown schema versions.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        check_record(&v)?;
        out.push(v);
    }
    Ok(out)
}

/// Monomial ratio table; the final row has `alpha = "sup=<argmax>"`.
pub fn write_monomial_csv(rows: &[MonomialRow], sup: &MonomialSup, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["alpha", "lp_star_norm", "grad_lp_norm", "ratio"])
        .map_err(csv_err)?;
    let argmax_row = rows.iter().find(|r| r.alpha == sup.argmax);
    for r in rows {
        w.write_record([
            r.alpha.to_string(),
            r.lp_star_norm.to_string(),
            r.grad_lp_norm.to_string(),
            r.ratio.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let (a, b) = argmax_row.map_or((String::new(), String::new()), |r| {
        (r.lp_star_norm.to_string(), r.grad_lp_norm.to_string())
    });
    w.write_record([format!("sup={}", sup.argmax), a, b, sup.sup.to_string()])
        .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

/// Plot data: one `# N=<n>` block per dimension, then `p A` lines sorted by
/// `p`, blocks separated by a blank line.
pub fn write_plot_data(points: &[(usize, f64, f64)], mut out: impl Write) -> Result<()> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut current = None;
    for (n, p, a) in pts {
        if current != Some(n) {
            if current.is_some() {
                writeln!(out)?;
            }
            writeln!(out, "# N={n}")?;
            current = Some(n);
        }
        writeln!(out, "{p} {a}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::proof::monomial_ratio_table;
    use crate::norm::SobolevParams;
    use serde_json::json;

    #[test]
    fn versions() {
        assert!(check_schema_version("1.0").is_ok());
        assert!(check_schema_version("1.7").is_ok());
        assert!(check_schema_version("2.0").is_err());
        assert!(check_schema_version("x").is_err());
        assert!(check_record(&json!({"kind": "a"})).is_err());
    }

    #[test]
    fn jsonl_stream_and_truncation() {
        let info = RunInfo::new("verify", json!({"seed": 1}));
        let mut w = JsonlWriter::new(Vec::new());
        w.write("ratio", &json!({"x": 0.1})).unwrap();
        let bytes = w.truncate(&info, &Error::MixedSigns).unwrap();
        let recs = read_jsonl(&bytes[..]).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(kind_of(&recs[1]), Some("truncated"));
        assert_eq!(recs[1]["records_written"], 1);
        assert_eq!(recs[1]["command"], "verify");

        let bad = b"{\"schema_version\":\"9.0\",\"kind\":\"ratio\"}\n";
        assert!(matches!(read_jsonl(&bad[..]), Err(Error::SchemaVersion(_))));
    }

    #[test]
    fn run_record_round_trip() {
        let rec = RunRecord::new(
            RunInfo::new("norm", json!({"q": 0.5})),
            vec![envelope("norm", &json!({"value": 1.0})).unwrap()],
        );
        let back = RunRecord::from_json(&rec.to_json_pretty().unwrap()).unwrap();
        assert_eq!(back, rec);
        let mut v: Value = serde_json::to_value(&rec).unwrap();
        v["schema_version"] = json!("2.0");
        assert!(RunRecord::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn csv_table_has_sup_row() {
        let params = SobolevParams::new(1, 0.75, 1).unwrap();
        let (rows, sup) = monomial_ratio_table(&params, 3).unwrap();
        let mut buf = Vec::new();
        write_monomial_csv(&rows, &sup, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "alpha,lp_star_norm,grad_lp_norm,ratio");
        assert!(lines[4].starts_with("sup=[1]"));
    }

    #[test]
    fn plot_blocks() {
        let mut buf = Vec::new();
        write_plot_data(&[(2, 0.9, 0.4), (1, 0.6, 0.5), (2, 0.7, 0.3)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# N=1\n0.6 0.5\n\n# N=2\n0.7 0.3\n0.9 0.4\n"
        );
    }
}
