//! On-disk formats.
//!
//! CSV files start with `# key: value` metadata lines, followed by a header
//! and one row per sample. Numbers use 17 significant digits so that reading
//! a file back recovers every value exactly. Undefined correlations are
//! written as `undefined`; a disabled analytic column is left empty.

use std::io::{self, Write};

use magnon_blockade::scan::{clamped_log10, PointRow, ScanMeta, ThermalRow, TraceRow};
use serde_json::{json, Map, Value};

pub const UNDEFINED: &str = "undefined";

pub const POINT_HEADER: &str = "delta,delta_f,g2,log10_g2,g2_analytic,n_magnon";
pub const SINGLE_POINT_HEADER: &str = "delta,delta_f,g2,log10_g2,g2_analytic,n_magnon,n_qubit";
pub const THERMAL_HEADER: &str = "n_th,g2,log10_g2,n_magnon";
pub const TRACE_HEADER: &str = "t,g2,log10_g2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), num)
}

fn json_num(x: Option<f64>) -> Value {
    x.map_or_else(|| Value::from(UNDEFINED), Value::from)
}

/// Flattens nested objects into `a.b.c` keys; arrays stay as JSON text.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Metadata object shared by both formats.
pub fn meta_value(command: &str, meta: &ScanMeta) -> Value {
    let mut v = serde_json::to_value(meta).expect("metadata is always representable");
    let obj = v.as_object_mut().expect("metadata serializes to an object");
    obj.insert("command".into(), Value::from(command));
    let lambda = meta.params.lambda().map_or(Value::Null, Value::from);
    obj.insert("lambda".into(), lambda);
    v
}

pub fn write_preamble(out: &mut dyn Write, meta: &Value) -> io::Result<()> {
    let mut pairs = Vec::new();
    flatten("", meta, &mut pairs);
    for (k, v) in pairs {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

fn analytic_cell(include: bool, x: Option<f64>) -> String {
    if include {
        cell(x)
    } else {
        String::new()
    }
}

pub fn write_points(
    out: &mut dyn Write,
    format: Format,
    command: &str,
    meta: &ScanMeta,
    rows: &[PointRow],
) -> io::Result<()> {
    let meta_v = meta_value(command, meta);
    let analytic = meta.include_analytic;
    match format {
        Format::Csv => {
            write_preamble(out, &meta_v)?;
            writeln!(out, "{POINT_HEADER}")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(r.delta),
                    num(r.delta_f),
                    cell(r.g2),
                    cell(r.g2.map(clamped_log10)),
                    analytic_cell(analytic, r.g2_analytic),
                    cell(r.n_magnon),
                )?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "delta": r.delta,
                        "delta_f": r.delta_f,
                        "g2": json_num(r.g2),
                        "log10_g2": json_num(r.g2.map(clamped_log10)),
                        "g2_analytic": if analytic { json_num(r.g2_analytic) } else { Value::Null },
                        "n_magnon": json_num(r.n_magnon),
                        "error": r.error,
                    })
                })
                .collect();
            write_json(out, meta_v, rows)
        }
    }
}

pub fn write_thermal(
    out: &mut dyn Write,
    format: Format,
    meta: &ScanMeta,
    rows: &[ThermalRow],
) -> io::Result<()> {
    let meta_v = meta_value("thermal", meta);
    match format {
        Format::Csv => {
            write_preamble(out, &meta_v)?;
            writeln!(out, "{THERMAL_HEADER}")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    num(r.n_th),
                    cell(r.g2),
                    cell(r.g2.map(clamped_log10)),
                    cell(r.n_magnon)
                )?;
            }
            Ok(())
        }
        Format::Json => {
            let rows = rows
                .iter()
                .map(|r| {
                    json!({
                        "n_th": r.n_th,
                        "g2": json_num(r.g2),
                        "log10_g2": json_num(r.g2.map(clamped_log10)),
                        "n_magnon": json_num(r.n_magnon),
                        "error": r.error,
                    })
                })
                .collect();
            write_json(out, meta_v, rows)
        }
    }
}

pub fn write_trace(
    out: &mut dyn Write,
    format: Format,
    meta: &ScanMeta,
    rows: &[TraceRow],
) -> io::Result<()> {
    let meta_v = meta_value("g2t", meta);
    match format {
        Format::Csv => {
            write_preamble(out, &meta_v)?;
            writeln!(out, "{TRACE_HEADER}")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{}",
                    num(r.t),
                    num(r.g2),
                    num(clamped_log10(r.g2))
                )?;
            }
            Ok(())
        }
        Format::Json => {
            let rows = rows
                .iter()
                .map(|r| json!({"t": r.t, "g2": r.g2, "log10_g2": clamped_log10(r.g2)}))
                .collect();
            write_json(out, meta_v, rows)
        }
    }
}

pub fn write_json(out: &mut dyn Write, meta: Value, rows: Vec<Value>) -> io::Result<()> {
    let mut doc = Map::new();
    doc.insert("meta".into(), meta);
    doc.insert("rows".into(), Value::Array(rows));
    serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
    writeln!(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Number(f64),
    Undefined,
    Empty,
}

impl Cell {
    pub fn number(&self) -> Option<f64> {
        match self {
            Cell::Number(x) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Reads a CSV file in the format written above.
pub fn parse_csv(text: &str) -> Result<Table, String> {
    let mut meta = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim_start()
                .split_once(": ")
                .ok_or_else(|| format!("line {}: malformed metadata", lineno + 1))?;
            meta.push((k.to_string(), v.to_string()));
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match &header {
            None => header = Some(fields.iter().map(|s| s.to_string()).collect()),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(format!(
                        "line {}: expected {} fields, found {}",
                        lineno + 1,
                        h.len(),
                        fields.len()
                    ));
                }
                let row = fields
                    .iter()
                    .map(|f| match *f {
                        "" => Ok(Cell::Empty),
                        UNDEFINED => Ok(Cell::Undefined),
                        s => s
                            .parse::<f64>()
                            .map(Cell::Number)
                            .map_err(|_| format!("line {}: bad number {s:?}", lineno + 1)),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
        }
    }
    Ok(Table {
        meta,
        header: header.ok_or("missing header")?,
        rows,
    })
}
