//! Table and number formatting.

use std::fmt::Write as _;

use serde_json::{Map, Value};

/// Output layout selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Plain,
}

/// One evaluated point of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub bindings: Vec<(String, f64)>,
    pub value: f64,
    pub abs_err: f64,
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// JSON number, or `null` for values JSON cannot carry (NaN, ±inf).
pub fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn render_table(rows: &[Row], format: Format) -> Result<String, String> {
    let first = rows.first().ok_or("no rows to render")?;
    let keys: Vec<&str> = first.bindings.iter().map(|(k, _)| k.as_str()).collect();
    for row in rows {
        if !row.bindings.iter().map(|(k, _)| k.as_str()).eq(keys.iter().copied()) {
            return Err("rows carry different binding keys".into());
        }
    }
    let mut out = String::new();
    match format {
        Format::Csv => {
            for k in &keys {
                out.push_str(k);
                out.push(',');
            }
            out.push_str("value,abs_err\n");
            for row in rows {
                for (_, v) in &row.bindings {
                    out.push_str(&fmt_num(*v));
                    out.push(',');
                }
                let _ = writeln!(out, "{},{}", fmt_num(row.value), fmt_num(row.abs_err));
            }
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (k, v) in &row.bindings {
                        obj.insert(k.clone(), json_num(*v));
                    }
                    obj.insert("value".into(), json_num(row.value));
                    obj.insert("abs_err".into(), json_num(row.abs_err));
                    Value::Object(obj)
                })
                .collect();
            out = Value::Array(arr).to_string();
            out.push('\n');
        }
        Format::Plain => {
            if keys.is_empty() && rows.len() == 1 {
                let _ = writeln!(out, "{}", fmt_num(first.value));
                return Ok(out);
            }
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    let mut c: Vec<String> = row.bindings.iter().map(|(_, v)| fmt_num(*v)).collect();
                    c.push(fmt_num(row.value));
                    c.push(fmt_num(row.abs_err));
                    c
                })
                .collect();
            let header: Vec<&str> = keys.iter().copied().chain(["value", "abs_err"]).collect();
            let widths: Vec<usize> = (0..header.len())
                .map(|j| cells.iter().map(|c| c[j].len()).chain([header[j].len()]).max().unwrap_or(0))
                .collect();
            let line = |items: Vec<&str>| {
                let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(header.clone()));
            for c in &cells {
                let _ = writeln!(out, "{}", line(c.iter().map(String::as_str).collect()));
            }
        }
    }
    Ok(out)
}
