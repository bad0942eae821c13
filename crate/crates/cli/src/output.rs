//! Table and report writers. Decimal columns are IEEE binary64 values printed in
//! shortest round-trip form; exact columns are `p/q` or `sqrt(p/q)`.

use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const PRECISION_BITS: u32 = 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A rectangular table with string cells.
pub struct Table {
    kind: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(kind: &'static str, header: &[&'static str]) -> Self {
        Table {
            kind,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn emit(&self, format: Format) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                let bytes = w.into_inner().map_err(|e| e.into_error())?;
                let text = String::from_utf8(bytes).expect("csv output is utf-8");
                out_line(text.trim_end_matches('\n'));
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| (h.to_string(), cell_value(c)))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "kind": self.kind,
                    "precision_bits": PRECISION_BITS,
                    "rows": rows,
                });
                print_json(&doc);
            }
        }
        Ok(())
    }
}

/// Numbers stay numbers in JSON; exact rationals and flags stay strings.
fn cell_value(c: &str) -> Value {
    if let Ok(i) = c.parse::<i64>() {
        return json!(i);
    }
    if let Ok(x) = c.parse::<f64>() {
        if x.is_finite() && !c.contains('/') {
            return json!(x);
        }
    }
    match c {
        "true" => json!(true),
        "false" => json!(false),
        _ => json!(c),
    }
}

pub fn dec(x: f64) -> String {
    // no negative zero in reports
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

pub fn print_json(doc: &Value) {
    out_line(&serde_json::to_string_pretty(doc).expect("serializable"));
}

/// Writes one line to stdout; a closed pipe ends the process quietly.
pub fn out_line(line: &str) {
    let mut out = io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}").and_then(|()| out.flush()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("cannot write to stdout: {e}");
    }
}
