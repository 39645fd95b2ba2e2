use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::params::Format;

/// Rows of already formatted cells under a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip formatting; empty for missing values.
pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Prefix every row with extra leading columns.
    pub fn prefixed(mut self, names: &[&str], values: &[String]) -> Self {
        let mut header: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        header.append(&mut self.header);
        self.header = header;
        for r in &mut self.rows {
            let mut row = values.to_vec();
            row.append(r);
            *r = row;
        }
        self
    }

    pub fn append(&mut self, other: Table) -> Result<(), CliError> {
        if self.header.is_empty() {
            self.header = other.header;
        } else if self.header != other.header {
            return Err(CliError::Invalid("sweep produced tables with different columns".into()));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Array of objects; cells that parse as finite numbers become numbers.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (k, v) in self.header.iter().zip(r) {
                    let val = match v.parse::<f64>() {
                        Ok(x) if x.is_finite() => serde_json::Number::from_f64(x).map(Value::Number),
                        _ => None,
                    };
                    m.insert(k.clone(), val.unwrap_or_else(|| Value::String(v.clone())));
                }
                Value::Object(m)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let f = std::io::BufWriter::new(f);
        match format {
            Format::Csv => self.write_csv(f),
            Format::Json => {
                serde_json::to_writer_pretty(f, &self.to_json()).map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}
