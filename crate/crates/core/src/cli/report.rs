//! Report tables shared by the delimited-text and JSON outputs.

use std::io::Write;
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::month::MonthStamp;

/// Where a table came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub data_start: MonthStamp,
    pub data_end: MonthStamp,
    pub window_start: MonthStamp,
    pub window_end: MonthStamp,
}

/// Named numeric columns in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics(pub Vec<(String, f64)>);

impl Metrics {
    pub fn push(&mut self, name: &str, value: f64) {
        self.0.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|(n, _)| n.as_str()).collect()
    }
}

impl Serialize for Metrics {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &v.is_finite().then_some(*v))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Metrics {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        // Key order is not preserved by the generic map; callers only look
        // values up by name after reading a report back.
        let map = std::collections::BTreeMap::<String, Option<f64>>::deserialize(deserializer)?;
        Ok(Metrics(map.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect()))
    }
}

/// One row: identifying labels plus metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub labels: Vec<(String, String)>,
    pub values: Metrics,
}

impl Row {
    pub fn label(&self, name: &str) -> Option<&str> {
        self.labels.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub provenance: Provenance,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &str, provenance: &Provenance) -> Self {
        Self {
            name: name.into(),
            provenance: provenance.clone(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, labels: &[(&str, String)], values: Metrics) {
        self.rows.push(Row {
            labels: labels.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            values,
        });
    }

    /// Rows whose labels match every `(name, value)` pair.
    pub fn find(&self, filter: &[(&str, &str)]) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| filter.iter().all(|(k, v)| r.label(k) == Some(*v)))
            .collect()
    }

    /// Writes the table as comma-delimited text with a provenance comment
    /// line carrying the config hash.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "# config_hash={}", self.provenance.config_hash).map_err(io)?;
        let Some(first) = self.rows.first() else {
            return out.flush().map_err(io);
        };
        let mut header: Vec<&str> = first.labels.iter().map(|(k, _)| k.as_str()).collect();
        header.extend(first.values.names());
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for row in &self.rows {
            let mut cells: Vec<String> = row.labels.iter().map(|(_, v)| v.clone()).collect();
            cells.extend(row.values.0.iter().map(|(_, v)| format_value(*v)));
            writeln!(out, "{}", cells.join(",")).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Fixed-width plain-text rendering.
    pub fn render(&self) -> String {
        let mut grid: Vec<Vec<String>> = Vec::new();
        if let Some(first) = self.rows.first() {
            let mut header: Vec<String> = first.labels.iter().map(|(k, _)| k.clone()).collect();
            header.extend(first.values.names().into_iter().map(str::to_string));
            grid.push(header);
        }
        for row in &self.rows {
            let mut cells: Vec<String> = row.labels.iter().map(|(_, v)| v.clone()).collect();
            cells.extend(row.values.0.iter().map(|(_, v)| {
                if v.is_finite() {
                    format!("{v:.4}")
                } else {
                    format_value(*v)
                }
            }));
            grid.push(cells);
        }
        let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| grid.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
            .collect();
        let mut text = format!("== {} ==\n", self.name);
        for row in grid {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| format!("{cell:>w$}", w = widths[c]))
                .collect();
            text.push_str(line.join("  ").trim_end());
            text.push('\n');
        }
        text
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Every table of one backtest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub provenance: Provenance,
    pub tables: Vec<Table>,
}

impl BacktestReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    }

    pub fn render(&self) -> String {
        let p = &self.provenance;
        let mut text = format!(
            "config {}\nseeds {:?}\ndata {}..{}, evaluation {}..{}\n\n",
            p.config_hash, p.seeds, p.data_start, p.data_end, p.window_start, p.window_end
        );
        for t in &self.tables {
            text.push_str(&t.render());
            text.push('\n');
        }
        text
    }
}
