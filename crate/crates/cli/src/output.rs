//! Table export.
//!
//! Numbers are printed as the shortest decimal that parses back to the same
//! double, so identical runs give identical bytes and files round-trip
//! exactly. Missing values are `null` in both formats.

use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const NULL: &str = "null";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Null,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Num)
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => ryu::Buffer::new().format_finite(*v).to_string(),
            Cell::Num(_) | Cell::Null => NULL.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(_) | Cell::Null => s.serialize_none(),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

/// Ordered key/value pairs serialized as a JSON object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record(pub Vec<(String, Cell)>);

impl Record {
    pub fn push(&mut self, key: &str, cell: Cell) {
        self.0.push((key.to_string(), cell));
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn records(&self) -> Vec<Record> {
        self.rows
            .iter()
            .map(|row| {
                Record(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), v.clone()))
                        .collect(),
                )
            })
            .collect()
    }
}

/// Echo of the inputs that produced a document.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho<'a, S: Serialize> {
    pub command: &'a str,
    pub inputs: Record,
    pub settings: &'a S,
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    schema_version: u32,
    config: &'a C,
    #[serde(skip_serializing_if = "Option::is_none")]
    passed: Option<bool>,
    records: &'a R,
}

pub fn write_csv(table: &Table, w: &mut dyn Write) -> Result<(), CliError> {
    let mut wr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let io = |e: csv::Error| CliError::Io(e.into());
    wr.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        wr.write_record(row.iter().map(Cell::csv_text))
            .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

/// `{"schema_version", "config", ["passed",] "records"}`, pretty-printed with
/// a trailing newline.
pub fn write_json<C, R>(
    config: &C,
    passed: Option<bool>,
    records: &R,
    w: &mut dyn Write,
) -> Result<(), CliError>
where
    C: Serialize,
    R: Serialize,
{
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        config,
        passed,
        records,
    };
    serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| CliError::Io(e.into()))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_table<C: Serialize>(
    table: &Table,
    format: Format,
    config: &C,
    w: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(table, w),
        Format::Json => write_json(config, None, &table.records(), w),
    }
}
