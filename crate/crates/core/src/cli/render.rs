//! Table, CSV and JSON encodings of a command's records.
//!
//! Every encoding starts with the effective run configuration. CSV and JSON
//! carry the same fields per record, and floats are written in shortest
//! round-trip form, so both parse back to identical values.

use serde_json::{Map, Value as Json};

use super::config::{OutputFormat, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Null,
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Value::Int(n) => Json::from(*n),
            Value::Text(s) => Json::from(s.as_str()),
            Value::Bool(b) => Json::from(*b),
            Value::Null => Json::Null,
        }
    }

    fn to_text(&self) -> String {
        match self {
            Value::Float(x) => x.to_string(),
            Value::Int(n) => n.to_string(),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Null => String::new(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Int(n)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as u64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// One output row: ordered named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, name: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((name, value.into()));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }
}

/// Above this many columns the table switches to one key/value block per record.
const MAX_TABLE_COLUMNS: usize = 12;

pub fn render(config: &RunConfig, records: &[Record]) -> String {
    match config.output {
        OutputFormat::Json => render_json(config, records),
        OutputFormat::Csv => render_csv(config, records),
        OutputFormat::Table => render_table(config, records),
    }
}

fn config_comment(config: &RunConfig) -> String {
    config.to_toml().lines().map(|l| format!("# {l}\n")).collect()
}

fn render_json(config: &RunConfig, records: &[Record]) -> String {
    let rows: Vec<Json> = records
        .iter()
        .map(|r| Json::Object(r.fields.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect::<Map<_, _>>()))
        .collect();
    let mut doc = Map::new();
    doc.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    doc.insert("rows".into(), Json::Array(rows));
    let mut out = serde_json::to_string_pretty(&Json::Object(doc)).expect("json encodes");
    out.push('\n');
    out
}

fn render_csv(config: &RunConfig, records: &[Record]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if let Some(first) = records.first() {
        writer
            .write_record(first.fields.iter().map(|(k, _)| *k))
            .expect("in-memory write");
    }
    for r in records {
        writer
            .write_record(r.fields.iter().map(|(_, v)| v.to_text()))
            .expect("in-memory write");
    }
    let body = String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    config_comment(config) + &body
}

fn render_table(config: &RunConfig, records: &[Record]) -> String {
    let mut out = config_comment(config);
    out.push('\n');
    let Some(first) = records.first() else {
        return out;
    };
    let headers: Vec<&str> = first.fields.iter().map(|(k, _)| *k).collect();
    let cells: Vec<Vec<String>> = records
        .iter()
        .map(|r| r.fields.iter().map(|(_, v)| display(v)).collect())
        .collect();
    if headers.len() > MAX_TABLE_COLUMNS {
        let key_width = headers.iter().map(|h| h.len()).max().unwrap_or(0);
        for (i, row) in cells.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for (h, c) in headers.iter().zip(row) {
                out.push_str(&format!("{h:<key_width$}  {c}\n"));
            }
        }
        return out;
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|j| cells.iter().map(|r| r[j].len()).chain([headers[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |items: Vec<&str>| -> String {
        let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    out.push_str(&line(headers.clone()));
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn display(v: &Value) -> String {
    match v {
        Value::Null => "-".to_string(),
        other => other.to_text(),
    }
}
