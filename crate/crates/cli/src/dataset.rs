//! Tabular output files with an embedded run manifest.
//!
//! Two layouts share one model:
//!
//! * JSON lines: `{"manifest": …}`, then `{"summary": …, "columns": […]}`,
//!   then one object per row.
//! * CSV: `# manifest <json>`, `# summary <json>`, `# types <t1,t2,…>`, a
//!   header row, then the data rows.
//!
//! Floats are written with 17 significant digits, so reading a file back
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value as Json};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        i64::try_from(v).map(Value::Int).unwrap_or(Value::Float(v as f64))
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::from(v as u64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Float(f) => Some(f),
            _ => None,
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Text(_) => "text",
            Value::Bool(_) => "bool",
            Value::Null => "null",
        }
    }
}

/// Seventeen significant digits; non-finite values have no JSON form.
pub fn format_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn write_json_value(out: &mut String, v: &Value) {
    match v {
        Value::Int(i) => write!(out, "{i}").unwrap(),
        Value::Float(f) => out.push_str(format_float(*f).as_deref().unwrap_or("null")),
        Value::Text(s) => out.push_str(&Json::String(s.clone()).to_string()),
        Value::Bool(b) => write!(out, "{b}").unwrap(),
        Value::Null => out.push_str("null"),
    }
}

fn write_json_object<'a>(out: &mut String, entries: impl IntoIterator<Item = (&'a str, &'a Value)>) {
    out.push('{');
    for (i, (k, v)) in entries.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&Json::String(k.to_owned()).to_string());
        out.push(':');
        write_json_value(out, v);
    }
    out.push('}');
}

fn from_json(j: &Json) -> Result<Value, CliError> {
    Ok(match j {
        Json::Null => Value::Null,
        Json::Bool(b) => Value::Bool(*b),
        Json::String(s) => Value::Text(s.clone()),
        Json::Number(n) => match n.as_i64() {
            Some(i) if !n.is_f64() => Value::Int(i),
            _ => Value::Float(n.as_f64().ok_or_else(|| CliError::Parse(format!("number {n} out of range")))?),
        },
        other => return Err(CliError::Parse(format!("unexpected nested value {other}"))),
    })
}

/// Provenance of an output file: enough to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Vec<(String, Value)>,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_owned(),
            params: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            duration_secs: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.push((key.to_owned(), value.into()));
        self
    }

    fn to_json(&self) -> String {
        let mut out = String::from("{\"subcommand\":");
        out.push_str(&Json::String(self.subcommand.clone()).to_string());
        out.push_str(",\"params\":");
        write_json_object(&mut out, self.params.iter().map(|(k, v)| (k.as_str(), v)));
        match self.seed {
            Some(s) => write!(out, ",\"seed\":{s}").unwrap(),
            None => out.push_str(",\"seed\":null"),
        }
        out.push_str(",\"version\":");
        out.push_str(&Json::String(self.version.clone()).to_string());
        out.push_str(",\"duration_secs\":");
        write_json_value(&mut out, &Value::Float(self.duration_secs));
        out.push('}');
        out
    }

    fn from_json(j: &Json) -> Result<Self, CliError> {
        let obj = j.as_object().ok_or_else(|| CliError::Parse("manifest is not an object".into()))?;
        let text = |key: &str| -> Result<String, CliError> {
            obj.get(key)
                .and_then(Json::as_str)
                .map(str::to_owned)
                .ok_or_else(|| CliError::Parse(format!("manifest lacks '{key}'")))
        };
        let params = obj
            .get("params")
            .and_then(Json::as_object)
            .ok_or_else(|| CliError::Parse("manifest lacks 'params'".into()))?
            .iter()
            .map(|(k, v)| Ok((k.clone(), from_json(v)?)))
            .collect::<Result<_, CliError>>()?;
        let seed = match obj.get("seed") {
            None | Some(Json::Null) => None,
            Some(s) => Some(s.as_u64().ok_or_else(|| CliError::Parse(format!("bad seed {s}")))?),
        };
        let duration_secs = obj.get("duration_secs").and_then(Json::as_f64).unwrap_or(0.0);
        Ok(Self { subcommand: text("subcommand")?, params, seed, version: text("version")?, duration_secs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: RunManifest,
    pub summary: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn new(manifest: RunManifest, columns: &[&str]) -> Self {
        Self {
            manifest,
            summary: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.push((key.to_owned(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summary_value(&self, key: &str) -> Option<&Value> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn summary_json(&self) -> String {
        let mut out = String::new();
        write_json_object(&mut out, self.summary.iter().map(|(k, v)| (k.as_str(), v)));
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = format!("{{\"manifest\":{}}}\n", self.manifest.to_json());
        let columns = Json::Array(self.columns.iter().cloned().map(Json::String).collect());
        writeln!(out, "{{\"summary\":{},\"columns\":{columns}}}", self.summary_json()).unwrap();
        for row in &self.rows {
            write_json_object(&mut out, self.columns.iter().map(String::as_str).zip(row));
            out.push('\n');
        }
        out
    }

    fn column_types(&self) -> Vec<&'static str> {
        (0..self.columns.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| &r[c])
                    .find(|v| !matches!(v, Value::Null))
                    .map_or("null", Value::type_name)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut head = format!("# manifest {}\n# summary {}\n", self.manifest.to_json(), self.summary_json());
        writeln!(head, "# types {}", self.column_types().join(",")).unwrap();
        if self.columns.is_empty() {
            return head;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| match v {
                Value::Int(i) => i.to_string(),
                Value::Float(f) => format_float(*f).unwrap_or_default(),
                Value::Text(s) => s.clone(),
                Value::Bool(b) => b.to_string(),
                Value::Null => String::new(),
            }))
            .expect("in-memory write");
        }
        head.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input"));
        head
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Jsonl => self.to_jsonl(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Copy with the wall-clock duration zeroed: the deterministic payload.
    pub fn payload(&self) -> Self {
        let mut d = self.clone();
        d.manifest.duration_secs = 0.0;
        d
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        std::fs::write(path, self.render(format)).map_err(|source| CliError::Io { path: path.to_owned(), source })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        text.parse()
    }

    fn parse_jsonl(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next_object = |what: &str| -> Result<Map<String, Json>, CliError> {
            let line = lines.next().ok_or_else(|| CliError::Parse(format!("missing {what} line")))?;
            match serde_json::from_str(line).map_err(|e| CliError::Parse(format!("{what}: {e}")))? {
                Json::Object(m) => Ok(m),
                _ => Err(CliError::Parse(format!("{what} line is not an object"))),
            }
        };
        let head = next_object("manifest")?;
        let manifest = RunManifest::from_json(
            head.get("manifest").ok_or_else(|| CliError::Parse("first line lacks 'manifest'".into()))?,
        )?;
        let second = next_object("summary")?;
        let summary = second
            .get("summary")
            .and_then(Json::as_object)
            .ok_or_else(|| CliError::Parse("second line lacks 'summary'".into()))?
            .iter()
            .map(|(k, v)| Ok((k.clone(), from_json(v)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let columns: Vec<String> = second
            .get("columns")
            .and_then(Json::as_array)
            .ok_or_else(|| CliError::Parse("second line lacks 'columns'".into()))?
            .iter()
            .map(|c| c.as_str().map(str::to_owned).ok_or_else(|| CliError::Parse("non-string column".into())))
            .collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        while let Ok(obj) = next_object("row") {
            let row = columns
                .iter()
                .map(|c| from_json(obj.get(c).unwrap_or(&Json::Null)))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { manifest, summary, columns, rows })
    }

    fn parse_csv(text: &str) -> Result<Self, CliError> {
        let mut rest = text;
        let mut comment = |tag: &str| -> Result<String, CliError> {
            let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
            rest = tail;
            line.strip_prefix(&format!("# {tag} "))
                .or_else(|| (line == format!("# {tag}")).then_some(""))
                .map(str::to_owned)
                .ok_or_else(|| CliError::Parse(format!("expected '# {tag}' line, got '{line}'")))
        };
        let manifest_json: Json =
            serde_json::from_str(&comment("manifest")?).map_err(|e| CliError::Parse(format!("manifest: {e}")))?;
        let manifest = RunManifest::from_json(&manifest_json)?;
        let summary_json: Json =
            serde_json::from_str(&comment("summary")?).map_err(|e| CliError::Parse(format!("summary: {e}")))?;
        let summary = summary_json
            .as_object()
            .ok_or_else(|| CliError::Parse("summary is not an object".into()))?
            .iter()
            .map(|(k, v)| Ok((k.clone(), from_json(v)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let types_line = comment("types")?;
        let types: Vec<String> = if types_line.is_empty() {
            Vec::new()
        } else {
            types_line.split(',').map(str::to_owned).collect()
        };

        if types.is_empty() && rest.trim().is_empty() {
            return Ok(Self { manifest, summary, columns: Vec::new(), rows: Vec::new() });
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::Parse(format!("header: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        if types.len() != columns.len() {
            return Err(CliError::Parse(format!("{} types for {} columns", types.len(), columns.len())));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Parse(format!("row {line}: {e}")))?;
            let row = record
                .iter()
                .zip(&types)
                .map(|(cell, ty)| parse_cell(cell, ty).map_err(|e| CliError::Parse(format!("row {line}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { manifest, summary, columns, rows })
    }
}

fn parse_cell(cell: &str, ty: &str) -> Result<Value, String> {
    if cell.is_empty() {
        return Ok(Value::Null);
    }
    let bad = |e: &dyn std::fmt::Display| format!("'{cell}' is not a valid {ty}: {e}");
    Ok(match ty {
        "int" => Value::Int(cell.parse().map_err(|e| bad(&e))?),
        "float" => Value::Float(cell.parse().map_err(|e| bad(&e))?),
        "bool" => Value::Bool(cell.parse().map_err(|e| bad(&e))?),
        "text" => Value::Text(cell.to_owned()),
        other => return Err(format!("unknown column type '{other}'")),
    })
}

impl FromStr for Dataset {
    type Err = CliError;

    /// Reads either layout, telling them apart by the first character.
    fn from_str(text: &str) -> Result<Self, CliError> {
        match text.trim_start().chars().next() {
            Some('{') => Self::parse_jsonl(text),
            Some('#') => Self::parse_csv(text),
            _ => Err(CliError::Parse("neither a JSON-lines nor a CSV dataset".into())),
        }
    }
}

/// Fixed-width histogram of `values` over their range.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in finite {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + width * i as f64, lo + width * (i + 1) as f64, c))
        .collect()
}
