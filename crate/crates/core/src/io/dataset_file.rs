//! Comma-separated dataset files.
//!
//! ```text
//! # format = sagnac-lab/1
//! # seed = 42
//! # columns = time_s,phase_b0_fwd_rad,phase_b0_rev_rad,aux_temp
//! # truth.applied_rotation_bias = 0.0
//! # truth.spec.aux.0.name = "temp"
//! # ...
//! time_s,phase_b0_fwd_rad,phase_b0_rev_rad,aux_temp
//! 1.0000000000000000e1,9.1325...e0,...
//! ```
//!
//! Truth values are JSON scalars keyed by their dotted path; array elements
//! use their index as the path segment. Table values carry 17 significant
//! digits so every binary64 value round-trips exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use super::FORMAT_VERSION;
use crate::error::{Error, Result};
use crate::simulator::{ChannelKey, Dataset, Truth};

const TIME_COLUMN: &str = "time_s";
const AUX_PREFIX: &str = "aux_";

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.to_string())),
    }
}

enum Node {
    Leaf(Value),
    Branch(BTreeMap<String, Node>),
}

impl Node {
    fn insert(&mut self, path: &[&str], value: Value) -> std::result::Result<(), String> {
        let Node::Branch(children) = self else {
            return Err("key nests under a scalar".into());
        };
        match path {
            [] => Err("empty key".into()),
            [last] => match children.insert(last.to_string(), Node::Leaf(value)) {
                None => Ok(()),
                Some(_) => Err("key conflicts with an earlier key".into()),
            },
            [head, rest @ ..] => children
                .entry(head.to_string())
                .or_insert_with(|| Node::Branch(BTreeMap::new()))
                .insert(rest, value),
        }
    }

    fn into_value(self) -> Value {
        match self {
            Node::Leaf(v) => v,
            Node::Branch(children) => {
                let indices: Option<BTreeSet<usize>> = children.keys().map(|k| k.parse().ok()).collect();
                match indices {
                    Some(idx) if idx.len() == children.len() && idx.last() == Some(&(idx.len() - 1)) => {
                        let mut items: Vec<(usize, Value)> = children
                            .into_iter()
                            .map(|(k, v)| (k.parse().unwrap_or(0), v.into_value()))
                            .collect();
                        items.sort_by_key(|(i, _)| *i);
                        Value::Array(items.into_iter().map(|(_, v)| v).collect())
                    }
                    _ => Value::Object(
                        children
                            .into_iter()
                            .map(|(k, v)| (k, v.into_value()))
                            .collect::<Map<String, Value>>(),
                    ),
                }
            }
        }
    }
}

fn column_names(dataset: &Dataset) -> Vec<String> {
    std::iter::once(TIME_COLUMN.to_string())
        .chain(dataset.phases.keys().map(|k| k.column_name()))
        .chain(dataset.aux.keys().map(|k| format!("{AUX_PREFIX}{k}")))
        .collect()
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a dataset in the text format. Rejects invalid or empty datasets.
pub fn dataset_to_string(dataset: &Dataset) -> Result<String> {
    dataset.validate()?;
    let columns = column_names(dataset);

    let mut out = String::new();
    out.push_str(&format!("# format = {FORMAT_VERSION}\n"));
    out.push_str(&format!("# seed = {}\n", dataset.truth.seed));
    out.push_str(&format!("# columns = {}\n", columns.join(",")));

    let mut truth = serde_json::to_value(&dataset.truth).map_err(|e| Error::Format(e.to_string()))?;
    if let Value::Object(map) = &mut truth {
        map.remove("seed");
    }
    let mut entries = Vec::new();
    flatten("truth", &truth, &mut entries);
    for (k, v) in entries {
        out.push_str(&format!("# {k} = {v}\n"));
    }

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    writer.write_record(&columns).map_err(csv_err)?;
    let series: Vec<&Vec<f64>> = std::iter::once(&dataset.time)
        .chain(dataset.phases.values())
        .chain(dataset.aux.values())
        .collect();
    for row in 0..dataset.len() {
        writer
            .write_record(series.iter().map(|s| format_value(s[row])))
            .map_err(csv_err)?;
    }
    let table = writer.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    out.push_str(&String::from_utf8(table).map_err(|e| Error::Format(e.to_string()))?);
    Ok(out)
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = dataset_to_string(dataset)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    dataset_from_str(&text)
}

enum Column {
    Time,
    Phase(ChannelKey),
    Aux(String),
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn classify(name: &str, line: usize) -> Result<Column> {
    if name == TIME_COLUMN {
        return Ok(Column::Time);
    }
    if let Some(aux) = name.strip_prefix(AUX_PREFIX) {
        if aux.is_empty() {
            return Err(parse_error(line, "empty auxiliary column name"));
        }
        return Ok(Column::Aux(aux.to_string()));
    }
    name.parse::<ChannelKey>()
        .map(Column::Phase)
        .map_err(|_| parse_error(line, format!("unknown column `{name}`")))
}

pub fn dataset_from_str(text: &str) -> Result<Dataset> {
    let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut truth_root = Node::Branch(BTreeMap::new());
    let mut truth_line = 0;
    let mut header_lines = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(body) = raw.strip_prefix('#') else {
            break;
        };
        header_lines = line;
        let Some((key, value)) = body.trim().split_once(" = ") else {
            return Err(parse_error(line, "header line is not `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if line == 1 && key != "format" {
            return Err(parse_error(line, "first line must declare the format version"));
        }
        if let Some(path) = key.strip_prefix("truth.") {
            let parsed: Value = serde_json::from_str(value)
                .map_err(|e| parse_error(line, format!("truth value for `{key}`: {e}")))?;
            let segments: Vec<&str> = path.split('.').collect();
            truth_root
                .insert(&segments, parsed)
                .map_err(|m| parse_error(line, format!("`{key}`: {m}")))?;
            if truth_line == 0 {
                truth_line = line;
            }
            continue;
        }
        if !matches!(key, "format" | "seed" | "columns") {
            return Err(parse_error(line, format!("unknown header key `{key}`")));
        }
        if header.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(parse_error(line, format!("duplicate header key `{key}`")));
        }
    }

    let (line, version) = header
        .get("format")
        .ok_or_else(|| parse_error(1, "missing format declaration"))?;
    if version != FORMAT_VERSION {
        return Err(parse_error(
            *line,
            format!("unsupported format `{version}`, expected `{FORMAT_VERSION}`"),
        ));
    }
    let (line, seed) = header
        .get("seed")
        .ok_or_else(|| parse_error(header_lines, "missing seed"))?;
    let seed: u64 = seed
        .parse()
        .map_err(|_| parse_error(*line, format!("seed `{seed}` is not a 64-bit unsigned integer")))?;
    let (columns_line, declared) = header
        .get("columns")
        .ok_or_else(|| parse_error(header_lines, "missing column declaration"))?;
    let declared: Vec<&str> = declared.split(',').map(str::trim).collect();
    let mut seen = BTreeSet::new();
    for name in &declared {
        if !seen.insert(*name) {
            return Err(parse_error(*columns_line, format!("duplicate column `{name}`")));
        }
    }

    if truth_line == 0 {
        return Err(parse_error(header_lines, "missing truth block"));
    }
    let mut truth = truth_root.into_value();
    if let Value::Object(map) = &mut truth {
        map.insert("seed".into(), Value::from(seed));
    }
    let truth: Truth = serde_json::from_value(truth)
        .map_err(|e| parse_error(truth_line, format!("truth block: {e}")))?;

    let table: String = text
        .lines()
        .skip(header_lines)
        .flat_map(|l| [l, "\n"])
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(table.as_bytes());
    let mut records = reader.records();
    let table_line = |rec: &csv::StringRecord| {
        header_lines + rec.position().map(|p| p.line() as usize).unwrap_or(1)
    };
    let csv_error = |e: csv::Error| {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(1);
        parse_error(header_lines + line, e.to_string())
    };

    let head = records
        .next()
        .ok_or_else(|| parse_error(header_lines + 1, "missing table header"))?
        .map_err(csv_error)?;
    let head_line = table_line(&head);
    let names: Vec<&str> = head.iter().map(str::trim).collect();
    if names != declared {
        return Err(parse_error(
            head_line,
            format!(
                "table header [{}] does not match declared columns [{}]",
                names.join(","),
                declared.join(",")
            ),
        ));
    }
    let kinds = names
        .iter()
        .map(|n| classify(n, head_line))
        .collect::<Result<Vec<Column>>>()?;
    if !kinds.iter().any(|k| matches!(k, Column::Time)) {
        return Err(parse_error(head_line, "missing time_s column"));
    }

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); kinds.len()];
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = table_line(&rec);
        if rec.len() != kinds.len() {
            return Err(parse_error(
                line,
                format!("expected {} fields, found {}", kinds.len(), rec.len()),
            ));
        }
        for ((cell, column), name) in rec.iter().zip(values.iter_mut()).zip(&names) {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_error(line, format!("`{cell}` in column {name} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_error(line, format!("non-finite value `{cell}` in column {name}")));
            }
            column.push(v);
        }
    }
    if values[0].is_empty() {
        return Err(parse_error(head_line, "table has no rows"));
    }

    let mut dataset = Dataset {
        time: Vec::new(),
        phases: BTreeMap::new(),
        aux: BTreeMap::new(),
        truth,
    };
    for (kind, column) in kinds.into_iter().zip(values) {
        match kind {
            Column::Time => dataset.time = column,
            Column::Phase(key) => {
                dataset.phases.insert(key, column);
            }
            Column::Aux(name) => {
                dataset.aux.insert(name, column);
            }
        }
    }
    dataset.validate()?;
    Ok(dataset)
}
