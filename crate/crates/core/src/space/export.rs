//! JSON and CSV serialization of search spaces.
//!
//! Every JSON layout carries `format`, `parameters` and `cartesian_size`,
//! plus one of:
//!
//! - `rows`: `[[v, ...], ...]`, values in parameter order
//! - `columns`: `{name: [v, ...], ...}`, index-aligned
//! - `configurations`: `[{name: v, ...}, ...]`
//!
//! CSV is a header of parameter names followed by one line per
//! configuration. Column types are inferred on import (integer, then real,
//! then boolean, then text), so text columns whose every cell looks like a
//! number do not survive a CSV round trip.

use std::io::{Read, Write};
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::SearchSpace;
use crate::solver::{Configuration, SolutionSet};
use crate::value::ParamValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    #[default]
    Rows,
    Columns,
    Maps,
}

impl ExportFormat {
    pub fn name(self) -> &'static str {
        match self {
            ExportFormat::Rows => "rows",
            ExportFormat::Columns => "columns",
            ExportFormat::Maps => "maps",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rows" => Ok(ExportFormat::Rows),
            "columns" => Ok(ExportFormat::Columns),
            "maps" => Ok(ExportFormat::Maps),
            other => Err(format!("unknown format `{other}` (expected rows, columns or maps)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ImportError {
    ImportError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn cartesian_json(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(n) => Value::from(n),
        Err(_) => Value::String(n.to_string()),
    }
}

pub fn export(space: &SearchSpace, format: ExportFormat) -> Value {
    let names = space.names();
    let set = space.solutions();
    let mut doc = Map::new();
    doc.insert("format".into(), json!(format.name()));
    doc.insert("parameters".into(), json!(names));
    doc.insert("cartesian_size".into(), cartesian_json(space.cartesian_size()));
    match format {
        ExportFormat::Rows => {
            let rows: Vec<Value> = (0..set.len())
                .map(|i| Value::Array((0..set.width()).map(|p| set.value(i, p).to_json()).collect()))
                .collect();
            doc.insert("rows".into(), Value::Array(rows));
        }
        ExportFormat::Columns => {
            let columns: Map<String, Value> = names
                .iter()
                .enumerate()
                .map(|(p, n)| (n.clone(), Value::Array((0..set.len()).map(|i| set.value(i, p).to_json()).collect())))
                .collect();
            doc.insert("columns".into(), Value::Object(columns));
        }
        ExportFormat::Maps => {
            let configs: Vec<Value> = (0..set.len())
                .map(|i| {
                    Value::Object(
                        names
                            .iter()
                            .enumerate()
                            .map(|(p, n)| (n.clone(), set.value(i, p).to_json()))
                            .collect(),
                    )
                })
                .collect();
            doc.insert("configurations".into(), Value::Array(configs));
        }
    }
    Value::Object(doc)
}

fn scalar(v: &Value, path: &str) -> Result<ParamValue, ImportError> {
    ParamValue::from_json(v).map_err(|m| schema(path, m))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ImportError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

/// Reads any of the JSON layouts written by [`export`].
pub fn import(doc: &Value) -> Result<SearchSpace, ImportError> {
    let obj = doc.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    let format: ExportFormat = obj
        .get("format")
        .ok_or_else(|| schema("$", "missing field `format`"))?
        .as_str()
        .ok_or_else(|| schema("$.format", "expected a string"))?
        .parse()
        .map_err(|m: String| schema("$.format", m))?;
    let names: Vec<String> = array(obj.get("parameters").ok_or_else(|| schema("$", "missing field `parameters`"))?, "$.parameters")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| schema(format!("$.parameters[{i}]"), "expected a string"))
        })
        .collect::<Result<_, _>>()?;
    let width = names.len();
    let field = |key: &str| obj.get(key).ok_or_else(|| schema("$", format!("missing field `{key}`")));
    let mut configs = Vec::new();
    match format {
        ExportFormat::Rows => {
            for (i, row) in array(field("rows")?, "$.rows")?.iter().enumerate() {
                let path = format!("$.rows[{i}]");
                let row = array(row, &path)?;
                if row.len() != width {
                    return Err(schema(path, format!("expected {width} values, found {}", row.len())));
                }
                let values = row
                    .iter()
                    .enumerate()
                    .map(|(p, v)| scalar(v, &format!("{path}[{p}]")))
                    .collect::<Result<_, _>>()?;
                configs.push(Configuration(values));
            }
        }
        ExportFormat::Columns => {
            let columns = field("columns")?
                .as_object()
                .ok_or_else(|| schema("$.columns", "expected an object"))?;
            let mut cols = Vec::with_capacity(width);
            for name in &names {
                let path = format!("$.columns.{name}");
                let col = array(columns.get(name).ok_or_else(|| schema("$.columns", format!("missing column `{name}`")))?, &path)?;
                if let Some(first) = cols.first().map(|c: &&Vec<Value>| c.len()) {
                    if col.len() != first {
                        return Err(schema(path, format!("expected {first} values, found {}", col.len())));
                    }
                }
                cols.push(col);
            }
            if let Some(extra) = columns.keys().find(|k| !names.contains(k)) {
                return Err(schema("$.columns", format!("unexpected column `{extra}`")));
            }
            let rows = cols.first().map_or(0, |c| c.len());
            for i in 0..rows {
                let values = cols
                    .iter()
                    .zip(&names)
                    .map(|(c, n)| scalar(&c[i], &format!("$.columns.{n}[{i}]")))
                    .collect::<Result<_, _>>()?;
                configs.push(Configuration(values));
            }
        }
        ExportFormat::Maps => {
            for (i, record) in array(field("configurations")?, "$.configurations")?.iter().enumerate() {
                let path = format!("$.configurations[{i}]");
                let record = record.as_object().ok_or_else(|| schema(&path, "expected an object"))?;
                if record.len() != width {
                    return Err(schema(path, format!("expected {width} keys, found {}", record.len())));
                }
                let values = names
                    .iter()
                    .map(|n| {
                        let v = record.get(n).ok_or_else(|| schema(&path, format!("missing key `{n}`")))?;
                        scalar(v, &format!("{path}.{n}"))
                    })
                    .collect::<Result<_, _>>()?;
                configs.push(Configuration(values));
            }
        }
    }
    let count = configs.len() as u128;
    let cartesian = match obj.get("cartesian_size") {
        None => count,
        Some(Value::Number(n)) => n
            .as_u64()
            .map(u128::from)
            .ok_or_else(|| schema("$.cartesian_size", "expected a non-negative integer"))?,
        Some(Value::String(s)) => s
            .parse()
            .map_err(|_| schema("$.cartesian_size", "expected a non-negative integer"))?,
        Some(_) => return Err(schema("$.cartesian_size", "expected a non-negative integer")),
    };
    let set = SolutionSet::from_configurations(names, &configs).map_err(|m| schema("$", m))?;
    SearchSpace::from_solutions(set, cartesian).map_err(|e| schema("$", e.to_string()))
}

fn cell(v: &ParamValue) -> String {
    match v {
        ParamValue::Int(i) => i.to_string(),
        ParamValue::Real(r) => format!("{r:?}"),
        ParamValue::Bool(b) => b.to_string(),
        ParamValue::Text(t) => t.to_string(),
    }
}

pub fn write_csv(space: &SearchSpace, out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(space.names())?;
    let set = space.solutions();
    for i in 0..set.len() {
        w.write_record((0..set.width()).map(|p| cell(set.value(i, p))))?;
    }
    w.flush()?;
    Ok(())
}

fn infer_column(cells: &[&str]) -> Vec<ParamValue> {
    if let Some(ints) = cells.iter().map(|c| c.parse::<i64>().ok()).collect::<Option<Vec<_>>>() {
        return ints.into_iter().map(ParamValue::Int).collect();
    }
    let reals: Option<Vec<_>> = cells
        .iter()
        .map(|c| c.parse::<f64>().ok().and_then(|r| ParamValue::real(r).ok()))
        .collect();
    if let Some(reals) = reals {
        return reals;
    }
    if let Some(bools) = cells.iter().map(|c| c.parse::<bool>().ok()).collect::<Option<Vec<_>>>() {
        return bools.into_iter().map(ParamValue::Bool).collect();
    }
    cells.iter().map(ParamValue::text).collect()
}

/// Reads a CSV written by [`write_csv`]. The Cartesian size is unknown and
/// is set to the number of configurations.
pub fn read_csv(input: impl Read) -> Result<SearchSpace, ImportError> {
    let mut r = csv::Reader::from_reader(input);
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let records: Vec<csv::StringRecord> = r.records().collect::<Result<_, _>>()?;
    let columns: Vec<Vec<ParamValue>> = (0..names.len())
        .map(|p| infer_column(&records.iter().map(|rec| rec.get(p).unwrap_or("")).collect::<Vec<_>>()))
        .collect();
    let configs: Vec<Configuration> = (0..records.len())
        .map(|i| Configuration(columns.iter().map(|c| c[i].clone()).collect()))
        .collect();
    let set = SolutionSet::from_configurations(names, &configs).map_err(|m| schema("csv", m))?;
    let count = set.len() as u128;
    SearchSpace::from_solutions(set, count).map_err(|e| schema("csv", e.to_string()))
}
