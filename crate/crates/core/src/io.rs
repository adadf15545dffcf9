//! Instance files: one list per CSV file with header `label,score`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::instance::{LabeledList, ScoreVector};

/// One parsed list.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    /// File name the list came from.
    pub name: String,
    pub labels: LabeledList,
    pub scores: ScoreVector,
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses CSV text. `source` names the input in diagnostics.
pub fn parse_instance(source: &str, text: &str) -> Result<NamedInstance> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_error(source, 1, e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["label", "score"] {
        return Err(parse_error(source, 1, format!("expected header `label,score`, found `{}`", names.join(","))));
    }
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_error(source, line, format!("expected 2 fields, found {}", record.len())));
        }
        let label = match &record[0] {
            "0" => false,
            "1" => true,
            other => return Err(parse_error(source, line, format!("label `{other}` is not 0 or 1"))),
        };
        let score: f64 = record[1]
            .parse()
            .map_err(|_| parse_error(source, line, format!("score `{}` is not a number", &record[1])))?;
        if !score.is_finite() {
            return Err(parse_error(source, line, format!("score `{}` is not finite", &record[1])));
        }
        labels.push(label);
        scores.push(score);
    }
    if labels.is_empty() {
        return Err(parse_error(source, 1, "no data rows"));
    }
    Ok(NamedInstance {
        name: source.to_string(),
        labels: LabeledList::new(labels)?,
        scores: ScoreVector::new(scores)?,
    })
}

pub fn read_instance(path: &Path) -> Result<NamedInstance> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&path.display().to_string(), &text)
}

/// A single file, or every `*.csv` file of a directory in name order.
pub fn read_instances(path: &Path) -> Result<Vec<NamedInstance>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        files.iter().map(|p| read_instance(p)).collect()
    } else if path.is_file() {
        Ok(vec![read_instance(path)?])
    } else {
        Err(Error::Io(format!("{}: no such file or directory", path.display())))
    }
}

/// Serializes one record as a single JSON line.
pub fn json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| invalid(e.to_string()))
}
