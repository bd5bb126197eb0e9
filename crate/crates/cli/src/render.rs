//! Deterministic output rendering: every command produces a JSON value,
//! printed either as pretty JSON or as indented plain text.

use std::path::PathBuf;

use serde_json::Value;
use starmap_core::HbarSeries;

use crate::CliError;

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// A series as a report value: `"0"` when it vanishes, otherwise a map
/// `level -> polynomial` with zero levels omitted.
pub fn series_value(series: &HbarSeries) -> Value {
    if series.is_zero() {
        Value::String("0".into())
    } else {
        serde_json::to_value(series.rendered()).expect("string map serializes")
    }
}

pub fn emit(value: &Value, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let body = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            text_lines(value, 0, None, &mut s);
            s
        }
    };
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::new(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn text_lines(value: &Value, depth: usize, key: Option<&str>, out: &mut String) {
    let pad = "  ".repeat(depth);
    let label = key.map(|k| format!("{k}: ")).unwrap_or_default();
    match value {
        Value::Object(map) => {
            if let Some(k) = key {
                out.push_str(&format!("{pad}{k}:\n"));
            }
            for (k, v) in map {
                text_lines(v, depth + usize::from(key.is_some()), Some(k), out);
            }
        }
        Value::Array(items) => {
            if let Some(k) = key {
                out.push_str(&format!("{pad}{k}:\n"));
            }
            for v in items {
                match v {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        text_lines(v, depth + 1, None, out);
                    }
                    _ => out.push_str(&format!("{pad}- {v}\n")),
                }
            }
        }
        Value::String(s) => out.push_str(&format!("{pad}{label}{s}\n")),
        other => out.push_str(&format!("{pad}{label}{other}\n")),
    }
}
