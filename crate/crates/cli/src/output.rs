//! Tables as CSV (header row first) or as a JSON array of objects.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::CliError;

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn emit<T: Serialize>(out: &mut dyn Write, format: Format, rows: &[T]) -> Result<(), CliError> {
    let values: Vec<Value> = rows
        .iter()
        .map(serde_json::to_value)
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Io(e.to_string()))?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &values).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out).map_err(|e| CliError::Io(e.to_string()))?;
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            let mut header_written = false;
            for value in &values {
                let Value::Object(map) = value else {
                    return Err(CliError::Io("table rows must be records".into()));
                };
                if !header_written {
                    writer.write_record(map.keys()).map_err(|e| CliError::Io(e.to_string()))?;
                    header_written = true;
                }
                writer
                    .write_record(map.values().map(cell))
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}
