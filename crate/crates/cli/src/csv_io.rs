//! Header-first, comma-delimited numeric CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use collinear_lens_core::{Column, Dataset};

use crate::error::CliError;

/// Reads a dataset; the response defaults to the last column.
pub fn read_csv(path: &Path, response: Option<&str>) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_csv(file, response)
}

pub fn parse_csv<R: Read>(input: R, response: Option<&str>) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::Csv {
            row: 1,
            column: None,
            message: "missing header row".into(),
        });
    }
    if let Some(blank) = header.iter().position(String::is_empty) {
        return Err(CliError::Csv {
            row: 1,
            column: None,
            message: format!("header field {} is empty", blank + 1),
        });
    }
    let response = match response {
        Some(name) => {
            if !header.iter().any(|h| h == name) {
                return Err(CliError::Config(format!(
                    "response column `{name}` not found; columns are [{}]",
                    header.join(", ")
                )));
            }
            name.to_string()
        }
        None => header.last().cloned().unwrap_or_default(),
    };

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| csv_error(e, line))?;
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| CliError::Csv {
                row: line,
                column: Some(header[j].clone()),
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(CliError::Csv {
                    row: line,
                    column: Some(header[j].clone()),
                    message: format!("`{cell}` is not finite"),
                });
            }
            values[j].push(v);
        }
    }
    let columns = header
        .into_iter()
        .zip(values)
        .map(|(name, v)| Column::new(name, v))
        .collect();
    Ok(Dataset::new(columns, &response)?)
}

fn csv_error(e: csv::Error, line: usize) -> CliError {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(line);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    };
    CliError::Csv {
        row,
        column: None,
        message,
    }
}

/// Writes every column in dataset order with shortest round-trip formatting.
pub fn write_csv<W: Write>(data: &Dataset, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io {
        path: "<output>".into(),
        message: e.to_string(),
    };
    w.write_record(data.columns().iter().map(|c| c.name.as_str()))
        .map_err(io)?;
    for i in 0..data.n() {
        w.write_record(data.columns().iter().map(|c| c.values[i].to_string()))
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "<output>".into(),
        message: e.to_string(),
    })
}
