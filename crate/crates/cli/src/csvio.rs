//! Matrix CSV files: one header row, then one row per sample. Reals are
//! written with 17 significant digits, which reproduces every `f64`.

use std::path::Path;

use landmark_core::Matrix;

use crate::error::{io_error, CliError, CliResult};

/// Renders `m` with header `{prefix}0,{prefix}1,...`.
pub fn write_csv(m: &Matrix, prefix: &str) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..m.cols()).map(|j| format!("{prefix}{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format_real(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_csv(path: &Path) -> CliResult<Matrix> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_csv(&text).map_err(|message| CliError::Csv {
        path: path.to_path_buf(),
        message,
    })
}

/// Parses CSV text; errors name the 1-based line and column.
pub fn parse_csv(text: &str) -> Result<Matrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let width = reader
        .headers()
        .map_err(|e| format!("unreadable header: {e}"))?
        .len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format!("line {line}: {e}"))?;
        if record.len() != width {
            return Err(format!(
                "line {line}: ragged row with {} fields, header has {width}",
                record.len()
            ));
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| format!("line {line}, column {}: not a number: {field:?}", col + 1))?;
            data.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err("no data rows (header only)".into());
    }
    Matrix::from_vec(rows, width, data).map_err(|e| e.to_string())
}
