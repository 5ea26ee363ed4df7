//! Signal ingestion and output: single-column (or column-selected) CSV and
//! headerless little-endian f64.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use envcv_core::Signal;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    #[value(name = "raw-f64le", alias = "raw_f64le")]
    RawF64le,
}

impl Format {
    /// `.f64`, `.raw` and `.bin` are raw; everything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("f64" | "raw" | "bin") => Format::RawF64le,
            _ => Format::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::RawF64le => "f64",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::RawF64le => "raw_f64le",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: Format,
    pub column: usize,
    pub sample_rate_hz: f64,
}

impl InputSpec {
    pub fn read(&self) -> Result<Signal, CliError> {
        let bytes =
            fs::read(&self.path).map_err(|e| CliError::NoInput(format!("cannot read {}: {e}", self.path.display())))?;
        let samples = match self.format {
            Format::RawF64le => parse_raw(&bytes)?,
            Format::Csv => parse_csv(&bytes, self.column)?,
        };
        Signal::new(samples, self.sample_rate_hz)
            .map_err(|e| CliError::NoInput(format!("{}: {e}", self.path.display())))
    }
}

pub fn parse_raw(bytes: &[u8]) -> Result<Vec<f64>, CliError> {
    if bytes.len() % 8 != 0 {
        return Err(CliError::NoInput(format!(
            "truncated raw file: {} bytes is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Reads column `column` of every row; a first row that does not parse as a
/// number is treated as a header.
pub fn parse_csv(bytes: &[u8], column: usize) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::NoInput(format!("malformed CSV: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = record
            .get(column)
            .ok_or_else(|| CliError::NoInput(format!("row {}: no column {column}", row + 1)))?;
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(CliError::NoInput(format!("row {}: `{field}` is not a number", row + 1)));
            }
        }
    }
    Ok(out)
}

pub fn write_signal(path: &Path, format: Format, samples: &[f64]) -> std::io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    match format {
        Format::Csv => {
            for v in samples {
                writeln!(out, "{v}")?;
            }
        }
        Format::RawF64le => {
            for v in samples {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_round_trip_and_truncation() {
        let bytes: Vec<u8> = [1.5f64, -2.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        assert_eq!(parse_raw(&bytes).unwrap(), vec![1.5, -2.0]);
        let err = parse_raw(&bytes[..15]).unwrap_err();
        assert!(err.to_string().contains("truncated raw file"));
        assert_eq!(err.exit_code(), 66);
    }

    #[test]
    fn csv_header_and_columns() {
        let text = b"time,value\n0,1.5\n1, -2\n\n2,3e-1\n";
        assert_eq!(parse_csv(text, 1).unwrap(), vec![1.5, -2.0, 0.3]);
        assert_eq!(parse_csv(text, 0).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(parse_csv(b"1\nx\n", 0).is_err());
        assert!(parse_csv(b"1,2\n3\n", 1).is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(Format::from_path(Path::new("a.F64")), Format::RawF64le);
        assert_eq!(Format::from_path(Path::new("a.csv")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("a")), Format::Csv);
    }
}
