//! CSV emission and run summaries.
//!
//! Every numeric cell is written with 17 significant digits in scientific
//! notation, with `.` as the decimal separator and no locale influence, so
//! downstream analysis reproduces values bitwise. When the CSV goes to
//! stdout, human-readable summary lines are diverted to stderr so the data
//! stream stays parseable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{config_err, CliError, Result};

/// Formats one numeric cell (17 significant digits).
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV destination plus the matching side channel for summary text.
pub struct CsvSink {
    writer: Box<dyn Write>,
    csv_on_stdout: bool,
}

impl CsvSink {
    /// Opens `path` for writing, or falls back to stdout.
    pub fn create(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let f = File::create(p).map_err(|e| {
                    config_err(format!("cannot create output file {}: {e}", p.display()))
                })?;
                Ok(CsvSink {
                    writer: Box::new(BufWriter::new(f)),
                    csv_on_stdout: false,
                })
            }
            None => Ok(CsvSink {
                writer: Box::new(BufWriter::new(std::io::stdout())),
                csv_on_stdout: true,
            }),
        }
    }

    /// Writes the header row.
    pub fn header(&mut self, columns: &[String]) -> Result<()> {
        let line = columns.join(",");
        writeln!(self.writer, "{line}").map_err(write_err)
    }

    /// Writes one data row.
    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
        writeln!(self.writer, "{}", cells.join(",")).map_err(write_err)
    }

    /// Prints one summary line to the stream not carrying the CSV.
    pub fn summary(&self, line: &str) {
        if self.csv_on_stdout {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }

    /// Flushes buffered rows.
    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(write_err)
    }
}

fn write_err(e: std::io::Error) -> CliError {
    CliError::Numeric(format!("failed writing output: {e}"))
}
