//! Output directory handling and a small column table used for the CSV and
//! JSON forms of derived data.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use pilotwave::grid::fmt_f64;
use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;
use crate::svg::LineChart;

/// Named columns of equal length.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self {
            columns: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn column(mut self, name: &str, values: Vec<f64>) -> Self {
        debug_assert!(self.values.first().is_none_or(|c| c.len() == values.len()));
        self.columns.push(name.into());
        self.values.push(values);
        self
    }

    pub fn rows(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_error)?;
        for i in 0..self.rows() {
            w.write_record(self.values.iter().map(|c| fmt_f64(c[i]))).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Core(pilotwave::Error::Csv(e))
}

/// Files written by one command, and where.
pub struct Output {
    dir: PathBuf,
    formats: BTreeSet<Format>,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats: formats.iter().copied().collect(),
            written: Vec::new(),
        })
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    fn write(&mut self, name: String, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    /// CSV via `emit` and JSON via `json`, each only if requested.
    pub fn data<C, J>(&mut self, stem: &str, emit: C, json: J) -> Result<(), CliError>
    where
        C: FnOnce(&mut Vec<u8>) -> pilotwave::Result<()>,
        J: FnOnce() -> pilotwave::Result<String>,
    {
        if self.wants(Format::Csv) {
            let mut buf = Vec::new();
            emit(&mut buf)?;
            self.write(format!("{stem}.csv"), &buf)?;
        }
        if self.wants(Format::Json) {
            let text = json()?;
            self.write(format!("{stem}.json"), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        if self.wants(Format::Csv) {
            self.write(format!("{stem}.csv"), &table.to_csv()?)?;
        }
        if self.wants(Format::Json) {
            let text = serde_json::to_string_pretty(table).map_err(|e| CliError::Core(e.into()))?;
            self.write(format!("{stem}.json"), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn chart(&mut self, stem: &str, chart: &LineChart) -> Result<(), CliError> {
        if self.wants(Format::Svg) {
            self.write(format!("{stem}.svg"), chart.render().as_bytes())?;
        }
        Ok(())
    }
}
