//! Output plumbing: CSV and JSON writers targeting a file or stdout.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! formatting, so identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_option(path: &Option<PathBuf>) -> Self {
        match path {
            Some(p) => Sink::File(p.clone()),
            None => Sink::Stdout,
        }
    }

    pub fn writer(&self) -> Result<Box<dyn Write>> {
        match self {
            Sink::Stdout => Ok(Box::new(BufWriter::new(std::io::stdout()))),
            Sink::File(path) => {
                let file = File::create(path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                Ok(Box::new(BufWriter::new(file)))
            }
        }
    }
}

/// Write `header` then rows of shortest-round-trip-formatted cells.
pub fn write_csv(sink: &Sink, header: &str, rows: &[Vec<CsvCell>]) -> Result<()> {
    let mut w = sink.writer()?;
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(CsvCell::render).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub enum CsvCell {
    Float(f64),
    Int(i64),
    Bool(bool),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Float(v) => format!("{v}"),
            CsvCell::Int(v) => format!("{v}"),
            CsvCell::Bool(v) => format!("{v}"),
        }
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize>(sink: &Sink, value: &T) -> Result<()> {
    let mut w = sink.writer()?;
    serde_json::to_writer_pretty(&mut w, value).context("JSON serialization failed")?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Distribution dump `t,n,p` with rounding-level negatives clipped to zero.
pub fn write_distribution_csv(
    path: &Path,
    times: &[f64],
    clipped: &[Vec<f64>],
) -> Result<()> {
    let sink = Sink::File(path.to_path_buf());
    let mut w = sink.writer()?;
    writeln!(w, "t,n,p")?;
    for (k, &t) in times.iter().enumerate() {
        for (n, &p) in clipped[k].iter().enumerate() {
            writeln!(w, "{t},{n},{p}")?;
        }
    }
    w.flush()?;
    Ok(())
}
