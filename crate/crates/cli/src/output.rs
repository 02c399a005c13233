use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Where rendered output goes, and in which format.
///
/// Tables carry their PASS/FAIL lines inline. For csv and json the payload
/// stays schema-clean and verdict lines go to stderr.
pub struct Sink {
    pub format: Format,
    out: Box<dyn Write>,
    color: bool,
}

impl Sink {
    pub fn open(format: Option<Format>, out: Option<&Path>) -> Result<Self> {
        let stdout_tty = io::stdout().is_terminal();
        let format = format.unwrap_or(if out.is_none() && stdout_tty {
            Format::Table
        } else {
            Format::Csv
        });
        let writer: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let color = format == Format::Table
            && out.is_none()
            && stdout_tty
            && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());
        Ok(Sink {
            format,
            out: writer,
            color,
        })
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}")?;
        Ok(())
    }

    pub fn verdict(&mut self, passed: bool, text: &str) -> Result<()> {
        let word = match (passed, self.color) {
            (true, true) => "\x1b[32mPASS\x1b[0m",
            (false, true) => "\x1b[31mFAIL\x1b[0m",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        if self.format == Format::Table {
            self.line(&format!("{word} {text}"))
        } else {
            eprintln!("{word} {text}");
            Ok(())
        }
    }

    pub fn csv<R: AsRef<[u8]>>(
        &mut self,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<R>>,
    ) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut self.out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Right-aligned columns under a header.
    pub fn table(&mut self, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let fmt_row = |cells: &mut dyn Iterator<Item = &str>| -> String {
            cells
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let head = fmt_row(&mut header.iter().copied());
        self.line(&head)?;
        for row in rows {
            let text = fmt_row(&mut row.iter().map(String::as_str));
            self.line(&text)?;
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let text = to_json(value)?;
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }

    /// Rows in whichever tabular format was selected.
    pub fn rows(&mut self, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        match self.format {
            Format::Csv => self.csv(header, rows),
            _ => self.table(header, &rows),
        }
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
