//! CSV output, configuration echo and the aligned summary table.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};

pub struct Report {
    out: Option<PathBuf>,
    echo: Vec<String>,
}

impl Report {
    pub fn new(out: Option<PathBuf>) -> Self {
        Report { out, echo: Vec::new() }
    }

    pub fn echo(&mut self, line: String) {
        self.echo.push(line);
    }

    /// CSV to `--out` (plus `--out.config` with the echo), or to stdout with the echo on stderr.
    pub fn write_csv(&self, header: &str, lines: &[String]) -> Result<()> {
        let mut text = String::with_capacity(64 * (lines.len() + 1));
        text.push_str(header);
        text.push('\n');
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        match &self.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                let mut cfg = path.clone().into_os_string();
                cfg.push(".config");
                fs::write(&cfg, self.echo.join("\n") + "\n").with_context(|| format!("writing {}", cfg.to_string_lossy()))?;
            }
            None => {
                for e in &self.echo {
                    eprintln!("# {e}");
                }
                io::stdout().write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }

    /// Pivot `(row, column, value)` triples into an aligned table, on stdout when the CSV went to
    /// a file and on stderr otherwise.
    pub fn table(&self, cells: &[(String, String, String)]) {
        let mut rows: Vec<&str> = Vec::new();
        let mut cols: Vec<&str> = Vec::new();
        for (r, c, _) in cells {
            if !rows.contains(&r.as_str()) {
                rows.push(r);
            }
            if !cols.contains(&c.as_str()) {
                cols.push(c);
            }
        }
        let get = |r: &str, c: &str| cells.iter().find(|x| x.0 == r && x.1 == c).map(|x| x.2.as_str()).unwrap_or("");
        let w0 = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let widths: Vec<usize> =
            cols.iter().map(|c| rows.iter().map(|r| get(r, c).len()).max().unwrap_or(0).max(c.len())).collect();
        let mut s = format!("{:w0$}", "");
        for (c, w) in cols.iter().zip(&widths) {
            s += &format!("  {c:>w$}");
        }
        s.push('\n');
        for r in &rows {
            s += &format!("{r:w0$}");
            for (c, w) in cols.iter().zip(&widths) {
                s += &format!("  {:>w$}", get(r, c));
            }
            s.push('\n');
        }
        if self.out.is_some() {
            print!("{s}");
        } else {
            eprint!("{s}");
        }
    }
}
