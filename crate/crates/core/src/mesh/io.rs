//! Plain-text mesh files.
//!
//! ```text
//! polymesh 1
//! vertices N
//! x y            (N lines)
//! cells M
//! v0 v1 v2 ...   (M lines, counter-clockwise)
//! periodic K     (optional)
//! edge_a edge_b  (K lines)
//! ```
//!
//! Coordinates are written with Rust's shortest round-trip formatting, so reading a written
//! file reproduces every vertex bit for bit. Edge indices refer to the deterministic edge
//! enumeration of [`PolyMesh::new`].

use std::fmt::Write as _;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

use super::{BoundaryTag, MeshError, PolyMesh};

#[derive(Debug, Error)]
pub enum MeshParseError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid mesh: {0}")]
    Invalid(#[from] MeshError),
}

/// Serialize a mesh to the text format.
pub fn mesh_to_string(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    s.push_str("polymesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    let _ = writeln!(s, "cells {}", mesh.n_cells());
    for c in mesh.cells() {
        let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    if mesh.is_periodic() {
        let _ = writeln!(s, "periodic {}", mesh.periodic_map().len());
        for (a, b) in mesh.periodic_map() {
            let _ = writeln!(s, "{a} {b}");
        }
    }
    s
}

pub fn write_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> io::Result<()> {
    std::fs::write(path, mesh_to_string(mesh))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh, MeshParseError> {
    let f = std::fs::File::open(path)?;
    parse_mesh(io::BufReader::new(f))
}

/// Parse the text format. Non-periodic boundary edges are tagged inflow/outflow.
pub fn parse_mesh(reader: impl BufRead) -> Result<PolyMesh, MeshParseError> {
    let mut lines = Lines { inner: reader.lines(), line: 0 };

    let (no, header) = lines.next_nonempty()?.ok_or(MeshParseError::Syntax { line: 1, msg: "empty file".into() })?;
    if header.split_whitespace().collect::<Vec<_>>() != ["polymesh", "1"] {
        return Err(syntax(no, format!("expected 'polymesh 1', found '{header}'")));
    }

    let n_vert = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(n_vert);
    for _ in 0..n_vert {
        let (no, l) = lines.require("vertex coordinates")?;
        let xs: Vec<&str> = l.split_whitespace().collect();
        if xs.len() != 2 {
            return Err(syntax(no, format!("expected 2 coordinates, found {}", xs.len())));
        }
        let x = parse_num::<f64>(xs[0], no)?;
        let y = parse_num::<f64>(xs[1], no)?;
        if !x.is_finite() || !y.is_finite() {
            return Err(syntax(no, "non-finite coordinate".into()));
        }
        vertices.push([x, y]);
    }

    let n_cells = lines.section("cells")?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (no, l) = lines.require("cell vertex list")?;
        let ids = l
            .split_whitespace()
            .map(|t| parse_num::<usize>(t, no))
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(ids);
    }

    let mut periodic = Vec::new();
    if let Some((no, l)) = lines.next_nonempty()? {
        let n = parse_section(&l, "periodic", no)?;
        for _ in 0..n {
            let (no, l) = lines.require("periodic edge pair")?;
            let ids: Vec<&str> = l.split_whitespace().collect();
            if ids.len() != 2 {
                return Err(syntax(no, "expected two edge indices".into()));
            }
            periodic.push((parse_num::<usize>(ids[0], no)?, parse_num::<usize>(ids[1], no)?));
        }
        if let Some((no, l)) = lines.next_nonempty()? {
            return Err(syntax(no, format!("unexpected trailing content '{l}'")));
        }
    }

    Ok(PolyMesh::new(vertices, cells, &periodic, BoundaryTag::InflowOutflow)?)
}

struct Lines<I> {
    inner: I,
    line: usize,
}

impl<I: Iterator<Item = io::Result<String>>> Lines<I> {
    fn next_nonempty(&mut self) -> Result<Option<(usize, String)>, MeshParseError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(Some((self.line, t.to_string())));
            }
        }
        Ok(None)
    }

    fn require(&mut self, what: &str) -> Result<(usize, String), MeshParseError> {
        let at = self.line + 1;
        self.next_nonempty()?
            .ok_or_else(|| syntax(at, format!("unexpected end of file, expected {what}")))
    }

    fn section(&mut self, name: &str) -> Result<usize, MeshParseError> {
        let (no, l) = self.require(&format!("'{name} <count>'"))?;
        parse_section(&l, name, no)
    }
}

fn parse_section(l: &str, name: &str, no: usize) -> Result<usize, MeshParseError> {
    let t: Vec<&str> = l.split_whitespace().collect();
    if t.len() != 2 || t[0] != name {
        return Err(syntax(no, format!("expected '{name} <count>', found '{l}'")));
    }
    parse_num(t[1], no)
}

fn parse_num<T: std::str::FromStr>(t: &str, no: usize) -> Result<T, MeshParseError> {
    t.parse().map_err(|_| syntax(no, format!("cannot parse '{t}'")))
}

fn syntax(line: usize, msg: String) -> MeshParseError {
    MeshParseError::Syntax { line, msg }
}
