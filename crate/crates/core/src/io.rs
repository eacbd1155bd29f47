//! Text formats for graphs and data matrices.
//!
//! Edge lists start with a `m=<count>` header followed by one `i,j,weight`
//! line per nonzero edge (`i < j`, 0-indexed, weight in scientific notation
//! with 17 significant digits so values round-trip exactly). Dense matrices
//! are plain CSV, one row per line.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{edge_count, edge_index, edge_pairs, EdgeVector};

pub fn write_edge_list<W: Write>(w: &EdgeVector, mut out: W) -> Result<()> {
    writeln!(out, "m={}", w.nodes())?;
    for ((i, j), &x) in edge_pairs(w.nodes()).zip(w.weights()) {
        if x != 0.0 {
            writeln!(out, "{i},{j},{x:.16e}")?;
        }
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads an edge list; pairs that are not listed get weight zero.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<EdgeVector> {
    let mut lines = input.lines().enumerate();
    let m = loop {
        let Some((n, line)) = lines.next() else {
            return Err(parse_err(1, "missing m=<count> header"));
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let count = line
            .strip_prefix("m=")
            .ok_or_else(|| parse_err(n + 1, "expected m=<count> header"))?;
        break count
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(n + 1, format!("bad node count: {e}")))?;
    };
    let mut w = vec![0.0; edge_count(m)];
    for (n, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(n + 1, "expected i,j,weight"));
        }
        let i: usize = fields[0].parse().map_err(|e| parse_err(n + 1, format!("bad node index: {e}")))?;
        let j: usize = fields[1].parse().map_err(|e| parse_err(n + 1, format!("bad node index: {e}")))?;
        let x: f64 = fields[2].parse().map_err(|e| parse_err(n + 1, format!("bad weight: {e}")))?;
        if i >= j || j >= m {
            return Err(parse_err(n + 1, format!("pair ({i}, {j}) must satisfy i < j < {m}")));
        }
        w[edge_index(m, i, j)] = x;
    }
    EdgeVector::new(m, w)
}

pub fn write_matrix_csv<W: Write>(x: &DMatrix<f64>, mut out: W) -> Result<()> {
    for row in x.row_iter() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                out.write_all(b",")?;
            }
            write!(out, "{v}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(n + 1, format!("bad number: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(n + 1, format!("expected {} columns, got {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "empty matrix"));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

pub fn write_coords_csv<W: Write>(coords: &[[f64; 2]], mut out: W) -> Result<()> {
    writeln!(out, "x,y")?;
    for p in coords {
        writeln!(out, "{},{}", p[0], p[1])?;
    }
    Ok(())
}
