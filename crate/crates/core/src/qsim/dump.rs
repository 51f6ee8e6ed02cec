//! Plain-text matrix dump used by golden-file tests.
//!
//! ```text
//! dim=<d>
//! <re> <im>,<re> <im>,...   (d lines, row-major)
//! ```
//! Every number is printed with 17 significant digits so the text round-trips
//! to the same `f64`.

use std::fmt::Write;

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{QssError, Result};

pub fn dump_matrix(m: &ComplexMatrix) -> String {
    let d = m.dim();
    let mut out = format!("dim={d}\n");
    for r in 0..d {
        for c in 0..d {
            if c > 0 {
                out.push(',');
            }
            let z = m.get(r, c);
            write!(out, "{:.16e} {:.16e}", z.re, z.im).expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn parse_dump(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| QssError::Parse("empty dump".into()))?;
    let dim: usize = header
        .strip_prefix("dim=")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| QssError::Parse(format!("bad header {header:?}")))?;
    let mut entries = Vec::with_capacity(dim * dim);
    for (row, line) in lines.by_ref().take(dim).enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim {
            return Err(QssError::Parse(format!("row {row} has {} entries", cells.len())));
        }
        for cell in cells {
            let mut parts = cell.split_whitespace();
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| QssError::Parse(format!("bad entry {cell:?} in row {row}")))
            };
            let re = next()?;
            let im = next()?;
            entries.push(Complex64::new(re, im));
        }
    }
    if entries.len() != dim * dim {
        return Err(QssError::Parse("dump ended early".into()));
    }
    ComplexMatrix::from_row_major(&entries)
}
