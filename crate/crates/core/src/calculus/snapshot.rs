//! Plain-text field snapshots.
//!
//! ```text
//! # grid dim=2 cells=4,4 extents=1,1
//! 0,0.125,0.125,0.5
//! ...
//! ```
//! One row per cell: `index,x[,y],value`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::calculus::field::ScalarField;
use crate::calculus::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_snapshot<T: Real, W: Write>(field: &ScalarField<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    let mut buf = format!("# grid dim={} cells={} extents={}\n", g.dim(), join(g.cells()), join(g.extents()));
    for (idx, v) in field.values().iter().enumerate() {
        let c = g.center(idx);
        let _ = write!(buf, "{idx}");
        for x in &c[..g.dim()] {
            let _ = write!(buf, ",{x}");
        }
        let _ = writeln!(buf, ",{v}");
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn parse_list<T: FromStr>(s: &str, key: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {key} entry `{t}`"))))
        .collect()
}

pub fn read_snapshot<T: Real + FromStr, R: BufRead>(input: R) -> Result<ScalarField<T>> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))??;
    let rest = header
        .strip_prefix("# grid")
        .ok_or_else(|| Error::Parse("missing `# grid` header".into()))?;
    let (mut dim, mut cells, mut extents) = (None, None, None);
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad header token `{kv}`")))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| Error::Parse("bad dim".into()))?),
            "cells" => cells = Some(parse_list::<usize>(v, "cells")?),
            "extents" => extents = Some(parse_list::<T>(v, "extents")?),
            other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
        }
    }
    let (dim, cells, extents) = match (dim, cells, extents) {
        (Some(d), Some(c), Some(e)) => (d, c, e),
        _ => return Err(Error::Parse("header needs dim, cells and extents".into())),
    };
    let grid = Grid::new(dim, &cells, &extents)?;
    let mut values = vec![T::nan(); grid.len()];
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != dim + 2 {
            return Err(Error::Parse(format!("expected {} columns in `{line}`", dim + 2)));
        }
        let idx: usize = cols[0].trim().parse().map_err(|_| Error::Parse(format!("bad index in `{line}`")))?;
        if idx >= grid.len() {
            return Err(Error::Parse(format!("index {idx} out of range")));
        }
        values[idx] = cols[dim + 1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value in `{line}`")))?;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(Error::Parse(format!("{seen} rows for {} cells", grid.len())));
    }
    ScalarField::from_values(grid, values)
}
