//! Field snapshot files: one ASCII header line
//! `QFLOW1 n=<n> N=<N> name=<id>[ toy=1]` followed by the values as
//! row-major little-endian `f64`.

use std::io::{BufRead, Write};

use super::{Grid, ScalarField};
use crate::error::{Error, Result};

const MAGIC: &str = "QFLOW1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub name: String,
    pub field: ScalarField,
}

pub fn write_snapshot<W: Write>(mut w: W, name: &str, field: &ScalarField) -> Result<()> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(Error::Format(format!("snapshot name {name:?} must be a non-empty token")));
    }
    let grid = field.grid();
    let mut header = format!("{MAGIC} n={} N={} name={name}", grid.n(), grid.points());
    if grid.is_toy() {
        header.push_str(" toy=1");
    }
    header.push('\n');
    w.write_all(header.as_bytes())?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<Snapshot> {
    let mut header = Vec::new();
    r.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let header = std::str::from_utf8(&header[..header.len() - 1])
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let mut tokens = header.split(' ');
    if tokens.next() != Some(MAGIC) {
        return Err(Error::Format(format!("expected {MAGIC} magic")));
    }
    let (mut n, mut points, mut name, mut toy) = (None, None, None, false);
    for tok in tokens {
        let (key, value) = tok.split_once('=').ok_or_else(|| Error::Format(format!("bad header token {tok:?}")))?;
        let parse = |v: &str| v.parse::<usize>().map_err(|_| Error::Format(format!("bad value in {tok:?}")));
        match key {
            "n" => n = Some(parse(value)?),
            "N" => points = Some(parse(value)?),
            "name" => name = Some(value.to_string()),
            "toy" => {
                toy = match value {
                    "1" => true,
                    "0" => false,
                    _ => return Err(Error::Format(format!("bad toy flag {value:?}"))),
                }
            }
            _ => return Err(Error::Format(format!("unknown header key {key:?}"))),
        }
    }
    let (n, points, name) = match (n, points, name) {
        (Some(n), Some(p), Some(name)) => (n, p, name),
        _ => return Err(Error::Format("header needs n, N and name".into())),
    };
    let grid = Grid::new(n, points, toy).map_err(|e| Error::Format(e.to_string()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Format(format!("expected {} data bytes, found {}", grid.len() * 8, bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = ScalarField::from_values(grid, values).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Snapshot { name, field })
}
