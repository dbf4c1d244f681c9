use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::files::{write_atomic, write_json};
use crate::error::{Error, Result};
use crate::rd::Grid;

/// How grid values were mapped onto `0..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgmMapping {
    pub min: f64,
    pub max: f64,
    /// Set when `min == max`; every byte is then 0.
    pub constant: bool,
    pub width: usize,
    pub height: usize,
}

/// `frame.pgm` → `frame.json`.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

/// Binary 8-bit PGM, min-max normalized, with a JSON sidecar recording the map.
pub fn write_pgm(grid: &Grid, path: &Path) -> Result<PgmMapping> {
    let vals = grid.as_slice();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::invalid("cannot write a non-finite grid as PGM"));
    }
    let constant = min == max;
    let mut bytes = format!("P5\n{} {}\n255\n", grid.nx(), grid.ny()).into_bytes();
    bytes.extend(vals.iter().map(|v| {
        if constant {
            0
        } else {
            (255.0 * (v - min) / (max - min)).round().clamp(0.0, 255.0) as u8
        }
    }));
    let mapping = PgmMapping {
        min,
        max,
        constant,
        width: grid.nx(),
        height: grid.ny(),
    };
    write_atomic(path, &bytes)?;
    write_json(&sidecar_path(path), &mapping)?;
    Ok(mapping)
}

/// Returns `(width, height, pixels)` of an 8-bit P5 file.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let bad = |message: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: message.into(),
    };
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII PGM header"))?);
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected an 8-bit P5 file"));
    }
    let w: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    let data = bytes.get(pos + 1..).unwrap_or_default().to_vec();
    if data.len() != w * h {
        return Err(bad("pixel count does not match header"));
    }
    Ok((w, h, data))
}
