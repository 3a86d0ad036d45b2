//! Field export: raw little-endian `f64` values with a JSON sidecar, and CSV slices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::solver::CapacityResult;
use super::PdeError;

#[derive(Clone, Debug, Serialize)]
pub struct FieldHeader {
    pub dims: [usize; 3],
    pub spacing: f64,
    pub origin: [f64; 3],
    pub dtype: &'static str,
    /// `x` varies fastest.
    pub order: &'static str,
}

pub fn field_header(res: &CapacityResult) -> FieldHeader {
    let o = res.grid.origin();
    FieldHeader { dims: res.grid.dims(), spacing: res.grid.h(), origin: [o.x, o.y, o.z], dtype: "f64-le", order: "x-fastest" }
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn export_field(res: &CapacityResult, stem: &Path) -> Result<(), PdeError> {
    let io = |e: std::io::Error| PdeError::Io(e.to_string());
    let bytes: Vec<u8> = res.field.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(stem.with_extension("bin"), bytes).map_err(io)?;
    let header = serde_json::to_string_pretty(&field_header(res)).expect("header serializes");
    fs::write(stem.with_extension("json"), header).map_err(io)?;
    Ok(())
}

/// Reads back a field written by [`export_field`].
pub fn import_field(stem: &Path) -> Result<Vec<f64>, PdeError> {
    let bytes = fs::read(stem.with_extension("bin")).map_err(|e| PdeError::Io(e.to_string()))?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// `x,y,u` rows of the plane `z = origin.z + k·h`.
pub fn slice_csv(res: &CapacityResult, k: usize) -> String {
    let g = &res.grid;
    let [nx, ny, _] = g.dims();
    let mut out = String::from("x,y,u\n");
    for j in 0..ny {
        for i in 0..nx {
            let x = g.position(i, j, k);
            let _ = writeln!(out, "{},{},{}", x.x, x.y, res.field.values[g.index(i, j, k)]);
        }
    }
    out
}
