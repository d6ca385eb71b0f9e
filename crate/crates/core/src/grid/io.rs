use super::{GridSpec, GridVectorField};
use crate::error::Result;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// JSON sidecar describing a binary grid dump.
#[derive(Debug, Serialize)]
pub struct GridSidecar {
    pub schema: &'static str,
    pub grid: GridSpec,
    pub components: usize,
    pub dtype: &'static str,
    pub layout: &'static str,
    pub means: [f64; 3],
}

/// Writes `path` (little-endian f64, component-major, row-major `(i, j, k)`
/// with `i` along `y₁`) and `path.json`.
pub fn dump_binary(u: &GridVectorField, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(3 * u.spec.len() * 8);
    for c in &u.data {
        for v in c {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&bytes)?;
    let side = GridSidecar {
        schema: crate::SCHEMA,
        grid: u.spec,
        components: 3,
        dtype: "f64-le",
        layout: "component-major; row-major (i, j, k), i along y1",
        means: u.means(),
    };
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    std::fs::write(sidecar, serde_json::to_string_pretty(&side)?)?;
    Ok(())
}
