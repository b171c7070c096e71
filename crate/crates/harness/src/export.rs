//! Raw dumps of discrete potentials.
//!
//! `<prefix>.bin` holds the nodal values as little-endian `f64`, first index
//! fastest; `<prefix>.txt` is the header from
//! [`DiscretePotential::export_header`].

use std::fs;
use std::path::{Path, PathBuf};

use capacity_core::solver::DiscretePotential;

use crate::HarnessError;

/// Writes both files and returns their paths.
pub fn export_potential(u: &DiscretePotential, prefix: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    let bin = prefix.with_extension("bin");
    let header = prefix.with_extension("txt");
    let mut bytes = Vec::with_capacity(8 * u.values().len());
    for v in u.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes)?;
    fs::write(&header, u.export_header())?;
    Ok((bin, header))
}

/// Reads back a `.bin` file.
pub fn read_values(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(HarnessError::Invalid(format!("{}: length is not a multiple of 8", path.display())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}
