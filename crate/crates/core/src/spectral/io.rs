use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Field, SpectralError};

/// Writes `x,u` rows with 17 significant digits.
pub fn write_snapshot(path: &Path, f: &Field) -> Result<(), SpectralError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,u")?;
    for (j, v) in f.samples().iter().enumerate() {
        writeln!(w, "{:.16e},{:.16e}", f.grid().node(j), v)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `x,u` file back into node and value columns.
pub fn read_snapshot(path: &Path) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let text = fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if i == 0 && line.starts_with('x') || line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = || -> Result<f64, SpectralError> {
            let tok = parts.next().ok_or_else(|| SpectralError::Parse { line: i + 1, msg: "expected two columns".into() })?;
            tok.trim()
                .parse()
                .map_err(|e| SpectralError::Parse { line: i + 1, msg: format!("{tok:?}: {e}") })
        };
        xs.push(next()?);
        us.push(next()?);
    }
    Ok((xs, us))
}
