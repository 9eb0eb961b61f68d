//! CSV and JSON output. Floats are written with `{:.16e}`, so files are
//! bitwise reproducible and round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::kink::{EtaSolution, KinkSolution};
use crate::painleve::PainleveSolution;

/// Writes `header` and then one line per row.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_kink_csv(path: &Path, sol: &KinkSolution) -> Result<()> {
    let rows = sol.grid.nodes.iter().zip(&sol.values).map(|(&x, &v)| vec![x, v]);
    write_csv(path, &["x", "v"], rows)
}

pub fn write_eta_csv(path: &Path, sol: &EtaSolution) -> Result<()> {
    let rows = sol.grid.nodes.iter().zip(&sol.values).map(|(&x, &v)| vec![x, v]);
    write_csv(path, &["x", "eta"], rows)
}

pub fn write_pii_csv(path: &Path, sol: &PainleveSolution) -> Result<()> {
    let rows = sol.grid.nodes.iter().zip(&sol.values).map(|(&s, &y)| vec![s, y]);
    write_csv(path, &["s", "y"], rows)
}

/// Tag used in output file names: the shortest representation of `v` that parses back to it.
pub fn number_tag(v: f64) -> String {
    format!("{v}")
}
