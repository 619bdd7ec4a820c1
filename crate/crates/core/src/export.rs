//! Plain-text data files.
//!
//! CSV files open with `# key=value` comment lines carrying provenance, then
//! one header row. Numbers are written with 12 significant digits so files
//! are byte-identical across reruns.

use std::io::{self, Write};

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::pump::PumpComparison;
use crate::spectrum::{SpectrumSample, SqueezeSummary};
use crate::sweep::{SweepGrid, SweepSpec};

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn preamble<W: Write>(w: &mut W, meta: &[(&str, String)]) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn rows<W: Write>(w: &mut W, header: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        let line: Vec<String> = columns.iter().map(|c| num(c[i])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &Trajectory, meta: &[(&str, String)]) -> io::Result<()> {
    preamble(w, meta)?;
    rows(
        w,
        &["t", "g", "r", "n_th", "dx2", "dy2", "n_sig"],
        &[&traj.t, &traj.g, &traj.r, &traj.n_th, &traj.dx2, &traj.dy2, &traj.n_sig],
    )
}

pub fn write_spectrum_csv<W: Write>(w: &mut W, samples: &[SpectrumSample], meta: &[(&str, String)]) -> io::Result<()> {
    preamble(w, meta)?;
    let omega: Vec<f64> = samples.iter().map(|s| s.omega).collect();
    let sq: Vec<f64> = samples.iter().map(|s| s.squeezed).collect();
    let anti: Vec<f64> = samples.iter().map(|s| s.antisqueezed).collect();
    rows(w, &["omega", "s_squeeze_phase", "s_antisqueeze_phase"], &[&omega, &sq, &anti])
}

pub fn write_pump_csv<W: Write>(w: &mut W, cmp: &PumpComparison, meta: &[(&str, String)]) -> io::Result<()> {
    preamble(w, meta)?;
    rows(
        w,
        &["t", "g_analytic", "g_oracle_averaged", "g_oracle_raw"],
        &[&cmp.grid, &cmp.analytic, &cmp.oracle_averaged, &cmp.oracle_raw],
    )
}

/// Matrix with `axis1` down the rows and `axis2` across the columns; the
/// corner cell names both knobs.
pub fn write_contour_csv<W: Write>(w: &mut W, grid: &SweepGrid, matrix: &[Vec<f64>], meta: &[(&str, String)]) -> io::Result<()> {
    preamble(w, meta)?;
    let corner = format!("{}\\{}", grid.spec.axis1.knob.as_str(), grid.spec.axis2.knob.as_str());
    let mut header = vec![corner];
    header.extend(grid.axis2_values.iter().map(|&v| num(v)));
    writeln!(w, "{}", header.join(","))?;
    for (v1, row) in grid.axis1_values.iter().zip(matrix) {
        let mut line = vec![num(*v1)];
        line.extend(row.iter().map(|&v| num(v)));
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ContourSidecar<'a> {
    pub figure: Option<&'a str>,
    pub config_hash: &'a str,
    pub spec: &'a SweepSpec,
    pub axis1_values: &'a [f64],
    pub axis2_values: &'a [f64],
    pub layout: &'static str,
    pub files: Vec<String>,
    pub failed_cells: Vec<FailedCell>,
    pub integrator: &'a crate::sweep::IntegratorRecord,
}

#[derive(Debug, Serialize)]
pub struct FailedCell {
    pub i: usize,
    pub j: usize,
    pub error: String,
}

pub fn contour_sidecar<'a>(grid: &'a SweepGrid, figure: Option<&'a str>, files: Vec<String>) -> ContourSidecar<'a> {
    let n2 = grid.axis2_values.len();
    let failed_cells = grid
        .cells
        .iter()
        .enumerate()
        .filter_map(|(idx, c)| match c {
            crate::sweep::Cell::Failed { error, .. } => Some(FailedCell { i: idx / n2, j: idx % n2, error: error.clone() }),
            _ => None,
        })
        .collect();
    ContourSidecar {
        figure,
        config_hash: &grid.config_hash,
        spec: &grid.spec,
        axis1_values: &grid.axis1_values,
        axis2_values: &grid.axis2_values,
        layout: "rows follow axis1, columns follow axis2; failed cells are nan",
        files,
        failed_cells,
        integrator: &grid.integrator,
    }
}

/// Summary JSON with the dB sign convention spelled out.
#[derive(Debug, Serialize)]
pub struct SummaryDocument<'a> {
    pub config_hash: &'a str,
    pub sign_convention: &'static str,
    pub summary: &'a SqueezeSummary,
}

pub const SIGN_CONVENTION: &str = "squeezing_db is positive-good (noise below vacuum); antisqueezing_db is noise above vacuum";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        preamble(&mut buf, &[("config_hash", "abc".into())]).unwrap();
        rows(&mut buf, &["a", "b"], &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# config_hash=abc\na,b\n1.00000000000e0,3.00000000000e0\n2.00000000000e0,4.00000000000e0\n");
    }
}
