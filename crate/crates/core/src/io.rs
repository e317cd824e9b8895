//! CSV and JSON writers for run outputs.
//!
//! Floats in CSV files are written with 17 significant digits so that the
//! values round-trip exactly; JSON uses serde_json's shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::matrix::Matrix;
use crate::simulator::RunResult;
use crate::Result;

pub const TIMESERIES_HEADER: &str =
    "t,q1,q2,qd1,qd2,e11,e12,e21,e22,tau1,tau2,nn1,nn2,ff1,ff2,wnorm1,wnorm2";

fn push_num(line: &mut String, v: f64) {
    use std::fmt::Write as _;
    if !line.is_empty() {
        line.push(',');
    }
    if v.is_nan() {
        line.push_str("NaN");
    } else {
        let _ = write!(line, "{v:.16e}");
    }
}

/// Writes the recorded series; `nn*` and `wnorm*` are `NaN` for runs without
/// a network.
pub fn write_timeseries<W: Write>(mut w: W, run: &RunResult) -> Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    let nan = [f64::NAN; 2];
    let mut line = String::with_capacity(17 * 24);
    for k in 0..run.len() {
        line.clear();
        push_num(&mut line, run.t[k]);
        let nn = run.nn.as_ref().map_or(nan, |v| v[k]);
        let wn = run.weight_norm.as_ref().map_or(nan, |v| v[k]);
        for pair in [run.q[k], run.qd[k], run.e1[k], run.e2[k], run.tau[k], nn, run.ff[k], wn] {
            push_num(&mut line, pair[0]);
            push_num(&mut line, pair[1]);
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timeseries_file(path: &Path, run: &RunResult) -> Result<()> {
    write_timeseries(BufWriter::new(File::create(path)?), run)
}

/// Plain numeric CSV of a matrix, no header.
pub fn write_matrix_csv<W: Write>(mut w: W, m: &Matrix) -> Result<()> {
    let mut line = String::new();
    for row in m.iter_rows() {
        line.clear();
        for &v in row {
            push_num(&mut line, v);
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_csv_file(path: &Path, m: &Matrix) -> Result<()> {
    write_matrix_csv(BufWriter::new(File::create(path)?), m)
}

/// Trajectory samples and centers side by side (`z1..zp,c1..cp`); the
/// shorter block is padded with empty cells.
pub fn write_nodes_vs_trajectory<W: Write>(mut w: W, samples: &Matrix, centers: &Matrix) -> Result<()> {
    let header: Vec<String> = (1..=samples.cols())
        .map(|i| format!("z{i}"))
        .chain((1..=centers.cols()).map(|i| format!("c{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for k in 0..samples.rows().max(centers.rows()) {
        let mut cells = Vec::with_capacity(header.len());
        for block in [samples, centers] {
            for j in 0..block.cols() {
                cells.push(if k < block.rows() { format!("{:.16e}", block[(k, j)]) } else { String::new() });
            }
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_nodes_vs_trajectory_file(path: &Path, samples: &Matrix, centers: &Matrix) -> Result<()> {
    write_nodes_vs_trajectory(BufWriter::new(File::create(path)?), samples, centers)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
