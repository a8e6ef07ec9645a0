//! Binary and CSV persistence of two-time grids.
//!
//! Binary layout ("KBSYK1"): 6-byte magic, then `delta_t`, `lambda_t` as
//! little-endian f64 and `n_points` as little-endian u64, followed by the
//! row-major grid as interleaved (re, im) little-endian f64 pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::KbError;
use crate::grid::{ContourGreen, TimeLattice};
use crate::Result;

pub const MAGIC: &[u8; 6] = b"KBSYK1";

pub fn write_snapshot(path: &Path, green: &ContourGreen) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let lat = green.lattice();
    w.write_all(MAGIC)?;
    w.write_all(&lat.delta_t().to_le_bytes())?;
    w.write_all(&lat.lambda_t().to_le_bytes())?;
    w.write_all(&(lat.n_points() as u64).to_le_bytes())?;
    for v in green.greater_grid().iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<ContourGreen> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(KbError::Format(format!(
            "{} is not a KBSYK1 snapshot",
            path.display()
        )));
    }
    let mut f8 = [0u8; 8];
    r.read_exact(&mut f8)?;
    let delta_t = f64::from_le_bytes(f8);
    r.read_exact(&mut f8)?;
    let lambda_t = f64::from_le_bytes(f8);
    r.read_exact(&mut f8)?;
    let n = u64::from_le_bytes(f8) as usize;
    let lattice = TimeLattice::new(delta_t, lambda_t)?;
    if lattice.n_points() != n {
        return Err(KbError::Format(format!(
            "header n_points {} inconsistent with delta_t/lambda_t",
            n
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        r.read_exact(&mut f8)?;
        let re = f64::from_le_bytes(f8);
        r.read_exact(&mut f8)?;
        let im = f64::from_le_bytes(f8);
        data.push(Complex64::new(re, im));
    }
    let grid = Array2::from_shape_vec((n, n), data)
        .map_err(|e| KbError::Format(e.to_string()))?;
    ContourGreen::new(lattice, grid)
}

/// CSV export `(t1, t2, re, im)`, one row per lattice point. Meant for small
/// grids; the binary snapshot is the production format.
pub fn write_grid_csv(path: &Path, green: &ContourGreen) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t1,t2,re,im")?;
    let lat = green.lattice();
    for k1 in 0..lat.n_points() {
        for k2 in 0..lat.n_points() {
            let v = green.greater_at(k1, k2);
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(lat.time(k1)),
                fmt_f64(lat.time(k2)),
                fmt_f64(v.re),
                fmt_f64(v.im)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits: round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}
