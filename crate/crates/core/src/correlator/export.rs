//! Correlogram export.
//!
//! CSV: header `gamma,doppler_offset,tau_ps,count`, one row per bin in
//! storage order (gamma-major, then Doppler, then delay).
//!
//! Binary: magic `QCG1`, a reserved `u32`, the record count as `u64`, then
//! one 32-byte record per bin in the same order: `gamma: f64`,
//! `doppler_offset: f64`, `tau_ps: i64`, `count: u64`. All little-endian.

use std::io::Write;

use super::Correlogram;
use crate::error::Result;

pub const CSV_HEADER: &str = "gamma,doppler_offset,tau_ps,count";
pub const BINARY_MAGIC: [u8; 4] = *b"QCG1";

fn records(cg: &Correlogram) -> impl Iterator<Item = (f64, f64, i64, u64)> + '_ {
    let grid = cg.grid();
    grid.cells().flat_map(move |(g, d)| {
        cg.slice(g, d)
            .iter()
            .enumerate()
            .map(move |(k, &c)| (grid.gammas[g], grid.doppler_offsets[d], grid.tau_of(k), c))
    })
}

pub fn write_csv<W: Write>(cg: &Correlogram, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for (gamma, doppler, tau, count) in records(cg) {
        writeln!(w, "{gamma},{doppler},{tau},{count}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(cg: &Correlogram, mut w: W) -> Result<()> {
    let n = cg.counts().len() as u64;
    let mut buf = Vec::with_capacity(16 + 32 * n as usize);
    buf.extend_from_slice(&BINARY_MAGIC);
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    for (gamma, doppler, tau, count) in records(cg) {
        buf.extend_from_slice(&gamma.to_le_bytes());
        buf.extend_from_slice(&doppler.to_le_bytes());
        buf.extend_from_slice(&tau.to_le_bytes());
        buf.extend_from_slice(&count.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

/// Delay profile of one cell: header `tau_ps,count`.
pub fn write_profile_csv<W: Write>(cg: &Correlogram, gamma_idx: usize, doppler_idx: usize, mut w: W) -> Result<()> {
    writeln!(w, "tau_ps,count")?;
    for (k, &c) in cg.slice(gamma_idx, doppler_idx).iter().enumerate() {
        writeln!(w, "{},{c}", cg.grid().tau_of(k))?;
    }
    w.flush()?;
    Ok(())
}
