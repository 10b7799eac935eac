//! Grid serialisation.
//!
//! Binary layout: an ASCII header of `key value` lines (lines starting with
//! `#` carry provenance), terminated by `end_header\n`, then `nx*ny`
//! little-endian f64 thickness values, row-major with `iy` outer.

use std::io::{self, BufRead, Write};

use nalgebra::Vector2;

use super::DepositionGrid;

pub const GRID_MAGIC: &str = "EHDGRID 1";

/// Writes the thickness matrix as CSV, one row per `iy`, preceded by
/// `# `-prefixed header lines.
pub fn write_csv_matrix<W: Write>(grid: &DepositionGrid, header: &[String], mut w: W) -> io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(
        w,
        "# nx={} ny={} cell_size={:e} origin_x={:e} origin_y={:e} window={:e},{:e}",
        grid.nx, grid.ny, grid.cell_size, grid.origin.x, grid.origin.y, grid.window.0, grid.window.1
    )?;
    for row in grid.thickness.chunks(grid.nx) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_binary_grid<W: Write>(grid: &DepositionGrid, provenance: &[String], mut w: W) -> io::Result<()> {
    writeln!(w, "{GRID_MAGIC}")?;
    writeln!(w, "nx {}", grid.nx)?;
    writeln!(w, "ny {}", grid.ny)?;
    writeln!(w, "cell_size {:e}", grid.cell_size)?;
    writeln!(w, "origin {:e} {:e}", grid.origin.x, grid.origin.y)?;
    writeln!(w, "window {:e} {:e}", grid.window.0, grid.window.1)?;
    writeln!(w, "overflow_volume {:e}", grid.overflow_volume)?;
    writeln!(w, "overflow_events {}", grid.overflow_events)?;
    writeln!(w, "byte_order little")?;
    for line in provenance {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "end_header")?;
    for v in &grid.thickness {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn num<T: std::str::FromStr>(s: Option<&str>, key: &str) -> io::Result<T> {
    s.and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(format!("bad or missing value for '{key}'")))
}

/// Reads a grid written by [`write_binary_grid`]; returns it with the
/// provenance lines.
pub fn read_binary_grid<R: BufRead>(mut r: R) -> io::Result<(DepositionGrid, Vec<String>)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != GRID_MAGIC {
        return Err(bad("not a deposition grid file"));
    }
    let (mut nx, mut ny, mut cell, mut origin, mut window) = (None, None, None, None, (0.0, 0.0));
    let (mut overflow_volume, mut overflow_events) = (0.0, 0);
    let mut provenance = Vec::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("header not terminated"));
        }
        let l = line.trim_end();
        if l == "end_header" {
            break;
        }
        if let Some(p) = l.strip_prefix('#') {
            provenance.push(p.trim_start().to_string());
            continue;
        }
        let mut it = l.split_whitespace();
        let key = it.next().unwrap_or_default();
        match key {
            "nx" => nx = Some(num::<usize>(it.next(), key)?),
            "ny" => ny = Some(num::<usize>(it.next(), key)?),
            "cell_size" => cell = Some(num::<f64>(it.next(), key)?),
            "origin" => origin = Some(Vector2::new(num(it.next(), key)?, num(it.next(), key)?)),
            "window" => window = (num(it.next(), key)?, num(it.next(), key)?),
            "overflow_volume" => overflow_volume = num(it.next(), key)?,
            "overflow_events" => overflow_events = num(it.next(), key)?,
            "byte_order" => {
                if it.next() != Some("little") {
                    return Err(bad("unsupported byte order"));
                }
            }
            _ => return Err(bad(format!("unknown header key '{key}'"))),
        }
    }
    let nx = nx.ok_or_else(|| bad("missing nx"))?;
    let ny = ny.ok_or_else(|| bad("missing ny"))?;
    let mut buf = vec![0u8; nx * ny * 8];
    r.read_exact(&mut buf)?;
    let thickness = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((
        DepositionGrid {
            origin: origin.ok_or_else(|| bad("missing origin"))?,
            cell_size: cell.ok_or_else(|| bad("missing cell_size"))?,
            nx,
            ny,
            thickness,
            window,
            overflow_volume,
            overflow_events,
        },
        provenance,
    ))
}
