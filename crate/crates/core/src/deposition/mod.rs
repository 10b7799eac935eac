//! Substrate-frame film accumulation and print-rate accounting.
//!
//! Only the solid part of a landed droplet builds film; the solvent left at
//! impact is dropped as evaporated on the heated platform.

mod io;

pub use io::{read_binary_grid, write_binary_grid, write_csv_matrix, GRID_MAGIC};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::constants::CUBIC_METRE_IN_CUBIC_MICRON;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// A droplet landing on the substrate (lab frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepositionEvent {
    pub droplet_id: u64,
    pub lab_x: f64,
    pub lab_y: f64,
    pub time: f64,
    /// m³
    pub solid_volume: f64,
    /// m³
    pub solvent_volume: f64,
}

/// Roll-to-roll substrate motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstrateMotion {
    /// m/s
    pub speed: f64,
    pub direction: Vector2<f64>,
}

impl SubstrateMotion {
    pub fn stationary() -> Self {
        Self {
            speed: 0.0,
            direction: Vector2::x(),
        }
    }
}

/// Substrate coordinates of an event: lab position − speed·direction·time.
pub fn to_substrate_frame(event: &DepositionEvent, motion: &SubstrateMotion) -> Vector2<f64> {
    let shift = motion.direction * (motion.speed * event.time);
    Vector2::new(event.lab_x, event.lab_y) - shift
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Lower-left corner in the substrate frame, m.
    pub origin: [f64; 2],
    /// m
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// Standard deviation of an optional Gaussian splat kernel, m; 0 puts
    /// each event in a single cell.
    pub splat_radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            origin: [-0.05, -0.05],
            cell_size: 1e-3,
            nx: 100,
            ny: 100,
            splat_radius: 0.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("deposit.cell_size", self.cell_size)?;
        ensure_non_negative("deposit.splat_radius", self.splat_radius)?;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("deposit.nx", "grid needs at least one cell"));
        }
        Ok(())
    }
}

/// Film thickness map in the substrate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DepositionGrid {
    pub origin: Vector2<f64>,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `thickness[iy * nx + ix]`, m.
    pub thickness: Vec<f64>,
    /// (t_start, t_end), s; events are counted when t_start ≤ t ≤ t_end.
    pub window: (f64, f64),
    /// Solid volume that landed outside the grid, m³.
    pub overflow_volume: f64,
    pub overflow_events: u64,
}

impl DepositionGrid {
    pub fn empty(spec: &GridSpec, window: (f64, f64)) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            origin: Vector2::new(spec.origin[0], spec.origin[1]),
            cell_size: spec.cell_size,
            nx: spec.nx,
            ny: spec.ny,
            thickness: vec![0.0; spec.nx * spec.ny],
            window,
            overflow_volume: 0.0,
            overflow_events: 0,
        })
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.thickness[iy * self.nx + ix]
    }

    /// Cell containing a substrate-frame point, if any.
    pub fn cell_of(&self, p: &Vector2<f64>) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fy = ((p.y - self.origin.y) / self.cell_size).floor();
        if fx >= 0.0 && fy >= 0.0 && (fx as usize) < self.nx && (fy as usize) < self.ny {
            Some((fx as usize, fy as usize))
        } else {
            None
        }
    }

    /// Solid volume held by the grid cells, m³.
    pub fn total_volume(&self) -> f64 {
        self.thickness.iter().sum::<f64>() * self.cell_area()
    }

    fn deposit_point(&mut self, p: &Vector2<f64>, volume: f64) {
        match self.cell_of(p) {
            Some((ix, iy)) => {
                let area = self.cell_area();
                self.thickness[iy * self.nx + ix] += volume / area;
            }
            None => {
                self.overflow_volume += volume;
                self.overflow_events += 1;
            }
        }
    }

    /// Spreads `volume` over cells with Gaussian weights (3σ footprint),
    /// normalised over the whole footprint; the off-grid share overflows.
    fn deposit_splat(&mut self, p: &Vector2<f64>, volume: f64, sigma: f64) {
        let reach = (3.0 * sigma / self.cell_size).ceil() as i64;
        let cx = ((p.x - self.origin.x) / self.cell_size).floor() as i64;
        let cy = ((p.y - self.origin.y) / self.cell_size).floor() as i64;
        let mut cells = Vec::with_capacity(((2 * reach + 1) * (2 * reach + 1)) as usize);
        let mut total = 0.0;
        for iy in cy - reach..=cy + reach {
            for ix in cx - reach..=cx + reach {
                let x = self.origin.x + (ix as f64 + 0.5) * self.cell_size;
                let y = self.origin.y + (iy as f64 + 0.5) * self.cell_size;
                let r2 = (x - p.x).powi(2) + (y - p.y).powi(2);
                let w = (-0.5 * r2 / (sigma * sigma)).exp();
                total += w;
                cells.push((ix, iy, w));
            }
        }
        let area = self.cell_area();
        let mut outside = 0.0;
        for (ix, iy, w) in cells {
            let v = volume * w / total;
            if ix >= 0 && iy >= 0 && (ix as usize) < self.nx && (iy as usize) < self.ny {
                self.thickness[iy as usize * self.nx + ix as usize] += v / area;
            } else {
                outside += v;
            }
        }
        if outside > 0.0 {
            self.overflow_volume += outside;
            self.overflow_events += 1;
        }
    }

    /// Solid deposition rate over the grid window, µm³/s.
    pub fn deposition_rate(&self) -> Result<f64> {
        let span = self.window.1 - self.window.0;
        if !(span > 0.0) {
            return Err(Error::invalid("deposit.window", "window length must be > 0"));
        }
        Ok((self.total_volume() + self.overflow_volume) * CUBIC_METRE_IN_CUBIC_MICRON / span)
    }
}

fn in_window(t: f64, window: (f64, f64)) -> bool {
    t >= window.0 && t <= window.1
}

/// Adds each event's solid volume to the cell under its substrate-frame
/// landing point. Events outside `window` are skipped.
pub fn accumulate(
    events: &[DepositionEvent],
    motion: &SubstrateMotion,
    spec: &GridSpec,
    window: (f64, f64),
) -> Result<DepositionGrid> {
    let mut grid = DepositionGrid::empty(spec, window)?;
    for e in events.iter().filter(|e| in_window(e.time, window)) {
        let p = to_substrate_frame(e, motion);
        if spec.splat_radius > 0.0 {
            grid.deposit_splat(&p, e.solid_volume, spec.splat_radius);
        } else {
            grid.deposit_point(&p, e.solid_volume);
        }
    }
    Ok(grid)
}

/// Volumetric rates over a time window, µm³/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepositionRate {
    /// Solid film volume.
    pub solid: f64,
    /// Solid plus solvent still carried at impact.
    pub wet: f64,
}

/// Deposited volume in `window` divided by its length.
pub fn deposition_rate(events: &[DepositionEvent], window: (f64, f64)) -> Result<DepositionRate> {
    let span = window.1 - window.0;
    if !(span > 0.0) {
        return Err(Error::invalid("deposit.window", "window length must be > 0"));
    }
    let (solid, solvent) = events
        .iter()
        .filter(|e| in_window(e.time, window))
        .fold((0.0, 0.0), |(s, w), e| (s + e.solid_volume, w + e.solvent_volume));
    Ok(DepositionRate {
        solid: solid * CUBIC_METRE_IN_CUBIC_MICRON / span,
        wet: (solid + solvent) * CUBIC_METRE_IN_CUBIC_MICRON / span,
    })
}

/// Cells over which uniformity is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum CellMask {
    All,
    /// Inclusive index ranges.
    Rect {
        ix: (usize, usize),
        iy: (usize, usize),
    },
    /// Cells with non-zero thickness.
    Covered,
    Cells(Vec<(usize, usize)>),
}

/// Coefficient of variation (population sd / mean) of thickness over `mask`.
pub fn uniformity_cv(grid: &DepositionGrid, mask: &CellMask) -> Result<f64> {
    let values: Vec<f64> = match mask {
        CellMask::All => grid.thickness.clone(),
        CellMask::Covered => grid.thickness.iter().copied().filter(|&t| t > 0.0).collect(),
        CellMask::Rect { ix, iy } => {
            if ix.1 >= grid.nx || iy.1 >= grid.ny || ix.0 > ix.1 || iy.0 > iy.1 {
                return Err(Error::invalid("mask", "rectangle outside the grid"));
            }
            (iy.0..=iy.1)
                .flat_map(|y| (ix.0..=ix.1).map(move |x| (x, y)))
                .map(|(x, y)| grid.get(x, y))
                .collect()
        }
        CellMask::Cells(cells) => {
            if cells.iter().any(|&(x, y)| x >= grid.nx || y >= grid.ny) {
                return Err(Error::invalid("mask", "cell outside the grid"));
            }
            cells.iter().map(|&(x, y)| grid.get(x, y)).collect()
        }
    };
    if values.len() < 2 {
        return Err(Error::invalid("mask", "needs at least 2 cells"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::invalid("mask", "mean thickness over the mask is zero"));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}
