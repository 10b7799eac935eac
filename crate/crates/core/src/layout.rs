//! Modular printhead arrangements, clear-spacing search and throughput.

use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;

use crate::constants::{PhysicalConstants, CUBIC_METRE_IN_CUBIC_MICRON};
use crate::error::{ensure_positive, Error, Result};
use crate::field::{cone_jet_active, tip_interference_ratios};
use crate::geometry::{ArrayLayout, LayoutPattern, PrintheadGeometry, ProcessConditions};
use crate::ink::InkProperties;

/// Unit directions of the two arms of an angled pattern. Arm A runs along +x.
fn arms(pattern: LayoutPattern) -> (Vector2<f64>, Vector2<f64>) {
    match pattern {
        LayoutPattern::Angled60 => (Vector2::new(1.0, 0.0), Vector2::new(0.5, 3f64.sqrt() / 2.0)),
        _ => (Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)),
    }
}

/// In-plane head centers of a generated pattern.
///
/// Parallel heads sit on the x axis centred on the origin. Angled patterns
/// put head 0 at the vertex and alternate the rest between the two arms,
/// `spacing` apart along each arm.
pub fn pattern_centers(pattern: LayoutPattern, n_heads: usize, spacing: f64) -> Result<Vec<Vector2<f64>>> {
    if n_heads == 0 {
        return Err(Error::invalid("layout.n_heads", "must be >= 1"));
    }
    ensure_positive("layout.spacing", spacing)?;
    Ok(match pattern {
        LayoutPattern::Parallel => {
            let mid = (n_heads as f64 - 1.0) / 2.0;
            (0..n_heads)
                .map(|i| Vector2::new((i as f64 - mid) * spacing, 0.0))
                .collect()
        }
        LayoutPattern::Angled60 | LayoutPattern::Angled90 => {
            let (a, b) = arms(pattern);
            (0..n_heads)
                .map(|k| match k {
                    0 => Vector2::zeros(),
                    k if k % 2 == 1 => a * (k.div_ceil(2) as f64 * spacing),
                    k => b * ((k / 2) as f64 * spacing),
                })
                .collect()
        }
        LayoutPattern::Custom => return Err(Error::invalid("layout.pattern", "custom layouts take explicit centers")),
    })
}

/// Builds an array of copies of `template` at height `height`.
///
/// `custom_centers` is required for [`LayoutPattern::Custom`] (full 3D
/// centers) and ignored otherwise.
pub fn generate_layout(
    pattern: LayoutPattern,
    n_heads: usize,
    spacing: f64,
    height: f64,
    template: &PrintheadGeometry,
    custom_centers: Option<&[Vector3<f64>]>,
) -> Result<ArrayLayout> {
    let centers: Vec<Vector3<f64>> = match pattern {
        LayoutPattern::Custom => {
            let c =
                custom_centers.ok_or_else(|| Error::invalid("layout.centers", "required for the custom pattern"))?;
            if c.len() != n_heads {
                return Err(Error::invalid(
                    "layout.centers",
                    format!("{} centers given for {n_heads} heads", c.len()),
                ));
            }
            c.to_vec()
        }
        _ => {
            ensure_positive("layout.height", height)?;
            pattern_centers(pattern, n_heads, spacing)?
                .into_iter()
                .map(|p| Vector3::new(p.x, p.y, height))
                .collect()
        }
    };
    let heads = centers
        .into_iter()
        .map(|center| PrintheadGeometry { center, ..*template })
        .collect();
    let layout = ArrayLayout {
        heads,
        pattern,
        spacing: if pattern == LayoutPattern::Custom { 0.0 } else { spacing },
    };
    layout.validate()?;
    Ok(layout)
}

/// Shared inputs for spacing studies.
#[derive(Debug, Clone, Copy)]
pub struct SpacingStudy<'a> {
    pub pattern: LayoutPattern,
    pub template: &'a PrintheadGeometry,
    pub conditions: &'a ProcessConditions,
    pub constants: &'a PhysicalConstants,
}

impl SpacingStudy<'_> {
    fn layout(&self, n_heads: usize, spacing: f64) -> Result<ArrayLayout> {
        generate_layout(
            self.pattern,
            n_heads,
            spacing,
            self.conditions.standoff,
            self.template,
            None,
        )
    }

    /// Interference ratios of every tip at one spacing.
    pub fn ratios(&self, n_heads: usize, spacing: f64) -> Result<Vec<f64>> {
        tip_interference_ratios(&self.layout(n_heads, spacing)?, self.conditions, self.constants)
    }

    /// min_i ρ_i at one spacing.
    pub fn min_ratio(&self, n_heads: usize, spacing: f64) -> Result<f64> {
        Ok(self.ratios(n_heads, spacing)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// (spacing, min ρ) over `spacings`, evaluated in parallel.
    pub fn sweep(&self, n_heads: usize, spacings: &[f64]) -> Result<Vec<(f64, f64)>> {
        spacings
            .par_iter()
            .map(|&s| Ok((s, self.min_ratio(n_heads, s)?)))
            .collect()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Bracket and resolution of a clear-spacing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingBracket {
    pub s_lo: f64,
    pub s_hi: f64,
    pub tol: f64,
    /// Points sampled across the bracket to check monotonicity.
    pub samples: usize,
}

impl SpacingBracket {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("layout_opt.s_lo", self.s_lo)?;
        ensure_positive("layout_opt.tol", self.tol)?;
        if !(self.s_hi > self.s_lo) {
            return Err(Error::invalid("layout_opt.s_hi", "must exceed s_lo"));
        }
        if self.samples < 2 {
            return Err(Error::invalid("layout_opt.samples", "must be >= 2"));
        }
        Ok(())
    }
}

/// Smallest spacing (within `tol`) at which every tip keeps ρ ≥ θ.
///
/// The predicate is sampled across the bracket first; it must hold at
/// `s_hi` and switch from false to true at most once. If it already holds
/// at `s_lo`, `s_lo` is returned.
pub fn min_clear_spacing(
    study: &SpacingStudy<'_>,
    n_heads: usize,
    threshold: f64,
    bracket: &SpacingBracket,
) -> Result<f64> {
    bracket.validate()?;
    cone_jet_active(&[], threshold)?;
    let holds = |s: f64| -> Result<bool> { Ok(study.min_ratio(n_heads, s)? >= threshold) };

    let grid = linspace(bracket.s_lo, bracket.s_hi, bracket.samples);
    let sampled: Vec<(f64, bool)> = grid.par_iter().map(|&s| Ok((s, holds(s)?))).collect::<Result<_>>()?;
    if !sampled.last().expect("at least two samples").1 {
        return Err(Error::Bracket {
            reason: format!("predicate min rho >= {threshold} fails at s_hi"),
            samples: sampled,
        });
    }
    if sampled.windows(2).any(|w| w[0].1 && !w[1].1) {
        return Err(Error::Bracket {
            reason: "predicate is not monotone across the bracket".into(),
            samples: sampled,
        });
    }
    let first = sampled.iter().position(|p| p.1).expect("holds at s_hi");
    if first == 0 {
        return Ok(bracket.s_lo);
    }
    let (mut lo, mut hi) = (sampled[first - 1].0, sampled[first].0);
    while hi - lo > bracket.tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputRow {
    pub n_heads: usize,
    pub spacing: f64,
    pub active_tips: usize,
    pub total_tips: usize,
    /// Heads with at least one cone-jet; each delivers its full flow.
    pub active_heads: usize,
    /// µm³/s
    pub solid_rate: f64,
    /// µm³/s
    pub wet_rate: f64,
}

/// Steady-state solid and wet rate of one fully active head, µm³/s.
pub fn head_rates(conditions: &ProcessConditions, ink: &InkProperties) -> (f64, f64) {
    let wet = conditions.flow_rate_per_head * CUBIC_METRE_IN_CUBIC_MICRON;
    (wet * ink.solid_volume_fraction(), wet)
}

/// Rate table over head counts, each layout built at its clear spacing.
pub fn throughput_table(
    study: &SpacingStudy<'_>,
    n_heads: &[usize],
    ink: &InkProperties,
    threshold: f64,
    bracket: &SpacingBracket,
) -> Result<Vec<ThroughputRow>> {
    let (solid1, wet1) = head_rates(study.conditions, ink);
    n_heads
        .par_iter()
        .map(|&n| {
            let spacing = if n == 1 {
                bracket.s_lo
            } else {
                min_clear_spacing(study, n, threshold, bracket)?
            };
            let layout = study.layout(n, spacing)?;
            let ratios = tip_interference_ratios(&layout, study.conditions, study.constants)?;
            let active = cone_jet_active(&ratios, threshold)?;
            let mut active_heads = 0;
            let mut offset = 0;
            for h in &layout.heads {
                if active[offset..offset + h.spike_count].iter().any(|&a| a) {
                    active_heads += 1;
                }
                offset += h.spike_count;
            }
            Ok(ThroughputRow {
                n_heads: n,
                spacing,
                active_tips: active.iter().filter(|&&a| a).count(),
                total_tips: active.len(),
                active_heads,
                solid_rate: active_heads as f64 * solid1,
                wet_rate: active_heads as f64 * wet1,
            })
        })
        .collect()
}
