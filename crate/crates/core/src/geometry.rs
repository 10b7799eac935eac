//! Printhead, process and array-layout descriptions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Spiked metal disk. Tips sit on a circle of radius
/// `dedendum_diameter / 2 + spike_length` in the disk plane.
///
/// The default disk stands upright (normal along +y, as when it is carried
/// on a needle bent horizontal), so its lowest spike points at the
/// substrate. `center.z` is the disk-center height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintheadGeometry {
    pub dedendum_diameter: f64,
    pub spike_count: usize,
    pub spike_length: f64,
    pub tip_regularization_radius: f64,
    /// Informational only.
    pub disk_thickness: f64,
    pub center: Vector3<f64>,
    pub disk_normal: Vector3<f64>,
}

impl Default for PrintheadGeometry {
    fn default() -> Self {
        Self {
            dedendum_diameter: 10e-3,
            spike_count: 16,
            spike_length: 1e-3,
            tip_regularization_radius: 1e-5,
            disk_thickness: 20e-6,
            center: Vector3::new(0.0, 0.0, 20e-3),
            disk_normal: Vector3::y(),
        }
    }
}

/// One spike tip: location and outward spike direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tip {
    pub position: Vector3<f64>,
    pub direction: Vector3<f64>,
}

impl PrintheadGeometry {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("printhead.dedendum_diameter", self.dedendum_diameter)?;
        ensure_positive("printhead.spike_length", self.spike_length)?;
        ensure_positive("printhead.tip_regularization_radius", self.tip_regularization_radius)?;
        ensure_non_negative("printhead.disk_thickness", self.disk_thickness)?;
        if self.spike_count == 0 {
            return Err(Error::invalid("printhead.spike_count", "must be >= 1"));
        }
        if self.tip_regularization_radius > 0.1 * self.spike_length {
            return Err(Error::invalid(
                "printhead.tip_regularization_radius",
                format!(
                    "must be much smaller than spike_length (<= {:e} m)",
                    0.1 * self.spike_length
                ),
            ));
        }
        if !(self.center.z > 0.0) {
            return Err(Error::invalid(
                "printhead.center",
                format!("must lie above the grounded plane, z = {}", self.center.z),
            ));
        }
        let n = self.disk_normal.norm();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid(
                "printhead.disk_normal",
                format!("must be a unit vector, |n| = {n}"),
            ));
        }
        Ok(())
    }

    /// Radius of the tip circle.
    pub fn tip_radius(&self) -> f64 {
        0.5 * self.dedendum_diameter + self.spike_length
    }

    /// Orthonormal in-plane basis (e1, e2) with e1 × e2 = normal.
    /// For a +z normal this is (x̂, ŷ).
    pub fn plane_basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.disk_normal;
        let seed = if n.x.abs() > 0.9 { Vector3::y() } else { Vector3::x() };
        let e1 = (seed - n * seed.dot(&n)).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }

    pub fn tips(&self) -> Vec<Tip> {
        let (e1, e2) = self.plane_basis();
        let r = self.tip_radius();
        (0..self.spike_count)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / self.spike_count as f64;
                let direction = e1 * phi.cos() + e2 * phi.sin();
                Tip {
                    position: self.center + direction * r,
                    direction,
                }
            })
            .collect()
    }

    /// Copy of this geometry with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dedendum_diameter: self.dedendum_diameter * factor,
            spike_length: self.spike_length * factor,
            tip_regularization_radius: self.tip_regularization_radius * factor,
            disk_thickness: self.disk_thickness * factor,
            center: self.center * factor,
            ..*self
        }
    }
}

/// Tip positions of a spiked disk, evenly spaced in angle.
pub fn tip_positions(geometry: &PrintheadGeometry) -> Vec<Vector3<f64>> {
    geometry.tips().into_iter().map(|t| t.position).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessConditions {
    /// V
    pub applied_voltage: f64,
    /// Tip plane to substrate, m.
    pub standoff: f64,
    /// m³/s per printhead
    pub flow_rate_per_head: f64,
    /// m/s
    pub substrate_speed: f64,
    pub substrate_direction: Vector2<f64>,
}

impl ProcessConditions {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("process.applied_voltage", self.applied_voltage)?;
        ensure_positive("process.standoff", self.standoff)?;
        ensure_positive("process.flow_rate_per_head", self.flow_rate_per_head)?;
        ensure_non_negative("process.substrate_speed", self.substrate_speed)?;
        let n = self.substrate_direction.norm();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid(
                "process.substrate_direction",
                format!("must be a unit vector, |d| = {n}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutPattern {
    Parallel,
    Angled60,
    Angled90,
    Custom,
}

impl fmt::Display for LayoutPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayoutPattern::Parallel => "parallel",
            LayoutPattern::Angled60 => "angled60",
            LayoutPattern::Angled90 => "angled90",
            LayoutPattern::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for LayoutPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(LayoutPattern::Parallel),
            "angled60" => Ok(LayoutPattern::Angled60),
            "angled90" => Ok(LayoutPattern::Angled90),
            "custom" => Ok(LayoutPattern::Custom),
            other => Err(Error::invalid(
                "layout.pattern",
                format!("unknown pattern `{other}` (parallel, angled60, angled90, custom)"),
            )),
        }
    }
}

/// A set of printheads above the grounded substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    pub heads: Vec<PrintheadGeometry>,
    pub pattern: LayoutPattern,
    /// Center-to-center spacing used by the generator, m.
    pub spacing: f64,
}

impl ArrayLayout {
    pub fn single(head: PrintheadGeometry) -> Self {
        Self {
            heads: vec![head],
            pattern: LayoutPattern::Custom,
            spacing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads.is_empty() {
            return Err(Error::invalid("layout.n_heads", "must be >= 1"));
        }
        for h in &self.heads {
            h.validate()?;
        }
        for (i, a) in self.heads.iter().enumerate() {
            for b in &self.heads[i + 1..] {
                if (a.center - b.center).norm() <= 1e-12 {
                    return Err(Error::Geometry(format!(
                        "coincident printhead centers at {:?}",
                        a.center.as_slice()
                    )));
                }
            }
        }
        if self.pattern != LayoutPattern::Custom {
            let z0 = self.heads[0].center.z;
            if self.heads.iter().any(|h| h.center.z != z0) {
                return Err(Error::invalid(
                    "layout.heads",
                    "generated patterns require all heads at equal height",
                ));
            }
        }
        Ok(())
    }

    /// Smallest pairwise center distance; infinite for a single head.
    pub fn min_center_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.heads.iter().enumerate() {
            for b in &self.heads[i + 1..] {
                best = best.min((a.center - b.center).norm());
            }
        }
        best
    }

    pub fn tip_count(&self) -> usize {
        self.heads.iter().map(|h| h.spike_count).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn tips_centroid_is_center() {
        let g = PrintheadGeometry::default();
        let tips = tip_positions(&g);
        assert_eq!(tips.len(), 16);
        let centroid = tips.iter().fold(Vector3::zeros(), |acc, p| acc + p) / 16.0;
        assert!((centroid - g.center).norm() < 1e-15);
    }

    #[test]
    fn tips_on_six_mm_circle() {
        let g = PrintheadGeometry::default();
        for p in tip_positions(&g) {
            assert_relative_eq!((p - g.center).norm(), 6e-3, max_relative = 1e-14);
            assert_eq!(p.y, g.center.y);
        }
        // Upright disk: the lowest spike points straight down.
        let low = g
            .tips()
            .into_iter()
            .min_by(|a, b| a.position.z.total_cmp(&b.position.z))
            .unwrap();
        assert_relative_eq!(low.direction, -Vector3::z(), epsilon = 1e-15);
        assert_relative_eq!(low.position.z, 14e-3, max_relative = 1e-12);
    }

    #[test]
    fn adjacent_chord() {
        // 2 r sin(pi/16), r = 6 mm
        let tips = tip_positions(&PrintheadGeometry::default());
        assert_relative_eq!((tips[1] - tips[0]).norm(), 2.341083864193539e-3, max_relative = 1e-13);
    }

    #[test]
    fn tilted_disk_keeps_tips_in_plane() {
        let g = PrintheadGeometry {
            disk_normal: Vector3::new(1.0, 1.0, 0.0).normalize(),
            ..Default::default()
        };
        for t in g.tips() {
            assert!((t.position - g.center).dot(&g.disk_normal).abs() < 1e-15);
            assert_relative_eq!(t.direction.norm(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn validation() {
        let mut g = PrintheadGeometry::default();
        g.validate().unwrap();
        g.spike_count = 0;
        assert!(g.validate().is_err());
        let g = PrintheadGeometry {
            center: Vector3::new(0.0, 0.0, -1e-3),
            ..Default::default()
        };
        assert!(g.validate().is_err());
        let g = PrintheadGeometry {
            tip_regularization_radius: 5e-4,
            ..Default::default()
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn pattern_parse() {
        assert_eq!("angled60".parse::<LayoutPattern>().unwrap(), LayoutPattern::Angled60);
        assert!("zigzag".parse::<LayoutPattern>().is_err());
    }

    proptest! {
        #[test]
        fn tip_positions_scale_with_length(lambda in 0.01f64..100.0, n in 1usize..40) {
            let g = PrintheadGeometry { spike_count: n, ..Default::default() };
            let a = tip_positions(&g);
            let b = tip_positions(&g.scaled(lambda));
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p * lambda - q).norm() <= 1e-14 * lambda * p.norm());
            }
        }
    }
}
