//! Charged-droplet flight: electric force, Stokes drag, gravity, d²-law
//! evaporation and Coulomb fission at the Rayleigh limit.

mod droplet;
mod fission;
mod plume;

pub use droplet::{Droplet, DropletStatus};
pub use fission::{coulomb_fission, FissionModel};
pub use plume::{simulate_plume, sources_for_layout, PlumeOutcome, PlumeSettings, PlumeStats};

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{ensure_positive, Error, Result};
use crate::field::FieldSolution;
use crate::ink::InkProperties;

/// Rayleigh charge limit of a droplet, C: `sqrt(8 π² ε₀ γ d³)`.
pub fn rayleigh_limit(diameter: f64, surface_tension: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(diameter >= 0.0) {
        return Err(Error::invalid("diameter", format!("must be >= 0, got {diameter}")));
    }
    ensure_positive("surface_tension", surface_tension)?;
    let d3 = diameter * diameter * diameter;
    Ok((8.0 * PI * PI * constants.vacuum_permittivity * surface_tension * d3).sqrt())
}

/// Box outside which droplets are counted as escaped: |x|, |y| ≤ half_width,
/// z ≤ height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainBox {
    pub half_width: f64,
    pub height: f64,
}

impl Default for DomainBox {
    fn default() -> Self {
        Self {
            half_width: 0.25,
            height: 0.2,
        }
    }
}

impl DomainBox {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        p.x.abs() <= self.half_width && p.y.abs() <= self.half_width && p.z <= self.height
    }
}

/// Still air the droplets move through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambient {
    pub constants: PhysicalConstants,
    /// Apply the Cunningham slip correction to the drag.
    pub cunningham: bool,
    pub domain: DomainBox,
}

impl Ambient {
    pub fn new(constants: PhysicalConstants) -> Self {
        Self {
            constants,
            cunningham: false,
            domain: DomainBox::default(),
        }
    }
}

/// Cunningham slip correction factor for diameter `d`.
pub fn cunningham_factor(d: f64, mean_free_path: f64) -> f64 {
    let kn = 2.0 * mean_free_path / d;
    1.0 + kn * (1.257 + 0.4 * (-1.1 / kn).exp())
}

/// Stokes momentum relaxation time τ = ρ d² C_c / (18 μ).
pub fn relaxation_time(droplet: &Droplet, ambient: &Ambient) -> f64 {
    let d = droplet.diameter();
    let slip = if ambient.cunningham {
        cunningham_factor(d, ambient.constants.air_mean_free_path)
    } else {
        1.0
    };
    droplet.density() * d * d * slip / (18.0 * ambient.constants.air_dynamic_viscosity)
}

/// Advances one droplet by `dt` (≤ τ/10).
///
/// Drag is treated with the trapezoidal rule and the electric and
/// gravitational forces explicitly at the start position:
/// `v' = (v (1 − h/2) + dt a_ext) / (1 + h/2)`, `x' = x + dt v'`, `h = dt/τ`.
/// A step that crosses z = 0 deposits the droplet at the linearly
/// interpolated crossing point; leaving the domain box marks it escaped.
pub fn step_droplet(droplet: &Droplet, field: &FieldSolution, ambient: &Ambient, dt: f64) -> Result<Droplet> {
    if !droplet.is_in_flight() {
        return Err(Error::Contract(format!(
            "droplet {} is {}, not in flight",
            droplet.id,
            droplet.status.as_str()
        )));
    }
    let tau = relaxation_time(droplet, ambient);
    let limit = tau / 10.0;
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, limit });
    }
    let mut next = droplet.clone();
    let x = droplet.position;
    if x.z <= 0.0 {
        next.position.z = 0.0;
        next.status = DropletStatus::Deposited;
        return Ok(next);
    }

    let mut accel = ambient.constants.gravity_vector();
    if droplet.charge_quanta() > 0 {
        accel += field.field_at(&x) * (droplet.charge() / droplet.mass());
    }
    let h = dt / tau;
    let v = (droplet.velocity * (1.0 - 0.5 * h) + accel * dt) / (1.0 + 0.5 * h);
    let x_new = x + v * dt;
    next.velocity = v;
    if x_new.z <= 0.0 {
        let frac = x.z / (x.z - x_new.z);
        let mut landing = x + (x_new - x) * frac;
        landing.z = 0.0;
        next.position = landing;
        next.time = droplet.time + frac * dt;
        next.status = DropletStatus::Deposited;
    } else {
        next.position = x_new;
        next.time = droplet.time + dt;
        if !ambient.domain.contains(&x_new) {
            next.status = DropletStatus::Escaped;
        }
    }
    Ok(next)
}

/// d²-law shrinkage of the solvent: `d'² = max(d² − β dt, d_core²)`.
/// Solid mass and charge are untouched.
pub fn evaporate(droplet: &Droplet, ink: &InkProperties, dt: f64) -> Droplet {
    let mut next = droplet.clone();
    if !(dt > 0.0) || droplet.solvent_mass() <= 0.0 {
        return next;
    }
    let core = droplet.core_diameter(ink);
    let d = droplet.diameter();
    let d2 = d * d - ink.evaporation_constant * dt;
    let solvent_mass = if d2 <= core * core {
        0.0
    } else {
        let volume = PI * d2 * d2.sqrt() / 6.0;
        ((volume - droplet.solid_volume(ink)) * ink.solvent_density()).max(0.0)
    };
    next.set_masses(solvent_mass, droplet.solid_mass(), ink);
    next
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{ArrayLayout, PrintheadGeometry, ProcessConditions};
    use approx::assert_relative_eq;

    pub(crate) fn ink() -> InkProperties {
        InkProperties {
            density: 986.3,
            surface_tension: 0.072,
            conductivity: 1e-3,
            relative_permittivity: 70.0,
            viscosity: 1.2e-3,
            solid_mass_fraction: 0.0773,
            solid_density: 1607.0,
            evaporation_constant: 1e-9,
        }
    }

    fn field() -> FieldSolution {
        let c = PhysicalConstants::default();
        let cond = ProcessConditions {
            applied_voltage: 8e3,
            standoff: 20e-3,
            flow_rate_per_head: 1e-10,
            substrate_speed: 0.0,
            substrate_direction: nalgebra::Vector2::x(),
        };
        crate::field::solve_tip_charges(&ArrayLayout::single(PrintheadGeometry::default()), &cond, &c).unwrap()
    }

    fn no_gravity() -> Ambient {
        Ambient::new(PhysicalConstants {
            gravity_enabled: false,
            ..Default::default()
        })
    }

    #[test]
    fn rayleigh_reference_and_scaling() {
        let c = PhysicalConstants::default();
        let q = rayleigh_limit(1e-6, 0.072, &c).unwrap();
        assert_relative_eq!(q, 7.094723578762093e-15, max_relative = 1e-12);
        assert_eq!(rayleigh_limit(0.0, 0.072, &c).unwrap(), 0.0);
        for d in [1e-7, 3.3e-6, 7.5e-6] {
            assert_eq!(
                rayleigh_limit(4.0 * d, 0.072, &c).unwrap(),
                8.0 * rayleigh_limit(d, 0.072, &c).unwrap()
            );
        }
        assert!(rayleigh_limit(-1e-6, 0.072, &c).is_err());
    }

    #[test]
    fn neutral_droplet_relaxes_to_rest() {
        let amb = no_gravity();
        let f = field();
        let mut d = Droplet::from_diameter(
            0,
            Vector3::new(0.0, 0.0, 10e-3),
            Vector3::new(1.0, 0.0, 0.0),
            5e-6,
            0,
            &ink(),
            0.0,
        );
        let tau = relaxation_time(&d, &amb);
        for _ in 0..400 {
            d = step_droplet(&d, &f, &amb, tau / 20.0).unwrap();
        }
        assert!(d.velocity.norm() < 1e-8);
    }

    #[test]
    fn stokes_decay_within_one_percent() {
        let amb = no_gravity();
        let f = FieldSolution::from_charges(vec![], vec![], vec![], vec![], 0.0, &amb.constants);
        let v0 = 2.0;
        let mut d = Droplet::from_diameter(
            0,
            Vector3::new(0.0, 0.0, 10e-3),
            Vector3::new(v0, 0.0, 0.0),
            5e-6,
            1_000_000,
            &ink(),
            0.0,
        );
        let tau = relaxation_time(&d, &amb);
        for _ in 0..40 {
            d = step_droplet(&d, &f, &amb, tau / 20.0).unwrap();
        }
        let exact = v0 * (-2.0f64).exp();
        assert_relative_eq!(d.velocity.norm(), exact, max_relative = 1e-2);
    }

    #[test]
    fn step_guard() {
        let amb = no_gravity();
        let d = Droplet::from_diameter(0, Vector3::new(0.0, 0.0, 1e-2), Vector3::zeros(), 1e-6, 0, &ink(), 0.0);
        let tau = relaxation_time(&d, &amb);
        assert!(matches!(
            step_droplet(&d, &field(), &amb, tau / 5.0),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn plane_crossing_lands_on_plane() {
        let amb = no_gravity();
        let f = FieldSolution::from_charges(vec![], vec![], vec![], vec![], 0.0, &amb.constants);
        let mut d = Droplet::from_diameter(
            4,
            Vector3::new(1e-3, 2e-3, 1e-9),
            Vector3::new(0.5, 0.0, -3.0),
            5e-6,
            0,
            &ink(),
            0.25,
        );
        let tau = relaxation_time(&d, &amb);
        d = step_droplet(&d, &f, &amb, tau / 10.0).unwrap();
        assert_eq!(d.status, DropletStatus::Deposited);
        assert_eq!(d.position.z, 0.0);
        assert!(d.time > 0.25 && d.time < 0.25 + tau / 10.0);
        assert!(step_droplet(&d, &f, &amb, tau / 10.0).is_err());
    }

    #[test]
    fn leaving_box_escapes() {
        let mut amb = no_gravity();
        amb.domain = DomainBox {
            half_width: 1e-3,
            height: 1.0,
        };
        let f = FieldSolution::from_charges(vec![], vec![], vec![], vec![], 0.0, &amb.constants);
        let d = Droplet::from_diameter(
            0,
            Vector3::new(1e-3, 0.0, 0.5),
            Vector3::new(10.0, 0.0, 0.0),
            5e-6,
            0,
            &ink(),
            0.0,
        );
        let tau = relaxation_time(&d, &amb);
        let d = step_droplet(&d, &f, &amb, tau / 10.0).unwrap();
        assert_eq!(d.status, DropletStatus::Escaped);
    }

    #[test]
    fn cunningham_increases_relaxation() {
        let mut amb = no_gravity();
        let d = Droplet::from_diameter(0, Vector3::new(0.0, 0.0, 1e-2), Vector3::zeros(), 2e-7, 0, &ink(), 0.0);
        let plain = relaxation_time(&d, &amb);
        amb.cunningham = true;
        assert!(relaxation_time(&d, &amb) > 1.5 * plain);
    }

    fn drop_with_core(d0: f64, core: f64) -> Droplet {
        let ink = ink();
        let solid = ink.solid_density * std::f64::consts::PI * core.powi(3) / 6.0;
        let solvent = (std::f64::consts::PI * d0.powi(3) / 6.0 - solid / ink.solid_density) * ink.solvent_density();
        Droplet::from_masses(0, Vector3::zeros(), Vector3::zeros(), solvent, solid, 10, 0, &ink, 0.0)
    }

    #[test]
    fn evaporation_floor_and_exhaustion_time() {
        let ink = ink();
        let d = drop_with_core(7.5e-6, 2.7e-6);
        assert_relative_eq!(d.diameter(), 7.5e-6, max_relative = 1e-12);
        // (7.5^2 - 2.7^2) um^2 / 1e-9 m^2/s = 48.96 ms
        let t_dry = 48.96e-3;
        let before = evaporate(&d, &ink, 0.999 * t_dry);
        assert!(before.solvent_mass() > 0.0);
        let after = evaporate(&d, &ink, 1.001 * t_dry);
        assert_eq!(after.solvent_mass(), 0.0);
        assert_relative_eq!(after.diameter(), 2.7e-6, max_relative = 1e-12);
        assert_eq!(after.charge_quanta(), d.charge_quanta());
        assert_eq!(after.solid_mass(), d.solid_mass());
        assert_eq!(evaporate(&after, &ink, 1e-3), after);
    }

    #[test]
    fn evaporation_is_linear_in_d_squared() {
        let ink = ink();
        let d = drop_with_core(7.5e-6, 2.7e-6);
        let full = evaporate(&d, &ink, 10e-6);
        let halves = evaporate(&evaporate(&d, &ink, 5e-6), &ink, 5e-6);
        assert_relative_eq!(full.diameter(), halves.diameter(), max_relative = 1e-12);
        assert_relative_eq!(full.solvent_mass(), halves.solvent_mass(), max_relative = 1e-10);
        assert_relative_eq!(
            full.diameter().powi(2),
            7.5e-6f64.powi(2) - 1e-9 * 10e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn diameter_matches_masses() {
        let ink = ink();
        let d = Droplet::from_diameter(0, Vector3::zeros(), Vector3::zeros(), 7.5e-6, 0, &ink, 0.0);
        let v = d.solvent_mass() / ink.solvent_density() + d.solid_mass() / ink.solid_density;
        assert_relative_eq!(
            std::f64::consts::PI * d.diameter().powi(3) / 6.0,
            v,
            max_relative = 1e-9
        );
        assert_relative_eq!(d.solid_mass() / d.mass(), ink.solid_mass_fraction, max_relative = 1e-12);
    }
}
