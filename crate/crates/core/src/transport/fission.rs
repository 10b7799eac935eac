use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{rayleigh_limit, Droplet, DropletStatus};
use crate::constants::PhysicalConstants;
use crate::error::{ensure_positive, Error, Result};
use crate::ink::InkProperties;

/// Coulomb fission parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FissionModel {
    pub offspring_count: u32,
    /// Fraction of the parent charge carried away by all offspring together.
    pub charge_fraction: f64,
    /// Fraction of the parent mass carried away by all offspring together.
    pub mass_fraction: f64,
    /// Droplets at or beyond this generation are aerosolized.
    pub generation_cap: u32,
    /// Droplets smaller than this diameter (m) are aerosolized.
    pub aerosol_cutoff: f64,
}

impl Default for FissionModel {
    fn default() -> Self {
        Self {
            offspring_count: 7,
            charge_fraction: 0.20,
            mass_fraction: 0.02,
            generation_cap: 8,
            aerosol_cutoff: 100e-9,
        }
    }
}

impl FissionModel {
    pub fn validate(&self) -> Result<()> {
        if self.offspring_count == 0 {
            return Err(Error::invalid("fission.offspring_count", "must be >= 1"));
        }
        for (name, v) in [
            ("fission.charge_fraction", self.charge_fraction),
            ("fission.mass_fraction", self.mass_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        if self.generation_cap == 0 {
            return Err(Error::invalid("fission.generation_cap", "must be >= 1"));
        }
        ensure_positive("fission.aerosol_cutoff", self.aerosol_cutoff)
    }

    /// Marks droplets that left the transported size/generation range.
    pub fn classify(&self, droplet: &mut Droplet) {
        if droplet.is_in_flight()
            && (droplet.generation >= self.generation_cap || droplet.diameter() < self.aerosol_cutoff)
        {
            droplet.status = DropletStatus::Aerosolized;
        }
    }
}

/// Whether the droplet has reached its Rayleigh limit.
pub(crate) fn at_rayleigh_limit(droplet: &Droplet, ink: &InkProperties, constants: &PhysicalConstants) -> Result<bool> {
    Ok(droplet.charge() >= rayleigh_limit(droplet.diameter(), ink.surface_tension, constants)?)
}

/// Splits a droplet at its Rayleigh limit into a residual and equal offspring.
///
/// Offspring carry `charge_fraction` of the charge (in whole elementary
/// charges) and `mass_fraction` of both solvent and solid mass, split
/// equally; the residual keeps exactly what is left. Offspring start one
/// parent radius away in directions drawn from `rng` and inherit the parent
/// velocity and clock. Their ids are left at 0 for the caller to assign.
pub fn coulomb_fission(
    droplet: &Droplet,
    ink: &InkProperties,
    model: &FissionModel,
    constants: &PhysicalConstants,
    rng: &mut ChaCha8Rng,
) -> Result<(Droplet, Vec<Droplet>)> {
    if !at_rayleigh_limit(droplet, ink, constants)? {
        return Err(Error::Contract(format!(
            "droplet {} is below its Rayleigh limit; fission not triggered",
            droplet.id
        )));
    }
    let n = model.offspring_count as u64;
    let nf = n as f64;

    let per_charge = ((droplet.charge_quanta() as f64 * model.charge_fraction) / nf).floor() as u64;
    let residual_charge = droplet.charge_quanta() - per_charge * n;

    let per_solvent = model.mass_fraction * droplet.solvent_mass() / nf;
    let per_solid = model.mass_fraction * droplet.solid_mass() / nf;
    let residual_solvent = droplet.solvent_mass() - per_solvent * nf;
    let residual_solid = droplet.solid_mass() - per_solid * nf;

    let radius = droplet.radius();
    let mut offspring = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let cos_t: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let phi: f64 = 2.0 * PI * rng.random::<f64>();
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let dir = Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t);
        let mut child = Droplet::from_masses(
            0,
            droplet.position + dir * radius,
            droplet.velocity,
            per_solvent,
            per_solid,
            per_charge,
            droplet.generation + 1,
            ink,
            droplet.time,
        );
        model.classify(&mut child);
        offspring.push(child);
    }

    let mut residual = droplet.clone();
    residual.set_masses(residual_solvent, residual_solid, ink);
    residual.set_charge_quanta(residual_charge);
    residual.fission_count += 1;
    model.classify(&mut residual);
    Ok((residual, offspring))
}
