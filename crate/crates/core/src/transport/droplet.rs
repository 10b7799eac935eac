use nalgebra::Vector3;

use crate::constants::ELEMENTARY_CHARGE;
use crate::ink::InkProperties;
use crate::spray::sphere_volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropletStatus {
    InFlight,
    Deposited,
    Aerosolized,
    Escaped,
}

impl DropletStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropletStatus::InFlight => "in_flight",
            DropletStatus::Deposited => "deposited",
            DropletStatus::Aerosolized => "aerosolized",
            DropletStatus::Escaped => "escaped",
        }
    }
}

/// A charged, evaporating droplet.
///
/// Charge is held as a whole number of elementary charges so that fission
/// conserves it exactly. The diameter always matches the two masses:
/// `π d³/6 = m_solvent/ρ_solvent + m_solid/ρ_solid`.
#[derive(Debug, Clone, PartialEq)]
pub struct Droplet {
    pub id: u64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Droplet clock, s.
    pub time: f64,
    pub generation: u32,
    pub status: DropletStatus,
    /// Number of fissions this droplet has undergone as a residual.
    pub fission_count: u32,
    diameter: f64,
    charge_quanta: u64,
    solvent_mass: f64,
    solid_mass: f64,
}

impl Droplet {
    /// Droplet of ink composition with the given diameter.
    pub fn from_diameter(
        id: u64,
        position: Vector3<f64>,
        velocity: Vector3<f64>,
        diameter: f64,
        charge_quanta: u64,
        ink: &InkProperties,
        time: f64,
    ) -> Self {
        let volume = sphere_volume(diameter);
        let solid_volume = volume * ink.solid_volume_fraction();
        let solvent_volume = volume - solid_volume;
        Self::from_masses(
            id,
            position,
            velocity,
            solvent_volume * ink.solvent_density(),
            solid_volume * ink.solid_density,
            charge_quanta,
            0,
            ink,
            time,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_masses(
        id: u64,
        position: Vector3<f64>,
        velocity: Vector3<f64>,
        solvent_mass: f64,
        solid_mass: f64,
        charge_quanta: u64,
        generation: u32,
        ink: &InkProperties,
        time: f64,
    ) -> Self {
        let mut d = Self {
            id,
            position,
            velocity,
            time,
            generation,
            status: DropletStatus::InFlight,
            fission_count: 0,
            diameter: 0.0,
            charge_quanta,
            solvent_mass,
            solid_mass,
        };
        d.update_diameter(ink);
        d
    }

    pub(crate) fn update_diameter(&mut self, ink: &InkProperties) {
        let volume = self.solvent_mass / ink.solvent_density() + self.solid_mass / ink.solid_density;
        self.diameter = (6.0 * volume / std::f64::consts::PI).cbrt();
    }

    pub(crate) fn set_masses(&mut self, solvent_mass: f64, solid_mass: f64, ink: &InkProperties) {
        self.solvent_mass = solvent_mass;
        self.solid_mass = solid_mass;
        self.update_diameter(ink);
    }

    pub(crate) fn set_charge_quanta(&mut self, q: u64) {
        self.charge_quanta = q;
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn charge_quanta(&self) -> u64 {
        self.charge_quanta
    }

    /// Charge in coulombs.
    pub fn charge(&self) -> f64 {
        self.charge_quanta as f64 * ELEMENTARY_CHARGE
    }

    pub fn solvent_mass(&self) -> f64 {
        self.solvent_mass
    }

    pub fn solid_mass(&self) -> f64 {
        self.solid_mass
    }

    pub fn mass(&self) -> f64 {
        self.solvent_mass + self.solid_mass
    }

    /// Mean density, kg/m³.
    pub fn density(&self) -> f64 {
        self.mass() / sphere_volume(self.diameter)
    }

    /// Diameter of the solid content alone.
    pub fn core_diameter(&self, ink: &InkProperties) -> f64 {
        (6.0 * self.solid_mass / (ink.solid_density * std::f64::consts::PI)).cbrt()
    }

    pub fn solid_volume(&self, ink: &InkProperties) -> f64 {
        self.solid_mass / ink.solid_density
    }

    pub fn solvent_volume(&self, ink: &InkProperties) -> f64 {
        self.solvent_mass / ink.solvent_density()
    }

    pub fn is_in_flight(&self) -> bool {
        self.status == DropletStatus::InFlight
    }
}
