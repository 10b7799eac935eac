//! Ink description: fluid, electrical and solid-content properties.
//!
//! Inks are either given directly or derived from a solute/solvent recipe
//! under ideal mixing (total volume is the sum of the component volumes).
//! The solvent is treated as one pseudo-component whose density follows
//! from the ink density and the solid mass fraction.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InkProperties {
    /// kg/m³
    pub density: f64,
    /// N/m
    pub surface_tension: f64,
    /// S/m
    pub conductivity: f64,
    pub relative_permittivity: f64,
    /// Pa·s
    pub viscosity: f64,
    /// kg solid per kg ink
    pub solid_mass_fraction: f64,
    /// kg/m³
    pub solid_density: f64,
    /// d²-law evaporation constant, m²/s
    pub evaporation_constant: f64,
}

impl InkProperties {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("ink.density", self.density)?;
        ensure_positive("ink.surface_tension", self.surface_tension)?;
        ensure_positive("ink.conductivity", self.conductivity)?;
        ensure_positive("ink.viscosity", self.viscosity)?;
        ensure_positive("ink.solid_density", self.solid_density)?;
        ensure_positive("ink.evaporation_constant", self.evaporation_constant)?;
        if !(self.relative_permittivity >= 1.0) {
            return Err(Error::invalid(
                "ink.relative_permittivity",
                format!("must be >= 1, got {}", self.relative_permittivity),
            ));
        }
        if !(0.0..1.0).contains(&self.solid_mass_fraction) {
            return Err(Error::invalid(
                "ink.solid_mass_fraction",
                format!("must lie in [0, 1), got {}", self.solid_mass_fraction),
            ));
        }
        // Ideal mixing must leave a positive specific volume for the solvent.
        if self.solid_mass_fraction / self.solid_density >= 1.0 / self.density {
            return Err(Error::invalid(
                "ink.density",
                "solid content occupies the whole ink volume",
            ));
        }
        Ok(())
    }

    /// Volume of solid per volume of ink.
    pub fn solid_volume_fraction(&self) -> f64 {
        self.solid_mass_fraction * self.density / self.solid_density
    }

    /// Density of the solvent pseudo-component implied by ideal mixing.
    pub fn solvent_density(&self) -> f64 {
        (1.0 - self.solid_mass_fraction) / (1.0 / self.density - self.solid_mass_fraction / self.solid_density)
    }

    /// Scales the evaporation constant, e.g. to represent a heated platform.
    pub fn with_evaporation_multiplier(mut self, multiplier: f64) -> Self {
        self.evaporation_constant *= multiplier;
        self
    }
}

/// Solute mass plus two solvent volumes, with the component densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InkRecipe {
    /// kg
    pub glycine_mass: f64,
    /// m³
    pub water_volume: f64,
    /// m³
    pub ethanol_volume: f64,
    /// kg/m³
    pub glycine_density: f64,
    /// kg/m³
    pub water_density: f64,
    /// kg/m³
    pub ethanol_density: f64,
}

impl Default for InkRecipe {
    /// 2 g glycine, 20 ml water, 5 ml ethanol.
    fn default() -> Self {
        Self {
            glycine_mass: 2e-3,
            water_volume: 20e-6,
            ethanol_volume: 5e-6,
            glycine_density: 1607.0,
            water_density: 997.0,
            ethanol_density: 789.0,
        }
    }
}

/// Properties that are measured rather than derived from the recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredProperties {
    pub surface_tension: f64,
    pub conductivity: f64,
    pub relative_permittivity: f64,
    pub viscosity: f64,
    pub evaporation_constant: f64,
}

/// Mixes a recipe under ideal mixing and attaches the measured properties.
pub fn derive_ink_from_recipe(recipe: &InkRecipe, measured: &MeasuredProperties) -> Result<InkProperties> {
    ensure_non_negative("recipe.glycine_mass", recipe.glycine_mass)?;
    ensure_non_negative("recipe.water_volume", recipe.water_volume)?;
    ensure_non_negative("recipe.ethanol_volume", recipe.ethanol_volume)?;
    ensure_positive("recipe.glycine_density", recipe.glycine_density)?;
    ensure_positive("recipe.water_density", recipe.water_density)?;
    ensure_positive("recipe.ethanol_density", recipe.ethanol_density)?;
    let solvent_volume = recipe.water_volume + recipe.ethanol_volume;
    if solvent_volume <= 0.0 {
        return Err(Error::invalid(
            "recipe.water_volume",
            "recipe must contain some solvent",
        ));
    }

    let solvent_mass = recipe.water_volume * recipe.water_density + recipe.ethanol_volume * recipe.ethanol_density;
    let solid_volume = recipe.glycine_mass / recipe.glycine_density;
    let total_mass = solvent_mass + recipe.glycine_mass;
    let total_volume = solvent_volume + solid_volume;
    let solid_mass_fraction = recipe.glycine_mass / total_mass;
    if solid_mass_fraction >= 1.0 {
        return Err(Error::invalid("recipe.glycine_mass", "solid mass fraction must be < 1"));
    }

    let ink = InkProperties {
        density: total_mass / total_volume,
        surface_tension: measured.surface_tension,
        conductivity: measured.conductivity,
        relative_permittivity: measured.relative_permittivity,
        viscosity: measured.viscosity,
        solid_mass_fraction,
        solid_density: recipe.glycine_density,
        evaporation_constant: measured.evaporation_constant,
    };
    ink.validate()?;
    Ok(ink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn measured() -> MeasuredProperties {
        MeasuredProperties {
            surface_tension: 0.072,
            conductivity: 1e-3,
            relative_permittivity: 70.0,
            viscosity: 1.2e-3,
            evaporation_constant: 1e-9,
        }
    }

    #[test]
    fn reference_recipe() {
        // 2 g / (19.94 g + 3.945 g + 2 g); volume 25 ml + 2/1607 ml.
        let ink = derive_ink_from_recipe(&InkRecipe::default(), &measured()).unwrap();
        assert_relative_eq!(ink.solid_mass_fraction, 0.077264825188333, max_relative = 1e-12);
        assert_relative_eq!(ink.density, 986.2998221695317, max_relative = 1e-12);
        assert_relative_eq!(ink.solid_volume_fraction(), 0.04742145820983995, max_relative = 1e-12);
        assert_relative_eq!(ink.solvent_density(), 955.4, max_relative = 1e-12);
    }

    #[test]
    fn zero_solute_gives_solvent_mixture() {
        let recipe = InkRecipe {
            glycine_mass: 0.0,
            ..Default::default()
        };
        let ink = derive_ink_from_recipe(&recipe, &measured()).unwrap();
        assert_eq!(ink.solid_mass_fraction, 0.0);
        assert_relative_eq!(ink.density, (20.0 * 997.0 + 5.0 * 789.0) / 25.0, max_relative = 1e-14);
    }

    #[test]
    fn recipe_is_intensive() {
        let base = InkRecipe::default();
        let doubled = InkRecipe {
            glycine_mass: 2.0 * base.glycine_mass,
            water_volume: 2.0 * base.water_volume,
            ethanol_volume: 2.0 * base.ethanol_volume,
            ..base
        };
        let a = derive_ink_from_recipe(&base, &measured()).unwrap();
        let b = derive_ink_from_recipe(&doubled, &measured()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mixing_conserves_mass() {
        let r = InkRecipe::default();
        let ink = derive_ink_from_recipe(&r, &measured()).unwrap();
        let volume = r.water_volume + r.ethanol_volume + r.glycine_mass / r.glycine_density;
        let mass = r.glycine_mass + r.water_volume * r.water_density + r.ethanol_volume * r.ethanol_density;
        assert_relative_eq!(ink.density * volume, mass, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let r = InkRecipe {
            water_volume: -1e-6,
            ..Default::default()
        };
        assert!(derive_ink_from_recipe(&r, &measured()).is_err());
        let r = InkRecipe {
            water_volume: 0.0,
            ethanol_volume: 0.0,
            ..Default::default()
        };
        assert!(derive_ink_from_recipe(&r, &measured()).is_err());
        let m = MeasuredProperties {
            relative_permittivity: 0.5,
            ..measured()
        };
        assert!(derive_ink_from_recipe(&InkRecipe::default(), &m).is_err());
    }
}
