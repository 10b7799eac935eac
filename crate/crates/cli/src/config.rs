//! TOML run configuration.
//!
//! Every tunable lives here. Keys without a default (the ink's measured
//! properties and the per-head flow rate) must be present in the file.

use std::collections::BTreeMap;

use ehdspray_core::deposition::GridSpec;
use ehdspray_core::geometry::{ArrayLayout, LayoutPattern, PrintheadGeometry, ProcessConditions};
use ehdspray_core::ink::{derive_ink_from_recipe, InkProperties, InkRecipe, MeasuredProperties};
use ehdspray_core::layout::{generate_layout, SpacingBracket};
use ehdspray_core::spray::ConeJetModel;
use ehdspray_core::transport::{Ambient, DomainBox, FissionModel};
use ehdspray_core::PhysicalConstants;
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub ink: InkConfig,
    #[serde(default)]
    pub printhead: PrintheadConfig,
    pub process: ProcessConfig,
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub cone_jet: ConeJetModel,
    #[serde(default)]
    pub fission: FissionModel,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub field_map: FieldMapConfig,
    #[serde(default)]
    pub interference: InterferenceConfig,
    #[serde(default)]
    pub deposit: DepositConfig,
    #[serde(default)]
    pub layout_opt: LayoutOptConfig,
    #[serde(default)]
    pub rate: RateConfig,
}

/// Ink: measured fluid properties plus either a recipe (default: the
/// glycine/water/ethanol recipe) or an explicit composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InkConfig {
    pub surface_tension: f64,
    pub conductivity: f64,
    pub relative_permittivity: f64,
    pub viscosity: f64,
    pub evaporation_constant: f64,
    /// Scales β, e.g. for a heated platform.
    #[serde(default = "one")]
    pub evaporation_multiplier: f64,
    #[serde(default)]
    pub recipe: InkRecipe,
    /// Overrides the recipe when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composition: Option<Composition>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Composition {
    pub density: f64,
    pub solid_mass_fraction: f64,
    pub solid_density: f64,
}

impl InkConfig {
    pub fn resolve(&self) -> ehdspray_core::Result<InkProperties> {
        let ink = match self.composition {
            Some(c) => {
                let ink = InkProperties {
                    density: c.density,
                    surface_tension: self.surface_tension,
                    conductivity: self.conductivity,
                    relative_permittivity: self.relative_permittivity,
                    viscosity: self.viscosity,
                    solid_mass_fraction: c.solid_mass_fraction,
                    solid_density: c.solid_density,
                    evaporation_constant: self.evaporation_constant,
                };
                ink.validate()?;
                ink
            }
            None => derive_ink_from_recipe(
                &self.recipe,
                &MeasuredProperties {
                    surface_tension: self.surface_tension,
                    conductivity: self.conductivity,
                    relative_permittivity: self.relative_permittivity,
                    viscosity: self.viscosity,
                    evaporation_constant: self.evaporation_constant,
                },
            )?,
        };
        if !(self.evaporation_multiplier > 0.0 && self.evaporation_multiplier.is_finite()) {
            return Err(ehdspray_core::Error::InvalidParameter {
                name: "ink.evaporation_multiplier",
                reason: format!("must be > 0, got {}", self.evaporation_multiplier),
            });
        }
        Ok(ink.with_evaporation_multiplier(self.evaporation_multiplier))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrintheadConfig {
    pub dedendum_diameter: f64,
    pub spike_count: usize,
    pub spike_length: f64,
    pub tip_regularization_radius: f64,
    pub disk_thickness: f64,
    pub disk_normal: [f64; 3],
}

impl Default for PrintheadConfig {
    fn default() -> Self {
        let g = PrintheadGeometry::default();
        Self {
            dedendum_diameter: g.dedendum_diameter,
            spike_count: g.spike_count,
            spike_length: g.spike_length,
            tip_regularization_radius: g.tip_regularization_radius,
            disk_thickness: g.disk_thickness,
            disk_normal: [g.disk_normal.x, g.disk_normal.y, g.disk_normal.z],
        }
    }
}

impl PrintheadConfig {
    /// Geometry template centered on the axis at `height`.
    pub fn template(&self, height: f64) -> PrintheadGeometry {
        PrintheadGeometry {
            dedendum_diameter: self.dedendum_diameter,
            spike_count: self.spike_count,
            spike_length: self.spike_length,
            tip_regularization_radius: self.tip_regularization_radius,
            disk_thickness: self.disk_thickness,
            center: Vector3::new(0.0, 0.0, height),
            disk_normal: Vector3::from(self.disk_normal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    #[serde(default = "default_voltage")]
    pub applied_voltage: f64,
    /// Disk-center height above the substrate, m.
    #[serde(default = "default_standoff")]
    pub standoff: f64,
    pub flow_rate_per_head: f64,
    #[serde(default)]
    pub substrate_speed: f64,
    #[serde(default = "default_direction")]
    pub substrate_direction: [f64; 2],
}

fn default_voltage() -> f64 {
    8e3
}
fn default_standoff() -> f64 {
    0.02
}
fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}

impl ProcessConfig {
    pub fn conditions(&self) -> ProcessConditions {
        ProcessConditions {
            applied_voltage: self.applied_voltage,
            standoff: self.standoff,
            flow_rate_per_head: self.flow_rate_per_head,
            substrate_speed: self.substrate_speed,
            substrate_direction: Vector2::from(self.substrate_direction),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    pub pattern: LayoutPattern,
    pub n_heads: usize,
    /// Center-to-center spacing, m.
    pub spacing: f64,
    /// Head centers for the custom pattern, m.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub centers: Vec<[f64; 3]>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            pattern: LayoutPattern::Parallel,
            n_heads: 1,
            spacing: 0.07,
            centers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    /// Global march step, s.
    pub time_step: f64,
    /// Simulated time, s.
    pub duration: f64,
    /// Tips stop emitting after this time, s (absent: emit throughout).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emission_cutoff: Option<f64>,
    pub max_step_fraction: f64,
    pub cunningham: bool,
    pub domain: DomainBox,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            time_step: 1e-4,
            duration: 1e-3,
            emission_cutoff: None,
            max_step_fraction: 0.25,
            cunningham: false,
            domain: DomainBox::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapPlane {
    Xz,
    Xy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldMapConfig {
    pub plane: MapPlane,
    /// Coordinate of the plane along its normal axis (y for xz, z for xy), m.
    pub offset: f64,
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub nu: usize,
    pub nv: usize,
}

impl Default for FieldMapConfig {
    fn default() -> Self {
        Self {
            plane: MapPlane::Xz,
            offset: 0.0,
            u_range: [-0.03, 0.03],
            v_range: [0.0, 0.04],
            nu: 61,
            nv: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterferenceConfig {
    pub n_heads: usize,
    pub spacing_min: f64,
    pub spacing_max: f64,
    pub points: usize,
}

impl Default for InterferenceConfig {
    fn default() -> Self {
        Self {
            n_heads: 2,
            spacing_min: 0.01,
            spacing_max: 0.1,
            points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepositConfig {
    pub grid: GridSpec,
    /// Accounting window [t_start, t_end], s (absent: the whole run).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Uniformity mask: "covered" (non-empty cells) or "all".
    pub cv_mask: String,
}

impl Default for DepositConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                origin: [-0.03, -0.03],
                cell_size: 5e-4,
                nx: 120,
                ny: 120,
                splat_radius: 0.0,
            },
            window: None,
            cv_mask: "covered".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutOptConfig {
    pub n_heads: usize,
    /// Activity threshold θ; absent: cone_jet.activity_threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub s_lo: f64,
    pub s_hi: f64,
    pub tol: f64,
    pub samples: usize,
}

impl Default for LayoutOptConfig {
    fn default() -> Self {
        Self {
            n_heads: 2,
            threshold: None,
            s_lo: 0.015,
            s_hi: 0.1,
            tol: 1e-4,
            samples: 12,
        }
    }
}

impl LayoutOptConfig {
    pub fn bracket(&self) -> SpacingBracket {
        SpacingBracket {
            s_lo: self.s_lo,
            s_hi: self.s_hi,
            tol: self.tol,
            samples: self.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    pub n_heads: Vec<usize>,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            n_heads: (1..=8).collect(),
        }
    }
}

impl Config {
    /// Parses TOML text after applying `key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(format!("config parse error: {e}")))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let de = toml::Value::Table(value);
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            CliError::Config(describe_schema_error(text, &path, &inner))
        })?;
        Ok(config)
    }

    /// Checks everything that can be checked without running a model.
    pub fn validate(&self) -> Result<(), CliError> {
        let core = CliError::from_core;
        self.constants.validate().map_err(core)?;
        self.ink.resolve().map_err(core)?;
        self.process.conditions().validate().map_err(core)?;
        self.array().map_err(core)?;
        self.cone_jet.validate().map_err(core)?;
        self.fission.validate().map_err(core)?;
        self.deposit.grid.validate().map_err(core)?;
        let t = &self.transport;
        let bad = |key: &str, why: &str| Err(CliError::Config(format!("invalid value for `{key}`: {why}")));
        if !(t.time_step > 0.0) {
            return bad("transport.time_step", "must be > 0");
        }
        if !(t.duration >= 0.0) {
            return bad("transport.duration", "must be >= 0");
        }
        if !(t.max_step_fraction > 0.0 && t.max_step_fraction <= 1.0) {
            return bad("transport.max_step_fraction", "must lie in (0, 1]");
        }
        if !["covered", "all"].contains(&self.deposit.cv_mask.as_str()) {
            return bad("deposit.cv_mask", "must be \"covered\" or \"all\"");
        }
        if self.field_map.nu < 1 || self.field_map.nv < 1 {
            return bad("field_map.nu", "grid needs at least one point per axis");
        }
        if self.interference.points < 2 || !(self.interference.spacing_max > self.interference.spacing_min) {
            return bad("interference.points", "need >= 2 points and spacing_max > spacing_min");
        }
        if self.rate.n_heads.is_empty() || self.rate.n_heads.contains(&0) {
            return bad("rate.n_heads", "must list head counts >= 1");
        }
        Ok(())
    }

    pub fn ambient(&self) -> Ambient {
        Ambient {
            constants: self.constants,
            cunningham: self.transport.cunningham,
            domain: self.transport.domain,
        }
    }

    /// The configured printhead array.
    pub fn array(&self) -> ehdspray_core::Result<ArrayLayout> {
        let template = self.printhead.template(self.process.standoff);
        let centers: Vec<Vector3<f64>> = self.layout.centers.iter().map(|c| Vector3::from(*c)).collect();
        generate_layout(
            self.layout.pattern,
            self.layout.n_heads,
            self.layout.spacing,
            self.process.standoff,
            &template,
            (self.layout.pattern == LayoutPattern::Custom).then_some(&centers[..]),
        )
    }

    /// Effective configuration as TOML (defaults resolved).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// Configuration with the reference values of the required keys.
    pub fn reference() -> Self {
        Config {
            seed: 0,
            constants: PhysicalConstants::default(),
            ink: InkConfig {
                surface_tension: 0.072,
                conductivity: 1e-3,
                relative_permittivity: 70.0,
                viscosity: 1.2e-3,
                evaporation_constant: 1e-9,
                evaporation_multiplier: 1.0,
                recipe: InkRecipe::default(),
                composition: None,
            },
            printhead: PrintheadConfig::default(),
            process: ProcessConfig {
                applied_voltage: default_voltage(),
                standoff: default_standoff(),
                flow_rate_per_head: 9.7e-11,
                substrate_speed: 0.0,
                substrate_direction: default_direction(),
            },
            layout: LayoutConfig::default(),
            cone_jet: ConeJetModel::default(),
            fission: FissionModel::default(),
            transport: TransportConfig::default(),
            field_map: FieldMapConfig::default(),
            interference: InterferenceConfig::default(),
            deposit: DepositConfig::default(),
            layout_opt: LayoutOptConfig::default(),
            rate: RateConfig::default(),
        }
    }
}

/// `a.b.c=value`; the value is read as a TOML value, or as a bare string
/// when it does not parse as one.
fn apply_override(root: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut table = root;
    for p in path {
        table = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Turns a serde error into a message naming the full key and, where it
/// can be found, the line of the config file.
fn describe_schema_error(text: &str, path: &str, inner: &str) -> String {
    let prefix = if path == "." { String::new() } else { format!("{path}.") };
    if let Some(field) = between(inner, "missing field `", "`") {
        let key = format!("{prefix}{field}");
        let section = path.trim_start_matches('.');
        let at = if section.is_empty() {
            String::new()
        } else {
            find_section_line(text, section)
                .map(|l| format!(" (section [{section}] at line {l})"))
                .unwrap_or_default()
        };
        return format!("missing required key `{key}`{at}");
    }
    if let Some(field) = between(inner, "unknown field `", "`") {
        // the path already ends in the offending field
        let key = if path.ends_with(field) {
            path.to_string()
        } else {
            format!("{prefix}{field}")
        };
        let at = find_key_line(text, &key)
            .map(|l| format!(" at line {l}"))
            .unwrap_or_default();
        return format!("unknown key `{key}`{at}: {}", inner.lines().next().unwrap_or(inner));
    }
    let at = find_key_line(text, path)
        .map(|l| format!(" at line {l}"))
        .unwrap_or_default();
    format!("invalid value for `{path}`{at}: {inner}")
}

fn between<'a>(s: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let i = s.find(start)? + start.len();
    let j = s[i..].find(end)? + i;
    Some(&s[i..j])
}

fn find_section_line(text: &str, section: &str) -> Option<usize> {
    let header = format!("[{section}]");
    text.lines().position(|l| l.trim() == header).map(|i| i + 1)
}

/// 1-based line of `section.key = ...` in a TOML file (dotted keys at the
/// top level are not searched).
pub fn find_key_line(text: &str, dotted: &str) -> Option<usize> {
    let (section, key) = match dotted.rsplit_once('.') {
        Some((s, k)) => (s, k),
        None => ("", dotted),
    };
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.starts_with('[') && l.ends_with(']') {
            current = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// One-line documentation for each key shown by `--print-defaults`.
pub fn key_docs() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("seed", "global seed for every random stream"),
        ("constants.vacuum_permittivity", "F/m"),
        ("constants.air_dynamic_viscosity", "Pa s"),
        ("constants.air_density", "kg/m^3 (informational)"),
        ("constants.gravity", "m/s^2"),
        ("constants.gravity_enabled", "include gravity in droplet motion"),
        ("constants.air_mean_free_path", "m, used by the Cunningham correction"),
        ("ink.surface_tension", "REQUIRED, N/m (reference 0.072)"),
        ("ink.conductivity", "REQUIRED, S/m (reference 1e-3)"),
        ("ink.relative_permittivity", "REQUIRED (reference 70)"),
        ("ink.viscosity", "REQUIRED, Pa s (reference 1.2e-3)"),
        (
            "ink.evaporation_constant",
            "REQUIRED, d^2-law beta, m^2/s (reference 1e-9)",
        ),
        ("ink.evaporation_multiplier", "scales beta, e.g. for a heated platform"),
        ("ink.recipe.glycine_mass", "kg"),
        ("ink.recipe.water_volume", "m^3"),
        ("ink.recipe.ethanol_volume", "m^3"),
        ("ink.recipe.glycine_density", "kg/m^3"),
        ("ink.recipe.water_density", "kg/m^3"),
        ("ink.recipe.ethanol_density", "kg/m^3"),
        ("printhead.dedendum_diameter", "m"),
        ("printhead.spike_count", "tips per disk"),
        ("printhead.spike_length", "m"),
        (
            "printhead.tip_regularization_radius",
            "m, radius of the tip charge sphere",
        ),
        ("printhead.disk_thickness", "m (informational)"),
        ("printhead.disk_normal", "unit vector; +y stands the disk upright"),
        ("process.applied_voltage", "V"),
        ("process.standoff", "disk-center height above the substrate, m"),
        ("process.flow_rate_per_head", "REQUIRED, m^3/s (reference 9.7e-11)"),
        ("process.substrate_speed", "m/s"),
        ("process.substrate_direction", "unit vector in the substrate plane"),
        ("layout.pattern", "parallel | angled60 | angled90 | custom"),
        ("layout.n_heads", "number of printheads"),
        ("layout.spacing", "center-to-center spacing, m"),
        ("layout.centers", "custom pattern only: list of [x, y, z] in m"),
        (
            "cone_jet.current_prefactor",
            "f(eps_r) in I = f sqrt(gamma Q K / eps_r)",
        ),
        (
            "cone_jet.jet_diameter_coefficient",
            "c_d in d_jet = c_d (Q eps0 eps_r / K)^(1/3)",
        ),
        ("cone_jet.breakup_diameter_ratio", "parent / jet diameter"),
        (
            "cone_jet.emitted_charge_fraction",
            "cap on parent charge as a fraction of q_R",
        ),
        (
            "cone_jet.diameter_jitter_sigma",
            "log-normal sigma of parent diameter (0 = none)",
        ),
        (
            "cone_jet.activity_threshold",
            "minimum interference ratio for a tip to spray",
        ),
        ("fission.offspring_count", "offspring per fission"),
        ("fission.charge_fraction", "charge fraction carried by all offspring"),
        ("fission.mass_fraction", "mass fraction carried by all offspring"),
        ("fission.generation_cap", "generation at which droplets are aerosolized"),
        (
            "fission.aerosol_cutoff",
            "diameter below which droplets are aerosolized, m",
        ),
        ("transport.time_step", "global march step, s"),
        ("transport.duration", "simulated time, s"),
        (
            "transport.emission_cutoff",
            "optional: tips stop emitting after this time, s",
        ),
        (
            "transport.max_step_fraction",
            "substep displacement / distance to nearest tip",
        ),
        ("transport.cunningham", "apply slip correction to drag"),
        ("transport.domain.half_width", "droplets beyond |x| or |y| escape, m"),
        ("transport.domain.height", "droplets above this height escape, m"),
        ("field_map.plane", "xz | xy"),
        ("field_map.offset", "plane coordinate along its normal axis, m"),
        ("field_map.u_range", "first in-plane axis range, m"),
        ("field_map.v_range", "second in-plane axis range, m"),
        ("field_map.nu", "points along u"),
        ("field_map.nv", "points along v"),
        ("interference.n_heads", "heads in the swept pattern"),
        ("interference.spacing_min", "m"),
        ("interference.spacing_max", "m"),
        ("interference.points", "sweep points"),
        ("deposit.window", "optional [t_start, t_end], s"),
        ("deposit.cv_mask", "covered | all"),
        ("deposit.grid.origin", "lower-left corner in the substrate frame, m"),
        ("deposit.grid.cell_size", "m"),
        ("deposit.grid.nx", "cells along x"),
        ("deposit.grid.ny", "cells along y"),
        ("deposit.grid.splat_radius", "Gaussian splat sigma, m (0 = single cell)"),
        ("layout_opt.n_heads", "heads in the searched pattern"),
        (
            "layout_opt.threshold",
            "optional theta; defaults to cone_jet.activity_threshold",
        ),
        ("layout_opt.s_lo", "bracket low end, m"),
        ("layout_opt.s_hi", "bracket high end, m"),
        ("layout_opt.tol", "bisection tolerance, m"),
        ("layout_opt.samples", "points sampled to check the bracket"),
        ("rate.n_heads", "head counts tabulated"),
    ])
}

/// Reference configuration with every key documented.
pub fn documented_defaults() -> String {
    let docs = key_docs();
    let text = Config::reference().to_toml();
    let mut out = String::from(
        "# ehdspray configuration: defaults and reference values.\n\
         # Keys marked REQUIRED have no default and must be set.\n\
         # Optional keys not shown: layout.centers, transport.emission_cutoff,\n\
         # deposit.window, layout_opt.threshold, ink.composition\n\
         # (density, solid_mass_fraction, solid_density; replaces the recipe).\n\n",
    );
    let mut section = String::new();
    for line in text.lines() {
        let l = line.trim();
        if l.starts_with('[') {
            section = l.trim_matches(|c| c == '[' || c == ']').to_string();
        } else if let Some((k, _)) = l.split_once('=') {
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            if let Some(doc) = docs.get(key.as_str()) {
                out.push_str(&format!("# {doc}\n"));
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}
