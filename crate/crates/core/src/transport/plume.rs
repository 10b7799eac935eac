use rayon::prelude::*;

use super::fission::at_rayleigh_limit;
use super::{coulomb_fission, evaporate, relaxation_time, step_droplet, Ambient, Droplet, DropletStatus, FissionModel};
use crate::constants::PhysicalConstants;
use crate::deposition::DepositionEvent;
use crate::error::{ensure_positive, Error, Result};
use crate::field::{cone_jet_active, interference_ratios_for, FieldSolution};
use crate::geometry::{ArrayLayout, ProcessConditions};
use crate::ink::InkProperties;
use crate::rng::fission_stream;
use crate::spray::{cone_jet_current, ConeJetModel, TipEmitter, TipState};

/// Upper bound on back-to-back fissions of one droplet within a substep.
const MAX_FISSIONS_PER_SUBSTEP: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlumeSettings {
    /// Global march step, s. Droplets subcycle inside it at τ/10.
    pub time_step: f64,
    pub duration: f64,
    /// Tips stop emitting at this time; `None` emits for the whole run.
    pub emission_cutoff: Option<f64>,
    /// Largest substep displacement as a fraction of the distance to the
    /// nearest tip, which keeps the steep near-tip field resolved.
    pub max_step_fraction: f64,
    pub seed: u64,
    pub cone_jet: ConeJetModel,
    pub fission: FissionModel,
}

/// Counts and conserved totals of a plume run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlumeStats {
    pub emitted: u64,
    pub offspring: u64,
    pub fission_events: u64,
    pub max_generation: u32,
    /// Integrator substeps taken over all droplets.
    pub substeps: u64,
    pub in_flight: u64,
    pub deposited: u64,
    pub aerosolized: u64,
    pub escaped: u64,
    /// kg
    pub emitted_solid_mass: f64,
    pub in_flight_solid_mass: f64,
    pub deposited_solid_mass: f64,
    pub aerosolized_solid_mass: f64,
    pub escaped_solid_mass: f64,
    /// Elementary charges.
    pub emitted_charge: u128,
    pub in_flight_charge: u128,
    pub deposited_charge: u128,
    pub aerosolized_charge: u128,
    pub escaped_charge: u128,
}

impl PlumeStats {
    fn record_terminal(&mut self, d: &Droplet) {
        let q = d.charge_quanta() as u128;
        let m = d.solid_mass();
        match d.status {
            DropletStatus::InFlight => {
                self.in_flight += 1;
                self.in_flight_solid_mass += m;
                self.in_flight_charge += q;
            }
            DropletStatus::Deposited => {
                self.deposited += 1;
                self.deposited_solid_mass += m;
                self.deposited_charge += q;
            }
            DropletStatus::Aerosolized => {
                self.aerosolized += 1;
                self.aerosolized_solid_mass += m;
                self.aerosolized_charge += q;
            }
            DropletStatus::Escaped => {
                self.escaped += 1;
                self.escaped_solid_mass += m;
                self.escaped_charge += q;
            }
        }
    }

    /// Solid mass found in all final states.
    pub fn accounted_solid_mass(&self) -> f64 {
        self.deposited_solid_mass + self.in_flight_solid_mass + self.aerosolized_solid_mass + self.escaped_solid_mass
    }

    pub fn accounted_charge(&self) -> u128 {
        self.deposited_charge + self.in_flight_charge + self.aerosolized_charge + self.escaped_charge
    }

    /// |emitted − accounted| / emitted for solid mass (0 when nothing was emitted).
    pub fn solid_mass_imbalance(&self) -> f64 {
        if self.emitted_solid_mass == 0.0 {
            return self.accounted_solid_mass().abs();
        }
        (self.emitted_solid_mass - self.accounted_solid_mass()).abs() / self.emitted_solid_mass
    }

    pub fn charge_imbalance(&self) -> f64 {
        let e = self.emitted_charge as f64;
        let a = self.accounted_charge() as f64;
        if self.emitted_charge == 0 {
            return a;
        }
        (e - a).abs() / e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlumeOutcome {
    /// Sorted by (droplet id, time).
    pub events: Vec<DepositionEvent>,
    pub stats: PlumeStats,
    /// Droplets still airborne at the end, sorted by id.
    pub in_flight: Vec<Droplet>,
}

/// Emitters for every active tip of a solved layout.
///
/// Each head's flow is shared equally by its active tips; droplets leave
/// along the local field direction at the tip's evaluation point.
#[allow(clippy::too_many_arguments)]
pub fn sources_for_layout(
    layout: &ArrayLayout,
    field: &FieldSolution,
    conditions: &ProcessConditions,
    ink: &InkProperties,
    model: &ConeJetModel,
    constants: &PhysicalConstants,
    seed: u64,
) -> Result<Vec<TipEmitter>> {
    let ratios = interference_ratios_for(field, layout, conditions, constants)?;
    let active = cone_jet_active(&ratios, model.activity_threshold)?;
    let mut sources = Vec::new();
    let mut offset = 0;
    for (h, head) in layout.heads.iter().enumerate() {
        let tips = offset..offset + head.spike_count;
        offset += head.spike_count;
        let n_active = active[tips.clone()].iter().filter(|&&a| a).count();
        if n_active == 0 {
            continue;
        }
        let q_tip = conditions.flow_rate_per_head / n_active as f64;
        let i_tip = cone_jet_current(model, ink, q_tip)?;
        for (k, i) in tips.enumerate() {
            if !active[i] {
                continue;
            }
            let x = field.tip_evaluation_point(i);
            let e = field.field_at(&x);
            let state = TipState {
                head: h,
                tip: k,
                position: field.tips()[i].position,
                local_field_direction: e / e.norm(),
                active: true,
            };
            sources.push(TipEmitter::new(state, model, ink, q_tip, i_tip, constants, seed)?);
        }
    }
    Ok(sources)
}

struct Advanced {
    droplet: Droplet,
    offspring: Vec<Droplet>,
    fissions: u32,
    substeps: u64,
}

struct Context<'a> {
    field: &'a FieldSolution,
    ink: &'a InkProperties,
    ambient: &'a Ambient,
    fission: &'a FissionModel,
    step_fraction: f64,
    seed: u64,
}

/// Largest stable and spatially resolved substep at the droplet's state.
fn substep_limit(d: &Droplet, ctx: &Context<'_>) -> f64 {
    let tau = relaxation_time(d, ctx.ambient);
    let x = d.position;
    let mut accel = ctx.ambient.constants.gravity_vector();
    if d.charge_quanta() > 0 {
        accel += ctx.field.field_at(&x) * (d.charge() / d.mass());
    }
    // Speed scale: current speed or the terminal speed under the local force.
    let speed = d.velocity.norm().max(tau * accel.norm());
    let reach = ctx.step_fraction * ctx.field.nearest_tip_distance(&x);
    let spatial = if speed > 0.0 { reach / speed } else { f64::INFINITY };
    (tau / 10.0).min(spatial)
}

/// Moves one droplet forward to `t_end`, subcycling at τ/10.
fn advance(mut d: Droplet, t_end: f64, ctx: &Context<'_>) -> Result<Advanced> {
    let mut offspring = Vec::new();
    let mut fissions = 0;
    let mut substeps = 0;
    let constants = &ctx.ambient.constants;
    while d.is_in_flight() && d.time < t_end {
        let remaining = t_end - d.time;
        let limit = substep_limit(&d, ctx);
        let n = (remaining / limit).ceil().max(1.0);
        let h = if n <= 1.0 { remaining } else { remaining / n };
        d = step_droplet(&d, ctx.field, ctx.ambient, h)?;
        substeps += 1;
        if !d.is_in_flight() {
            break;
        }
        if n <= 1.0 {
            d.time = t_end;
        }
        d = evaporate(&d, ctx.ink, h);
        ctx.fission.classify(&mut d);
        let mut burst = 0;
        while d.is_in_flight() && at_rayleigh_limit(&d, ctx.ink, constants)? {
            if burst == MAX_FISSIONS_PER_SUBSTEP {
                return Err(Error::Contract(format!(
                    "droplet {} still above its Rayleigh limit after {burst} fissions",
                    d.id
                )));
            }
            let mut rng = fission_stream(ctx.seed, d.id, d.fission_count);
            let (residual, children) = coulomb_fission(&d, ctx.ink, ctx.fission, constants, &mut rng)?;
            d = residual;
            offspring.extend(children);
            fissions += 1;
            burst += 1;
        }
    }
    Ok(Advanced {
        droplet: d,
        offspring,
        fissions,
        substeps,
    })
}

fn deposition_event(d: &Droplet, ink: &InkProperties) -> DepositionEvent {
    DepositionEvent {
        droplet_id: d.id,
        lab_x: d.position.x,
        lab_y: d.position.y,
        time: d.time,
        solid_volume: d.solid_volume(ink),
        solvent_volume: d.solvent_volume(ink),
    }
}

/// Time-marches emission, flight, evaporation and fission of the plume.
///
/// Droplets are advanced in parallel on the current rayon pool. Ids are
/// handed out in a fixed order (emission by source, then offspring by parent
/// id) and every random draw is keyed by seed and droplet id, so the result
/// does not depend on the number of worker threads.
pub fn simulate_plume(
    mut sources: Vec<TipEmitter>,
    field: &FieldSolution,
    ink: &InkProperties,
    ambient: &Ambient,
    settings: &PlumeSettings,
) -> Result<PlumeOutcome> {
    ensure_positive("transport.time_step", settings.time_step)?;
    if !(settings.duration >= 0.0) {
        return Err(Error::invalid(
            "transport.duration",
            format!("must be >= 0, got {}", settings.duration),
        ));
    }
    settings.fission.validate()?;
    settings.cone_jet.validate()?;
    if !(settings.max_step_fraction > 0.0 && settings.max_step_fraction <= 1.0) {
        return Err(Error::invalid(
            "transport.max_step_fraction",
            format!("must lie in (0, 1], got {}", settings.max_step_fraction),
        ));
    }
    let emission_end = settings.emission_cutoff.unwrap_or(f64::INFINITY);
    let ctx = Context {
        field,
        ink,
        ambient,
        fission: &settings.fission,
        step_fraction: settings.max_step_fraction,
        seed: settings.seed,
    };
    let constants = &ambient.constants;

    let mut stats = PlumeStats::default();
    let mut events = Vec::new();
    let mut flying: Vec<Droplet> = Vec::new();
    let mut next_id: u64 = 0;

    let steps = (settings.duration / settings.time_step).ceil() as u64;
    for k in 0..steps {
        let t0 = k as f64 * settings.time_step;
        let t1 = ((k + 1) as f64 * settings.time_step).min(settings.duration);
        if t1 <= t0 {
            break;
        }
        let emitting = if t0 < emission_end {
            &mut sources[..]
        } else {
            &mut [][..]
        };
        for src in emitting.iter_mut() {
            let t_stop = t1.min(emission_end);
            for d in src.emit(&settings.cone_jet, ink, constants, t_stop - t0, t0, &mut next_id)? {
                stats.emitted += 1;
                stats.emitted_solid_mass += d.solid_mass();
                stats.emitted_charge += d.charge_quanta() as u128;
                flying.push(d);
            }
        }

        let mut batch = std::mem::take(&mut flying);
        while !batch.is_empty() {
            let results: Vec<Result<Advanced>> = batch.into_par_iter().map(|d| advance(d, t1, &ctx)).collect();
            let mut born = Vec::new();
            for r in results {
                let Advanced {
                    droplet,
                    offspring,
                    fissions,
                    substeps,
                } = r?;
                stats.fission_events += fissions as u64;
                stats.substeps += substeps;
                for mut child in offspring {
                    child.id = next_id;
                    next_id += 1;
                    stats.offspring += 1;
                    stats.max_generation = stats.max_generation.max(child.generation);
                    if child.is_in_flight() {
                        born.push(child);
                    } else {
                        stats.record_terminal(&child);
                    }
                }
                match droplet.status {
                    DropletStatus::InFlight => flying.push(droplet),
                    DropletStatus::Deposited => {
                        events.push(deposition_event(&droplet, ink));
                        stats.record_terminal(&droplet);
                    }
                    _ => stats.record_terminal(&droplet),
                }
            }
            batch = born;
        }
        if (sources.is_empty() || t1 >= emission_end) && flying.is_empty() {
            break;
        }
    }

    for d in &flying {
        stats.record_terminal(d);
    }
    events.sort_by(|a, b| a.droplet_id.cmp(&b.droplet_id).then(a.time.total_cmp(&b.time)));
    flying.sort_by_key(|d| d.id);
    Ok(PlumeOutcome {
        events,
        stats,
        in_flight: flying,
    })
}
