//! Subcommand bodies. Each reads the validated config and writes its
//! tables through an [`OutputDir`].

use std::io::Write;

use ehdspray_core::deposition::{
    accumulate, deposition_rate, uniformity_cv, write_binary_grid, write_csv_matrix, CellMask, SubstrateMotion,
};
use ehdspray_core::field::{cone_jet_active, solve_tip_charges};
use ehdspray_core::layout::{linspace, min_clear_spacing, throughput_table, SpacingBracket, SpacingStudy};
use ehdspray_core::transport::{simulate_plume, sources_for_layout, PlumeOutcome, PlumeSettings};
use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;

use crate::config::{Config, MapPlane};
use crate::error::CliError;
use crate::output::{num, OutputDir};

pub fn field_map(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let layout = cfg.array()?;
    let field = solve_tip_charges(&layout, &cfg.process.conditions(), &cfg.constants)?;
    let m = &cfg.field_map;
    let us = linspace(m.u_range[0], m.u_range[1], m.nu);
    let vs = linspace(m.v_range[0], m.v_range[1], m.nv);
    let rows: Vec<Vec<String>> = vs
        .par_iter()
        .flat_map_iter(|&v| {
            let field = &field;
            us.iter().map(move |&u| {
                let p = match m.plane {
                    MapPlane::Xz => Vector3::new(u, m.offset, v),
                    MapPlane::Xy => Vector3::new(u, v, m.offset),
                };
                let e = field.field_at(&p);
                vec![
                    num(p.x),
                    num(p.y),
                    num(p.z),
                    num(field.potential_at(&p)),
                    num(e.x),
                    num(e.y),
                    num(e.z),
                ]
            })
        })
        .collect();
    out.write_csv(
        "field_map.csv",
        &[
            "x_m",
            "y_m",
            "z_m",
            "potential_v",
            "ex_v_per_m",
            "ey_v_per_m",
            "ez_v_per_m",
        ],
        rows,
    )
}

pub fn interference(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let template = cfg.printhead.template(cfg.process.standoff);
    let conditions = cfg.process.conditions();
    let study = SpacingStudy {
        pattern: cfg.layout.pattern,
        template: &template,
        conditions: &conditions,
        constants: &cfg.constants,
    };
    let sweep = &cfg.interference;
    let theta = cfg.cone_jet.activity_threshold;
    let spacings = linspace(sweep.spacing_min, sweep.spacing_max, sweep.points);
    let ratios: Vec<(f64, Vec<f64>)> = spacings
        .par_iter()
        .map(|&s| Ok((s, study.ratios(sweep.n_heads, s)?)))
        .collect::<ehdspray_core::Result<_>>()?;

    let spikes = cfg.printhead.spike_count;
    let mut tips = Vec::new();
    let mut summary = Vec::new();
    for (s, rho) in &ratios {
        let active = cone_jet_active(rho, theta)?;
        for (i, (r, a)) in rho.iter().zip(&active).enumerate() {
            tips.push(vec![
                num(*s),
                (i / spikes).to_string(),
                (i % spikes).to_string(),
                num(*r),
                a.to_string(),
            ]);
        }
        let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
        let n_active = active.iter().filter(|&&a| a).count();
        summary.push(vec![num(*s), num(min), n_active.to_string(), rho.len().to_string()]);
    }
    out.write_csv("interference.csv", &["spacing_m", "head", "tip", "rho", "active"], tips)?;
    out.write_csv(
        "interference_summary.csv",
        &["spacing_m", "min_rho", "active_tips", "total_tips"],
        summary,
    )
}

/// Runs the configured plume.
pub fn run_plume(cfg: &Config) -> Result<PlumeOutcome, CliError> {
    let layout = cfg.array()?;
    let conditions = cfg.process.conditions();
    let ink = cfg.ink.resolve()?;
    let field = solve_tip_charges(&layout, &conditions, &cfg.constants)?;
    let sources = sources_for_layout(
        &layout,
        &field,
        &conditions,
        &ink,
        &cfg.cone_jet,
        &cfg.constants,
        cfg.seed,
    )?;
    let t = &cfg.transport;
    let settings = PlumeSettings {
        time_step: t.time_step,
        duration: t.duration,
        emission_cutoff: t.emission_cutoff,
        max_step_fraction: t.max_step_fraction,
        seed: cfg.seed,
        cone_jet: cfg.cone_jet,
        fission: cfg.fission,
    };
    Ok(simulate_plume(sources, &field, &ink, &cfg.ambient(), &settings)?)
}

fn stats_rows(outcome: &PlumeOutcome) -> Vec<(&'static str, String)> {
    let s = &outcome.stats;
    vec![
        ("emitted", s.emitted.to_string()),
        ("offspring", s.offspring.to_string()),
        ("fission_events", s.fission_events.to_string()),
        ("max_generation", s.max_generation.to_string()),
        ("substeps", s.substeps.to_string()),
        ("deposited", s.deposited.to_string()),
        ("in_flight", s.in_flight.to_string()),
        ("aerosolized", s.aerosolized.to_string()),
        ("escaped", s.escaped.to_string()),
        ("emitted_solid_mass_kg", num(s.emitted_solid_mass)),
        ("deposited_solid_mass_kg", num(s.deposited_solid_mass)),
        ("in_flight_solid_mass_kg", num(s.in_flight_solid_mass)),
        ("aerosolized_solid_mass_kg", num(s.aerosolized_solid_mass)),
        ("escaped_solid_mass_kg", num(s.escaped_solid_mass)),
        ("solid_mass_imbalance", num(s.solid_mass_imbalance())),
        ("emitted_charge_e", s.emitted_charge.to_string()),
        ("deposited_charge_e", s.deposited_charge.to_string()),
        ("in_flight_charge_e", s.in_flight_charge.to_string()),
        ("aerosolized_charge_e", s.aerosolized_charge.to_string()),
        ("escaped_charge_e", s.escaped_charge.to_string()),
        ("charge_imbalance", num(s.charge_imbalance())),
    ]
}

pub fn plume(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let outcome = run_plume(cfg)?;
    let rows = outcome.events.iter().map(|e| {
        vec![
            e.droplet_id.to_string(),
            num(e.time),
            num(e.lab_x),
            num(e.lab_y),
            num(e.solid_volume),
            num(e.solvent_volume),
        ]
    });
    out.write_csv(
        "plume_events.csv",
        &[
            "droplet_id",
            "time_s",
            "lab_x_m",
            "lab_y_m",
            "solid_volume_m3",
            "solvent_volume_m3",
        ],
        rows,
    )?;
    out.write_summary("plume_stats.csv", &stats_rows(&outcome))
}

pub fn deposit(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let outcome = run_plume(cfg)?;
    let window = match cfg.deposit.window {
        Some([a, b]) => (a, b),
        None => (0.0, cfg.transport.duration),
    };
    let motion = SubstrateMotion {
        speed: cfg.process.substrate_speed,
        direction: Vector2::from(cfg.process.substrate_direction),
    };
    let grid = accumulate(&outcome.events, &motion, &cfg.deposit.grid, window)?;
    let rate = deposition_rate(&outcome.events, window)?;
    let mask = match cfg.deposit.cv_mask.as_str() {
        "all" => CellMask::All,
        _ => CellMask::Covered,
    };
    // An empty or single-cell deposit has no defined uniformity; report it
    // rather than failing the run.
    let (cv, cv_note) = match uniformity_cv(&grid, &mask) {
        Ok(cv) => (num(cv), String::new()),
        Err(e) => (num(f64::NAN), e.to_string()),
    };

    out.write_with("thickness.csv", true, |w, _| write_csv_matrix(&grid, &[], &mut *w))?;
    out.write_with("thickness.grid", false, |w, p| {
        write_binary_grid(&grid, &p.lines, &mut *w)
    })?;
    let covered = grid.thickness.iter().filter(|&&t| t > 0.0).count();
    let mut rows = vec![
        ("window_start_s", num(window.0)),
        ("window_end_s", num(window.1)),
        ("solid_rate_um3_per_s", num(rate.solid)),
        ("wet_rate_um3_per_s", num(rate.wet)),
        ("grid_solid_volume_m3", num(grid.total_volume())),
        ("overflow_volume_m3", num(grid.overflow_volume)),
        ("overflow_events", grid.overflow_events.to_string()),
        ("covered_cells", covered.to_string()),
        (
            "max_thickness_m",
            num(grid.thickness.iter().copied().fold(0.0, f64::max)),
        ),
        ("uniformity_cv", cv),
    ];
    if !cv_note.is_empty() {
        rows.push(("uniformity_cv_note", cv_note));
    }
    rows.extend(stats_rows(&outcome));
    out.write_summary("deposit_summary.csv", &rows)
}

/// One bracket interpretation of the clear-spacing search.
fn clear_spacing_row(
    label: &str,
    study: &SpacingStudy<'_>,
    n: usize,
    theta: f64,
    bracket: &SpacingBracket,
) -> (Vec<String>, Result<f64, ehdspray_core::Error>) {
    let rho = |s: f64| study.min_ratio(n, s).map(num).unwrap_or_else(|e| format!("error: {e}"));
    let result = min_clear_spacing(study, n, theta, bracket);
    let (spacing, status) = match &result {
        Ok(s) => (num(*s), "ok".to_string()),
        Err(e) => (String::new(), e.to_string()),
    };
    let row = vec![
        label.to_string(),
        n.to_string(),
        num(theta),
        num(bracket.s_lo),
        num(bracket.s_hi),
        rho(bracket.s_lo),
        rho(bracket.s_hi),
        spacing,
        status,
    ];
    (row, result)
}

pub fn layout_opt(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let template = cfg.printhead.template(cfg.process.standoff);
    let conditions = cfg.process.conditions();
    let study = SpacingStudy {
        pattern: cfg.layout.pattern,
        template: &template,
        conditions: &conditions,
        constants: &cfg.constants,
    };
    let o = &cfg.layout_opt;
    let theta = o.threshold.unwrap_or(cfg.cone_jet.activity_threshold);
    let configured = o.bracket();
    // The 3-to-7 spacing anchor read in millimetres and in centimetres.
    let mm = SpacingBracket {
        s_lo: 3e-3,
        s_hi: 7e-3,
        tol: o.tol.min(1e-5),
        samples: o.samples,
    };
    let cm = SpacingBracket {
        s_lo: 3e-2,
        s_hi: 7e-2,
        ..configured
    };
    let (row, result) = clear_spacing_row("configured", &study, o.n_heads, theta, &configured);
    let mut rows = vec![row];
    for (label, b) in [("mm_3_to_7", mm), ("cm_3_to_7", cm)] {
        rows.push(clear_spacing_row(label, &study, o.n_heads, theta, &b).0);
    }
    out.write_csv(
        "layout_opt.csv",
        &[
            "bracket",
            "n_heads",
            "threshold",
            "s_lo_m",
            "s_hi_m",
            "min_rho_at_s_lo",
            "min_rho_at_s_hi",
            "min_clear_spacing_m",
            "status",
        ],
        rows,
    )?;
    result.map(|_| ()).map_err(CliError::from)
}

pub fn rate(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let template = cfg.printhead.template(cfg.process.standoff);
    let conditions = cfg.process.conditions();
    let ink = cfg.ink.resolve()?;
    let study = SpacingStudy {
        pattern: cfg.layout.pattern,
        template: &template,
        conditions: &conditions,
        constants: &cfg.constants,
    };
    let theta = cfg.layout_opt.threshold.unwrap_or(cfg.cone_jet.activity_threshold);
    let table = throughput_table(&study, &cfg.rate.n_heads, &ink, theta, &cfg.layout_opt.bracket())?;
    let rows = table.iter().map(|r| {
        vec![
            r.n_heads.to_string(),
            num(r.spacing),
            r.active_tips.to_string(),
            r.total_tips.to_string(),
            r.active_heads.to_string(),
            num(r.solid_rate),
            num(r.wet_rate),
        ]
    });
    out.write_csv(
        "rate.csv",
        &[
            "n_heads",
            "spacing_m",
            "active_tips",
            "total_tips",
            "active_heads",
            "solid_rate_um3_per_s",
            "wet_rate_um3_per_s",
        ],
        rows,
    )
}

/// Echo of the effective configuration, commented with the provenance.
pub fn echo_config(cfg: &Config, out: &mut OutputDir) -> Result<(), CliError> {
    let text = cfg.to_toml();
    out.write_with("effective_config.toml", true, |w, _| w.write_all(text.as_bytes()))
}
