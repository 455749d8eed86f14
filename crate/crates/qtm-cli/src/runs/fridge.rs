//! Fridge characteristic sweep: steady state, currents and COP along a
//! cold-frequency grid at fixed work frequency.

use rayon::prelude::*;
use serde::Serialize;

use qtm::dynamics::{steady_state, Liouvillian};
use qtm::models::Label;
use qtm::thermo::cooling_window_bound;

use crate::config::RunConfig;
use crate::output::{Cell, CliError, Csv};
use crate::runs::{bath_specs, bath_temperature, build_fridge_at, flavor};

#[derive(Debug, Clone, Serialize)]
pub struct FridgeRow {
    pub omega_c: f64,
    pub j_c: f64,
    pub j_h: f64,
    pub j_w: f64,
    pub cop: f64,
    pub entropy_rate: f64,
    pub power_norm: f64,
    pub cooling: bool,
}

#[derive(Debug, Serialize)]
pub struct FridgeSummary {
    pub eps_carnot: f64,
    /// COP at the maximum-cooling-power row (None when nothing cools).
    pub eps_star: Option<f64>,
    pub eps_star_over_carnot: Option<f64>,
    /// D/(D+1)·ε_Carnot with D from the cold bath.
    pub cop_at_max_power_bound: f64,
    pub max_cop: Option<f64>,
    pub max_power_omega_c: Option<f64>,
    pub cooling_points: usize,
    pub first_law_ok: bool,
    pub second_law_ok: bool,
}

pub struct FridgeOutput {
    pub rows: Vec<FridgeRow>,
    pub summary: FridgeSummary,
}

pub fn run(cfg: &RunConfig) -> Result<FridgeOutput, CliError> {
    let grid = cfg.run.sweep.as_ref().expect("validated").values();
    let baths = bath_specs(cfg)?;
    let fl = flavor(cfg);

    let mut rows: Vec<FridgeRow> = grid
        .par_iter()
        .map(|&omega_c| -> Result<FridgeRow, CliError> {
            let machine = build_fridge_at(cfg, omega_c)?;
            let l = Liouvillian::for_machine(&machine, &baths, fl)?;
            let report = steady_state(&l)?;
            let j_c = report.current(Label::Cold);
            let j_w = report.current(Label::Work);
            Ok(FridgeRow {
                omega_c,
                j_c,
                j_h: report.current(Label::Hot),
                j_w,
                cop: j_c / j_w,
                entropy_rate: report.entropy_rate,
                power_norm: 0.0,
                cooling: j_c > 0.0,
            })
        })
        .collect::<Result<_, _>>()?;

    let j_max = rows
        .iter()
        .filter(|r| r.cooling)
        .map(|r| r.j_c)
        .fold(0.0f64, f64::max);
    if j_max > 0.0 {
        for r in &mut rows {
            r.power_norm = (r.j_c / j_max).max(0.0);
        }
    }

    let t_c = bath_temperature(cfg, "cold");
    let t_h = bath_temperature(cfg, "hot");
    let t_w = bath_temperature(cfg, "work");
    let eps_carnot = cooling_window_bound(t_c, t_h, t_w)?;
    let d = cfg.bath("cold").map(|b| b.dimension).unwrap_or(0) as f64;

    let star = rows
        .iter()
        .filter(|r| r.cooling)
        .max_by(|a, b| a.j_c.partial_cmp(&b.j_c).unwrap());
    let max_cop = rows
        .iter()
        .filter(|r| r.cooling)
        .map(|r| r.cop)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
    let first_law_ok = rows.iter().all(|r| {
        let scale = r.j_c.abs().max(r.j_h.abs()).max(r.j_w.abs());
        (r.j_c + r.j_h + r.j_w).abs() < 1e-10 * scale.max(1e-300)
    });
    let second_law_ok = rows.iter().all(|r| r.entropy_rate >= -1e-12);

    let summary = FridgeSummary {
        eps_carnot,
        eps_star: star.map(|r| r.cop),
        eps_star_over_carnot: star.map(|r| r.cop / eps_carnot),
        cop_at_max_power_bound: d / (d + 1.0) * eps_carnot,
        max_cop,
        max_power_omega_c: star.map(|r| r.omega_c),
        cooling_points: rows.iter().filter(|r| r.cooling).count(),
        first_law_ok,
        second_law_ok,
    };
    Ok(FridgeOutput { rows, summary })
}

pub fn to_csv(cfg: &RunConfig, out: &FridgeOutput) -> String {
    let mut csv = Csv::new(
        cfg,
        &[
            "omega_c",
            "j_c",
            "j_h",
            "j_w",
            "cop",
            "entropy_rate",
            "power_norm",
            "cooling",
        ],
    );
    for r in &out.rows {
        csv.row(&[
            Cell::F(r.omega_c),
            Cell::F(r.j_c),
            Cell::F(r.j_h),
            Cell::F(r.j_w),
            Cell::F(r.cop),
            Cell::F(r.entropy_rate),
            Cell::F(r.power_norm),
            Cell::B(r.cooling),
        ]);
    }
    csv.finish()
}
