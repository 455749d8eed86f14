//! Engine efficiency sweep over the work frequency: finite-cycle efficiency
//! formulas per configured cycle count, optionally cross-checked by walk
//! Monte Carlo, plus a normalized ergotropic-power column.

use rayon::prelude::*;
use serde::Serialize;

use qtm::stochastic::{
    engine_energy_ratio, n_cycle_efficiency, simulate_walk, walk_params_from_machine,
};

use crate::config::RunConfig;
use crate::output::{Cell, CliError, Csv};
use crate::runs::bath_temperature;

#[derive(Debug, Clone, Serialize)]
pub struct EngineRow {
    pub omega_w: f64,
    pub omega_c: f64,
    /// Work fraction per quantum, 1 − ω_c/ω_h (the η_∞ limit).
    pub r: f64,
    pub beta_v_omega_w: f64,
    pub engine: bool,
    pub eta_inf: f64,
    pub eta_n: Vec<f64>,
    pub eta_mc: Vec<f64>,
    pub power_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct EngineSummary {
    pub cycle_counts: Vec<u64>,
    pub carnot_efficiency: f64,
    pub max_eta_inf: f64,
    pub engine_points: usize,
    /// η with more cycles dominates η with fewer at every engine row, for
    /// each adjacent pair of configured cycle counts (sorted ascending).
    pub finite_cycle_ordering_ok: bool,
}

pub struct EngineOutput {
    pub rows: Vec<EngineRow>,
    pub summary: EngineSummary,
}

pub fn run(cfg: &RunConfig) -> Result<EngineOutput, CliError> {
    let grid = cfg.run.omega_w.as_ref().expect("validated").values();
    let counts = cfg.run.cycle_counts.clone().expect("validated");
    let n_paths = cfg.run.n_paths.unwrap_or(0);
    let gamma_eff = cfg.run.gamma_eff.unwrap_or(1.0);
    let omega_h = cfg.machine.omega_h;
    let t_c = bath_temperature(cfg, "cold");
    let t_h = bath_temperature(cfg, "hot");

    let mut rows: Vec<EngineRow> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &omega_w)| -> Result<EngineRow, CliError> {
            let omega_c = omega_h - omega_w;
            let r = engine_energy_ratio(omega_c, omega_h)?;
            let bvw = omega_h / t_h - omega_c / t_c;
            let engine = bvw < 0.0;
            let eta_inf = if engine { r } else { f64::NAN };
            let eta_n: Vec<f64> = counts
                .iter()
                .map(|&n| {
                    if engine {
                        n_cycle_efficiency(n, bvw, r).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    }
                })
                .collect();
            let eta_mc = if engine && n_paths > 0 {
                mc_estimates(cfg, omega_c, gamma_eff, &counts, n_paths, idx)?
            } else {
                vec![f64::NAN; counts.len()]
            };
            Ok(EngineRow {
                omega_w,
                omega_c,
                r,
                beta_v_omega_w: bvw,
                engine,
                eta_inf,
                eta_n,
                eta_mc,
                power_norm: 0.0,
            })
        })
        .collect::<Result<_, _>>()?;

    // Ergotropic power scale per row: η_N·J_h with J_h = ω_h·(γ↑ − γ↓),
    // evaluated at the first configured cycle count and normalized to its
    // maximum over the engine rows.
    let mut p_max = 0.0f64;
    let mut powers = vec![0.0; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        if !row.engine {
            continue;
        }
        let p = walk_params_from_machine(row.omega_c, omega_h, t_c, t_h, gamma_eff)
            .map_err(CliError::Solver)?;
        let power = row.eta_n[0].max(0.0) * omega_h * p.bias();
        powers[i] = power;
        p_max = p_max.max(power);
    }
    if p_max > 0.0 {
        for (row, power) in rows.iter_mut().zip(&powers) {
            row.power_norm = power / p_max;
        }
    }

    let eta_cols: Vec<Vec<f64>> = (0..counts.len())
        .map(|k| rows.iter().filter(|r| r.engine).map(|r| r.eta_n[k]).collect())
        .collect();
    let mut ordering_ok = true;
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&k| counts[k]);
    for pair in order.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if counts[lo] == counts[hi] {
            continue;
        }
        ordering_ok &= eta_cols[lo]
            .iter()
            .zip(&eta_cols[hi])
            .all(|(a, b)| b > a);
    }

    let summary = EngineSummary {
        cycle_counts: counts,
        carnot_efficiency: 1.0 - t_c / t_h,
        max_eta_inf: rows
            .iter()
            .filter(|r| r.engine)
            .map(|r| r.eta_inf)
            .fold(0.0, f64::max),
        engine_points: rows.iter().filter(|r| r.engine).count(),
        finite_cycle_ordering_ok: ordering_ok,
    };
    Ok(EngineOutput { rows, summary })
}

/// Marginal-efficiency Monte Carlo at cycle count N: evolve one ensemble to
/// checkpoints bracketing N net cycles and difference the ergotropy,
/// η̂ = (W(t₂) − W(t₁)) / (ω_h·(n̄(t₂) − n̄(t₁))).
fn mc_estimates(
    cfg: &RunConfig,
    omega_c: f64,
    gamma_eff: f64,
    counts: &[u64],
    n_paths: usize,
    row_idx: usize,
) -> Result<Vec<f64>, CliError> {
    let omega_h = cfg.machine.omega_h;
    let t_c = bath_temperature(cfg, "cold");
    let t_h = bath_temperature(cfg, "hot");
    let p = walk_params_from_machine(omega_c, omega_h, t_c, t_h, gamma_eff)?;
    let bias = p.bias();

    // Two checkpoints per cycle count; keep them sorted and deduplicated.
    let mut marks: Vec<(usize, f64, f64)> = Vec::new();
    for (k, &n) in counts.iter().enumerate() {
        let half = (n as f64 / 2.0).min(5.0).max(0.5);
        marks.push((k, (n as f64 - half) / bias, (n as f64 + half) / bias));
    }
    let mut times: Vec<f64> = marks.iter().flat_map(|m| [m.1, m.2]).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();

    let seed = cfg.seed.wrapping_add(row_idx as u64);
    let ens = simulate_walk(&p, &times, n_paths, seed)?;
    let at = |t: f64| times.iter().position(|&x| x == t).expect("kept");

    marks
        .iter()
        .map(|&(_, t1, t2)| {
            let (i1, i2) = (at(t1), at(t2));
            let dw = ens.ergotropy(i2)? - ens.ergotropy(i1)?;
            let dn = ens.mean(i2) - ens.mean(i1);
            Ok(dw / (omega_h * dn))
        })
        .collect()
}

pub fn to_csv(cfg: &RunConfig, out: &EngineOutput) -> String {
    let counts = &out.summary.cycle_counts;
    let mut columns: Vec<String> = vec![
        "omega_w".into(),
        "omega_c".into(),
        "r".into(),
        "beta_v_omega_w".into(),
        "engine".into(),
        "eta_inf".into(),
    ];
    for n in counts {
        columns.push(format!("eta_n{n}"));
    }
    let with_mc = out.rows.iter().any(|r| r.eta_mc.iter().any(|v| !v.is_nan()));
    if with_mc {
        for n in counts {
            columns.push(format!("eta_mc_n{n}"));
        }
    }
    columns.push("power_norm".into());
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();

    let mut csv = Csv::new(cfg, &col_refs);
    for r in &out.rows {
        let mut cells = vec![
            Cell::F(r.omega_w),
            Cell::F(r.omega_c),
            Cell::F(r.r),
            Cell::F(r.beta_v_omega_w),
            Cell::B(r.engine),
            Cell::F(r.eta_inf),
        ];
        cells.extend(r.eta_n.iter().map(|&v| Cell::F(v)));
        if with_mc {
            cells.extend(r.eta_mc.iter().map(|&v| Cell::F(v)));
        }
        cells.push(Cell::F(r.power_norm));
        csv.row(&cells);
    }
    csv.finish()
}
