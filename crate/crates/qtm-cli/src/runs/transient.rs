//! Cold-qubit temperature transient from the pre-coupling product state,
//! optionally with seeded resonant coherence.

use serde::Serialize;

use qtm::dynamics::{
    evolve, product_gibbs, steady_state, with_resonant_coherence, Liouvillian,
};
use qtm::linalg::partial_trace;
use qtm::models::Label;

use crate::config::RunConfig;
use crate::output::{Cell, CliError, Csv};
use crate::runs::{bath_specs, bath_temperature, build_fridge_at, flavor};

#[derive(Debug, Clone, Serialize)]
pub struct TransientRow {
    pub t: f64,
    pub t_eff: f64,
    pub p0: f64,
    pub p1: f64,
}

#[derive(Debug, Serialize)]
pub struct TransientSummary {
    pub t_eff_steady: f64,
    pub t_eff_min: f64,
    pub t_at_min: f64,
    /// First interior local minimum (equal to the global one in the
    /// near-critically damped regime).
    pub first_minimum: Option<f64>,
    pub first_minimum_time: Option<f64>,
    /// Relative depth (T_∞ − T_min)/T_∞; positive means undershoot.
    pub undershoot_depth: f64,
    pub coherence: f64,
}

pub struct TransientOutput {
    pub rows: Vec<TransientRow>,
    pub summary: TransientSummary,
}

pub fn run(cfg: &RunConfig) -> Result<TransientOutput, CliError> {
    let times = cfg.run.times.as_ref().expect("validated").values();
    let machine = build_fridge_at(cfg, cfg.machine.omega_c)?;
    let baths = bath_specs(cfg)?;
    let l = Liouvillian::for_machine(&machine, &baths, flavor(cfg))?;

    let temps = [
        (Label::Cold, bath_temperature(cfg, "cold")),
        (Label::Hot, bath_temperature(cfg, "hot")),
        (Label::Work, bath_temperature(cfg, "work")),
    ];
    let mut rho0 = product_gibbs(&machine, &temps)?;
    let amplitude = cfg.run.coherence.unwrap_or(0.0);
    if amplitude != 0.0 {
        rho0 = with_resonant_coherence(&machine, &rho0, amplitude)?;
    }

    let traj = evolve(&l, &rho0, &times)?;
    let cold = machine
        .subsystem_index(Label::Cold)
        .expect("three-body machine");
    let rows: Vec<TransientRow> = (0..traj.len())
        .map(|i| -> Result<TransientRow, CliError> {
            let red = partial_trace(traj.state(i), machine.dims(), cold)?;
            let (p0, p1) = (red[(0, 0)].re, red[(1, 1)].re);
            let omega_c = machine.frequency(Label::Cold).unwrap_or(1.0);
            Ok(TransientRow {
                t: times[i],
                t_eff: qtm::dynamics::two_level_effective_temperature(p0, p1, omega_c)?,
                p0,
                p1,
            })
        })
        .collect::<Result<_, _>>()?;

    let steady = steady_state(&l)?;
    let t_eff_steady =
        qtm::dynamics::cold_qubit_temperature(&machine, steady.rho.matrix())?;

    let (mut t_eff_min, mut t_at_min) = (f64::INFINITY, times[0]);
    for r in &rows {
        if r.t_eff < t_eff_min {
            t_eff_min = r.t_eff;
            t_at_min = r.t;
        }
    }
    let mut first_minimum = None;
    let mut first_minimum_time = None;
    for i in 1..rows.len().saturating_sub(1) {
        if rows[i].t_eff < rows[i - 1].t_eff && rows[i].t_eff <= rows[i + 1].t_eff {
            first_minimum = Some(rows[i].t_eff);
            first_minimum_time = Some(rows[i].t);
            break;
        }
    }

    let summary = TransientSummary {
        t_eff_steady,
        t_eff_min,
        t_at_min,
        first_minimum,
        first_minimum_time,
        undershoot_depth: (t_eff_steady - t_eff_min) / t_eff_steady,
        coherence: amplitude,
    };
    Ok(TransientOutput { rows, summary })
}

pub fn to_csv(cfg: &RunConfig, out: &TransientOutput) -> String {
    let mut csv = Csv::new(cfg, &["t", "t_eff", "p0", "p1"]);
    for r in &out.rows {
        csv.row(&[
            Cell::F(r.t),
            Cell::F(r.t_eff),
            Cell::F(r.p0),
            Cell::F(r.p1),
        ]);
    }
    csv.finish()
}
