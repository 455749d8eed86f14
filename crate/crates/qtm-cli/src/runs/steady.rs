//! Single steady-state solve: currents, performance figure, virtual
//! temperatures and the two law checks, reported as a JSON document.

use serde::Serialize;
use serde_json::{json, Value};

use qtm::dynamics::{steady_state, Liouvillian};
use qtm::models::{build_clock, build_engine, Label};
use qtm::thermo::{
    engine_virtual_temperature, split_virtual_temperatures, virtual_temperature, TempScalar,
};

use crate::config::{MachineKind, RunConfig};
use crate::output::{Cell, CliError, Csv};
use crate::runs::{bath_specs, bath_temperature, build_fridge_at, flavor};

#[derive(Debug, Serialize)]
pub struct BathCurrent {
    pub bath: String,
    pub current: f64,
}

fn label_name(l: Label) -> &'static str {
    match l {
        Label::Cold => "cold",
        Label::Hot => "hot",
        Label::Work => "work",
    }
}

#[derive(Debug, Serialize)]
pub struct SteadyReport {
    pub machine: Value,
    pub dissipation: Value,
    pub dim: usize,
    pub omega_c: f64,
    pub omega_h: f64,
    pub currents: Vec<BathCurrent>,
    /// Cooling per unit of work-bath heat, J_c/J_w (refrigerators only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cop: Option<f64>,
    /// Work extracted per hot quantum, 1 − ω_c/ω_h (engine and clock only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<f64>,
    /// Ticks per unit time inferred from the decay channel (clock only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tick_rate: Option<f64>,
    pub entropy_rate: f64,
    pub residual: f64,
    /// Temperature of the effective contact the driven transition sees;
    /// "inf"/"-inf" mark the population-inversion boundary.
    pub virtual_temperature: Value,
    pub beta_v: f64,
    /// The two contact temperatures split by the finite coupling
    /// (coupled three-qubit machine only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub virtual_temperature_split: Option<[Value; 2]>,
    pub first_law_ok: bool,
    pub second_law_ok: bool,
}

fn temp_value(t: TempScalar) -> Value {
    match t {
        TempScalar::Finite(v) => json!(v),
        TempScalar::PosInf => json!("inf"),
        TempScalar::NegInf => json!("-inf"),
    }
}

pub fn run(cfg: &RunConfig) -> Result<SteadyReport, CliError> {
    let omega_c = cfg.machine.omega_c;
    let omega_h = cfg.machine.omega_h;
    let omega_w = omega_h - omega_c;
    let baths = bath_specs(cfg)?;
    let fl = flavor(cfg);

    let (liouvillian, photon_energy) = match cfg.machine.kind {
        MachineKind::Engine => {
            let m = build_engine(
                omega_c,
                omega_h,
                cfg.machine.d.expect("validated"),
                cfg.machine.g.expect("validated"),
            )?;
            (Liouvillian::for_machine(&m, &baths, fl)?, None)
        }
        MachineKind::Clock => {
            let c = build_clock(
                omega_c,
                omega_h,
                cfg.machine.d.expect("validated"),
                cfg.machine.g.expect("validated"),
                cfg.machine.decay_rate.expect("validated"),
            )?;
            let e = c.photon_energy;
            (Liouvillian::for_clock(&c, &baths, fl)?, Some(e))
        }
        _ => {
            let m = build_fridge_at(cfg, omega_c)?;
            (Liouvillian::for_machine(&m, &baths, fl)?, None)
        }
    };

    let report = steady_state(&liouvillian)?;

    // Aggregate per label, preserving first-appearance order.
    let mut currents: Vec<BathCurrent> = Vec::new();
    for (label, j) in &report.currents {
        match currents.iter_mut().find(|c| c.bath == label_name(*label)) {
            Some(c) => c.current += j,
            None => currents.push(BathCurrent {
                bath: label_name(*label).to_string(),
                current: *j,
            }),
        }
    }

    let total: f64 = currents.iter().map(|c| c.current).sum();
    let max_abs = currents
        .iter()
        .map(|c| c.current.abs())
        .fold(0.0_f64, f64::max);
    let first_law_ok = total.abs() <= 1e-10 * max_abs.max(1.0);
    let second_law_ok = report.entropy_rate >= -1e-12;

    let is_engine_like = matches!(cfg.machine.kind, MachineKind::Engine | MachineKind::Clock);
    let (cop, efficiency) = if is_engine_like {
        (None, Some(1.0 - omega_c / omega_h))
    } else {
        let j_c = currents
            .iter()
            .find(|c| c.bath == "cold")
            .map_or(0.0, |c| c.current);
        let j_w = currents
            .iter()
            .find(|c| c.bath == "work")
            .map_or(0.0, |c| c.current);
        (Some(j_c / j_w), None)
    };
    let tick_rate = photon_energy.map(|e| {
        let j_decay = currents
            .iter()
            .find(|c| c.bath == "work")
            .map_or(0.0, |c| c.current);
        -j_decay / e
    });

    let t_v = if is_engine_like {
        engine_virtual_temperature(
            omega_c,
            omega_h,
            1.0 / bath_temperature(cfg, "cold"),
            1.0 / bath_temperature(cfg, "hot"),
        )?
    } else {
        virtual_temperature(
            omega_h,
            omega_w,
            1.0 / bath_temperature(cfg, "hot"),
            1.0 / bath_temperature(cfg, "work"),
        )?
    };
    let virtual_temperature_split = if cfg.machine.kind == MachineKind::ThreeQubit {
        let (plus, minus) = split_virtual_temperatures(
            omega_c,
            omega_h,
            cfg.machine.g.expect("validated"),
            bath_temperature(cfg, "hot"),
            bath_temperature(cfg, "work"),
        )?;
        Some([temp_value(plus.value), temp_value(minus.value)])
    } else {
        None
    };

    let out = SteadyReport {
        machine: serde_json::to_value(cfg.machine.kind)?,
        dissipation: serde_json::to_value(cfg.dissipation.model)?,
        dim: liouvillian.dim(),
        omega_c,
        omega_h,
        currents,
        cop,
        efficiency,
        tick_rate,
        entropy_rate: report.entropy_rate,
        residual: report.residual,
        virtual_temperature: temp_value(t_v.value),
        beta_v: t_v.beta,
        virtual_temperature_split,
        first_law_ok,
        second_law_ok,
    };
    if !out.first_law_ok {
        return Err(CliError::Physics(format!(
            "steady-state currents do not balance: total {total:.3e} against scale {max_abs:.3e}"
        )));
    }
    if !out.second_law_ok {
        return Err(CliError::Physics(format!(
            "negative entropy production rate {:.3e}",
            report.entropy_rate
        )));
    }
    Ok(out)
}

/// One-row CSV mirror of the JSON report, for pipelines that consume only
/// tabular output.
pub fn to_csv(cfg: &RunConfig, report: &SteadyReport) -> String {
    let mut columns = vec!["omega_c".to_string(), "omega_h".to_string()];
    for c in &report.currents {
        columns.push(format!("j_{}", c.bath));
    }
    columns.extend(
        [
            "cop",
            "efficiency",
            "entropy_rate",
            "residual",
            "beta_v",
            "first_law_ok",
            "second_law_ok",
        ]
        .map(String::from),
    );
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut csv = Csv::new(cfg, &refs);
    let mut cells = vec![Cell::F(report.omega_c), Cell::F(report.omega_h)];
    for c in &report.currents {
        cells.push(Cell::F(c.current));
    }
    cells.push(Cell::F(report.cop.unwrap_or(f64::NAN)));
    cells.push(Cell::F(report.efficiency.unwrap_or(f64::NAN)));
    cells.push(Cell::F(report.entropy_rate));
    cells.push(Cell::F(report.residual));
    cells.push(Cell::F(report.beta_v));
    cells.push(Cell::B(report.first_law_ok));
    cells.push(Cell::B(report.second_law_ok));
    csv.row(&cells);
    csv.finish()
}
