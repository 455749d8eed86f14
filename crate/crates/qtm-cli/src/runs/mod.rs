//! Run implementations behind the subcommands. Each returns the CSV body
//! (when the mode produces one) plus a JSON summary value.

pub mod clock;
pub mod engine;
pub mod fridge;
pub mod steady;
pub mod transient;

use qtm::dissipation::{BathSpec, DissipatorFlavor};
use qtm::models::{build_three_body, build_three_level, Label, MachineModel, SubsystemKind};

use crate::config::{DissipationModel, MachineKind, RunConfig};
use crate::output::CliError;

pub fn flavor(cfg: &RunConfig) -> DissipatorFlavor {
    match cfg.dissipation.model {
        DissipationModel::Local => DissipatorFlavor::Local,
        DissipationModel::Global => DissipatorFlavor::Global,
    }
}

pub fn bath_specs(cfg: &RunConfig) -> Result<Vec<BathSpec>, CliError> {
    cfg.baths
        .iter()
        .map(|b| {
            let label = match b.label.as_str() {
                "cold" => Label::Cold,
                "hot" => Label::Hot,
                _ => Label::Work,
            };
            BathSpec::new(label, b.temperature, b.kappa, b.dimension, b.omega_ref)
                .map_err(CliError::Solver)
        })
        .collect()
}

/// Build the configured machine at an explicit cold frequency, holding the
/// work frequency ω_w = ω_h − ω_c from the config fixed (the sweep variable
/// moves the cold transition through the cooling window, as in the figures).
pub fn build_fridge_at(cfg: &RunConfig, omega_c: f64) -> Result<MachineModel, CliError> {
    let omega_w = cfg.machine.omega_h - cfg.machine.omega_c;
    let omega_h = omega_c + omega_w;
    let machine = match cfg.machine.kind {
        MachineKind::ThreeLevel => build_three_level(omega_c, omega_h)?,
        MachineKind::ThreeQubit => build_three_body(
            [SubsystemKind::Qubit; 3],
            omega_c,
            omega_h,
            cfg.machine.g.unwrap_or_default(),
        )?,
        MachineKind::ThreeOscillator => {
            let levels = cfg.machine.n_max.unwrap_or(2);
            build_three_body(
                [SubsystemKind::Oscillator { levels }; 3],
                omega_c,
                omega_h,
                cfg.machine.g.unwrap_or_default(),
            )?
        }
        _ => {
            return Err(CliError::Usage(
                "fridge runs need a three-bath machine".to_string(),
            ))
        }
    };
    Ok(machine)
}

/// Temperature of the bath with the given label; validated to exist.
pub fn bath_temperature(cfg: &RunConfig, label: &str) -> f64 {
    cfg.bath(label).map(|b| b.temperature).unwrap_or(f64::NAN)
}
