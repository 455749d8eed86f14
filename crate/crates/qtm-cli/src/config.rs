//! Strict JSON run configuration: parsing, validation and canonical hashing.
//!
//! Parsing is strict (unknown keys rejected) and every error carries a JSON
//! pointer to the offending field, both for syntactic problems (via
//! `serde_path_to_error`) and for the semantic checks below.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub machine: MachineConfig,
    pub baths: Vec<BathConfig>,
    pub dissipation: DissipationConfig,
    pub run: RunSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineKind {
    ThreeLevel,
    ThreeQubit,
    ThreeOscillator,
    Engine,
    Clock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub kind: MachineKind,
    pub omega_c: f64,
    pub omega_h: f64,
    /// Internal coupling; required (> 0) for the coupled machines, must be
    /// absent for the three-level machine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    /// Ladder levels for engine/clock machines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Oscillator truncation for the three-oscillator machine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Top-rung reset rate for the clock machine (density-matrix runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub label: String,
    pub temperature: f64,
    pub kappa: f64,
    /// Spectral-density exponent D in γ ∝ (ω/ω_ref)^D.
    #[serde(default)]
    pub dimension: i32,
    #[serde(default = "default_omega_ref")]
    pub omega_ref: f64,
}

fn default_omega_ref() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationConfig {
    pub model: DissipationModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationModel {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Steady,
    Sweep,
    Transient,
    EngineWalk,
    Clock,
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunMode::Steady => "steady",
            RunMode::Sweep => "sweep",
            RunMode::Transient => "transient",
            RunMode::EngineWalk => "engine_walk",
            RunMode::Clock => "clock",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.start + step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: RunMode,
    /// Cold-frequency grid for fridge sweeps (ω_w is held fixed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<GridConfig>,
    /// Time grid for transients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<GridConfig>,
    /// Imaginary coherence amplitude seeded on the resonant pair at t = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<f64>,
    /// Work-frequency grid for the engine efficiency sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_w: Option<GridConfig>,
    /// Cycle counts N for which η_N columns are emitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_counts: Option<Vec<u64>>,
    /// Monte Carlo paths for the engine sweep (0 or absent: formulas only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    /// Overall stochastic rate scale Γ_eff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_eff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock: Option<ClockScanConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockScan {
    /// Solve ω_c so that dissipated power matches `fixed_value` for each d.
    FixedPower,
    /// Rescale Γ_eff so the tick rate matches `fixed_value` along an ω_c grid.
    FixedResolution,
    /// Solve a continuous ladder size so the accuracy matches `fixed_value`.
    FixedAccuracy,
    /// Hold entropy per tick at `fixed_value` while d grows.
    EntropyLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockScanConfig {
    pub scan: ClockScan,
    pub fixed_value: f64,
    /// Ladder sizes for fixed-power / entropy-limit scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_values: Option<Vec<usize>>,
    /// ω_c grid for fixed-resolution / fixed-accuracy scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<GridConfig>,
    /// Fixed ladder size for the fixed-resolution scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Ticks per Monte Carlo row (0 or absent: formula/oracle columns only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_ticks: Option<usize>,
}

/// A configuration error, carrying the JSON pointer of the offending field.
#[derive(Debug, thiserror::Error)]
#[error("config error at {pointer}: {message}")]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    fn new(pointer: &str, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.to_string(),
            message: message.into(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let pointer = if path == "." {
            "/".to_string()
        } else {
            format!("/{}", path.replace('.', "/"))
        };
        ConfigError {
            pointer,
            message: e.inner().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn bath(&self, label: &str) -> Option<&BathConfig> {
        self.baths.iter().find(|b| b.label == label)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "/schema_version",
                format!("unsupported schema version {}", self.schema_version),
            ));
        }
        self.validate_machine()?;
        self.validate_baths()?;
        self.validate_run()?;
        Ok(())
    }

    fn validate_machine(&self) -> Result<(), ConfigError> {
        let m = &self.machine;
        if !m.omega_c.is_finite() || m.omega_c <= 0.0 {
            return Err(ConfigError::new(
                "/machine/omega_c",
                "cold frequency must be positive",
            ));
        }
        if !m.omega_h.is_finite() || m.omega_h <= m.omega_c {
            return Err(ConfigError::new(
                "/machine/omega_h",
                "hot frequency must exceed omega_c",
            ));
        }
        match m.kind {
            MachineKind::ThreeLevel => {
                if m.g.is_some() {
                    return Err(ConfigError::new(
                        "/machine/g",
                        "the three-level machine has no internal coupling",
                    ));
                }
            }
            MachineKind::ThreeQubit | MachineKind::ThreeOscillator => {
                match m.g {
                    Some(g) if g.is_finite() && g > 0.0 => {}
                    _ => {
                        return Err(ConfigError::new(
                            "/machine/g",
                            "coupled machines need a positive coupling g",
                        ))
                    }
                }
                if m.kind == MachineKind::ThreeOscillator {
                    match m.n_max {
                        Some(n) if (2..=4).contains(&n) => {}
                        _ => {
                            return Err(ConfigError::new(
                                "/machine/n_max",
                                "oscillator truncation must be 2..=4 \
                                 (total dimension is capped at 64)",
                            ))
                        }
                    }
                }
            }
            MachineKind::Engine | MachineKind::Clock => {
                // g and d are only needed when a density matrix is actually
                // built; the stochastic runs (engine_walk, clock scans) work
                // from frequencies, temperatures and Γ_eff alone.
                let needs_density = self.run.mode == RunMode::Steady
                    || self.run.mode == RunMode::Sweep
                    || self.run.mode == RunMode::Transient;
                if needs_density {
                    match m.g {
                        Some(g) if g.is_finite() && g > 0.0 => {}
                        _ => {
                            return Err(ConfigError::new(
                                "/machine/g",
                                "density-matrix runs need a positive coupling g",
                            ))
                        }
                    }
                    match m.d {
                        Some(d) if (3..=16).contains(&d) => {}
                        _ => {
                            return Err(ConfigError::new(
                                "/machine/d",
                                "density-matrix runs need 3 <= d <= 16 ladder levels \
                                 (total dimension is capped at 64)",
                            ))
                        }
                    }
                }
                if m.kind == MachineKind::Clock && needs_density {
                    match m.decay_rate {
                        Some(r) if r.is_finite() && r > 0.0 => {}
                        _ => {
                            return Err(ConfigError::new(
                                "/machine/decay_rate",
                                "the clock needs a positive top-rung decay rate",
                            ))
                        }
                    }
                }
            }
        }
        if !matches!(m.kind, MachineKind::Engine | MachineKind::Clock) && m.d.is_some() {
            return Err(ConfigError::new(
                "/machine/d",
                "d only applies to engine/clock machines",
            ));
        }
        if m.kind != MachineKind::ThreeOscillator && m.n_max.is_some() {
            return Err(ConfigError::new(
                "/machine/n_max",
                "n_max only applies to the three-oscillator machine",
            ));
        }
        if m.kind != MachineKind::Clock && m.decay_rate.is_some() {
            return Err(ConfigError::new(
                "/machine/decay_rate",
                "decay_rate only applies to the clock machine",
            ));
        }
        Ok(())
    }

    fn validate_baths(&self) -> Result<(), ConfigError> {
        let required: &[&str] = match self.machine.kind {
            MachineKind::Engine | MachineKind::Clock => &["cold", "hot"],
            _ => &["cold", "hot", "work"],
        };
        for (i, b) in self.baths.iter().enumerate() {
            if !["cold", "hot", "work"].contains(&b.label.as_str()) {
                return Err(ConfigError::new(
                    &format!("/baths/{i}/label"),
                    format!("unknown bath label {:?}", b.label),
                ));
            }
            if !required.contains(&b.label.as_str()) {
                return Err(ConfigError::new(
                    &format!("/baths/{i}/label"),
                    format!(
                        "bath {:?} does not exist on this machine (the load has no bath)",
                        b.label
                    ),
                ));
            }
            if !b.temperature.is_finite() || b.temperature <= 0.0 {
                return Err(ConfigError::new(
                    &format!("/baths/{i}/temperature"),
                    "temperature must be positive",
                ));
            }
            if !b.kappa.is_finite() || b.kappa <= 0.0 {
                return Err(ConfigError::new(
                    &format!("/baths/{i}/kappa"),
                    "bare rate must be positive",
                ));
            }
            if !b.omega_ref.is_finite() || b.omega_ref <= 0.0 {
                return Err(ConfigError::new(
                    &format!("/baths/{i}/omega_ref"),
                    "reference frequency must be positive",
                ));
            }
        }
        for want in required {
            if self.bath(want).is_none() {
                return Err(ConfigError::new(
                    "/baths",
                    format!("missing bath {want:?}"),
                ));
            }
        }
        if self.baths.len() != required.len() {
            return Err(ConfigError::new("/baths", "duplicate bath labels"));
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<(), ConfigError> {
        let r = &self.run;
        let forbid = |field: Option<&str>| -> Result<(), ConfigError> {
            if let Some(name) = field {
                return Err(ConfigError::new(
                    &format!("/run/{name}"),
                    format!("{name} does not apply to mode {:?}", r.mode),
                ));
            }
            Ok(())
        };
        let grid_ok = |g: &GridConfig, pointer: &str| -> Result<(), ConfigError> {
            if g.points == 0 {
                return Err(ConfigError::new(pointer, "grid needs at least one point"));
            }
            if !g.start.is_finite() || !g.stop.is_finite() || (g.points > 1 && g.stop <= g.start) {
                return Err(ConfigError::new(pointer, "grid needs start < stop"));
            }
            Ok(())
        };
        match r.mode {
            RunMode::Steady => {
                forbid(r.sweep.as_ref().map(|_| "sweep"))?;
                forbid(r.times.as_ref().map(|_| "times"))?;
                forbid(r.omega_w.as_ref().map(|_| "omega_w"))?;
                forbid(r.clock.as_ref().map(|_| "clock"))?;
            }
            RunMode::Sweep => {
                if !matches!(
                    self.machine.kind,
                    MachineKind::ThreeLevel | MachineKind::ThreeQubit | MachineKind::ThreeOscillator
                ) {
                    return Err(ConfigError::new(
                        "/machine/kind",
                        "fridge sweeps need a three-bath machine",
                    ));
                }
                let g = r.sweep.as_ref().ok_or_else(|| {
                    ConfigError::new("/run/sweep", "sweep mode needs a frequency grid")
                })?;
                grid_ok(g, "/run/sweep")?;
                if g.start <= 0.0 {
                    return Err(ConfigError::new(
                        "/run/sweep/start",
                        "cold frequencies must stay positive",
                    ));
                }
                forbid(r.times.as_ref().map(|_| "times"))?;
                forbid(r.omega_w.as_ref().map(|_| "omega_w"))?;
                forbid(r.clock.as_ref().map(|_| "clock"))?;
            }
            RunMode::Transient => {
                if self.machine.kind != MachineKind::ThreeQubit {
                    return Err(ConfigError::new(
                        "/machine/kind",
                        "the cold-qubit transient needs the three-qubit machine",
                    ));
                }
                let g = r.times.as_ref().ok_or_else(|| {
                    ConfigError::new("/run/times", "transient mode needs a time grid")
                })?;
                grid_ok(g, "/run/times")?;
                if g.start < 0.0 {
                    return Err(ConfigError::new("/run/times/start", "times must be >= 0"));
                }
                forbid(r.sweep.as_ref().map(|_| "sweep"))?;
                forbid(r.omega_w.as_ref().map(|_| "omega_w"))?;
                forbid(r.clock.as_ref().map(|_| "clock"))?;
            }
            RunMode::EngineWalk => {
                if self.machine.kind != MachineKind::Engine {
                    return Err(ConfigError::new(
                        "/machine/kind",
                        "the efficiency sweep needs the engine machine",
                    ));
                }
                let g = r.omega_w.as_ref().ok_or_else(|| {
                    ConfigError::new("/run/omega_w", "engine_walk mode needs an omega_w grid")
                })?;
                grid_ok(g, "/run/omega_w")?;
                if g.start <= 0.0 || g.stop >= self.machine.omega_h {
                    return Err(ConfigError::new(
                        "/run/omega_w",
                        "work frequencies must lie strictly inside (0, omega_h)",
                    ));
                }
                let counts = r.cycle_counts.as_ref().ok_or_else(|| {
                    ConfigError::new("/run/cycle_counts", "engine_walk mode needs cycle counts")
                })?;
                if counts.is_empty() || counts.iter().any(|&n| n == 0) {
                    return Err(ConfigError::new(
                        "/run/cycle_counts",
                        "cycle counts must be positive",
                    ));
                }
                forbid(r.sweep.as_ref().map(|_| "sweep"))?;
                forbid(r.times.as_ref().map(|_| "times"))?;
                forbid(r.clock.as_ref().map(|_| "clock"))?;
            }
            RunMode::Clock => {
                if self.machine.kind != MachineKind::Clock {
                    return Err(ConfigError::new(
                        "/machine/kind",
                        "clock scans need the clock machine",
                    ));
                }
                let c = r.clock.as_ref().ok_or_else(|| {
                    ConfigError::new("/run/clock", "clock mode needs a scan block")
                })?;
                if !c.fixed_value.is_finite() || c.fixed_value <= 0.0 {
                    return Err(ConfigError::new(
                        "/run/clock/fixed_value",
                        "the held-constant value must be positive",
                    ));
                }
                match c.scan {
                    ClockScan::FixedPower | ClockScan::EntropyLimit => {
                        let ds = c.d_values.as_ref().ok_or_else(|| {
                            ConfigError::new("/run/clock/d_values", "this scan needs d_values")
                        })?;
                        if ds.is_empty() || ds.iter().any(|&d| d < 3) {
                            return Err(ConfigError::new(
                                "/run/clock/d_values",
                                "ladder sizes must be >= 3",
                            ));
                        }
                        if c.omega_c.is_some() {
                            return Err(ConfigError::new(
                                "/run/clock/omega_c",
                                "this scan solves or fixes omega_c itself",
                            ));
                        }
                    }
                    ClockScan::FixedResolution => {
                        let g = c.omega_c.as_ref().ok_or_else(|| {
                            ConfigError::new("/run/clock/omega_c", "this scan needs an omega_c grid")
                        })?;
                        grid_ok(g, "/run/clock/omega_c")?;
                        if c.d.map_or(true, |d| d < 3) {
                            return Err(ConfigError::new(
                                "/run/clock/d",
                                "fixed-resolution scans need a ladder size d >= 3",
                            ));
                        }
                    }
                    ClockScan::FixedAccuracy => {
                        let g = c.omega_c.as_ref().ok_or_else(|| {
                            ConfigError::new("/run/clock/omega_c", "this scan needs an omega_c grid")
                        })?;
                        grid_ok(g, "/run/clock/omega_c")?;
                        if c.d.is_some() {
                            return Err(ConfigError::new(
                                "/run/clock/d",
                                "the fixed-accuracy scan solves d itself",
                            ));
                        }
                    }
                }
                let in_window = |w: f64| w > 0.0 && w < self.machine.omega_h;
                if let Some(g) = &c.omega_c {
                    if !in_window(g.start) || !in_window(g.stop) {
                        return Err(ConfigError::new(
                            "/run/clock/omega_c",
                            "cold frequencies must lie strictly inside (0, omega_h)",
                        ));
                    }
                }
                forbid(r.sweep.as_ref().map(|_| "sweep"))?;
                forbid(r.times.as_ref().map(|_| "times"))?;
                forbid(r.omega_w.as_ref().map(|_| "omega_w"))?;
            }
        }
        if let Some(gamma) = r.gamma_eff {
            if !gamma.is_finite() || gamma <= 0.0 {
                return Err(ConfigError::new(
                    "/run/gamma_eff",
                    "the rate scale must be positive",
                ));
            }
        }
        if let Some(c) = r.coherence {
            if !c.is_finite() {
                return Err(ConfigError::new(
                    "/run/coherence",
                    "coherence amplitude must be finite",
                ));
            }
            if r.mode != RunMode::Transient {
                return Err(ConfigError::new(
                    "/run/coherence",
                    "coherence only applies to transients",
                ));
            }
        }
        Ok(())
    }
}
