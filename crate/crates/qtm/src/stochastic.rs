//! Classical stochastic reduction of the engine and clock: a biased
//! birth–death walk on the load ladder, its Gaussian asymptotics, n-cycle
//! efficiencies, and tick statistics for the finite ladder read out as a
//! clock.
//!
//! When the qubits relax much faster than the load moves, the load's rung
//! index performs a random walk with rates
//!
//! γ↑ = Γ_eff p_c(0) p_h(1),   γ↓ = Γ_eff p_c(1) p_h(0),
//!
//! whose ratio e^{β_c ω_c − β_h ω_h} is set by the virtual temperature alone.
//! Everything here is exact for that reduced model; Monte Carlo estimators
//! come with deterministic seeding so runs are reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QtmError, Result};

/// Walk rates plus the geometry of the ladder they act on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub gamma_up: f64,
    pub gamma_down: f64,
    /// Energy per rung (ω_w for the engine's load).
    pub spacing: f64,
    /// `Some(d)`: ladder truncated to rungs 0..d−1. `None`: half-infinite.
    pub levels: Option<usize>,
}

impl WalkParams {
    pub fn new(gamma_up: f64, gamma_down: f64, spacing: f64) -> Result<Self> {
        for (name, r) in [("gamma_up", gamma_up), ("gamma_down", gamma_down)] {
            if !r.is_finite() || r < 0.0 {
                return Err(QtmError::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {r}"
                )));
            }
        }
        if gamma_up + gamma_down == 0.0 {
            return Err(QtmError::InvalidParameter(
                "at least one walk rate must be positive".to_string(),
            ));
        }
        if !spacing.is_finite() || spacing <= 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "rung spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self {
            gamma_up,
            gamma_down,
            spacing,
            levels: None,
        })
    }

    pub fn with_levels(mut self, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(QtmError::InvalidParameter(format!(
                "a truncated ladder needs at least 2 rungs, got {levels}"
            )));
        }
        self.levels = Some(levels);
        Ok(self)
    }

    /// Net drift velocity γ↑ − γ↓ in rungs per unit time.
    pub fn bias(&self) -> f64 {
        self.gamma_up - self.gamma_down
    }

    /// Total jump activity γ↑ + γ↓.
    pub fn activity(&self) -> f64 {
        self.gamma_up + self.gamma_down
    }

    /// Entropy pushed into the baths per upward step, ln(γ↑/γ↓)
    /// = β_c ω_c − β_h ω_h. Requires both rates positive.
    pub fn step_affinity(&self) -> Result<f64> {
        if self.gamma_up <= 0.0 || self.gamma_down <= 0.0 {
            return Err(QtmError::InvalidParameter(
                "the step affinity needs both rates positive".to_string(),
            ));
        }
        Ok((self.gamma_up / self.gamma_down).ln())
    }
}

/// Walk rates induced by a two-qubit engine with fast bath coupling Γ_eff.
///
/// p_α(1) is the excited-state population of qubit α at its own bath
/// temperature; the load climbs when the hot qubit is excited and the cold
/// one is not, and descends in the mirrored configuration.
pub fn walk_params_from_machine(
    omega_c: f64,
    omega_h: f64,
    t_c: f64,
    t_h: f64,
    gamma_eff: f64,
) -> Result<WalkParams> {
    if !(omega_c > 0.0) || !(omega_h > omega_c) {
        return Err(QtmError::InvalidParameter(format!(
            "walk reduction needs 0 < ω_c < ω_h, got ({omega_c}, {omega_h})"
        )));
    }
    if !(t_c > 0.0) || !(t_h > 0.0) {
        return Err(QtmError::InvalidParameter(format!(
            "bath temperatures must be positive, got ({t_c}, {t_h})"
        )));
    }
    if !gamma_eff.is_finite() || gamma_eff <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "effective rate must be positive, got {gamma_eff}"
        )));
    }
    let excited = |omega: f64, t: f64| {
        let e = (-omega / t).exp();
        e / (1.0 + e)
    };
    let (pc1, ph1) = (excited(omega_c, t_c), excited(omega_h, t_h));
    WalkParams::new(
        gamma_eff * (1.0 - pc1) * ph1,
        gamma_eff * pc1 * (1.0 - ph1),
        omega_h - omega_c,
    )
}

/// Boundary-free Gaussian limit of the walk at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAsymptotics {
    pub mean: f64,
    pub variance: f64,
    /// Drift exceeds five standard deviations: the reflecting boundary is
    /// effectively never revisited and the Gaussian form is trustworthy.
    pub drift_dominated: bool,
}

pub fn gaussian_asymptotics(p: &WalkParams, t: f64) -> Result<GaussianAsymptotics> {
    if !t.is_finite() || t < 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let mean = p.bias() * t;
    let variance = p.activity() * t;
    Ok(GaussianAsymptotics {
        mean,
        variance,
        drift_dominated: mean > 0.0 && mean >= 5.0 * variance.sqrt(),
    })
}

/// Hard cap on total generated jump events per call, to keep runaway
/// parameter choices from hanging a run.
const EVENT_BUDGET: u64 = 2_000_000_000;

/// Event budget for tick simulations (smaller: each tick is short).
const CLOCK_EVENT_BUDGET: u64 = 50_000_000;

/// Positions of every path at every checkpoint, from common random paths —
/// differences between checkpoints are valid per-path increments.
#[derive(Debug, Clone)]
pub struct WalkEnsemble {
    times: Vec<f64>,
    /// positions[checkpoint][path]
    positions: Vec<Vec<u32>>,
    params: WalkParams,
    seed: u64,
}

impl WalkEnsemble {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    /// All path positions at checkpoint `i`.
    pub fn positions_at(&self, i: usize) -> &[u32] {
        &self.positions[i]
    }

    pub fn mean(&self, i: usize) -> f64 {
        let p = &self.positions[i];
        p.iter().map(|&x| x as f64).sum::<f64>() / p.len() as f64
    }

    /// Unbiased sample variance at checkpoint `i`.
    pub fn variance(&self, i: usize) -> f64 {
        let p = &self.positions[i];
        if p.len() < 2 {
            return 0.0;
        }
        let m = self.mean(i);
        p.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / (p.len() - 1) as f64
    }

    /// Empirical rung distribution at checkpoint `i` (length = max rung + 1).
    pub fn occupation(&self, i: usize) -> Vec<f64> {
        let p = &self.positions[i];
        let top = p.iter().copied().max().unwrap_or(0) as usize;
        let mut hist = vec![0.0; top + 1];
        for &x in p {
            hist[x as usize] += 1.0;
        }
        let n = p.len() as f64;
        hist.iter_mut().for_each(|h| *h /= n);
        hist
    }

    /// Ergotropy per path of the empirical distribution at checkpoint `i`,
    /// in energy units (rung spacing × populations).
    pub fn ergotropy(&self, i: usize) -> Result<f64> {
        let pops = self.occupation(i);
        let energies: Vec<f64> = (0..pops.len())
            .map(|k| k as f64 * self.params.spacing)
            .collect();
        crate::thermo::diagonal_ergotropy(&pops, &energies)
    }
}

/// Simulate `n_paths` independent walks, recording each path's rung at every
/// checkpoint. Rung 0 reflects; with `levels = Some(d)` rung d−1 also
/// reflects. Deterministic in `seed`: path k draws from stream k regardless
/// of how many events other paths used.
pub fn simulate_walk(
    p: &WalkParams,
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<WalkEnsemble> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QtmError::InvalidParameter(
            "checkpoints must be nonnegative and strictly increasing".to_string(),
        ));
    }
    if n_paths == 0 {
        return Err(QtmError::InvalidParameter(
            "need at least one path".to_string(),
        ));
    }
    let t_max = *times.last().unwrap();
    let expected = p.activity() * t_max * n_paths as f64;
    if expected > EVENT_BUDGET as f64 {
        return Err(QtmError::InvalidParameter(format!(
            "walk would generate ≈{expected:.2e} events, over the {EVENT_BUDGET} budget"
        )));
    }

    let top = p.levels.map(|d| (d - 1) as u32);
    let mut positions = vec![Vec::with_capacity(n_paths); times.len()];
    for path in 0..n_paths {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64);
        let mut t = 0.0_f64;
        let mut n: u32 = 0;
        let mut next = 0usize;
        while next < times.len() {
            let up = if top.is_some_and(|m| n >= m) {
                0.0
            } else {
                p.gamma_up
            };
            let down = if n == 0 { 0.0 } else { p.gamma_down };
            let rate = up + down;
            let dwell = if rate > 0.0 {
                -(1.0 - rng.random::<f64>()).ln() / rate
            } else {
                f64::INFINITY
            };
            let t_jump = t + dwell;
            while next < times.len() && times[next] < t_jump {
                positions[next].push(n);
                next += 1;
            }
            if next >= times.len() {
                break;
            }
            if rate == 0.0 {
                break;
            }
            if rng.random::<f64>() * rate < up {
                n += 1;
            } else {
                n -= 1;
            }
            t = t_jump;
        }
    }
    Ok(WalkEnsemble {
        times: times.to_vec(),
        positions,
        params: *p,
        seed,
    })
}

/// Ideal per-cycle energy ratio of the engine: each climb moves ω_h out of
/// the hot bath and ω_w = ω_h − ω_c into the load, so the asymptotic
/// efficiency is 1 − ω_c/ω_h.
pub fn engine_energy_ratio(omega_c: f64, omega_h: f64) -> Result<f64> {
    if !(omega_c > 0.0) || !(omega_h > omega_c) {
        return Err(QtmError::InvalidParameter(format!(
            "energy ratio needs 0 < ω_c < ω_h, got ({omega_c}, {omega_h})"
        )));
    }
    Ok(1.0 - omega_c / omega_h)
}

/// Finite-time engine efficiency after N net cycles,
///
/// η_N = [1 − √(2 coth(−β_v ω_w/2)/(π N))] (1 − ω_c/ω_h).
///
/// The square-root term is the ergotropy still locked in the load's spread;
/// `beta_v_omega_w` must be negative (engine regime).
pub fn n_cycle_efficiency(n: u64, beta_v_omega_w: f64, energy_ratio: f64) -> Result<f64> {
    if n == 0 {
        return Err(QtmError::InvalidParameter(
            "cycle count must be at least 1".to_string(),
        ));
    }
    if !beta_v_omega_w.is_finite() || beta_v_omega_w >= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "engine regime needs β_v ω_w < 0, got {beta_v_omega_w}"
        )));
    }
    if !(0.0..=1.0).contains(&energy_ratio) {
        return Err(QtmError::InvalidParameter(format!(
            "energy ratio must lie in [0, 1], got {energy_ratio}"
        )));
    }
    let coth = 1.0 / (-beta_v_omega_w / 2.0).tanh();
    let deficit = (2.0 * coth / (std::f64::consts::PI * n as f64)).sqrt();
    Ok((1.0 - deficit) * energy_ratio)
}

/// Per-tick heat and entropy bookkeeping for a d-rung clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockThermo {
    /// Heat dumped into the cold bath per tick, (d−1)ω_c.
    pub heat_cold: f64,
    /// Heat drawn from the hot bath per tick, (d−1)ω_h.
    pub heat_hot: f64,
    /// Entropy produced per tick, ΔS = (d−1)(β_c ω_c − β_h ω_h).
    pub entropy_per_tick: f64,
}

pub fn clock_thermo(
    levels: usize,
    omega_c: f64,
    omega_h: f64,
    t_c: f64,
    t_h: f64,
) -> Result<ClockThermo> {
    if levels < 2 {
        return Err(QtmError::InvalidParameter(format!(
            "clock needs at least 2 rungs, got {levels}"
        )));
    }
    if !(omega_c > 0.0) || !(omega_h > omega_c) || !(t_c > 0.0) || !(t_h > 0.0) {
        return Err(QtmError::InvalidParameter(format!(
            "clock thermodynamics needs 0 < ω_c < ω_h and positive temperatures, \
             got ω = ({omega_c}, {omega_h}), T = ({t_c}, {t_h})"
        )));
    }
    let climbs = (levels - 1) as f64;
    Ok(ClockThermo {
        heat_cold: climbs * omega_c,
        heat_hot: climbs * omega_h,
        entropy_per_tick: climbs * (omega_c / t_c - omega_h / t_h),
    })
}

/// Recorded tick durations of one clock run.
#[derive(Debug, Clone)]
pub struct TickRecord {
    durations: Vec<f64>,
    seed: u64,
}

impl TickRecord {
    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_ticks(&self) -> usize {
        self.durations.len()
    }

    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn mean_period(&self) -> f64 {
        self.total_time() / self.durations.len() as f64
    }

    /// Unbiased standard deviation of the tick period.
    pub fn period_std(&self) -> f64 {
        let n = self.durations.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean_period();
        (self
            .durations
            .iter()
            .map(|&t| (t - m).powi(2))
            .sum::<f64>()
            / (n - 1) as f64)
            .sqrt()
    }

    /// Ticks per unit time, ν = 1/⟨t_tick⟩.
    pub fn resolution(&self) -> f64 {
        1.0 / self.mean_period()
    }

    /// Accuracy N = (⟨t⟩/σ_t)²: the number of ticks after which the clock
    /// has drifted by one tick.
    pub fn accuracy(&self) -> Result<f64> {
        if self.durations.len() < 2 {
            return Err(QtmError::InvalidParameter(
                "accuracy needs at least two ticks".to_string(),
            ));
        }
        let s = self.period_std();
        if s == 0.0 {
            return Err(QtmError::InvalidParameter(
                "tick periods are identical; accuracy is unbounded".to_string(),
            ));
        }
        Ok((self.mean_period() / s).powi(2))
    }
}

/// Simulate `n_ticks` first passages 0 → d−1 of the bounded walk, with an
/// instant reset after each tick (the Γ_dec → ∞ idealisation).
pub fn simulate_clock(p: &WalkParams, n_ticks: usize, seed: u64) -> Result<TickRecord> {
    run_clock(p, n_ticks, seed, None)
}

/// As [`simulate_clock`], but each tick ends with an additional exponential
/// dwell of rate `decay_rate` while the top rung emits its photon.
pub fn simulate_clock_with_decay(
    p: &WalkParams,
    n_ticks: usize,
    seed: u64,
    decay_rate: f64,
) -> Result<TickRecord> {
    if !decay_rate.is_finite() || decay_rate <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "decay rate must be positive, got {decay_rate}"
        )));
    }
    run_clock(p, n_ticks, seed, Some(decay_rate))
}

fn run_clock(p: &WalkParams, n_ticks: usize, seed: u64, decay: Option<f64>) -> Result<TickRecord> {
    let d = p.levels.ok_or_else(|| {
        QtmError::InvalidParameter("clock simulation needs a truncated ladder".to_string())
    })?;
    if n_ticks == 0 {
        return Err(QtmError::InvalidParameter(
            "need at least one tick".to_string(),
        ));
    }
    if p.gamma_up <= 0.0 {
        return Err(QtmError::InvalidParameter(
            "clock never ticks with γ↑ = 0".to_string(),
        ));
    }
    let top = (d - 1) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut durations = Vec::with_capacity(n_ticks);
    let mut events: u64 = 0;
    for tick in 0..n_ticks {
        let mut t = 0.0_f64;
        let mut n: u32 = 0;
        while n < top {
            events += 1;
            if events > CLOCK_EVENT_BUDGET {
                return Err(QtmError::ClockStalled { completed: tick });
            }
            let down = if n == 0 { 0.0 } else { p.gamma_down };
            let rate = p.gamma_up + down;
            t += -(1.0 - rng.random::<f64>()).ln() / rate;
            if rng.random::<f64>() * rate < p.gamma_up {
                n += 1;
            } else {
                n -= 1;
            }
        }
        if let Some(gd) = decay {
            t += -(1.0 - rng.random::<f64>()).ln() / gd;
        }
        durations.push(t);
    }
    Ok(TickRecord { durations, seed })
}

/// Exact mean and variance of the 0 → d−1 first-passage time, from the
/// transient generator Q of the bounded walk: (−Q)m = 1 and (−Q)s = 2m give
/// the first two moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassageMoments {
    pub mean: f64,
    pub variance: f64,
}

impl FirstPassageMoments {
    /// Accuracy N = mean²/variance of a clock whose tick is this passage.
    pub fn accuracy(&self) -> f64 {
        self.mean * self.mean / self.variance
    }
}

pub fn first_passage_moments(p: &WalkParams) -> Result<FirstPassageMoments> {
    let d = p.levels.ok_or_else(|| {
        QtmError::InvalidParameter("first passage needs a truncated ladder".to_string())
    })?;
    if p.gamma_up <= 0.0 {
        return Err(QtmError::InvalidParameter(
            "the top rung is unreachable with γ↑ = 0".to_string(),
        ));
    }
    let m = d - 1;
    let mut q = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let down = if i == 0 { 0.0 } else { p.gamma_down };
        q[(i, i)] = p.gamma_up + down;
        if i + 1 < m {
            q[(i, i + 1)] = -p.gamma_up;
        }
        if i > 0 {
            q[(i, i - 1)] = -down;
        }
    }
    let lu = q.lu();
    let ones = nalgebra::DVector::from_element(m, 1.0);
    let mean_vec = lu
        .solve(&ones)
        .ok_or_else(|| QtmError::SolverFailure("first-passage mean solve failed".to_string()))?;
    let second_vec = lu
        .solve(&mean_vec.scale(2.0))
        .ok_or_else(|| QtmError::SolverFailure("first-passage moment solve failed".to_string()))?;
    let mean = mean_vec[0];
    Ok(FirstPassageMoments {
        mean,
        variance: second_vec[0] - mean * mean,
    })
}

/// Accuracy bound N = d·tanh(ΔS_tick/2d) for a d-rung ladder producing
/// entropy ΔS_tick per tick. `levels` is real-valued so the inverse problem
/// (the d that achieves a target accuracy) can be solved continuously.
pub fn clock_accuracy_formula(levels: f64, entropy_per_tick: f64) -> Result<f64> {
    if !levels.is_finite() || levels < 2.0 {
        return Err(QtmError::InvalidParameter(format!(
            "accuracy formula needs d ≥ 2, got {levels}"
        )));
    }
    if !entropy_per_tick.is_finite() || entropy_per_tick <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "ticking forward needs positive entropy per tick, got {entropy_per_tick}"
        )));
    }
    Ok(levels * (entropy_per_tick / (2.0 * levels)).tanh())
}

/// Drift estimate of the tick rate, ν = (γ↑ − γ↓)/d.
pub fn clock_resolution_formula(p: &WalkParams) -> Result<f64> {
    let d = p.levels.ok_or_else(|| {
        QtmError::InvalidParameter("resolution formula needs a truncated ladder".to_string())
    })?;
    if p.bias() <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "drift estimate needs γ↑ > γ↓, got bias {}",
            p.bias()
        )));
    }
    Ok(p.bias() / d as f64)
}
