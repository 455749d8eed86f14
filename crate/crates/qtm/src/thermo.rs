//! Thermodynamic bookkeeping: virtual temperatures, reversible bounds,
//! passive states and ergotropy.
//!
//! The virtual temperature is the central diagnostic. A pair of baths
//! driving a pair of transitions (ω_h, ω_w) acts on the rest of the machine
//! like a single two-level contact with population ratio
//! e^{−β_h ω_h + β_w ω_w}, i.e. an effective inverse temperature
//!
//! β_v = (β_h ω_h − β_w ω_w)/(ω_h − ω_w).
//!
//! β_v crosses zero when the contact inverts, so the natural scalar is β_v;
//! the temperature itself passes through ±∞ and is represented by a tagged
//! value rather than a bare float.

use crate::error::{QtmError, Result};
use crate::linalg::{herm_eig, herm_eig_unchecked, CMatrix, DensityMatrix, HermitianOp};

/// A temperature that may sit at the infinite-temperature boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TempScalar {
    Finite(f64),
    PosInf,
    NegInf,
}

impl TempScalar {
    pub fn as_f64(self) -> f64 {
        match self {
            TempScalar::Finite(v) => v,
            TempScalar::PosInf => f64::INFINITY,
            TempScalar::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, TempScalar::Finite(_))
    }
}

impl std::fmt::Display for TempScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TempScalar::Finite(v) => write!(f, "{v}"),
            TempScalar::PosInf => write!(f, "inf"),
            TempScalar::NegInf => write!(f, "-inf"),
        }
    }
}

/// A virtual temperature together with its (always finite) inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualTemperature {
    pub value: TempScalar,
    pub beta: f64,
}

fn temp_from_ratio(num: f64, den: f64) -> VirtualTemperature {
    let value = if den == 0.0 {
        // The sign of the IEEE zero carries the direction of the limit.
        if den.is_sign_positive() {
            TempScalar::PosInf
        } else {
            TempScalar::NegInf
        }
    } else {
        TempScalar::Finite(num / den)
    };
    VirtualTemperature {
        value,
        beta: den / num,
    }
}

/// Virtual temperature of the contact formed by the hot and work baths,
///
/// T_v = (ω_h − ω_w)/(β_h ω_h − β_w ω_w).
///
/// Takes inverse temperatures so an infinite-temperature (β = 0) bath is
/// representable exactly.
pub fn virtual_temperature(
    omega_h: f64,
    omega_w: f64,
    beta_h: f64,
    beta_w: f64,
) -> Result<VirtualTemperature> {
    if !(omega_h.is_finite() && omega_w.is_finite()) || omega_w <= 0.0 || omega_h <= omega_w {
        return Err(QtmError::InvalidParameter(format!(
            "virtual temperature needs 0 < ω_w < ω_h, got ({omega_w}, {omega_h})"
        )));
    }
    for b in [beta_h, beta_w] {
        if !b.is_finite() || b < 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "inverse temperatures must be finite and nonnegative, got {b}"
            )));
        }
    }
    Ok(temp_from_ratio(
        omega_h - omega_w,
        beta_h * omega_h - beta_w * omega_w,
    ))
}

/// Virtual temperature seen by the engine's load: the work bath is replaced
/// by the cold bath, T_v = (ω_h − ω_c)/(β_h ω_h − β_c ω_c). Negative in the
/// engine regime β_c ω_c > β_h ω_h.
pub fn engine_virtual_temperature(
    omega_c: f64,
    omega_h: f64,
    beta_c: f64,
    beta_h: f64,
) -> Result<VirtualTemperature> {
    virtual_temperature(omega_h, omega_c, beta_h, beta_c)
}

/// The two virtual temperatures of the coupled machine at finite g.
///
/// The interaction splits the resonant doublet by ±g, so the hot/work
/// contact addresses two shifted transition pairs:
///
/// T_v± = (ω_c ± g)/(β_h ω_h − β_w (ω_w ∓ g)).
///
/// Returns (T_v+, T_v−); both collapse onto [`virtual_temperature`] as
/// g → 0.
pub fn split_virtual_temperatures(
    omega_c: f64,
    omega_h: f64,
    g: f64,
    t_h: f64,
    t_w: f64,
) -> Result<(VirtualTemperature, VirtualTemperature)> {
    if omega_c <= 0.0 || omega_h <= omega_c {
        return Err(QtmError::InvalidParameter(format!(
            "split virtual temperatures need 0 < ω_c < ω_h, got ({omega_c}, {omega_h})"
        )));
    }
    let omega_w = omega_h - omega_c;
    if !g.is_finite() || g < 0.0 || g >= omega_c.min(omega_w) {
        return Err(QtmError::InvalidParameter(format!(
            "splitting needs 0 ≤ g < min(ω_c, ω_w) = {}, got {g}",
            omega_c.min(omega_w)
        )));
    }
    if t_h <= 0.0 || t_w <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "bath temperatures must be positive, got ({t_h}, {t_w})"
        )));
    }
    let (bh, bw) = (1.0 / t_h, 1.0 / t_w);
    let plus = temp_from_ratio(omega_c + g, bh * omega_h - bw * (omega_w - g));
    let minus = temp_from_ratio(omega_c - g, bh * omega_h - bw * (omega_w + g));
    Ok((plus, minus))
}

/// Reversible coefficient of performance of an absorption refrigerator,
///
/// ε_C = T_c (T_w − T_h) / (T_w (T_h − T_c)).
///
/// Also the upper edge of the cooling window: cooling requires
/// ω_c/ω_w < ε_C. Diverges as T_c → T_h (returns +∞ at equality) and
/// vanishes when the work bath is no hotter than the hot bath.
pub fn carnot_cop(t_c: f64, t_h: f64, t_w: f64) -> Result<f64> {
    if !(t_c > 0.0) || t_c > t_h || t_h > t_w || !t_w.is_finite() {
        return Err(QtmError::InvalidParameter(format!(
            "reversible COP needs 0 < T_c ≤ T_h ≤ T_w, got ({t_c}, {t_h}, {t_w})"
        )));
    }
    if t_c == t_h {
        return Ok(f64::INFINITY);
    }
    Ok(t_c * (t_w - t_h) / (t_w * (t_h - t_c)))
}

/// Alias of [`carnot_cop`] named for its second role: the largest frequency
/// ratio ω_c/ω_w at which the fridge still cools.
pub fn cooling_window_bound(t_c: f64, t_h: f64, t_w: f64) -> Result<f64> {
    carnot_cop(t_c, t_h, t_w)
}

/// Carnot efficiency 1 − T_c/T_h of a heat engine between two baths.
pub fn carnot_efficiency(t_c: f64, t_h: f64) -> Result<f64> {
    if !(t_c > 0.0) || t_c > t_h || !t_h.is_finite() {
        return Err(QtmError::InvalidParameter(format!(
            "Carnot efficiency needs 0 < T_c ≤ T_h, got ({t_c}, {t_h})"
        )));
    }
    Ok(1.0 - t_c / t_h)
}

/// The passive counterpart of ρ under H: populations of ρ rearranged in
/// descending order onto the energy eigenstates in ascending order. No
/// unitary can extract work from the result.
pub fn passive_state(rho: &DensityMatrix, h: &HermitianOp) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(QtmError::DimensionMismatch(format!(
            "state dimension {} does not match Hamiltonian dimension {}",
            rho.dim(),
            h.dim()
        )));
    }
    let pops = descending_spectrum(rho.matrix());
    let hdec = herm_eig(h);
    let n = rho.dim();
    let mut mat = CMatrix::zeros(n, n);
    for (k, &q) in pops.iter().enumerate() {
        let v = hdec.eigenvectors.column(k);
        mat += (&v * v.adjoint()).scale(q.max(0.0));
    }
    let tr = mat.trace().re;
    Ok(DensityMatrix::from_validated(mat.scale(1.0 / tr)))
}

fn descending_spectrum(m: &CMatrix) -> Vec<f64> {
    let mut eigs = herm_eig_unchecked(m).eigenvalues;
    eigs.reverse();
    eigs
}

/// Energy accounting of unitary work extraction from one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgotropyReport {
    /// Extractable work W = E − E_passive.
    pub work: f64,
    /// Mean energy Tr{Hρ} of the input state.
    pub energy: f64,
    /// Mean energy of the passive counterpart.
    pub passive_energy: f64,
}

/// Maximum work extractable from ρ by a cyclic unitary:
/// W = Tr{Hρ} − Σ_k p↓_k E↑_k.
pub fn ergotropy(rho: &DensityMatrix, h: &HermitianOp) -> Result<ErgotropyReport> {
    if rho.dim() != h.dim() {
        return Err(QtmError::DimensionMismatch(format!(
            "state dimension {} does not match Hamiltonian dimension {}",
            rho.dim(),
            h.dim()
        )));
    }
    let energy = (h.matrix() * rho.matrix()).trace().re;
    let pops = descending_spectrum(rho.matrix());
    let energies = herm_eig(h).eigenvalues;
    let passive_energy: f64 = pops.iter().zip(&energies).map(|(p, e)| p * e).sum();
    Ok(ErgotropyReport {
        work: energy - passive_energy,
        energy,
        passive_energy,
    })
}

/// Ergotropy of a state already diagonal in an ascending energy basis —
/// the cheap path used by the stochastic-load estimators, where the state is
/// a classical distribution over ladder rungs.
pub fn diagonal_ergotropy(populations: &[f64], energies: &[f64]) -> Result<f64> {
    if populations.len() != energies.len() || populations.is_empty() {
        return Err(QtmError::DimensionMismatch(format!(
            "{} populations against {} energies",
            populations.len(),
            energies.len()
        )));
    }
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(QtmError::InvalidParameter(
            "energies must be nondecreasing".to_string(),
        ));
    }
    let total: f64 = populations.iter().sum();
    if populations.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-9 {
        return Err(QtmError::InvalidState(format!(
            "populations must be nonnegative and sum to 1, got sum {total}"
        )));
    }
    let energy: f64 = populations.iter().zip(energies).map(|(p, e)| p * e).sum();
    let mut sorted = populations.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let passive: f64 = sorted.iter().zip(energies).map(|(p, e)| p * e).sum();
    Ok(energy - passive)
}

/// Large-load asymptotic for a ladder whose population is approximately
/// Gaussian with mean energy `energy` and energy spread `energy_std`:
///
/// W ≈ E − 4 ΔE / √(2π).
///
/// Rearranging a Gaussian into descending order folds it about its mean, so
/// only the spread — not the full energy — is unextractable.
pub fn ladder_ergotropy_asymptotic(energy: f64, energy_std: f64) -> Result<f64> {
    if !energy.is_finite() || !(energy_std >= 0.0) {
        return Err(QtmError::InvalidParameter(format!(
            "asymptotic ergotropy needs finite energy and nonnegative spread, \
             got ({energy}, {energy_std})"
        )));
    }
    Ok(energy - 4.0 * energy_std / (2.0 * std::f64::consts::PI).sqrt())
}

/// One row of a steady-state performance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformancePoint {
    pub omega_c: f64,
    pub j_c: f64,
    pub j_h: f64,
    pub j_w: f64,
    /// Coefficient of performance J_c/J_w; meaningful while cooling.
    pub cop: f64,
    pub entropy_rate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gibbs_state, random_density_matrix, random_hermitian, ONE};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn virtual_temperature_matches_hand_computation() {
        let v = virtual_temperature(1.0, 0.7, 1.0 / 1.1, 1.0 / 1.5).unwrap();
        assert_relative_eq!(
            v.value.as_f64(),
            0.678_082_191_780_821_9,
            max_relative = 1e-12
        );
        assert_relative_eq!(v.beta, 1.0 / 0.678_082_191_780_821_9, max_relative = 1e-12);
    }

    #[test]
    fn virtual_temperature_crosses_infinity_at_balance() {
        // β_h ω_h = β_w ω_w puts the contact exactly at infinite temperature.
        let v = virtual_temperature(1.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(v.value, TempScalar::PosInf);
        assert_eq!(v.beta, 0.0);
        // Past the balance point the temperature is negative (inverted).
        let v = virtual_temperature(1.0, 0.5, 0.4, 1.0).unwrap();
        assert!(v.value.as_f64() < 0.0);
        // β_w = 0 (infinite-temperature work bath) is a valid input.
        let v = virtual_temperature(1.0, 0.7, 0.9, 0.0).unwrap();
        assert_relative_eq!(v.value.as_f64(), 0.3 / 0.9, max_relative = 1e-12);
    }

    #[test]
    fn engine_contact_is_inverted_in_the_engine_regime() {
        // β_c ω_c > β_h ω_h: the load sees a negative temperature.
        let v = engine_virtual_temperature(0.2, 2.0, 1.0 / 0.1, 1.0 / 2.0).unwrap();
        assert!(v.value.as_f64() < 0.0);
        assert!(v.beta < 0.0);
    }

    #[test]
    fn split_temperatures_match_hand_computation_and_merge_at_zero_coupling() {
        let (plus, minus) = split_virtual_temperatures(0.3, 1.0, 0.1, 1.1, 1.5).unwrap();
        assert_relative_eq!(
            plus.value.as_f64(),
            0.785_714_285_714_285_8,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            minus.value.as_f64(),
            0.532_258_064_516_129,
            max_relative = 1e-12
        );
        let (p0, m0) = split_virtual_temperatures(0.3, 1.0, 0.0, 1.1, 1.5).unwrap();
        let v = virtual_temperature(1.0, 0.7, 1.0 / 1.1, 1.0 / 1.5).unwrap();
        assert_relative_eq!(p0.value.as_f64(), v.value.as_f64(), max_relative = 1e-12);
        assert_relative_eq!(m0.value.as_f64(), v.value.as_f64(), max_relative = 1e-12);
        assert!(split_virtual_temperatures(0.3, 1.0, 0.3, 1.1, 1.5).is_err());
    }

    #[test]
    fn carnot_cop_window_edge_cases() {
        assert_relative_eq!(
            carnot_cop(1.0, 1.1, 1.5).unwrap(),
            2.666_666_666_666_666_5,
            max_relative = 1e-12
        );
        // Work bath at the hot temperature provides no leverage.
        assert_eq!(carnot_cop(1.0, 1.5, 1.5).unwrap(), 0.0);
        // Vanishing cold-hot gap: the bound diverges.
        assert_eq!(carnot_cop(1.5, 1.5, 2.0).unwrap(), f64::INFINITY);
        assert!(carnot_cop(1.2, 1.1, 1.5).is_err());
        assert!(carnot_cop(1.0, 1.6, 1.5).is_err());
        assert_eq!(
            cooling_window_bound(1.0, 1.1, 1.5).unwrap(),
            carnot_cop(1.0, 1.1, 1.5).unwrap()
        );
    }

    #[test]
    fn carnot_efficiency_basics() {
        assert_relative_eq!(carnot_efficiency(0.1, 2.0).unwrap(), 0.95);
        assert_eq!(carnot_efficiency(2.0, 2.0).unwrap(), 0.0);
        assert!(carnot_efficiency(2.0, 1.0).is_err());
    }

    fn qubit_h(omega: f64) -> HermitianOp {
        let mut h = CMatrix::zeros(2, 2);
        h[(1, 1)] = ONE.scale(omega);
        HermitianOp::new(h).unwrap()
    }

    #[test]
    fn inverted_qubit_ergotropy() {
        let omega = 1.3;
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = ONE.scale(0.3);
        m[(1, 1)] = ONE.scale(0.7);
        let rho = DensityMatrix::new(m).unwrap();
        let rep = ergotropy(&rho, &qubit_h(omega)).unwrap();
        assert_relative_eq!(rep.work, 0.4 * omega, max_relative = 1e-12);
        assert_relative_eq!(rep.energy, 0.7 * omega, max_relative = 1e-12);
    }

    #[test]
    fn pure_superposition_gives_half_the_gap() {
        let omega = 2.0;
        let half = Complex64::new(0.5, 0.0);
        let m = CMatrix::from_fn(2, 2, |_, _| half);
        let rho = DensityMatrix::new(m).unwrap();
        let rep = ergotropy(&rho, &qubit_h(omega)).unwrap();
        // A pure state is fully extractable down to the ground state.
        assert_relative_eq!(rep.work, omega / 2.0, max_relative = 1e-12);
        assert_abs_diff_eq!(rep.passive_energy, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gibbs_states_are_passive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3, 5] {
            let h = random_hermitian(dim, &mut rng);
            let rho = gibbs_state(&h, 0.9).unwrap();
            let rep = ergotropy(&rho, &h).unwrap();
            assert!(rep.work.abs() < 1e-12, "dim {dim}: W = {}", rep.work);
        }
    }

    #[test]
    fn passive_state_minimises_energy_over_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = random_hermitian(4, &mut rng);
            let rho = random_density_matrix(4, &mut rng);
            let rep = ergotropy(&rho, &h).unwrap();
            assert!(rep.work >= -1e-12);
            // Exhaustively check the sorted pairing beats every permutation.
            let pops = descending_spectrum(rho.matrix());
            let energies = herm_eig(&h).eigenvalues;
            let mut idx = [0usize, 1, 2, 3];
            let mut best = f64::INFINITY;
            permute(&mut idx, 0, &mut |perm| {
                let e: f64 = perm.iter().enumerate().map(|(k, &i)| pops[k] * energies[i]).sum();
                best = best.min(e);
            });
            assert_relative_eq!(rep.passive_energy, best, max_relative = 1e-10);
            // The passive state itself has zero ergotropy.
            let pi = passive_state(&rho, &h).unwrap();
            let again = ergotropy(&pi, &h).unwrap();
            assert!(again.work.abs() < 1e-10);
        }
    }

    fn permute(idx: &mut [usize; 4], k: usize, visit: &mut impl FnMut(&[usize; 4])) {
        if k == idx.len() {
            visit(idx);
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            permute(idx, k + 1, visit);
            idx.swap(k, i);
        }
    }

    #[test]
    fn diagonal_ergotropy_matches_full_computation() {
        let pops = [0.1, 0.4, 0.2, 0.3];
        let energies = [0.0, 1.0, 2.0, 3.0];
        let quick = diagonal_ergotropy(&pops, &energies).unwrap();
        let mut m = CMatrix::zeros(4, 4);
        let mut h = CMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = ONE.scale(pops[i]);
            h[(i, i)] = ONE.scale(energies[i]);
        }
        let full = ergotropy(
            &DensityMatrix::new(m).unwrap(),
            &HermitianOp::new(h).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(quick, full.work, max_relative = 1e-12);
        // Already-descending populations are passive.
        assert_abs_diff_eq!(
            diagonal_ergotropy(&[0.4, 0.3, 0.2, 0.1], &energies).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn gaussian_ladder_approaches_the_asymptotic_form() {
        assert_relative_eq!(
            ladder_ergotropy_asymptotic(100.0, 10.0).unwrap(),
            84.042_308_783_942_69,
            max_relative = 1e-12
        );
        // Discretised Gaussian on a unit ladder: exact diagonal ergotropy
        // converges to E − 4σ/√(2π) as σ ≫ spacing.
        let (mean, sigma) = (400.0, 40.0);
        let n = 801;
        let mut pops: Vec<f64> = (0..n)
            .map(|i| (-((i as f64 - mean) / sigma).powi(2) / 2.0).exp())
            .collect();
        let total: f64 = pops.iter().sum();
        pops.iter_mut().for_each(|p| *p /= total);
        let energies: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let exact = diagonal_ergotropy(&pops, &energies).unwrap();
        let energy: f64 = pops.iter().zip(&energies).map(|(p, e)| p * e).sum();
        let approx_w = ladder_ergotropy_asymptotic(energy, sigma).unwrap();
        assert_relative_eq!(exact, approx_w, max_relative = 2e-3);
    }
}
