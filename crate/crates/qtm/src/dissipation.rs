//! Thermal dissipators: bath descriptions, occupation-weighted rate pairs,
//! and the local / global jump-operator constructions.
//!
//! Both constructions produce a [`Dissipator`] — a weighted list of jump
//! operators in GKLS form. The *local* construction attaches jumps at each
//! subsystem's bare frequency and ignores the coherent coupling; the *global*
//! construction diagonalises the full Hamiltonian and splits the bath
//! coupling operator into Bohr-frequency sectors, so the joint Gibbs state of
//! the full Hamiltonian is an exact fixed point of each bath term.

use crate::error::{QtmError, Result};
use crate::linalg::{anticommutator, dagger, herm_eig, CMatrix};
use crate::models::{Label, MachineModel, SubsystemKind};

/// One thermal reservoir: temperature, bare coupling rate κ, and the spectral
/// exponent of its density of states.
///
/// Rates follow a power-law spectral density with exponent `dimension`,
/// normalised at `reference_frequency`:
///
/// γ↓(ω) = κ (ω/ω_ref)^D (n(ω) + 1),   γ↑(ω) = κ (ω/ω_ref)^D n(ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub label: Label,
    pub temperature: f64,
    /// Bare coupling rate κ (units of frequency).
    pub base_rate: f64,
    /// Spectral-density exponent D (flat bath D = 0, 3-D photon bath D = 3).
    pub dimension: i32,
    /// Frequency at which the power law equals κ.
    pub reference_frequency: f64,
}

impl BathSpec {
    /// Flat bath (D = 0), the default used throughout the steady-state runs.
    pub fn flat(label: Label, temperature: f64, base_rate: f64) -> Result<Self> {
        Self::new(label, temperature, base_rate, 0, 1.0)
    }

    pub fn new(
        label: Label,
        temperature: f64,
        base_rate: f64,
        dimension: i32,
        reference_frequency: f64,
    ) -> Result<Self> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "bath {label} temperature must be positive, got {temperature}"
            )));
        }
        if !base_rate.is_finite() || base_rate <= 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "bath {label} base rate must be positive, got {base_rate}"
            )));
        }
        if !reference_frequency.is_finite() || reference_frequency <= 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "bath {label} reference frequency must be positive, got {reference_frequency}"
            )));
        }
        Ok(Self {
            label,
            temperature,
            base_rate,
            dimension,
            reference_frequency,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }
}

/// Bose–Einstein occupation n(ω) = 1/(e^{ω/T} − 1).
///
/// Computed through `expm1` so that the high-frequency tail underflows to
/// exactly 0 instead of losing precision near e^{ω/T} ≈ 1.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "occupation needs a positive frequency, got {omega}"
        )));
    }
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "occupation needs a positive temperature, got {temperature}"
        )));
    }
    Ok(1.0 / f64::exp_m1(omega / temperature))
}

/// Downward (emission) and upward (absorption) rates at one transition
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub down: f64,
    pub up: f64,
}

impl RatePair {
    /// γ↑/γ↓ = e^{−ω/T}; the detailed-balance exponent this pair encodes.
    pub fn balance_ratio(&self) -> f64 {
        self.up / self.down
    }
}

/// Emission/absorption rates for transition frequency `omega` against `bath`.
///
/// Detailed balance γ↑/γ↓ = e^{−ω/T} holds exactly (to rounding): both rates
/// share the common prefactor κ(ω/ω_ref)^D and the occupations are derived
/// from a single `expm1` evaluation.
pub fn rate_pair(omega: f64, bath: &BathSpec) -> Result<RatePair> {
    let n = bose_occupation(omega, bath.temperature)?;
    let scale = bath.base_rate * (omega / bath.reference_frequency).powi(bath.dimension);
    Ok(RatePair {
        down: scale * (n + 1.0),
        up: scale * n,
    })
}

/// Which construction produced a dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorFlavor {
    Local,
    Global,
}

/// One GKLS dissipator: Σ_k r_k (L_k ρ L_k† − ½{L_k†L_k, ρ}) with r_k ≥ 0.
#[derive(Debug, Clone)]
pub struct Dissipator {
    label: Label,
    flavor: DissipatorFlavor,
    temperature: f64,
    terms: Vec<(CMatrix, f64)>,
    dim: usize,
}

impl Dissipator {
    pub fn label(&self) -> Label {
        self.label
    }

    pub fn flavor(&self) -> DissipatorFlavor {
        self.flavor
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Jump operators with their rates.
    pub fn terms(&self) -> &[(CMatrix, f64)] {
        &self.terms
    }

    /// Apply the dissipator to a (not necessarily normalised) operator.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n, n);
        for (l, rate) in &self.terms {
            let ld = dagger(l);
            let ldl = &ld * l;
            let mut term = l * rho * &ld;
            term -= anticommutator(&ldl, rho).scale(0.5);
            out += term.scale(*rate);
        }
        out
    }

    /// A bare dissipator from explicit jump terms; used for the clock's
    /// top-rung decay, which is not tied to a thermal bath.
    pub fn from_jump(label: Label, jump: CMatrix, rate: f64) -> Result<Self> {
        if jump.nrows() != jump.ncols() {
            return Err(QtmError::DimensionMismatch(format!(
                "jump operator must be square, got {}x{}",
                jump.nrows(),
                jump.ncols()
            )));
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "jump rate must be nonnegative, got {rate}"
            )));
        }
        let dim = jump.nrows();
        Ok(Self {
            label,
            flavor: DissipatorFlavor::Local,
            temperature: f64::INFINITY,
            terms: vec![(jump, rate)],
            dim,
        })
    }
}

/// Local dissipator: thermal jumps on one subsystem at its bare frequency,
/// blind to the interaction term.
///
/// Each rung transition |n⟩⟨n+1| of the attached subsystem becomes a jump
/// pair (emission at γ↓, absorption at γ↑) evaluated at the subsystem
/// frequency. Only qubit, qutrit-transition, and flat-ladder attachments are
/// accepted: a harmonic load's √(n+1) matrix elements make every rung decay
/// at a different weighted rate, and the flat-rate local form used here would
/// silently equilibrate it to a non-thermal state.
pub fn local_dissipator(machine: &MachineModel, bath: &BathSpec) -> Result<Dissipator> {
    let attachment = machine.attachment(bath.label).ok_or_else(|| {
        QtmError::InvalidParameter(format!(
            "machine has no {} bath attachment",
            bath.label
        ))
    })?;
    if matches!(attachment.kind, SubsystemKind::Oscillator { .. }) {
        return Err(QtmError::InvalidParameter(
            "local dissipator does not support a harmonic subsystem; use the global model"
                .to_string(),
        ));
    }
    let rates = rate_pair(attachment.frequency, bath)?;
    let mut terms = Vec::with_capacity(2 * attachment.jumps.len());
    for jump in &attachment.jumps {
        terms.push((jump.clone(), rates.down));
        terms.push((dagger(jump), rates.up));
    }
    Ok(Dissipator {
        label: bath.label,
        flavor: DissipatorFlavor::Local,
        temperature: bath.temperature,
        terms,
        dim: machine.dim(),
    })
}

/// Relative tolerance used to group eigenvalues (and Bohr frequencies) that
/// are degenerate up to rounding.
const BOHR_REL_TOL: f64 = 1e-9;

/// Global dissipator: Bohr-frequency decomposition of the bath coupling
/// operator in the eigenbasis of the *full* Hamiltonian.
///
/// With eigenprojectors Π_k of H and coupling X = A + A†, the lowering part
/// at Bohr frequency ω = E_l − E_k > 0 is A(ω) = Σ Π_k X Π_l. Each such
/// sector contributes the jump pair (A(ω), γ↓(ω)), (A†(ω), γ↑(ω)). Because
/// the sectors are eigenoperators of H, e^{−H/T}/Z is an exact fixed point.
pub fn global_dissipator(machine: &MachineModel, bath: &BathSpec) -> Result<Dissipator> {
    let attachment = machine.attachment(bath.label).ok_or_else(|| {
        QtmError::InvalidParameter(format!(
            "machine has no {} bath attachment",
            bath.label
        ))
    })?;
    let n = machine.dim();
    let dec = herm_eig(machine.hamiltonian());
    let scale = dec
        .eigenvalues
        .iter()
        .fold(1.0_f64, |m, e| m.max(e.abs()));
    let tol = BOHR_REL_TOL * scale;

    // Cluster eigenvalues into degenerate groups; record member indices.
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &e) in dec.eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some((rep, members)) if (e - *rep).abs() <= tol => members.push(i),
            _ => clusters.push((e, vec![i])),
        }
    }

    // Coupling operator in the eigenbasis.
    let v = &dec.eigenvectors;
    let x_eig = v.adjoint() * &attachment.coupling * v;

    // Lowering sector for each positive Bohr frequency, accumulated over all
    // cluster pairs whose gap matches within tolerance.
    let mut sectors: Vec<(f64, CMatrix)> = Vec::new();
    for (ik, (ek, mk)) in clusters.iter().enumerate() {
        for (el, ml) in clusters.iter().skip(ik + 1) {
            let omega = el - ek;
            if omega <= tol {
                continue;
            }
            let mut block = CMatrix::zeros(n, n);
            for &a in mk {
                for &b in ml {
                    block[(a, b)] = x_eig[(a, b)];
                }
            }
            if block.norm() < 1e-12 {
                continue;
            }
            match sectors.iter_mut().find(|(w, _)| (omega - *w).abs() <= tol) {
                Some((_, acc)) => *acc += block,
                None => sectors.push((omega, block)),
            }
        }
    }
    if sectors.is_empty() {
        return Err(QtmError::InvalidParameter(format!(
            "{} bath coupling drives no transition of the Hamiltonian",
            bath.label
        )));
    }

    let mut terms = Vec::with_capacity(2 * sectors.len());
    for (omega, block) in sectors {
        let rates = rate_pair(omega, bath)?;
        // Back to the computational basis.
        let lower = v * &block * v.adjoint();
        terms.push((dagger(&lower), rates.up));
        terms.push((lower, rates.down));
    }
    Ok(Dissipator {
        label: bath.label,
        flavor: DissipatorFlavor::Global,
        temperature: bath.temperature,
        terms,
        dim: n,
    })
}

/// Convenience: one dissipator per bath with a shared flavor.
pub fn dissipators_for(
    machine: &MachineModel,
    baths: &[BathSpec],
    flavor: DissipatorFlavor,
) -> Result<Vec<Dissipator>> {
    baths
        .iter()
        .map(|b| match flavor {
            DissipatorFlavor::Local => local_dissipator(machine, b),
            DissipatorFlavor::Global => global_dissipator(machine, b),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gibbs_state, one_norm, random_density_matrix, ONE};
    use crate::models::{build_three_body, build_three_level, SubsystemKind};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubits() -> [SubsystemKind; 3] {
        [SubsystemKind::Qubit; 3]
    }

    #[test]
    fn occupation_matches_closed_form() {
        // 1/(e − 1) at ω = T.
        let n = bose_occupation(1.0, 1.0).unwrap();
        assert_relative_eq!(n, 0.581_976_706_869_326_2, max_relative = 1e-12);
        // Deep quantum regime underflows cleanly to 0.
        assert_eq!(bose_occupation(1.0, 1e-4).unwrap(), 0.0);
        // Classical regime n ≈ T/ω.
        assert_relative_eq!(bose_occupation(1e-6, 1.0).unwrap(), 1e6, max_relative = 1e-5);
        assert!(bose_occupation(-1.0, 1.0).is_err());
        assert!(bose_occupation(1.0, 0.0).is_err());
    }

    #[test]
    fn rate_pair_obeys_detailed_balance_exactly() {
        for &(omega, t) in &[(0.3, 0.7), (1.0, 1.0), (2.5, 0.2), (0.01, 10.0)] {
            let bath = BathSpec::flat(Label::Cold, t, 0.37).unwrap();
            let pair = rate_pair(omega, &bath).unwrap();
            assert!(pair.down > pair.up && pair.up > 0.0);
            assert_relative_eq!(
                pair.balance_ratio(),
                (-omega / t).exp(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn rate_pair_scales_with_spectral_exponent() {
        let flat = BathSpec::flat(Label::Hot, 2.0, 0.1).unwrap();
        let cubic = BathSpec::new(Label::Hot, 2.0, 0.1, 3, 1.0).unwrap();
        let omega = 0.5;
        let f = rate_pair(omega, &flat).unwrap();
        let c = rate_pair(omega, &cubic).unwrap();
        assert_relative_eq!(c.down / f.down, omega.powi(3), max_relative = 1e-14);
        assert_relative_eq!(c.up / f.up, omega.powi(3), max_relative = 1e-14);
    }

    #[test]
    fn local_fixed_point_is_thermal_on_the_attached_transition() {
        let machine = build_three_level(0.3, 1.0).unwrap();
        let bath = BathSpec::flat(Label::Cold, 0.7, 1e-2).unwrap();
        let d = local_dissipator(&machine, &bath).unwrap();
        // Any diagonal state with p1/p0 = e^{−ω_c/T} is stationary for the
        // cold transition alone; the third level is untouched.
        let r = (-0.3_f64 / 0.7).exp();
        let p0 = 0.5;
        let mut rho = CMatrix::zeros(3, 3);
        rho[(0, 0)] = ONE.scale(p0);
        rho[(1, 1)] = ONE.scale(p0 * r);
        rho[(2, 2)] = ONE.scale(1.0 - p0 - p0 * r);
        assert!(one_norm(&d.apply(&rho)) < 1e-14);
    }

    #[test]
    fn local_rejects_harmonic_subsystem() {
        let machine = build_three_body(
            [
                SubsystemKind::Qubit,
                SubsystemKind::Qubit,
                SubsystemKind::Oscillator { levels: 4 },
            ],
            0.3,
            1.0,
            0.05,
        )
        .unwrap();
        let bath = BathSpec::flat(Label::Work, 1.5, 1e-2).unwrap();
        assert!(local_dissipator(&machine, &bath).is_err());
        // The global construction handles it fine.
        assert!(global_dissipator(&machine, &bath).is_ok());
    }

    #[test]
    fn global_reduces_to_local_when_coupling_vanishes() {
        // Nondegenerate diagonal H: the Bohr decomposition of σ_x recovers
        // exactly the bare lowering operator, so both constructions agree.
        let machine = build_three_level(0.3, 1.0).unwrap();
        let bath = BathSpec::flat(Label::Cold, 0.7, 1e-2).unwrap();
        let loc = local_dissipator(&machine, &bath).unwrap();
        let glo = global_dissipator(&machine, &bath).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let rho = random_density_matrix(3, &mut rng);
            let diff = loc.apply(rho.matrix()) - glo.apply(rho.matrix());
            assert!(one_norm(&diff) < 1e-12);
        }
    }

    #[test]
    fn global_fixed_point_is_the_joint_gibbs_state() {
        let machine = build_three_body(qubits(), 0.3, 1.0, 0.08).unwrap();
        for (label, t) in [(Label::Cold, 0.7), (Label::Hot, 1.1), (Label::Work, 1.5)] {
            let bath = BathSpec::flat(label, t, 1e-2).unwrap();
            let d = global_dissipator(&machine, &bath).unwrap();
            let gibbs = gibbs_state(machine.hamiltonian(), 1.0 / t).unwrap();
            assert!(
                one_norm(&d.apply(gibbs.matrix())) < 1e-9,
                "{label} bath moves its own Gibbs state"
            );
        }
    }

    #[test]
    fn global_jumps_lower_energy_by_their_bohr_frequency() {
        let machine = build_three_body(qubits(), 0.3, 1.0, 0.08).unwrap();
        let bath = BathSpec::flat(Label::Hot, 1.1, 1e-2).unwrap();
        let d = global_dissipator(&machine, &bath).unwrap();
        let h = machine.hamiltonian().matrix();
        // Emission jumps satisfy [H, A] = −ωA; check the commutator is a
        // scalar multiple with a negative (emission) or positive (absorption)
        // frequency matching detailed balance pairing.
        for (l, rate) in d.terms() {
            assert!(*rate > 0.0);
            let comm = h * l - l * h;
            // ω from the Rayleigh quotient on the largest entry.
            let (mut best, mut idx) = (0.0, (0, 0));
            for i in 0..l.nrows() {
                for j in 0..l.ncols() {
                    if l[(i, j)].norm() > best {
                        best = l[(i, j)].norm();
                        idx = (i, j);
                    }
                }
            }
            let omega = (comm[idx] / l[idx]).re;
            let diff = &comm - l.scale(omega);
            assert!(one_norm(&diff) < 1e-9 * one_norm(h));
            assert!(omega.abs() > 1e-12);
        }
    }

    #[test]
    fn missing_attachment_is_rejected() {
        let machine = crate::models::build_engine(0.3, 1.0, 4, 0.05).unwrap();
        let bath = BathSpec::flat(Label::Work, 1.5, 1e-2).unwrap();
        assert!(local_dissipator(&machine, &bath).is_err());
        assert!(global_dissipator(&machine, &bath).is_err());
    }

    #[test]
    fn bath_spec_validation() {
        assert!(BathSpec::flat(Label::Cold, -1.0, 0.1).is_err());
        assert!(BathSpec::flat(Label::Cold, 1.0, 0.0).is_err());
        assert!(BathSpec::new(Label::Cold, 1.0, 0.1, 3, 0.0).is_err());
        assert!(BathSpec::flat(Label::Cold, 1.0, 0.1).is_ok());
    }
}
