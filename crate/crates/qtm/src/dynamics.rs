//! Master-equation dynamics: superoperator assembly, steady states, transient
//! propagation, and the heat currents read off a solution.
//!
//! Operators are vectorised row-major, vec(ρ)[i·n + j] = ρ_ij, under which
//! vec(AρB) = (A ⊗ Bᵀ) vec(ρ). The generator
//!
//! L = −i(H⊗I − I⊗Hᵀ) + Σ_k r_k [L_k ⊗ L̄_k − ½((L_k†L_k)⊗I + I⊗(L_k†L_k)ᵀ)]
//!
//! acts on that column. Steady states come from a bordered linear solve that
//! replaces the rank deficiency of L with the trace constraint, which keeps
//! the system square and lets plain LU with iterative refinement drive the
//! residual to rounding level.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::dissipation::{dissipators_for, BathSpec, Dissipator, DissipatorFlavor};
use crate::error::{QtmError, Result};
use crate::linalg::{
    commutator, dagger, gibbs_state, herm_eig_unchecked, hermiticity_defect, kron, matrix_exp,
    partial_trace, CMatrix, CVector, DensityMatrix, HermitianOp, I, ONE,
};
use crate::models::{self, ClockModel, Label, MachineModel, SubsystemKind, Topology};

/// Hilbert-space dimension cap for superoperator methods. The generator is
/// dim²×dim², so memory and LU cost grow as the 4th and 6th powers of dim;
/// beyond this cap the dense approach stops being sensible.
pub const MAX_SUPEROP_DIM: usize = 64;

/// Residual bound certified by [`steady_state`].
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// The full generator: Hamiltonian, dissipators, and the assembled matrix.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    h: HermitianOp,
    dissipators: Vec<Dissipator>,
    matrix: CMatrix,
    dim: usize,
}

impl Liouvillian {
    pub fn new(h: HermitianOp, dissipators: Vec<Dissipator>) -> Result<Self> {
        let dim = h.dim();
        if dim > MAX_SUPEROP_DIM {
            return Err(QtmError::InvalidParameter(format!(
                "superoperator methods are capped at Hilbert dimension {MAX_SUPEROP_DIM}, got {dim}"
            )));
        }
        if dissipators.is_empty() {
            return Err(QtmError::InvalidParameter(
                "a Liouvillian needs at least one dissipator; purely unitary \
                 evolution has no steady state to solve for"
                    .to_string(),
            ));
        }
        for d in &dissipators {
            if d.dim() != dim {
                return Err(QtmError::DimensionMismatch(format!(
                    "dissipator on {} has dimension {}, Hamiltonian has {}",
                    d.label(),
                    d.dim(),
                    dim
                )));
            }
        }

        let id = CMatrix::identity(dim, dim);
        let hm = h.matrix();
        let mut m = (kron(hm, &id) - kron(&id, &hm.transpose())).scale(-1.0) * I;
        for d in &dissipators {
            for (l, rate) in d.terms() {
                if *rate == 0.0 {
                    continue;
                }
                let ldl = dagger(l) * l;
                let mut term = kron(l, &l.conjugate());
                term -= (kron(&ldl, &id) + kron(&id, &ldl.transpose())).scale(0.5);
                m += term.scale(*rate);
            }
        }
        Ok(Self {
            h,
            dissipators,
            matrix: m,
            dim,
        })
    }

    /// Build from a machine: its full Hamiltonian plus one thermal
    /// dissipator per bath.
    pub fn for_machine(
        machine: &MachineModel,
        baths: &[BathSpec],
        flavor: DissipatorFlavor,
    ) -> Result<Self> {
        let dissipators = dissipators_for(machine, baths, flavor)?;
        Self::new(machine.hamiltonian().clone(), dissipators)
    }

    /// Build for a clock: the engine's thermal dissipators plus the
    /// top-rung tick decay.
    pub fn for_clock(
        clock: &ClockModel,
        baths: &[BathSpec],
        flavor: DissipatorFlavor,
    ) -> Result<Self> {
        let mut dissipators = dissipators_for(&clock.engine, baths, flavor)?;
        dissipators.push(Dissipator::from_jump(
            Label::Work,
            clock.decay_jump(),
            clock.decay_rate,
        )?);
        Self::new(clock.engine.hamiltonian().clone(), dissipators)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &HermitianOp {
        &self.h
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    /// The assembled dim²×dim² generator.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// L[ρ] computed directly in operator form (cheaper than multiplying by
    /// the assembled matrix and exact for cross-checking it).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = commutator(self.h.matrix(), rho) * I.scale(-1.0);
        for d in &self.dissipators {
            out += d.apply(rho);
        }
        out
    }
}

pub fn vectorize(rho: &CMatrix) -> CVector {
    let n = rho.nrows();
    CVector::from_fn(n * n, |k, _| rho[(k / n, k % n)])
}

pub fn unvectorize(x: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| x[i * n + j])
}

/// A solved steady state with its certificate and per-bath heat currents.
#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    pub rho: DensityMatrix,
    /// Heat current per dissipator, J_α = Tr{H L_α[ρ]}, positive when the
    /// bath injects energy.
    pub currents: Vec<(Label, f64)>,
    /// Total entropy production rate σ = −Σ_α J_α/T_α.
    pub entropy_rate: f64,
    /// Frobenius norm of L[ρ] at the returned state.
    pub residual: f64,
}

impl SteadyStateReport {
    /// Sum of currents carrying the given label.
    pub fn current(&self, label: Label) -> f64 {
        self.currents
            .iter()
            .filter(|(l, _)| *l == label)
            .map(|(_, j)| j)
            .sum()
    }
}

/// Unique trace-one kernel element of the generator.
///
/// Solves the bordered system [[L, t], [t†, 0]] [x, λ]ᵀ = [0, 1] with
/// t = vec(I), then LU with two rounds of iterative refinement, Hermitises,
/// clips eigenvalues in [−1e-10, 0) to zero, and certifies ‖L[ρ]‖_F below
/// [`STEADY_RESIDUAL_TOL`]. A pivot ratio under 1e-12 reports a degenerate
/// (non-unique) steady state instead of returning an arbitrary element.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateReport> {
    let n = l.dim;
    let nn = n * n;
    let mut m = CMatrix::zeros(nn + 1, nn + 1);
    m.view_mut((0, 0), (nn, nn)).copy_from(&l.matrix);
    for i in 0..n {
        m[(i * n + i, nn)] = ONE;
        m[(nn, i * n + i)] = ONE;
    }
    let mut b = CVector::zeros(nn + 1);
    b[nn] = ONE;

    let lu = m.clone().lu();
    let u_diag: Vec<f64> = (0..nn + 1).map(|i| lu.u()[(i, i)].norm()).collect();
    let (pmin, pmax) = u_diag
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if pmax == 0.0 || pmin / pmax < 1e-12 {
        return Err(QtmError::DegenerateSteadyState(format!(
            "pivot ratio {:.3e}: the kernel is not one-dimensional (disconnected \
             sectors or an undriven degree of freedom)",
            if pmax == 0.0 { 0.0 } else { pmin / pmax }
        )));
    }
    let mut x = lu
        .solve(&b)
        .ok_or_else(|| QtmError::SolverFailure("bordered LU solve failed".to_string()))?;
    for _ in 0..2 {
        let r = &b - &m * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
    }

    let raw = unvectorize(&x.rows(0, nn).into_owned(), n);
    let herm = (&raw + dagger(&raw)).scale(0.5);
    let tr = herm.trace().re;
    if !tr.is_finite() || tr.abs() < 1e-6 {
        return Err(QtmError::SolverFailure(format!(
            "steady-state trace collapsed to {tr}"
        )));
    }
    let herm = herm.scale(1.0 / tr);

    // Clip rounding-level negative eigenvalues; anything larger is a failure.
    let dec = herm_eig_unchecked(&herm);
    let min_eig = dec.eigenvalues.first().copied().unwrap_or(0.0);
    let rho_mat = if min_eig < 0.0 {
        if min_eig < -1e-10 {
            return Err(QtmError::SolverFailure(format!(
                "steady state has eigenvalue {min_eig:.3e}, too negative to clip"
            )));
        }
        let clipped = dec.apply_function(|e| e.max(0.0));
        let tr = clipped.trace().re;
        clipped.scale(1.0 / tr)
    } else {
        herm
    };

    let residual = l.apply(&rho_mat).norm();
    if !residual.is_finite() || residual > STEADY_RESIDUAL_TOL {
        return Err(QtmError::SolverFailure(format!(
            "steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL:.1e}"
        )));
    }

    let mut currents = Vec::with_capacity(l.dissipators.len());
    let mut entropy_rate = 0.0;
    for d in &l.dissipators {
        let j = heat_current(&l.h, d, &rho_mat)?;
        currents.push((d.label(), j));
        if d.temperature().is_finite() {
            entropy_rate -= j / d.temperature();
        }
    }

    Ok(SteadyStateReport {
        rho: DensityMatrix::from_validated(rho_mat),
        currents,
        entropy_rate,
        residual,
    })
}

/// Heat current J = Tr{H D[ρ]} for one dissipator. Exactly real for
/// Hermitian inputs; an imaginary part above 1e-8 signals a corrupted state
/// or operator and is an error rather than something to discard silently.
pub fn heat_current(h: &HermitianOp, d: &Dissipator, rho: &CMatrix) -> Result<f64> {
    if rho.nrows() != h.dim() || d.dim() != h.dim() {
        return Err(QtmError::DimensionMismatch(format!(
            "heat current dimensions: H {}, dissipator {}, state {}",
            h.dim(),
            d.dim(),
            rho.nrows()
        )));
    }
    let j = (h.matrix() * d.apply(rho)).trace();
    if j.im.abs() > 1e-8 {
        return Err(QtmError::SolverFailure(format!(
            "heat current has imaginary part {:.3e}",
            j.im
        )));
    }
    Ok(j.re)
}

/// σ = dS/dt − Σ_α J_α/T_α (at steady state dS/dt = 0).
pub fn entropy_production_rate(ds_dt: f64, flows: &[(f64, f64)]) -> Result<f64> {
    let mut sigma = ds_dt;
    for &(j, t) in flows {
        if t <= 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "entropy production needs positive temperatures, got {t}"
            )));
        }
        sigma -= j / t;
    }
    Ok(sigma)
}

/// Coherent circulation rate k = 2g·Im⟨Â_c Â_h† Â_w⟩ through the interaction.
///
/// In a steady state of the locally-dissipated three-body machine every bath
/// current is proportional to this one number: J_c = ω_c k, J_h = −ω_h k,
/// J_w = ω_w k.
pub fn internal_current(machine: &MachineModel, rho: &CMatrix) -> Result<f64> {
    let (ac, ah, aw) = match (
        machine.subsystem_lowering(Label::Cold),
        machine.subsystem_lowering(Label::Hot),
        machine.subsystem_lowering(Label::Work),
    ) {
        (Some(c), Some(h), Some(w)) => (c, h, w),
        _ => {
            return Err(QtmError::InvalidParameter(
                "internal current is defined for the coupled three-body machines only"
                    .to_string(),
            ))
        }
    };
    if rho.nrows() != machine.dim() {
        return Err(QtmError::DimensionMismatch(format!(
            "state dimension {} does not match machine dimension {}",
            rho.nrows(),
            machine.dim()
        )));
    }
    let z = (ac * dagger(ah) * aw * rho).trace();
    Ok(2.0 * machine.coupling_strength() * z.im)
}

/// A propagated trajectory. States are Hermitised, trace-renormalised
/// snapshots; the propagation itself runs on the raw vector so divergence is
/// detected rather than hidden.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<CMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &CMatrix {
        &self.states[i]
    }

    /// Validated view of one snapshot (integrator-tolerance 1e-8).
    pub fn density(&self, i: usize) -> Result<DensityMatrix> {
        DensityMatrix::with_tolerance(self.states[i].clone(), 1e-8)
    }
}

/// Propagate ρ(0) through e^{Lt} and record the state at each requested time.
///
/// Times must be strictly increasing and nonnegative. The exponential is
/// computed once per distinct step size and reused, so a uniform grid costs a
/// single scaling-and-squaring call. Propagation aborts with
/// [`QtmError::EvolutionDiverged`] if the running state's trace drifts from 1
/// or its Hermiticity defect grows beyond 1e-6.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    if rho0.dim() != l.dim {
        return Err(QtmError::DimensionMismatch(format!(
            "initial state dimension {} does not match generator dimension {}",
            rho0.dim(),
            l.dim
        )));
    }
    if times.is_empty() {
        return Err(QtmError::InvalidParameter(
            "evolve needs at least one output time".to_string(),
        ));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QtmError::InvalidParameter(
            "output times must be nonnegative and strictly increasing".to_string(),
        ));
    }

    let n = l.dim;
    let mut x = vectorize(rho0.matrix());
    let mut propagators: HashMap<u64, CMatrix> = HashMap::new();
    let mut t_prev = 0.0;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - t_prev;
        if dt > 0.0 {
            if !propagators.contains_key(&dt.to_bits()) {
                let p = matrix_exp(&l.matrix, Complex64::new(dt, 0.0))?;
                propagators.insert(dt.to_bits(), p);
            }
            x = &propagators[&dt.to_bits()] * &x;
        }
        t_prev = t;

        let raw = unvectorize(&x, n);
        let tr = raw.trace();
        let defect = hermiticity_defect(&raw);
        if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 || defect > 1e-6 {
            return Err(QtmError::EvolutionDiverged(format!(
                "at t = {t}: trace {tr}, Hermiticity defect {defect:.3e}"
            )));
        }
        let snap = (&raw + dagger(&raw)).scale(0.5 / tr.re);
        states.push(snap);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// Signed two-level temperature ω / ln(p₀/p₁).
///
/// Returns +∞ for equal populations and a negative value for inversion
/// (p₁ > p₀), matching the convention that a virtual qubit hotter than any
/// real temperature has wrapped around through infinity.
pub fn two_level_effective_temperature(p0: f64, p1: f64, omega: f64) -> Result<f64> {
    if !(p0 > 0.0) || !(p1 > 0.0) {
        return Err(QtmError::InvalidParameter(format!(
            "effective temperature needs strictly positive populations, got ({p0}, {p1})"
        )));
    }
    if !omega.is_finite() || omega <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "effective temperature needs a positive gap, got {omega}"
        )));
    }
    Ok(omega / (p0 / p1).ln())
}

/// Effective temperature of the cold subsystem (must be a qubit) read off
/// the reduced state of `rho`.
pub fn cold_qubit_temperature(machine: &MachineModel, rho: &CMatrix) -> Result<f64> {
    let idx = machine.subsystem_index(Label::Cold).ok_or_else(|| {
        QtmError::InvalidParameter(
            "cold-qubit temperature needs the coupled three-body machine".to_string(),
        )
    })?;
    let spec = machine.subsystems()[idx];
    if !matches!(spec.kind, SubsystemKind::Qubit) {
        return Err(QtmError::InvalidParameter(format!(
            "cold subsystem is {:?}, not a qubit",
            spec.kind
        )));
    }
    let red = partial_trace(rho, machine.dims(), idx)?;
    two_level_effective_temperature(red[(0, 0)].re, red[(1, 1)].re, spec.frequency)
}

/// Product of local Gibbs states ⊗_α e^{−H_α/T_α}/Z_α — the natural
/// pre-coupling initial condition for transients.
pub fn product_gibbs(machine: &MachineModel, temps: &[(Label, f64)]) -> Result<DensityMatrix> {
    if machine.topology() == Topology::ThreeLevel {
        return Err(QtmError::InvalidParameter(
            "product initial state needs the coupled three-body machine".to_string(),
        ));
    }
    let mut out = CMatrix::identity(1, 1);
    for spec in machine.subsystems() {
        let t = temps
            .iter()
            .find(|(l, _)| *l == spec.label)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                QtmError::InvalidParameter(format!("no temperature given for {}", spec.label))
            })?;
        if t <= 0.0 {
            return Err(QtmError::InvalidParameter(format!(
                "temperature for {} must be positive, got {t}",
                spec.label
            )));
        }
        let h = HermitianOp::new(models::local_hamiltonian(spec.kind, spec.frequency))?;
        let g = gibbs_state(&h, 1.0 / t)?;
        out = kron(&out, g.matrix());
    }
    DensityMatrix::new(out)
}

/// Seed an imaginary coherence of the given amplitude between the resonant
/// pair |0_c 1_h 0_w⟩ and |1_c 0_h 1_w⟩ on top of a diagonal state.
///
/// The imaginary part is the current-carrying component: a real off-diagonal
/// element commutes with the exchange coupling inside the degenerate pair
/// subspace and never feeds the populations, so only ±i·amplitude changes
/// the ensuing transient. The amplitude is clipped to ±√(p_a p_b), the
/// largest value that keeps the 2×2 block positive, so the result is always
/// a valid state.
pub fn with_resonant_coherence(
    machine: &MachineModel,
    rho: &DensityMatrix,
    amplitude: f64,
) -> Result<DensityMatrix> {
    let (a, b) = machine.resonant_pair().ok_or_else(|| {
        QtmError::InvalidParameter(
            "resonant coherence needs the coupled three-body machine".to_string(),
        )
    })?;
    if rho.dim() != machine.dim() {
        return Err(QtmError::DimensionMismatch(format!(
            "state dimension {} does not match machine dimension {}",
            rho.dim(),
            machine.dim()
        )));
    }
    let mut mat = rho.matrix().clone();
    let bound = (mat[(a, a)].re * mat[(b, b)].re).max(0.0).sqrt();
    let c = amplitude.clamp(-bound, bound);
    mat[(a, b)] += I.scale(c);
    mat[(b, a)] -= I.scale(c);
    DensityMatrix::new(mat)
}
