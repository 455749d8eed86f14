//! Hamiltonians for the absorption machines.
//!
//! Four machines, one interaction. The three-level refrigerator is a single
//! qutrit whose transitions talk to three baths. The three-body machines put
//! one subsystem per bath — order (cold, hot, work) — and couple them through
//! the resonant exchange term
//!
//! H_int = g (Â_c Â_h† Â_w + Â_c† Â_h Â_w†),
//!
//! which swaps |1_c 0_h 1_w⟩ ↔ |0_c 1_h 0_w⟩. Because ω_w = ω_h − ω_c this
//! term commutes with the free Hamiltonian: the machine moves energy around
//! without storing any. The engine is the same machine with the work
//! subsystem replaced by a flat ladder used as a load (no work bath), and the
//! clock adds a decay channel from the top of that ladder.

use num_complex::Complex64;

use crate::error::{QtmError, Result};
use crate::linalg::{dagger, kron, CMatrix, HermitianOp, ONE};

/// Which bath a transition or subsystem belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Cold,
    Hot,
    Work,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Cold => "c",
            Label::Hot => "h",
            Label::Work => "w",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Local structure of one subsystem.
///
/// `Ladder` has unit matrix elements on every rung (the clockwork load);
/// `Oscillator` is a truncated harmonic mode with √(n+1) elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsystemKind {
    Qubit,
    Ladder { levels: usize },
    Oscillator { levels: usize },
}

impl SubsystemKind {
    pub fn levels(self) -> usize {
        match self {
            SubsystemKind::Qubit => 2,
            SubsystemKind::Ladder { levels } | SubsystemKind::Oscillator { levels } => levels,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SubsystemSpec {
    pub label: Label,
    pub kind: SubsystemKind,
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Single qutrit, three bath-coupled transitions.
    ThreeLevel,
    /// Cold ⊗ hot ⊗ work subsystems, all bath-coupled.
    ThreeBody,
    /// Cold ⊗ hot qubits ⊗ ladder load; only the qubits see baths.
    Engine,
}

/// How one bath grabs onto the machine: the transition frequency it drives,
/// the individual lowering jumps (one per rung for ladders), the summed
/// lowering operator Â, and the Hermitian coupling Â + Â†.
#[derive(Debug, Clone)]
pub struct BathAttachment {
    pub label: Label,
    pub frequency: f64,
    pub kind: SubsystemKind,
    pub jumps: Vec<CMatrix>,
    pub lowering: CMatrix,
    pub coupling: CMatrix,
}

#[derive(Debug, Clone)]
pub struct MachineModel {
    topology: Topology,
    subsystems: Vec<SubsystemSpec>,
    dims: Vec<usize>,
    g: f64,
    h_free: HermitianOp,
    h_int: HermitianOp,
    h_total: HermitianOp,
    attachments: Vec<BathAttachment>,
    /// Summed lowering operator per subsystem in (c, h, w) order, embedded in
    /// the full space. Kept separately from the attachments because the
    /// engine's load has no bath but still enters the coherent current.
    lowering_ops: Vec<CMatrix>,
}

impl MachineModel {
    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn dim(&self) -> usize {
        self.h_total.dim()
    }

    /// Tensor-factor dimensions, in (cold, hot, work) order. A single `[3]`
    /// for the three-level machine.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn subsystems(&self) -> &[SubsystemSpec] {
        &self.subsystems
    }

    pub fn coupling_strength(&self) -> f64 {
        self.g
    }

    pub fn hamiltonian(&self) -> &HermitianOp {
        &self.h_total
    }

    pub fn free_hamiltonian(&self) -> &HermitianOp {
        &self.h_free
    }

    pub fn interaction(&self) -> &HermitianOp {
        &self.h_int
    }

    pub fn attachments(&self) -> &[BathAttachment] {
        &self.attachments
    }

    pub fn attachment(&self, label: Label) -> Option<&BathAttachment> {
        self.attachments.iter().find(|a| a.label == label)
    }

    pub fn frequency(&self, label: Label) -> Option<f64> {
        self.attachment(label).map(|a| a.frequency)
    }

    /// Tensor position of a subsystem (0 = cold, 1 = hot, 2 = work); `None`
    /// for the three-level machine, which has no tensor structure.
    pub fn subsystem_index(&self, label: Label) -> Option<usize> {
        match self.topology {
            Topology::ThreeLevel => None,
            _ => Some(match label {
                Label::Cold => 0,
                Label::Hot => 1,
                Label::Work => 2,
            }),
        }
    }

    /// Summed lowering operator of one subsystem, embedded in the full space
    /// (three-body machines only).
    pub fn subsystem_lowering(&self, label: Label) -> Option<&CMatrix> {
        let i = self.subsystem_index(label)?;
        self.lowering_ops.get(i)
    }

    /// Flat indices of the resonant pair |0_c 1_h 0_w⟩, |1_c 0_h 1_w⟩ that the
    /// interaction couples (three-body machines only).
    pub fn resonant_pair(&self) -> Option<(usize, usize)> {
        match self.topology {
            Topology::ThreeLevel => None,
            _ => {
                let (dh, dw) = (self.dims[1], self.dims[2]);
                Some((dw, dh * dw + 1))
            }
        }
    }
}

pub(crate) fn local_hamiltonian(kind: SubsystemKind, freq: f64) -> CMatrix {
    let d = kind.levels();
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(freq * i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Per-rung lowering jumps |n⟩⟨n+1| with the kind's matrix elements.
fn lowering_jumps(kind: SubsystemKind) -> Vec<CMatrix> {
    let d = kind.levels();
    (0..d - 1)
        .map(|n| {
            let amp = match kind {
                SubsystemKind::Oscillator { .. } => ((n + 1) as f64).sqrt(),
                _ => 1.0,
            };
            let mut m = CMatrix::zeros(d, d);
            m[(n, n + 1)] = Complex64::new(amp, 0.0);
            m
        })
        .collect()
}

fn summed_lowering(kind: SubsystemKind) -> CMatrix {
    let d = kind.levels();
    lowering_jumps(kind)
        .into_iter()
        .fold(CMatrix::zeros(d, d), |acc, j| acc + j)
}

/// I ⊗ … ⊗ op ⊗ … ⊗ I with `op` at tensor slot `pos`.
fn embed(op: &CMatrix, dims: &[usize], pos: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == pos {
            op.clone()
        } else {
            CMatrix::identity(d, d)
        };
        out = kron(&out, &factor);
    }
    out
}

fn check_frequencies(omega_c: f64, omega_h: f64) -> Result<f64> {
    if !(omega_c.is_finite() && omega_h.is_finite()) || omega_c <= 0.0 || omega_h <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "transition frequencies must be positive, got ω_c = {omega_c}, ω_h = {omega_h}"
        )));
    }
    if omega_c >= omega_h {
        return Err(QtmError::InvalidParameter(format!(
            "need ω_c < ω_h so the work frequency ω_w = ω_h − ω_c is positive \
             (got ω_c = {omega_c}, ω_h = {omega_h})"
        )));
    }
    Ok(omega_h - omega_c)
}

const MAX_TOTAL_DIM: usize = 200;

/// Three-level refrigerator: levels |1⟩, |2⟩, |3⟩ at energies 0, ω_c, ω_h.
/// Cold bath drives |1⟩↔|2⟩, hot drives |1⟩↔|3⟩, work drives |2⟩↔|3⟩.
pub fn build_three_level(omega_c: f64, omega_h: f64) -> Result<MachineModel> {
    let omega_w = check_frequencies(omega_c, omega_h)?;
    let h = CMatrix::from_fn(3, 3, |i, j| match (i, j) {
        (1, 1) => Complex64::new(omega_c, 0.0),
        (2, 2) => Complex64::new(omega_h, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let h_free = HermitianOp::new(h)?;
    let transition = |from: usize, to: usize| {
        let mut m = CMatrix::zeros(3, 3);
        m[(from, to)] = ONE;
        m
    };
    let attachments = vec![
        (Label::Cold, omega_c, transition(0, 1)),
        (Label::Hot, omega_h, transition(0, 2)),
        (Label::Work, omega_w, transition(1, 2)),
    ]
    .into_iter()
    .map(|(label, frequency, lowering)| BathAttachment {
        label,
        frequency,
        kind: SubsystemKind::Qubit,
        jumps: vec![lowering.clone()],
        coupling: &lowering + dagger(&lowering),
        lowering,
    })
    .collect();
    Ok(MachineModel {
        topology: Topology::ThreeLevel,
        subsystems: Vec::new(),
        dims: vec![3],
        g: 0.0,
        h_int: HermitianOp::new(CMatrix::zeros(3, 3))?,
        h_total: h_free.clone(),
        h_free,
        attachments,
        lowering_ops: Vec::new(),
    })
}

/// Three-body machine with one subsystem per bath, in (cold, hot, work)
/// order, exchange-coupled at strength `g` on resonance ω_w = ω_h − ω_c.
pub fn build_three_body(
    kinds: [SubsystemKind; 3],
    omega_c: f64,
    omega_h: f64,
    g: f64,
) -> Result<MachineModel> {
    build_coupled(kinds, omega_c, omega_h, g, Topology::ThreeBody)
}

/// Two-qubit engine driving a flat ladder load of `levels` rungs.
/// The load has no bath of its own; heat enters through the qubits only.
pub fn build_engine(omega_c: f64, omega_h: f64, levels: usize, g: f64) -> Result<MachineModel> {
    build_coupled(
        [
            SubsystemKind::Qubit,
            SubsystemKind::Qubit,
            SubsystemKind::Ladder { levels },
        ],
        omega_c,
        omega_h,
        g,
        Topology::Engine,
    )
}

fn build_coupled(
    kinds: [SubsystemKind; 3],
    omega_c: f64,
    omega_h: f64,
    g: f64,
    topology: Topology,
) -> Result<MachineModel> {
    let omega_w = check_frequencies(omega_c, omega_h)?;
    if !g.is_finite() || g < 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "coupling strength must be nonnegative, got g = {g}"
        )));
    }
    for kind in kinds {
        if kind.levels() < 2 {
            return Err(QtmError::InvalidParameter(format!(
                "subsystem {kind:?} needs at least 2 levels"
            )));
        }
    }
    let dims: Vec<usize> = kinds.iter().map(|k| k.levels()).collect();
    let total: usize = dims.iter().product();
    if total > MAX_TOTAL_DIM {
        return Err(QtmError::InvalidParameter(format!(
            "total Hilbert dimension {total} exceeds the {MAX_TOTAL_DIM} cap"
        )));
    }

    let freqs = [omega_c, omega_h, omega_w];
    let labels = [Label::Cold, Label::Hot, Label::Work];
    let subsystems: Vec<SubsystemSpec> = (0..3)
        .map(|i| SubsystemSpec {
            label: labels[i],
            kind: kinds[i],
            frequency: freqs[i],
        })
        .collect();

    let mut h_free = CMatrix::zeros(total, total);
    let mut lowerings = Vec::with_capacity(3);
    for i in 0..3 {
        h_free += embed(&local_hamiltonian(kinds[i], freqs[i]), &dims, i);
        lowerings.push(embed(&summed_lowering(kinds[i]), &dims, i));
    }
    let exchange = &lowerings[0] * dagger(&lowerings[1]) * &lowerings[2];
    let h_int_mat = (&exchange + dagger(&exchange)).scale(g);
    let h_free = HermitianOp::new(h_free)?;
    let h_int = HermitianOp::new(h_int_mat)?;
    let h_total = HermitianOp::new(h_free.matrix() + h_int.matrix())?;

    let bath_labels: &[Label] = match topology {
        Topology::Engine => &[Label::Cold, Label::Hot],
        _ => &[Label::Cold, Label::Hot, Label::Work],
    };
    let attachments = bath_labels
        .iter()
        .map(|&label| {
            let i = match label {
                Label::Cold => 0,
                Label::Hot => 1,
                Label::Work => 2,
            };
            let jumps = lowering_jumps(kinds[i])
                .into_iter()
                .map(|j| embed(&j, &dims, i))
                .collect();
            let lowering = lowerings[i].clone();
            BathAttachment {
                label,
                frequency: freqs[i],
                kind: kinds[i],
                jumps,
                coupling: &lowering + dagger(&lowering),
                lowering,
            }
        })
        .collect();

    Ok(MachineModel {
        topology,
        subsystems,
        dims,
        g,
        h_free,
        h_int,
        h_total,
        attachments,
        lowering_ops: lowerings,
    })
}

/// Engine plus an unstable top rung: when the load reaches level d−1 it decays
/// back to the ground rung at rate `decay_rate`, emitting one photon of energy
/// (d−1)·ω_w — the clock's tick.
#[derive(Debug, Clone)]
pub struct ClockModel {
    pub engine: MachineModel,
    pub decay_rate: f64,
    pub photon_energy: f64,
}

impl ClockModel {
    /// Ladder rung count d.
    pub fn levels(&self) -> usize {
        self.engine.dims()[2]
    }

    /// Tick jump |0⟩⟨d−1| on the load, embedded in the full space.
    pub fn decay_jump(&self) -> CMatrix {
        let dims = self.engine.dims();
        let d = dims[2];
        let mut drop = CMatrix::zeros(d, d);
        drop[(0, d - 1)] = ONE;
        embed(&drop, dims, 2)
    }
}

pub fn build_clock(
    omega_c: f64,
    omega_h: f64,
    levels: usize,
    g: f64,
    decay_rate: f64,
) -> Result<ClockModel> {
    if levels < 3 {
        return Err(QtmError::InvalidParameter(format!(
            "clock ladder needs at least 3 levels, got {levels}"
        )));
    }
    if !decay_rate.is_finite() || decay_rate <= 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "tick decay rate must be positive, got {decay_rate}; \
             without it the top rung never resets and no ticks occur"
        )));
    }
    let engine = build_engine(omega_c, omega_h, levels, g)?;
    let omega_w = omega_h - omega_c;
    Ok(ClockModel {
        engine,
        decay_rate,
        photon_energy: (levels - 1) as f64 * omega_w,
    })
}
