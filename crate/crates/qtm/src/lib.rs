//! Simulation toolkit for quantum absorption machines: three-level and
//! three-body refrigerators, two-qubit engines driving a ladder load, and
//! ladder-based autonomous clocks.
//!
//! The crate covers both sides of the usual modelling split:
//!
//! * **Quantum dynamics** — Hamiltonians ([`models`]), thermal Lindblad
//!   dissipators in local and global (Bohr-frequency) form ([`dissipation`]),
//!   steady states, transients, heat currents and entropy production
//!   ([`dynamics`]), and thermodynamic performance measures including virtual
//!   temperatures and ergotropy ([`thermo`]).
//! * **Stochastic reduction** — the biased random walk a thermal engine drives
//!   on its load, with Monte Carlo sampling, closed-form asymptotics, and the
//!   tick statistics of the ladder clock ([`stochastic`]).
//!
//! Units: ħ = k_B = 1 throughout; frequencies, temperatures and rates all
//! carry the same unit, fixed by whichever scale the caller normalizes to.

pub mod dissipation;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod stochastic;
pub mod thermo;

pub use error::{QtmError, Result};
