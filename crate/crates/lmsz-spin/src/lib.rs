//! Avoided-crossing dynamics of coupled spin pairs swept through a linear
//! field ramp.
//!
//! Two exchange-coupled spins (qubits or qutrits) driven by a linearly
//! ramped longitudinal field decompose into independent two-level crossings,
//! which makes the asymptotic transition probabilities, and with them the
//! entanglement generated by the sweep, available in closed form. This crate
//! provides:
//!
//! - the pair Hamiltonians, their symmetry-block decompositions, and the
//!   closed-form asymptotics ([`qubit`], [`qutrit`], [`hamiltonian`]);
//! - entanglement measures for the propagated states ([`entangle`]);
//! - an adaptive unitary propagator to verify the closed forms numerically
//!   and to resolve the transient dynamics ([`propagate`]);
//! - data-parallel parameter scans with peak refinement ([`scan`]).
//!
//! The `parallel` feature (on by default) runs scans on a rayon thread pool;
//! without it every scan falls back to an identical sequential path.

pub mod entangle;
pub mod error;
pub mod hamiltonian;
pub mod operators;
pub mod params;
pub mod propagate;
pub mod qubit;
pub mod qutrit;
pub mod scan;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use operators::{
    pauli_operators, qubit_pair_labels, qutrit_pair_labels, spin1_operators, CMat, OperatorMatrix,
};
pub use params::{CouplingParams, ScenarioKind};
pub use propagate::{
    asymptotic_estimate, propagate, propagate_blockwise, AsymptoticEstimate, PropagationConfig,
    SweepHamiltonian, TimeSeriesResult,
};
pub use state::QuantumState;
pub use sweep::{CrossingMode, SweepProtocol, SystemKind};
