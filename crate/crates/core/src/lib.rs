//! Reconstruction of time-dependent one- and two-qubit Hamiltonians from
//! ensemble-averaged continuous weak-measurement records.
//!
//! The crate bundles a synthetic data generator (Lindblad dynamics plus a
//! dispersive readout model), the signal conditioning chain that turns voltage
//! records into `<Z>` traces, the inversion engine itself, a tunable-coupler
//! model producing two-qubit exchange Hamiltonians, and fidelity metrics.
//!
//! Units are `hbar = 1`: frequencies and rates are angular (rad/s), times are
//! seconds.

pub mod error;
pub mod pauli;
pub mod dynamics;
pub mod readout;
pub mod signal;
pub mod engine;
pub mod metrics;
pub mod coupler;
pub mod scenario;

pub use error::{Error, Result};
pub use pauli::{CMatrix, Pauli, PauliLabel, C64};
pub use dynamics::{BlochTrajectory, DissipationRates, PauliHamiltonian};
