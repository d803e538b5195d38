//! Exact open-system dynamics of one to three qubits coupled to a common
//! Lorentzian bosonic bath, together with the entanglement and nonlocality
//! measures evaluated along the trajectories.
//!
//! Three independent solvers cover the same physics from different angles:
//!
//! * [`heom`] — non-RWA reduced dynamics via the hierarchical equations of
//!   motion, truncated at a configurable depth.
//! * [`rwa`] — the exact closed-form single-excitation solution under the
//!   rotating wave approximation, plus an integrodifferential oracle that
//!   re-derives the same amplitudes by direct integration.
//! * [`pseudomode`] — a Lindblad master equation for the qubits plus one
//!   damped harmonic mode, which reproduces the Lorentzian bath exactly at
//!   zero temperature and serves as the validation oracle for the HEOM.
//!
//! [`measures`] quantifies two-qubit entanglement (concurrence), Bell
//! nonlocality (CHSH maximum), genuine tripartite entanglement (π-tangle)
//! and genuine tripartite nonlocality (Svetlichny maximum via see-saw
//! optimization). [`harness`] wires everything into configurable experiment
//! runs, parameter sweeps and CSV output.

pub mod error;
pub mod harness;
pub mod heom;
mod linop;
pub mod measures;
pub mod pseudomode;
pub mod qstate;
pub mod rwa;

pub use error::{Error, Result};
pub use heom::BathSpec;
pub use qstate::{CMatrix, CVector, DensityMatrix, PureState, StateSeries, C64};
