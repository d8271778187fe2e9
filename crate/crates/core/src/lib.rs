// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation core for an Ising spin-lattice quantum computer in which the
//! information qubits never interact directly: every pair of neighbouring
//! qubits is separated by an isolator pair `(a, b)`, and two-qubit gates are
//! performed by driving the `a` isolator with a single rectangular RF pulse.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin`] — basis conventions, state vectors, embedded spin-½ operators.
//! * [`model`] — lattice and cell Hamiltonians, closed-form spectra, detunings.
//! * [`dynamics`] — exact rotating-frame propagation, an adaptive ODE oracle,
//!   the analytic two-level solution and interaction-picture conversion.
//! * [`protocols`] — pulse design for the two controlled-phase protocols and
//!   gate schedules (Rz corrections, Hadamard-sandwiched CNOT).
//! * [`analysis`] — gate extraction, fidelity, leakage, idle-mode and
//!   crosstalk checks.
//!
//! Units: `ħ = 1`, all frequencies are angular frequencies in a common
//! arbitrary unit and times are in the reciprocal unit.

// `!(x <= tol)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod model;
pub mod protocols;
pub mod spin;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use analysis::{GateReport, IdleReport};
pub use dynamics::{FrameSpec, TwoLevelAmplitudes};
pub use model::{CellSpec, CellSpectrum, DetuningSet, LatticeSpec, PulseSpec};
pub use protocols::{CphaseMode, GateSchedule, GateStep, MatchedPulseSolution};
pub use spin::{LatticeLayout, OperatorMatrix, QuantumState, Site, SpinOp};
