//! Statevector simulation of random parameterized quantum circuits, their
//! linear-combination-of-unitaries variants, gradient estimators, Haar and
//! unitary-design moment checks, and the experiment drivers built on them.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevector`] — kets, Pauli strings, gates and expectation values;
//! * [`dense`] — an independent dense-matrix construction used as an oracle;
//! * [`rpqc`] — random parameterized circuits and their energy;
//! * [`lcu`] — `alpha I + beta U`, the ancilla construction and staged circuits;
//! * [`gradients`] — shift-rule, commutator and finite-difference derivatives;
//! * [`haar`] — Haar sampling, Weingarten values, design dimensions, moment checks;
//! * [`experiments`] — variance sweeps, histograms, slope fits and training;
//! * [`cli`] — the `plateau` command-line front end.

pub mod cli;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod gradients;
pub mod haar;
pub mod lcu;
pub mod rng;
pub mod rpqc;
pub mod statevector;

pub use error::{Error, Result};
pub use gradients::{grad_analytic, grad_finite_diff, grad_param_shift, Objective};
pub use lcu::{LcuCoefficients, StagedCircuit};
pub use rpqc::{sample_rpqc, ParamIndex, RpqcSpec};
pub use statevector::{Gate, Ket, Pauli, PauliString};
