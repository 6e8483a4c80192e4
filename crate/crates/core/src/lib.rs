//! Certification toolkit for constraint-enhanced QAOA on block one-hot spaces.
//!
//! The crate is organised around the classical reference model of the
//! algorithm: a dephased mixer stage (a product of doubly stochastic block
//! kernels acting on the diagonal) followed by a positive Fejér reweighting
//! of the cost phases. Every closed-form bound lives next to a brute-force
//! companion in [`oracle`] so the bounds can be checked at desk scale.
//!
//! | module | contents |
//! |--------|----------|
//! | [`instance`] | block strings, energy/penalty tables, wrapped phases and gaps |
//! | [`mixer`] | block-XY transition kernels and envelope propagation |
//! | [`fejer`] | Fejér kernel, filtered law, dimension-free success bound |
//! | [`planner`] | ratio parameter, shots, regimes, depth and order reduction |
//! | [`feasibility`] | penalty level sets, level graph, feasibility bounds, Lie closure |
//! | [`rl`] | dithered (Riemann–Lebesgue averaged) Fejér kernels |
//! | [`oracle`] | statevector simulation, operator-level filtering, shot sampling |
//! | [`workflow`] | end-to-end certification used by the command line |
//!
//! Hot loops run through [`exec::Exec`], which dispatches to rayon when the
//! `parallel` feature is enabled and to plain iterators otherwise. Both paths
//! produce bit-identical results.

// `!(x > 0.0)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod feasibility;
pub mod fejer;
pub mod instance;
pub mod mixer;
pub mod oracle;
pub mod planner;
pub mod rl;
pub mod workflow;

pub use error::{Error, Result};
pub use exec::Exec;
pub use fejer::{fejer_kernel, FilteredLaw};
pub use instance::{BlockString, GapScope, PhaseModel, ProblemInstance};
pub use mixer::{Convention, Envelope, TransitionKernel};
pub use planner::{Certificate, Regime};
