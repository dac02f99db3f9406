//! Minimum-depth quantum circuit synthesis.
//!
//! Given a target unitary and a set of native input gates, this crate finds
//! a minimum-depth gate sequence implementing the target. The decomposition
//! problem is assembled as an optimization model in four variants (bilinear
//! mixed-integer, its McCormick linearization, and both continuous
//! relaxations) and solved two ways:
//!
//! * [`exact`] — a layered uniform-cost search over gate sequences with
//!   cumulative-product deduplication; the provably optimal reference.
//! * [`nlp`] — a multi-start augmented-Lagrangian local solver for the
//!   continuous relaxation, whose converged feasible points are checked for
//!   integrality and verified against the exact optimum.
//!
//! Models can also be exported in LP text format for external solvers, and
//! [`bench`] packages the built-in decomposition suite.

pub mod bench;
pub mod cli;
pub mod exact;
pub mod gates;
pub mod model;
pub mod nlp;
pub mod spec;
