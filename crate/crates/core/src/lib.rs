//! Broadcasting l1 coherence of two-qubit states through Buzek-Hillery
//! cloning machines.
//!
//! * [`states`] - Bloch, density-matrix and Bell-diagonal representations.
//! * [`coherence`] - l1 coherence in any basis and its closed-form expansion.
//! * [`cloning`] - closed-form reduced outputs of local and non-local cloning.
//! * [`oracle`] - explicit isometry + partial trace cross-check of [`cloning`].
//! * [`broadcast`] - broadcasting predicates, conditions, interval solver, region grids.
//! * [`cli`] - the `cohcast` command-line surface.

pub mod broadcast;
pub mod cli;
pub mod cloning;
pub mod coherence;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod states;
pub mod tables;

pub use error::{Error, Result};
