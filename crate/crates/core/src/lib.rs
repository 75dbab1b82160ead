//! Spectral tools for lower bounds on quantum sample complexity.
//!
//! Exact spectra of averaged sample states for three ensembles, dense Gram
//! oracles, birth-death walk machinery, information-theoretic bounds and a
//! verification harness that checks the supporting inequalities on grids.

pub mod combinatorics;
pub mod error;
pub mod infotheory;
pub mod oracle;
pub mod spectra;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
