//! Numerical laboratory for entangled consistent histories.
//!
//! * [`kernel`]: dense complex matrices and spectral routines.
//! * [`history`]: the `⊙` algebra of histories, bridging schedules, chain
//!   operators, weights and the consistency check.
//! * [`reduction`]: temporal partial traces, maximally entangled histories,
//!   purity, temporal concurrence and Schmidt decomposition across a time cut.
//! * [`monogamy`]: spatial CKW checks and the temporal monogamy search.
//! * [`nonlocality`]: LHV bounds, sequential correlators, the temporal CHSH
//!   functional, see-saw maximization and Gram-vector realization.
//! * [`scenario`]: scenario files, reports and the Mach-Zehnder demonstration.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod history;
pub mod kernel;
pub mod monogamy;
pub mod nonlocality;
pub mod reduction;
pub mod scenario;

pub use error::{Error, Result};
pub use kernel::ComplexMatrix;
