//! Self-triggered implementations of linear state-feedback controllers.
//!
//! The crate covers the whole pipeline:
//!
//! * [`linalg`]: a small dense kernel (matrix exponential, symmetric
//!   eigendecomposition, Lyapunov solver, SPD square root).
//! * [`design`]: offline design. Lyapunov certificate, minimum
//!   inter-execution time, trigger parameters and EISS gains.
//! * [`scheduler`]: precomputed quadratic forms and the runtime triggering
//!   map, with a Veronese-embedded evaluator that counts its operations.
//! * [`sim`]: disturbed sampled-data simulation, the continuous-time
//!   triggering oracle and trajectory verification.
//! * [`cli`]: JSON-configured commands that write reproducible CSV/JSON/SVG
//!   outputs. The `selftrig` binary is a thin wrapper around it.

pub mod cli;
pub mod config;
pub mod design;
pub mod error;
pub mod linalg;
pub mod report;
pub mod scheduler;
pub mod sim;
mod svg;

pub use error::{Error, Result};
pub use linalg::Matrix;
