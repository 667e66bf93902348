//! Discrete-time coined quantum-walk search on the N×N torus and the N-cycle.
//!
//! The crate is organised around a single state-vector layout (see
//! [`state::flat_index`]) shared by every operator:
//!
//! - [`state`]: walk states, marked sets, probabilities and l1 coherence.
//! - [`coin`]: coin matrices and marked-set-conditional coin application.
//! - [`shift`]: flip-flop and moving shifts on the grid and the cycle.
//! - [`engine`]: step/run for single-coin and two-coin walks, dense oracles.
//! - [`config`]: marked-vertex arrangements and empirical classification.
//! - [`coherence`]: closed-form coherence predictions for the cycle walk.
//!
//! ```
//! use walkbench_core::{config::ConfigSpec, engine::{Algorithm, SnapshotPolicy, WalkSpec}};
//!
//! let marked = ConfigSpec::parse("diag:0", 5).unwrap().generate_grid().unwrap();
//! let spec = WalkSpec::preset(Algorithm::A, 5, marked).unwrap();
//! let trace = spec.run(20, SnapshotPolicy::None);
//! assert!(trace.prob.iter().all(|p| (p - 0.2).abs() < 1e-9));
//! ```

pub mod coherence;
pub mod coin;
pub mod config;
pub mod engine;
mod error;
pub mod shift;
pub mod state;

pub use error::{Result, WalkError};
pub use num_complex::Complex64;
