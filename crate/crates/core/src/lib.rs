//! Two-qubit contextuality laboratory.
//!
//! The crate has five layers:
//!
//! - [`quantum`] — exact complex linear algebra for the two-qubit Hilbert
//!   space: Pauli tensor operators, the two Bell eigenbases, Born-rule
//!   sampling from seeded streams.
//! - [`peres_mermin`] — the 3x3 observable square, its exact structure
//!   checks, and the exhaustive 512-assignment no-go search.
//! - [`hidden`] — contextual hidden-value tables sampled consistently with
//!   a chosen future measurement context, plus the non-contextual
//!   constructor that provably fails.
//! - [`protocol`] — the three-step bit-signaling protocol as a replayable
//!   state machine, with sweep statistics.
//! - [`fulo`] — Bohmian trajectories through full-loop Stern-Gerlach
//!   devices: guidance velocity field, RK4 integration, quantile arm rule,
//!   and hidden-value stability reports.
//!
//! Everything stochastic consumes an explicit [`rng::RandomStream`], so any
//! run is reproducible from its seed. With the default `parallel` feature,
//! sweeps and trajectory grids fan out over rayon; results are merged in
//! input order and are identical to the sequential fallback.

pub mod error;
pub mod fulo;
pub mod hidden;
pub mod par;
pub mod peres_mermin;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod sign;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use sign::Sign;
