//! Evolution strategies for high-dimensional, noisy black-box optimization.
//!
//! The crate provides three strategies sharing one ask/tell interface
//! (simple CSA-ES, full-matrix MA-ES and limited-memory LM-MA-ES), adaptive
//! re-evaluation for noisy objectives, IPOP-style restarts, a family of
//! synthetic benchmarks, a stochastic point-mass control task and an
//! experiment harness that writes per-generation CSV traces.

pub mod benchmarks;
pub mod control;
pub mod error;
pub mod harness;
pub mod objective;
pub mod restarts;
pub mod rng;
pub mod strategy;
pub mod uncertainty;

pub use error::{Error, Result};
pub use objective::{evaluate_counted, Budget, Objective};
pub use rng::{spawn_stream, RngStream};
pub use strategy::{default_params, Strategy, StrategyParams, StrategyState, Transform, Variant};
