//! Scaled limit order book models, their fluid limit and tools to compare
//! the two.
//!
//! The crate is organised bottom-up:
//!
//! * [`scaling`], [`grid`], [`state`], [`family`] and [`model`] define the
//!   configuration and state types;
//! * [`microsim`] simulates the discrete book event by event;
//! * [`limit_ode`] and [`limit_pde`] solve the limiting price ODE and
//!   volume PDE;
//! * [`convergence`] measures the distance between the two;
//! * [`liquidation`] turns volume densities into execution costs.

pub mod benchmarks;
pub mod convergence;
pub mod csvfmt;
pub mod error;
pub mod family;
pub mod grid;
pub mod limit_ode;
pub mod limit_pde;
pub mod liquidation;
pub mod microsim;
pub mod model;
pub mod quad;
pub mod rng;
pub mod scaling;
pub mod state;

pub use error::{Error, Result};
pub use family::{InitialDensity, OmegaLaw, Profile, QuoteFunction, WaitingLaw};
pub use grid::{l2_norm, shift, GridDensity, Shift};
pub use model::{ActiveProbs, EventProbabilities, ModelSpec, PassiveProbs, PerPassive};
pub use rng::RngStream;
pub use scaling::{make_scaling, ScalingParams};
pub use state::{e_norm, e_norm_to_limit, BookState, EventKind, LimitSnapshot, Side};
