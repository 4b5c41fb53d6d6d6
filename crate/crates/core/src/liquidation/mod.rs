//! Execution costs implied by standing volume densities and optimal
//! splitting of a sell order across trade times.

mod schedule;
mod shape;

pub use schedule::{cost, kkt_residual, marginal_cost, optimize, Method, Schedule, GRID_MAX_TRADES, KKT_TOL};
pub use shape::{recover_kappa, KappaFit, ShapeFunction, ShapeProfile, SpreadPath, INVERSE_TOL};
