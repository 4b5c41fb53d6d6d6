//! Limiting volume densities: characteristics, closed form, explicit
//! finite differences and the stationary profile.

mod characteristics;
mod coefficients;
mod fd;
mod solution;
mod wall;

pub use characteristics::{
    cell_projection, characteristic_value, constant_price_value, solve_characteristics, solve_constant_price,
    stationary, PANELS_PER_UNIT_TIME,
};
pub use coefficients::{FieldFn, InitialData, InitialProfile, PdeCoefficients, SideCoefficients, SpaceFn, TimeFn};
pub use fd::{bin_average, fd_solve, fd_step};
pub use solution::{Frame, PdeSolution};
pub use wall::to_wall_time;
