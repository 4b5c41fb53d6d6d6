//! Distance between simulated books and their limit, a Monte-Carlo check
//! of the martingale law of large numbers, and a drift test for the
//! squared volume norm.

mod limit;
mod study;
mod tmda;
mod trend;

pub use limit::{covering_path, limit_state};
pub use study::{convergence_study, quantile, uniform_grid, ConvergenceReport, ConvergenceRow, StudyConfig, MIN_REPS};
pub use tmda::{
    expected_increment, tmda_check, wilson_interval, RademacherRows, RowSampler, SimulatorRows, TmdaReport, TmdaRow,
    ZeroRows, Z_95,
};
pub use trend::{volume_norm_trend, TrendReport};
