use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::limit::limit_state;
use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::microsim::{run_with, RunOptions};
use crate::model::ModelSpec;
use crate::rng::{replication_stream, RngStream};
use crate::scaling::make_scaling;
use crate::state::e_norm_to_limit;

/// Smallest replication count accepted by a study.
pub const MIN_REPS: usize = 30;

/// Settings of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub ladder: Vec<u64>,
    pub reps: usize,
    pub horizon: f64,
    pub alpha: f64,
    /// Number of points of the uniform output grid on `[0, horizon]`.
    pub grid_points: usize,
    pub seed: u64,
}

impl StudyConfig {
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.horizon, self.grid_points)
    }
}

/// `points` equally spaced times on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Error quantiles at one ladder rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub reps: usize,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    /// Per-replication errors in replication order.
    pub errors: Vec<f64>,
}

/// Quantiles of the sup-grid distance between simulated paths and the
/// limit, per ladder rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub seed: u64,
    pub alpha: f64,
    pub horizon: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Whether each median is at most `(1 + slack)` times the previous one.
    pub fn medians_nonincreasing(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].p50 <= (1.0 + slack) * w[0].p50)
    }

    /// First rung whose median exceeds `(1 + slack)` times the previous one.
    pub fn first_violation(&self, slack: f64) -> Option<&ConvergenceRow> {
        self.rows
            .windows(2)
            .find(|w| w[1].p50 > (1.0 + slack) * w[0].p50)
            .map(|w| &w[1])
    }

    /// Writes `n,reps,p10,p50,p90` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,reps,p10,p50,p90")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.n, r.reps, num(r.p10), num(r.p50), num(r.p90))?;
        }
        Ok(())
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>6} {:>12} {:>12} {:>12}", "n", "reps", "p10", "p50", "p90")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>8} {:>6} {:>12.6} {:>12.6} {:>12.6}",
                r.n, r.reps, r.p10, r.p50, r.p90
            )?;
        }
        Ok(())
    }
}

/// Quantile `q` of sorted data by linear interpolation between order
/// statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = q.clamp(0.0, 1.0) * (len - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < len {
                sorted[i] + frac * (sorted[i + 1] - sorted[i])
            } else {
                sorted[len - 1]
            }
        }
    }
}

/// Simulates `reps` paths per ladder rung and measures their sup-grid
/// distance to the limit.
pub fn convergence_study(spec: &ModelSpec, config: &StudyConfig) -> Result<ConvergenceReport> {
    if config.reps < MIN_REPS {
        return Err(Error::Config(format!(
            "reps must be at least {MIN_REPS}, got {}",
            config.reps
        )));
    }
    if config.ladder.is_empty() || config.ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("ladder must be nonempty and increasing".into()));
    }
    spec.validate()?;
    let grid = config.grid();
    let mut rows = Vec::with_capacity(config.ladder.len());
    for &n in &config.ladder {
        let params = make_scaling(n, config.alpha)?;
        let limit = limit_state(spec, config.horizon, &grid, params.dx)?;
        let errors = (0..config.reps as u64)
            .into_par_iter()
            .map(|rep| {
                let rng = RngStream::new(config.seed, replication_stream(n, rep));
                let traj = run_with(spec, &params, config.horizon, &grid, rng, RunOptions::default())?;
                traj.states
                    .iter()
                    .zip(&limit)
                    .map(|(s, l)| e_norm_to_limit(s, l))
                    .try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut sorted = errors.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        rows.push(ConvergenceRow {
            n,
            reps: config.reps,
            p10: quantile(&sorted, 0.1),
            p50: quantile(&sorted, 0.5),
            p90: quantile(&sorted, 0.9),
            errors,
        });
    }
    Ok(ConvergenceReport {
        seed: config.seed,
        alpha: config.alpha,
        horizon: config.horizon,
        rows,
    })
}
