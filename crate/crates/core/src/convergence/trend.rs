use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::microsim::Simulator;
use crate::model::ModelSpec;
use crate::rng::{replication_stream, RngStream};
use crate::scaling::ScalingParams;

/// One-sided test for an upward drift of `||v_b||²` along the event index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub reps: usize,
    pub events: u64,
    /// Mean over replications of `||v_b||²` after each event.
    pub mean_curve: Vec<f64>,
    /// Mean of the per-replication least-squares slopes.
    pub mean_slope: f64,
    /// Standard error of `mean_slope`.
    pub std_error: f64,
    pub t_statistic: f64,
    /// Upper critical value of Student's t at the test level.
    pub critical: f64,
    pub level: f64,
}

impl TrendReport {
    /// Whether the test finds a significant positive slope.
    pub fn positive_trend(&self) -> bool {
        self.t_statistic > self.critical
    }
}

pub(crate) fn ols_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xbar = (n - 1.0) / 2.0;
    let ybar = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xbar;
        sxy += dx * (v - ybar);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Tracks `||v_b||²` over the first `events` events of `reps` independent
/// paths and tests the mean per-path slope against zero at `level`.
pub fn volume_norm_trend(
    spec: &ModelSpec,
    params: &ScalingParams,
    events: u64,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<TrendReport> {
    if reps < 2 || events < 2 {
        return Err(Error::Config(
            "trend test needs at least two paths and two events".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level must lie in (0, 1), got {level}")));
    }
    let curves = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let rng = RngStream::new(seed, replication_stream(params.n, rep));
            let mut sim = Simulator::new(spec, *params, rng)?;
            let mut curve = Vec::with_capacity(events as usize + 1);
            curve.push(sim.state().vb.l2_norm_sq());
            for _ in 0..events {
                sim.step()?;
                curve.push(sim.state().vb.l2_norm_sq());
            }
            Ok(curve)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let slopes: Vec<f64> = curves.iter().map(|c| ols_slope(c)).collect();
    let r = reps as f64;
    let mean_slope = slopes.iter().sum::<f64>() / r;
    let var = slopes.iter().map(|s| (s - mean_slope).powi(2)).sum::<f64>() / (r - 1.0);
    let std_error = (var / r).sqrt();
    let t_statistic = if std_error > 0.0 {
        mean_slope / std_error
    } else if mean_slope > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let dist = StudentsT::new(0.0, 1.0, r - 1.0).map_err(|e| Error::Config(e.to_string()))?;
    let critical = dist.inverse_cdf(1.0 - level);
    let len = events as usize + 1;
    let mean_curve = (0..len).map(|k| curves.iter().map(|c| c[k]).sum::<f64>() / r).collect();
    Ok(TrendReport {
        reps,
        events,
        mean_curve,
        mean_slope,
        std_error,
        t_statistic,
        critical,
        level,
    })
}
