//! Scaling constants of the n-th order book model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tick size, time scale, volume impact and active-order probability of
/// model `n`.
///
/// Built as `dt = dv = 1/n`, `dp = dt^alpha` and `dx = dv / dp`, so the two
/// ratios `dx * dp / dv` and `dv / dt` equal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub n: u64,
    pub dx: f64,
    pub dt: f64,
    pub dv: f64,
    pub dp: f64,
    pub alpha: f64,
}

pub fn make_scaling(n: u64, alpha: f64) -> Result<ScalingParams> {
    if n == 0 {
        return Err(Error::Config("model index n must be at least 1".into()));
    }
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in the open interval (1/2, 1), got {alpha}"
        )));
    }
    let nf = n as f64;
    let dt = 1.0 / nf;
    let dv = dt;
    let dp = dt.powf(alpha);
    let dx = dv / dp;
    Ok(ScalingParams {
        n,
        dx,
        dt,
        dv,
        dp,
        alpha,
    })
}

impl ScalingParams {
    /// Height change per unit of placed volume, `dv / dx`.
    pub fn impact(&self) -> f64 {
        self.dv / self.dx
    }

    /// Number of events that fit into `horizon` units of state time.
    pub fn events_in(&self, horizon: f64) -> u64 {
        (horizon / self.dt + 1e-9).floor().max(0.0) as u64
    }
}
