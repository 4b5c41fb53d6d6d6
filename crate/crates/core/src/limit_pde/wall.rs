use super::solution::{Frame, PdeSolution};
use crate::error::{Error, Result};
use crate::limit_ode::TimeChange;

/// Resamples a state-time solution at wall times `t` by looking up the
/// recorded state time nearest to `mu(t)`.
pub fn to_wall_time(sol: &PdeSolution, tc: &TimeChange, wall_times: &[f64]) -> Result<PdeSolution> {
    if sol.frame != Frame::State {
        return Err(Error::Config("solution is already in wall time".into()));
    }
    let last = *sol
        .times
        .last()
        .ok_or_else(|| Error::Config("solution has no times".into()))?;
    let tol = 1e-9 * last.abs().max(1.0);
    let mut index = Vec::with_capacity(wall_times.len());
    for t in wall_times {
        let s = tc.mu(*t)?;
        if s < sol.times[0] - tol || s > last + tol {
            return Err(Error::Range(s, last));
        }
        let k = sol.times.partition_point(|x| *x < s);
        let i = if k == 0 {
            0
        } else if k == sol.times.len() || s - sol.times[k - 1] <= sol.times[k] - s {
            k - 1
        } else {
            k
        };
        index.push(i);
    }
    Ok(PdeSolution {
        frame: Frame::Wall,
        times: wall_times.to_vec(),
        x: sol.x.clone(),
        buy: index.iter().map(|i| sol.buy[*i].clone()).collect(),
        sell: index.iter().map(|i| sol.sell[*i].clone()).collect(),
        cell_width: sol.cell_width,
    })
}
