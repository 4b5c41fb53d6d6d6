use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::limit_ode::{solve_autonomous, time_change, PricePath, TimeChange};
use crate::limit_pde::{
    cell_projection, characteristic_value, constant_price_value, InitialData, PdeCoefficients, SideCoefficients,
};
use crate::model::ModelSpec;
use crate::state::{LimitSnapshot, Side};

/// State-time steps per unit of state time for limit paths.
const STEPS_PER_UNIT: f64 = 1024.0;

/// State-time price path long enough to cover wall time `horizon`, with
/// its time change.
pub fn covering_path(spec: &ModelSpec, horizon: f64) -> Result<(PricePath, TimeChange)> {
    let m0 = spec.m(spec.bid0, spec.ask0);
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::Model(format!("m = {m0} is not positive at the initial quotes")));
    }
    let mut span = (horizon / m0 * 1.25).max(1e-3);
    for _ in 0..40 {
        let steps = (span * STEPS_PER_UNIT).ceil().max(16.0);
        let path = solve_autonomous(spec, [spec.bid0, spec.ask0], span, span / steps)?;
        let tc = time_change(spec, &path)?;
        if tc.wall_horizon() >= horizon {
            return Ok((path, tc));
        }
        span *= 2.0;
    }
    Err(Error::Divergence(format!(
        "wall time {horizon} is not reached by the limit path"
    )))
}

fn density_at(side: &SideCoefficients, init: &crate::limit_pde::InitialProfile, s: f64, x: f64) -> f64 {
    if side.time_independent && side.advection(0.0) == 0.0 {
        constant_price_value(side, init, s, x)
    } else {
        characteristic_value(side, init, s, x)
    }
}

fn total_transport(side: &SideCoefficients, path: &PricePath) -> f64 {
    path.times.iter().map(|t| side.advection(*t).abs()).sum::<f64>() * path.h
}

/// Limit states at the wall times `grid`, projected onto the tick grid of
/// spacing `dx`.
pub fn limit_state(spec: &ModelSpec, horizon: f64, grid: &[f64], dx: f64) -> Result<Vec<LimitSnapshot>> {
    let (path, tc) = covering_path(spec, horizon)?;
    let coeffs = PdeCoefficients::from_model(spec, &path);
    let init = InitialData::from_model(spec)?;
    let mut windows = [(0i64, 0i64); 2];
    for (i, side) in [Side::Buy, Side::Sell].into_iter().enumerate() {
        let c = coeffs.side(side);
        let mut lo = c.window.0;
        let mut hi = c.window.1;
        if let Some((a, b)) = init.side(side).support {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let reach = total_transport(c, &path);
        windows[i] = (((lo - reach) / dx).floor() as i64, ((hi + reach) / dx).ceil() as i64);
    }
    grid.iter()
        .map(|t| {
            let s = tc.mu(*t)?;
            let [bid, ask] = path.at(s);
            let mut parts = Vec::with_capacity(2);
            for (i, side) in [Side::Buy, Side::Sell].into_iter().enumerate() {
                let (lo, hi) = windows[i];
                let c = coeffs.side(side);
                let v0 = init.side(side);
                let (heights, residual) = cell_projection(|x| density_at(c, v0, s, x), dx, lo, hi);
                parts.push((GridDensity { dx, lo, heights }.trimmed(), residual));
            }
            let (vs, residual_s) = parts.pop().unwrap_or((GridDensity::zero(dx), 0.0));
            let (vb, residual_b) = parts.pop().unwrap_or((GridDensity::zero(dx), 0.0));
            Ok(LimitSnapshot {
                t: *t,
                bid,
                ask,
                vb,
                vs,
                residual_b,
                residual_s,
            })
        })
        .collect()
}
