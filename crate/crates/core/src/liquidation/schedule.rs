use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shape::{ShapeFunction, SpreadPath};
use crate::csvfmt::num;
use crate::error::{Error, Result};

/// Largest number of trades the grid search accepts.
pub const GRID_MAX_TRADES: usize = 3;
/// Stationarity tolerance of the descent method.
pub const KKT_TOL: f64 = 1e-8;

/// `E (spread(t) / 2 + D(t, E))`: half-spread plus impact cost of a trade.
pub fn cost(shape: &ShapeFunction, spread: &SpreadPath, t: f64, volume: f64) -> Result<f64> {
    if volume == 0.0 {
        return Ok(0.0);
    }
    Ok(volume * (0.5 * spread.at(t) + shape.impact_inverse(t, volume)?))
}

/// `d cost / dE = spread(t) / 2 + D + E / f(D)`.
pub fn marginal_cost(shape: &ShapeFunction, spread: &SpreadPath, t: f64, volume: f64) -> Result<f64> {
    let profile = shape.at(t);
    let d = profile.impact_inverse(volume)?;
    let slope = if volume == 0.0 {
        0.0
    } else {
        volume * profile.impact_slope(volume)?
    };
    Ok(0.5 * spread.at(t) + d + slope)
}

/// Optimization method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Exhaustive search over sizes that are multiples of `resolution`
    /// (default `X / 200`).
    Grid {
        #[serde(default)]
        resolution: Option<f64>,
    },
    /// Pairwise exchange between the most and least expensive trades until
    /// marginal costs agree.
    Descent,
}

/// Trade sizes at the given times with their total cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub times: Vec<f64>,
    pub sizes: Vec<f64>,
    pub total: f64,
    pub objective: f64,
    pub marginal: Vec<f64>,
}

impl Schedule {
    /// Writes `t,E,marginal_cost` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,E,marginal_cost")?;
        for ((t, e), m) in self.times.iter().zip(&self.sizes).zip(&self.marginal) {
            writeln!(w, "{},{},{}", num(*t), num(*e), num(*m))?;
        }
        Ok(())
    }
}

fn objective(shape: &ShapeFunction, spread: &SpreadPath, times: &[f64], sizes: &[f64]) -> Result<f64> {
    times.iter().zip(sizes).map(|(t, e)| cost(shape, spread, *t, *e)).sum()
}

fn finish(shape: &ShapeFunction, spread: &SpreadPath, times: &[f64], sizes: Vec<f64>, total: f64) -> Result<Schedule> {
    let objective = objective(shape, spread, times, &sizes)?;
    let marginal = times
        .iter()
        .zip(&sizes)
        .map(|(t, e)| marginal_cost(shape, spread, *t, *e))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Schedule {
        times: times.to_vec(),
        sizes,
        total,
        objective,
        marginal,
    })
}

fn fits(shape: &ShapeFunction, t: f64, volume: f64) -> bool {
    shape.impact_inverse(t, volume).is_ok()
}

/// Splits `total` across `times` to minimize the summed trade costs.
pub fn optimize(
    shape: &ShapeFunction,
    spread: &SpreadPath,
    times: &[f64],
    total: f64,
    method: Method,
) -> Result<Schedule> {
    if times.is_empty() {
        return Err(Error::Config("at least one trade time is needed".into()));
    }
    if !(total >= 0.0 && total.is_finite()) {
        return Err(Error::Config(format!(
            "total size must be finite and nonnegative, got {total}"
        )));
    }
    let available: f64 = times.iter().map(|t| shape.at(*t).depth()).sum();
    if total > available {
        return Err(Error::Infeasible(format!(
            "total size {total} exceeds the combined depth {available}"
        )));
    }
    if times.len() == 1 {
        if !fits(shape, times[0], total) {
            return Err(Error::Infeasible(format!(
                "a single trade of {total} exceeds the depth"
            )));
        }
        return finish(shape, spread, times, vec![total], total);
    }
    match method {
        Method::Grid { resolution } => grid_search(shape, spread, times, total, resolution.unwrap_or(total / 200.0)),
        Method::Descent => descent(shape, spread, times, total),
    }
}

fn grid_search(
    shape: &ShapeFunction,
    spread: &SpreadPath,
    times: &[f64],
    total: f64,
    resolution: f64,
) -> Result<Schedule> {
    let n = times.len();
    if n > GRID_MAX_TRADES {
        return Err(Error::Config(format!(
            "grid search handles at most {GRID_MAX_TRADES} trades, got {n}"
        )));
    }
    if total == 0.0 {
        return finish(shape, spread, times, vec![0.0; n], total);
    }
    if resolution.is_nan() || resolution <= 0.0 {
        return Err(Error::Config(format!(
            "grid resolution must be positive, got {resolution}"
        )));
    }
    let steps = (total / resolution).round().max(1.0) as usize;
    let unit = total / steps as f64;
    let eval = |sizes: &[f64]| -> f64 {
        if sizes.iter().zip(times).any(|(e, t)| !fits(shape, *t, *e)) {
            return f64::INFINITY;
        }
        objective(shape, spread, times, sizes).unwrap_or(f64::INFINITY)
    };
    let best = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let e1 = i as f64 * unit;
            let mut best = (f64::INFINITY, usize::MAX, vec![]);
            let inner = if n == 2 { 0..=0 } else { 0..=(steps - i) };
            for j in inner {
                let sizes = if n == 2 {
                    vec![e1, total - e1]
                } else {
                    let e2 = j as f64 * unit;
                    vec![e1, e2, (total - e1 - e2).max(0.0)]
                };
                let v = eval(&sizes);
                if v < best.0 {
                    best = (v, i * (steps + 1) + j, sizes);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, vec![]),
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );
    if !best.0.is_finite() {
        return Err(Error::Infeasible(
            "no grid point fits within the available depth".into(),
        ));
    }
    finish(shape, spread, times, best.2, total)
}

/// Largest spread of marginal costs between trades that could shrink and
/// any trade; zero at a stationary point.
pub fn kkt_residual(marginal: &[f64], sizes: &[f64]) -> f64 {
    let lo = marginal.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = marginal
        .iter()
        .zip(sizes)
        .filter(|(_, e)| **e > 0.0)
        .map(|(m, _)| *m)
        .fold(f64::NEG_INFINITY, f64::max);
    (hi - lo).max(0.0)
}

fn descent(shape: &ShapeFunction, spread: &SpreadPath, times: &[f64], total: f64) -> Result<Schedule> {
    let n = times.len();
    let caps: Vec<f64> = times.iter().map(|t| shape.at(*t).depth()).collect();
    let mut sizes = vec![total / n as f64; n];
    if sizes.iter().zip(times).any(|(e, t)| !fits(shape, *t, *e)) {
        let sum: f64 = caps.iter().sum();
        sizes = caps.iter().map(|c| total * c / sum).collect();
        // Keep every trade strictly inside its depth.
        let shrink = 1.0 - 1e-9;
        let spare: f64 = sizes.iter().map(|e| e * (1.0 - shrink)).sum();
        for e in sizes.iter_mut() {
            *e *= shrink;
        }
        sizes[0] += spare.min(caps[0] - sizes[0]);
    }
    let mc = |i: usize, e: f64| marginal_cost(shape, spread, times[i], e);
    for _ in 0..100_000 {
        let marginal = (0..n).map(|i| mc(i, sizes[i])).collect::<Result<Vec<f64>>>()?;
        if kkt_residual(&marginal, &sizes) <= KKT_TOL {
            return finish(shape, spread, times, sizes, total);
        }
        let from = (0..n)
            .filter(|i| sizes[*i] > 0.0)
            .max_by(|a, b| marginal[*a].total_cmp(&marginal[*b]))
            .unwrap_or(0);
        let to = (0..n).min_by(|a, b| marginal[*a].total_cmp(&marginal[*b])).unwrap_or(0);
        let room = caps[to] - sizes[to];
        let mut hi = sizes[from].min(room);
        let mut lo = 0.0;
        let gap = |d: f64| -> f64 {
            let a = mc(from, sizes[from] - d).unwrap_or(f64::NEG_INFINITY);
            let b = mc(to, sizes[to] + d).unwrap_or(f64::INFINITY);
            a - b
        };
        if gap(hi) >= 0.0 {
            lo = hi;
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if gap(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * total.max(1.0) {
                    break;
                }
            }
        }
        let moved = if lo >= sizes[from] { sizes[from] } else { lo };
        if moved == 0.0 {
            break;
        }
        sizes[from] -= moved;
        sizes[to] += moved;
        if sizes[from] < 1e-300 {
            sizes[from] = 0.0;
        }
    }
    Err(Error::Divergence(
        "liquidation descent did not reach a stationary point".into(),
    ))
}
