use rayon::prelude::*;

use super::coefficients::{InitialData, InitialProfile, PdeCoefficients, SideCoefficients};
use super::solution::{Frame, PdeSolution};
use crate::error::{Error, Result};
use crate::quad::{cumulative_simpson, gauss5_nodes};
use crate::state::Side;

/// Simpson panels per unit of time along a characteristic.
pub const PANELS_PER_UNIT_TIME: usize = 256;

fn panels_for(t: f64) -> usize {
    let n = ((PANELS_PER_UNIT_TIME as f64) * t).ceil() as usize;
    let n = n.max(2);
    n + n % 2
}

fn simpson_sum(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Solution of one side at state time `t` and relative price `y`,
/// integrating along the characteristic through `(t, y)`.
pub fn characteristic_value(side: &SideCoefficients, v0: &InitialProfile, t: f64, y: f64) -> f64 {
    if t <= 0.0 {
        return v0.eval(y);
    }
    let n = panels_for(t);
    let h = t / n as f64;
    let s: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let a: Vec<f64> = s.iter().map(|s| side.advection(*s)).collect();
    let ia = cumulative_simpson(&a, h);
    let total_a = ia[n];
    let x: Vec<f64> = ia.iter().map(|i| y + total_a - i).collect();
    let b: Vec<f64> = s.iter().zip(&x).map(|(s, x)| (side.decay)(*s, *x)).collect();
    let ib = cumulative_simpson(&b, h);
    let total_b = ib[n];
    let weighted: Vec<f64> = (0..=n)
        .map(|k| {
            let c = (side.source)(s[k], x[k]);
            if c == 0.0 {
                0.0
            } else {
                (total_b - ib[k]).exp() * c
            }
        })
        .collect();
    total_b.exp() * v0.eval(x[0]) + simpson_sum(&weighted, h)
}

fn check_times(t_grid: &[f64]) -> Result<()> {
    if let Some(t) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Range(*t, f64::INFINITY));
    }
    Ok(())
}

/// Solution of both sides on `t_grid x x_grid` by the method of
/// characteristics, in state time.
pub fn solve_characteristics(
    coeffs: &PdeCoefficients,
    v0: &InitialData,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<PdeSolution> {
    check_times(t_grid)?;
    let eval = |side: Side| -> Vec<Vec<f64>> {
        let c = coeffs.side(side);
        let init = v0.side(side);
        t_grid
            .iter()
            .map(|t| {
                x_grid
                    .par_iter()
                    .map(|y| characteristic_value(c, init, *t, *y))
                    .collect()
            })
            .collect()
    };
    Ok(PdeSolution {
        frame: Frame::State,
        times: t_grid.to_vec(),
        x: x_grid.to_vec(),
        buy: eval(Side::Buy),
        sell: eval(Side::Sell),
        cell_width: None,
    })
}

fn require_constant(side: &SideCoefficients) -> Result<()> {
    if !side.time_independent {
        return Err(Error::Model("closed form needs time-independent coefficients".into()));
    }
    let a = side.advection(0.0);
    if a.abs() > 1e-12 {
        return Err(Error::Model(format!("closed form needs zero advection, got {a}")));
    }
    Ok(())
}

/// Closed-form solution of one side when the coefficients do not depend on
/// time and there is no advection.
pub fn constant_price_value(side: &SideCoefficients, v0: &InitialProfile, t: f64, y: f64) -> f64 {
    let b = (side.decay)(0.0, y);
    let c = (side.source)(0.0, y);
    let u0 = v0.eval(y);
    if b == 0.0 {
        u0 + t * c
    } else {
        (t * b).exp() * u0 + c * (t * b).exp_m1() / b
    }
}

/// Closed-form solution of both sides on `t_grid x x_grid`.
pub fn solve_constant_price(
    coeffs: &PdeCoefficients,
    v0: &InitialData,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<PdeSolution> {
    check_times(t_grid)?;
    require_constant(&coeffs.buy)?;
    require_constant(&coeffs.sell)?;
    let eval = |side: Side| -> Vec<Vec<f64>> {
        let c = coeffs.side(side);
        let init = v0.side(side);
        t_grid
            .iter()
            .map(|t| x_grid.iter().map(|y| constant_price_value(c, init, *t, *y)).collect())
            .collect()
    };
    Ok(PdeSolution {
        frame: Frame::State,
        times: t_grid.to_vec(),
        x: x_grid.to_vec(),
        buy: eval(Side::Buy),
        sell: eval(Side::Sell),
        cell_width: None,
    })
}

/// Stationary density `-source / decay` of one side on `x_grid`.
pub fn stationary(side: &SideCoefficients, x_grid: &[f64]) -> Result<Vec<f64>> {
    x_grid
        .iter()
        .map(|x| {
            let b = (side.decay)(0.0, *x);
            let c = (side.source)(0.0, *x);
            if c == 0.0 {
                Ok(0.0)
            } else if b == 0.0 {
                Err(Error::UndefinedStationary(*x))
            } else {
                Ok(-c / b)
            }
        })
        .collect()
}

/// Bin averages of `f` over `[j dx, (j + 1) dx)` for `j` in `lo..hi`, and
/// the part of `∫ f²` they miss, `∫ f² - dx Σ avg²`.
pub fn cell_projection<F: Fn(f64) -> f64 + Sync>(f: F, dx: f64, lo: i64, hi: i64) -> (Vec<f64>, f64) {
    let per_bin: Vec<(f64, f64)> = (lo..hi)
        .into_par_iter()
        .map(|j| {
            let a = j as f64 * dx;
            let mut int = 0.0;
            let mut sq = 0.0;
            for half in 0..2 {
                let lo = a + 0.5 * dx * half as f64;
                for (x, w) in gauss5_nodes(lo, lo + 0.5 * dx) {
                    let v = f(x);
                    int += w * v;
                    sq += w * v * v;
                }
            }
            let avg = int / dx;
            (avg, (sq - dx * avg * avg).max(0.0))
        })
        .collect();
    let residual = per_bin.iter().map(|p| p.1).sum();
    (per_bin.into_iter().map(|p| p.0).collect(), residual)
}
