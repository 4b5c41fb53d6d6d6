use super::coefficients::{InitialData, InitialProfile, PdeCoefficients, SideCoefficients};
use super::solution::{Frame, PdeSolution};
use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::quad::gauss_piecewise;
use crate::scaling::ScalingParams;
use crate::state::Side;

/// Bin averages of the decay and source coefficients on a bin range.
#[derive(Clone, Debug)]
struct BinCoefficients {
    lo: i64,
    decay: Vec<f64>,
    source: Vec<f64>,
}

impl BinCoefficients {
    fn new(side: &SideCoefficients, t: f64, dx: f64) -> Self {
        let (lo, hi) = window_bins(side, dx);
        let (decay, source) = side.bin_averages(t, dx, lo, hi);
        BinCoefficients { lo, decay, source }
    }

    fn hi(&self) -> i64 {
        self.lo + self.decay.len() as i64
    }

    fn get(&self, j: i64) -> (f64, f64) {
        if j < self.lo || j >= self.hi() {
            return (0.0, 0.0);
        }
        let i = (j - self.lo) as usize;
        (self.decay[i], self.source[i])
    }
}

fn window_bins(side: &SideCoefficients, dx: f64) -> (i64, i64) {
    let (a, b) = side.window;
    if b <= a {
        return (0, 0);
    }
    ((a / dx).floor() as i64, (b / dx).ceil() as i64)
}

fn step_with(
    u: &GridDensity,
    t: f64,
    side: &SideCoefficients,
    bins: &BinCoefficients,
    params: &ScalingParams,
) -> Result<GridDensity> {
    let ar = (side.right)(t);
    let al = (side.left)(t);
    let load = params.dp * (ar + al);
    if load > 1.0 + 1e-12 {
        return Err(Error::Scheme(format!(
            "dp (A_R + A_L) = {load} exceeds 1 at state time {t}"
        )));
    }
    let moving = ar != 0.0 || al != 0.0;
    let (mut lo, mut hi) = if u.is_empty() {
        (bins.lo, bins.hi())
    } else if moving {
        (u.lo - 1, u.hi() + 1)
    } else {
        (u.lo, u.hi())
    };
    if bins.hi() > bins.lo {
        lo = lo.min(bins.lo);
        hi = hi.max(bins.hi());
    }
    let scale = params.dv * (1.0 - params.dp);
    let heights = (lo..hi)
        .map(|j| {
            let here = u.get(j);
            let (f, g) = bins.get(j);
            here + params.dp * ar * (u.get(j + 1) - here)
                + params.dp * al * (u.get(j - 1) - here)
                + scale * (f * here + g)
        })
        .collect();
    Ok(GridDensity { dx: u.dx, lo, heights }.trimmed())
}

/// One step of the explicit scheme for one side at state time `t`.
pub fn fd_step(u: &GridDensity, t: f64, side: &SideCoefficients, params: &ScalingParams) -> Result<GridDensity> {
    crate::grid::check_dx(u.dx, params.dx)?;
    let bins = BinCoefficients::new(side, t, params.dx);
    step_with(u, t, side, &bins, params)
}

/// Bin averages of an initial profile on the tick grid.
pub fn bin_average(v0: &InitialProfile, dx: f64) -> GridDensity {
    let Some((a, b)) = v0.support else {
        return GridDensity::zero(dx);
    };
    let lo = (a / dx).floor() as i64;
    let hi = (b / dx).ceil() as i64;
    let heights = (lo..hi)
        .map(|j| {
            let x0 = j as f64 * dx;
            gauss_piecewise(|x| v0.eval(x), x0, x0 + dx, &v0.breaks, 2) / dx
        })
        .collect();
    GridDensity { dx, lo, heights }.trimmed()
}

/// Iterates the explicit scheme from the bin-averaged initial data up to
/// `horizon` and records the step nearest to each requested time.
///
/// Recorded times are the exact step times `k dt`.
pub fn fd_solve(
    coeffs: &PdeCoefficients,
    v0: &InitialData,
    params: &ScalingParams,
    horizon: f64,
    snapshot_times: &[f64],
) -> Result<PdeSolution> {
    let steps = params.events_in(horizon);
    let mut wanted: Vec<usize> = Vec::with_capacity(snapshot_times.len());
    for t in snapshot_times {
        if !(*t >= 0.0 && *t <= horizon + 0.5 * params.dt) {
            return Err(Error::Range(*t, horizon));
        }
        wanted.push(((t / params.dt).round() as u64).min(steps) as usize);
    }
    let mut snaps: [Vec<GridDensity>; 2] = [Vec::new(), Vec::new()];
    for (si, side) in [Side::Buy, Side::Sell].into_iter().enumerate() {
        let c = coeffs.side(side);
        let mut u = bin_average(v0.side(side), params.dx);
        let cached = c.time_independent.then(|| BinCoefficients::new(c, 0.0, params.dx));
        let mut record = vec![None; wanted.len()];
        let last = wanted.iter().copied().max().unwrap_or(0);
        for k in 0..=last {
            for (slot, w) in record.iter_mut().zip(&wanted) {
                if *w == k {
                    *slot = Some(u.clone());
                }
            }
            if k == last {
                break;
            }
            let t = k as f64 * params.dt;
            u = match &cached {
                Some(bins) => step_with(&u, t, c, bins, params)?,
                None => step_with(&u, t, c, &BinCoefficients::new(c, t, params.dx), params)?,
            };
        }
        snaps[si] = record
            .into_iter()
            .map(|r| r.unwrap_or_else(|| GridDensity::zero(params.dx)))
            .collect();
    }
    let nonempty = snaps.iter().flatten().filter(|d| !d.is_empty());
    let lo = nonempty.clone().map(|d| d.lo).min().unwrap_or(0);
    let hi = nonempty.map(|d| d.hi()).max().unwrap_or(0);
    let dense = |d: &GridDensity| (lo..hi).map(|j| d.get(j)).collect::<Vec<f64>>();
    let [buy, sell] = snaps;
    Ok(PdeSolution {
        frame: Frame::State,
        times: wanted.iter().map(|k| *k as f64 * params.dt).collect(),
        x: (lo..hi).map(|j| j as f64 * params.dx).collect(),
        buy: buy.iter().map(dense).collect(),
        sell: sell.iter().map(dense).collect(),
        cell_width: Some(params.dx),
    })
}
