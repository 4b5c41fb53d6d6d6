use std::fmt;
use std::io::Write;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::microsim::{passive_side, Simulator};
use crate::model::ModelSpec;
use crate::rng::{replication_stream, RngStream};
use crate::scaling::{make_scaling, ScalingParams};
use crate::state::{BookState, EventKind, Side};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Sampler of rows of a triangular martingale difference array.
pub trait RowSampler: Sync {
    /// Draws row `n` and returns `max_m |y_1 + ... + y_m|`.
    fn sup_partial_norm(&self, n: u64, rng: &mut RngStream) -> Result<f64>;
}

/// The array that is identically zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroRows;

impl RowSampler for ZeroRows {
    fn sup_partial_norm(&self, _n: u64, _rng: &mut RngStream) -> Result<f64> {
        Ok(0.0)
    }
}

/// Independent fair ±1 signs.
#[derive(Debug, Clone, Copy, Default)]
pub struct RademacherRows;

impl RowSampler for RademacherRows {
    fn sup_partial_norm(&self, n: u64, rng: &mut RngStream) -> Result<f64> {
        let mut sum = 0i64;
        let mut best = 0i64;
        let mut left = n;
        while left > 0 {
            let bits = rng.next_u64();
            let take = left.min(64);
            for i in 0..take {
                sum += if (bits >> i) & 1 == 1 { 1 } else { -1 };
                best = best.max(sum.abs());
            }
            left -= take;
        }
        Ok(best as f64)
    }
}

/// Centered volume increments of the simulated book, `D_k - E[D_k | past]`
/// over the first `n * horizon` events, scaled by `n^beta` with
/// `beta = min(alpha, 1 - alpha / 2)` and measured in L² over both sides.
#[derive(Debug, Clone)]
pub struct SimulatorRows {
    pub spec: ModelSpec,
    pub alpha: f64,
    pub horizon: f64,
}

impl SimulatorRows {
    pub fn beta(&self) -> f64 {
        self.alpha.min(1.0 - 0.5 * self.alpha)
    }
}

fn add_scaled(acc: &mut GridDensity, scale: f64, d: &GridDensity) {
    for (i, h) in d.heights.iter().enumerate() {
        if *h != 0.0 {
            *acc.get_mut(d.lo + i as i64) += scale * h;
        }
    }
}

/// Conditional mean of the volume increment of each side at `state`.
pub fn expected_increment(spec: &ModelSpec, params: &ScalingParams, state: &BookState) -> Result<[GridDensity; 2]> {
    let probs = spec.event_probabilities(state.bid(), state.ask(), params.dp, state.spread_ticks() < 1)?;
    let dx = state.dx;
    let mut out = [GridDensity::zero(dx), GridDensity::zero(dx)];
    for kind in EventKind::ALL {
        let p = probs.get(kind);
        if p <= 0.0 {
            continue;
        }
        let side = passive_side(kind);
        let si = match side {
            Side::Buy => 0,
            Side::Sell => 1,
        };
        let current = state.density(side);
        if kind.is_active() {
            let mut moved = state.clone();
            crate::microsim::apply_active(&mut moved, kind)?;
            add_scaled(&mut out[si], p, moved.density(side));
            add_scaled(&mut out[si], -p, current);
            continue;
        }
        let profile = spec.placement.get(kind);
        let w = spec.omega.get(kind).mean() * params.impact();
        let (a, b) = profile.support();
        let j0 = (a / dx).floor() as i64;
        let j1 = (b / dx).ceil() as i64;
        for j in j0..j1 {
            let mass = profile.mass(j as f64 * dx, (j + 1) as f64 * dx);
            if mass <= 0.0 {
                continue;
            }
            match kind {
                EventKind::C | EventKind::G => {
                    let v = current.get(j);
                    if v != 0.0 {
                        *out[si].get_mut(j) -= p * mass * w * v;
                    }
                }
                _ => *out[si].get_mut(j) += p * mass * w,
            }
        }
    }
    Ok(out)
}

impl RowSampler for SimulatorRows {
    fn sup_partial_norm(&self, n: u64, rng: &mut RngStream) -> Result<f64> {
        let params = make_scaling(n, self.alpha)?;
        let events = params.events_in(self.horizon);
        let mut sim = Simulator::new(&self.spec, params, rng.clone())?;
        let mut acc = [GridDensity::zero(params.dx), GridDensity::zero(params.dx)];
        let mut best = 0.0f64;
        for _ in 0..events {
            let before = sim.state().clone();
            let mean = expected_increment(&self.spec, &params, &before)?;
            sim.step()?;
            let after = sim.state();
            for (si, side) in [Side::Buy, Side::Sell].into_iter().enumerate() {
                add_scaled(&mut acc[si], 1.0, after.density(side));
                add_scaled(&mut acc[si], -1.0, before.density(side));
                add_scaled(&mut acc[si], -1.0, &mean[si]);
            }
            best = best.max((acc[0].l2_norm_sq() + acc[1].l2_norm_sq()).sqrt());
        }
        Ok((n as f64).powf(self.beta()) * best)
    }
}

/// Wilson score interval for `k` successes out of `m` trials.
pub fn wilson_interval(k: usize, m: usize, z: f64) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let m = m as f64;
    let p = k as f64 / m;
    let z2 = z * z;
    let denom = 1.0 + z2 / m;
    let center = (p + z2 / (2.0 * m)) / denom;
    let half = z * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Exceedance estimate at one row length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmdaRow {
    pub n: u64,
    pub exceedances: usize,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Monte-Carlo estimates of `P[max_m |y_1 + ... + y_m| >= eps n^beta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmdaReport {
    pub eps: f64,
    pub beta: f64,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<TmdaRow>,
}

impl TmdaReport {
    /// Whether the estimates never increase along the ladder.
    pub fn nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].estimate <= w[0].estimate)
    }

    /// Whether every estimate lies below the upper interval bound of its
    /// predecessor.
    pub fn nonincreasing_within_ci(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].estimate <= w[0].ci_hi)
    }

    /// Writes `n,estimate,ci_lo,ci_hi` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,estimate,ci_lo,ci_hi")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.n, num(r.estimate), num(r.ci_lo), num(r.ci_hi))?;
        }
        Ok(())
    }
}

impl fmt::Display for TmdaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eps = {}, beta = {}, reps = {}", self.eps, self.beta, self.reps)?;
        writeln!(f, "{:>8} {:>10} {:>10} {:>10}", "n", "estimate", "ci_lo", "ci_hi")?;
        for r in &self.rows {
            writeln!(f, "{:>8} {:>10.5} {:>10.5} {:>10.5}", r.n, r.estimate, r.ci_lo, r.ci_hi)?;
        }
        Ok(())
    }
}

/// Estimates the exceedance probability of the partial-sum maximum at
/// every row length of `ladder`.
pub fn tmda_check<G: RowSampler>(
    generator: &G,
    ladder: &[u64],
    eps: f64,
    beta: f64,
    reps: usize,
    seed: u64,
) -> Result<TmdaReport> {
    if beta.is_nan() || beta * 2.0 <= 1.0 {
        return Err(Error::Hypothesis(format!("beta must exceed 1/2, got {beta}")));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if reps == 0 {
        return Err(Error::Config("reps must be positive".into()));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let threshold = eps * (n as f64).powf(beta);
        let hits = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = RngStream::new(seed, replication_stream(n, rep));
                generator.sup_partial_norm(n, &mut rng).map(|s| s >= threshold)
            })
            .collect::<Result<Vec<bool>>>()?;
        let k = hits.iter().filter(|h| **h).count();
        let (ci_lo, ci_hi) = wilson_interval(k, reps, Z_95);
        rows.push(TmdaRow {
            n,
            exceedances: k,
            estimate: k as f64 / reps as f64,
            ci_lo,
            ci_hi,
        });
    }
    Ok(TmdaReport {
        eps,
        beta,
        reps,
        seed,
        rows,
    })
}
