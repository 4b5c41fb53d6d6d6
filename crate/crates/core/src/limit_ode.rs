//! Limiting bid/ask dynamics: the autonomous price ODE in state time, the
//! time change to wall time and their composition.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::quad::cumulative_simpson;

/// Largest negative spread accepted as integration error.
pub const SPREAD_TOL: f64 = 1e-6;

/// Default number of RK4 steps per horizon.
pub const DEFAULT_STEPS: usize = 4096;

/// Bid/ask path on a uniform grid, with the vector field at every node so
/// that it can be interpolated to fourth order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub times: Vec<f64>,
    /// `(bid, ask)` per node.
    pub values: Vec<[f64; 2]>,
    /// Time derivative of `(bid, ask)` per node.
    pub slopes: Vec<[f64; 2]>,
    pub h: f64,
}

impl PricePath {
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn bid(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[0]).collect()
    }

    pub fn ask(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[1]).collect()
    }

    /// Cubic Hermite interpolation of `(bid, ask)` at `t`, clamped to the
    /// path's time range.
    pub fn at(&self, t: f64) -> [f64; 2] {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let i = (((t - self.times[0]) / self.h).floor() as usize).min(n - 2);
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            *o = hermite(
                self.values[i][c],
                self.values[i + 1][c],
                self.slopes[i][c] * h,
                self.slopes[i + 1][c] * h,
                s,
            );
        }
        out
    }

    /// Writes `t,bid,ask` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,bid,ask")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{},{},{}", num(*t), num(v[0]), num(v[1]))?;
        }
        Ok(())
    }
}

fn hermite(p0: f64, p1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1
}

fn hermite_slope(p0: f64, p1: f64, m0: f64, m1: f64, s: f64, h: f64) -> f64 {
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * p0
        + (3.0 * s2 - 4.0 * s + 1.0) * m0
        + (-6.0 * s2 + 6.0 * s) * p1
        + (3.0 * s2 - 2.0 * s) * m1)
        / h
}

fn step_count(horizon: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("step size must be positive, got {h}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be nonnegative, got {horizon}")));
    }
    Ok(((horizon / h) * (1.0 - 1e-12)).ceil() as usize)
}

/// Classical fourth-order Runge-Kutta for a planar, possibly
/// time-dependent field over `[t0, t0 + horizon]`. The step is shrunk so
/// that a whole number of steps covers the horizon.
pub fn integrate_rk4<F>(field: F, t0: f64, y0: [f64; 2], horizon: f64, h: f64) -> Result<PricePath>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let steps = step_count(horizon, h)?;
    let h = if steps == 0 { h } else { horizon / steps as f64 };
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut slopes = Vec::with_capacity(steps + 1);
    let mut y = y0;
    times.push(t0);
    values.push(y);
    slopes.push(field(t0, y));
    let add = |y: [f64; 2], k: [f64; 2], c: f64| [y[0] + c * k[0], y[1] + c * k[1]];
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = *slopes.last().unwrap();
        let k2 = field(t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = field(t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = field(t + h, add(y, k3, h));
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::Divergence(format!("non-finite price at t = {}", t + h)));
        }
        let tn = t0 + (i + 1) as f64 * h;
        times.push(tn);
        values.push(y);
        slopes.push(field(tn, y));
    }
    Ok(PricePath {
        times,
        values,
        slopes,
        h,
    })
}

/// State-time drift of `(bid, ask)`: `(pB - pA, pE - pF)`.
pub fn drift(spec: &ModelSpec, bid: f64, ask: f64) -> [f64; 2] {
    let a = &spec.active;
    [
        a.b.eval(bid, ask) - a.a.eval(bid, ask),
        a.e.eval(bid, ask) - a.f.eval(bid, ask),
    ]
}

fn check_spread(path: &PricePath) -> Result<()> {
    for (t, v) in path.times.iter().zip(&path.values) {
        if v[1] < v[0] - SPREAD_TOL {
            return Err(Error::Model(format!(
                "limit ask {} below bid {} at t = {t}",
                v[1], v[0]
            )));
        }
    }
    Ok(())
}

/// Autonomous price ODE in state time.
pub fn solve_autonomous(spec: &ModelSpec, gamma0: [f64; 2], horizon: f64, h: f64) -> Result<PricePath> {
    let path = integrate_rk4(|_, y| drift(spec, y[0], y[1]), 0.0, gamma0, horizon, h)?;
    check_spread(&path)?;
    Ok(path)
}

/// Map between state time `s` and wall time `y(s) = ∫_0^s m(path(u)) du`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeChange {
    /// State-time grid of the underlying path.
    pub times: Vec<f64>,
    /// `y` at every state-time node.
    pub y_values: Vec<f64>,
    /// `m` at every state-time node.
    pub m_values: Vec<f64>,
    /// Uniform wall-time grid on `[0, y(horizon)]`.
    pub wall_times: Vec<f64>,
    /// `mu` at every wall-time node.
    pub mu_values: Vec<f64>,
}

impl TimeChange {
    /// Wall time reached at the end of the state-time range.
    pub fn wall_horizon(&self) -> f64 {
        *self.y_values.last().unwrap_or(&0.0)
    }

    pub fn state_horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    fn segment(&self, i: usize) -> (f64, f64, f64, f64, f64) {
        let h = self.times[i + 1] - self.times[i];
        (
            self.y_values[i],
            self.y_values[i + 1],
            self.m_values[i] * h,
            self.m_values[i + 1] * h,
            h,
        )
    }

    /// `y(s)` by Hermite interpolation with slopes `m`.
    pub fn y(&self, s: f64) -> Result<f64> {
        let n = self.times.len();
        if s < 0.0 || s > self.state_horizon() * (1.0 + 1e-12) {
            return Err(Error::Range(s, self.state_horizon()));
        }
        if n == 1 {
            return Ok(0.0);
        }
        let h0 = self.times[1] - self.times[0];
        let i = ((s / h0).floor() as usize).min(n - 2);
        let (p0, p1, m0, m1, h) = self.segment(i);
        Ok(hermite(p0, p1, m0, m1, ((s - self.times[i]) / h).min(1.0)))
    }

    /// `mu(t)`: the state time at which `y` reaches wall time `t`.
    pub fn mu(&self, t: f64) -> Result<f64> {
        let n = self.times.len();
        let top = self.wall_horizon();
        if t < 0.0 || t > top * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Range(t, top));
        }
        if n == 1 || t == 0.0 {
            return Ok(0.0);
        }
        let i = match self.y_values.partition_point(|y| *y <= t) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let (p0, p1, m0, m1, h) = self.segment(i);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut s = if p1 > p0 {
            ((t - p0) / (p1 - p0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for _ in 0..100 {
            let f = hermite(p0, p1, m0, m1, s) - t;
            if f.abs() <= 1e-15 * t.abs().max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let d = hermite_slope(p0, p1, m0, m1, s, 1.0);
            let next = s - f / d;
            s = if d > 0.0 && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-16 {
                break;
            }
        }
        Ok(self.times[i] + s * h)
    }
}

fn m_along(spec: &ModelSpec, v: [f64; 2], t: f64) -> Result<f64> {
    let m = spec.m(v[0], v[1]);
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Model(format!("m = {m} is not positive at state time {t}")));
    }
    Ok(m)
}

/// Wall time `y` along a state-time path and its inverse `mu`.
pub fn time_change(spec: &ModelSpec, path: &PricePath) -> Result<TimeChange> {
    let m_values = path
        .times
        .iter()
        .zip(&path.values)
        .map(|(t, v)| m_along(spec, *v, *t))
        .collect::<Result<Vec<f64>>>()?;
    let y_values = cumulative_simpson(&m_values, path.h);
    let mut tc = TimeChange {
        times: path.times.clone(),
        y_values,
        m_values,
        wall_times: Vec::new(),
        mu_values: Vec::new(),
    };
    let n = tc.times.len();
    let top = tc.wall_horizon();
    tc.wall_times = (0..n)
        .map(|i| if n == 1 { 0.0 } else { top * i as f64 / (n - 1) as f64 })
        .collect();
    tc.mu_values = tc.wall_times.iter().map(|t| tc.mu(*t)).collect::<Result<_>>()?;
    Ok(tc)
}

/// Wall-time price path `gamma(t) = gamma_hat(mu(t))` on `[0, horizon]`.
///
/// The state-time path and `y` are integrated together until `y` passes
/// the horizon; both are then inverted and interpolated to fourth order.
pub fn solve_full(spec: &ModelSpec, gamma0: [f64; 2], horizon: f64, h: f64) -> Result<PricePath> {
    let steps = step_count(horizon, h)?;
    let h_wall = if steps == 0 { h } else { horizon / steps as f64 };
    let m0 = m_along(spec, gamma0, 0.0)?;
    // State-time step sized so that one step advances wall time by about h.
    let hs = h_wall / m0;
    let mut times = vec![0.0];
    let mut values = vec![gamma0];
    let mut slopes = vec![drift(spec, gamma0[0], gamma0[1])];
    let mut ys = vec![0.0];
    let mut ms = vec![m0];
    let cap = 1000 * (steps + 1) + 1_000_000;
    let aug = |v: [f64; 3]| -> Result<[f64; 3]> {
        let d = drift(spec, v[0], v[1]);
        Ok([d[0], d[1], m_along(spec, [v[0], v[1]], 0.0)?])
    };
    while *ys.last().unwrap() < horizon {
        if times.len() > cap {
            return Err(Error::Divergence("time change does not reach the horizon".into()));
        }
        let i = times.len() - 1;
        let y = [values[i][0], values[i][1], ys[i]];
        let k1 = aug(y)?;
        let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
        let k2 = aug(add(y, k1, 0.5 * hs))?;
        let k3 = aug(add(y, k2, 0.5 * hs))?;
        let k4 = aug(add(y, k3, hs))?;
        let mut next = y;
        for c in 0..3 {
            next[c] += hs / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite state at state time {}",
                (i + 1) as f64 * hs
            )));
        }
        times.push((i + 1) as f64 * hs);
        values.push([next[0], next[1]]);
        slopes.push(drift(spec, next[0], next[1]));
        ys.push(next[2]);
        ms.push(m_along(spec, [next[0], next[1]], (i + 1) as f64 * hs)?);
    }
    let state_path = PricePath {
        times: times.clone(),
        values,
        slopes,
        h: hs,
    };
    let tc = TimeChange {
        times,
        y_values: ys,
        m_values: ms,
        wall_times: Vec::new(),
        mu_values: Vec::new(),
    };
    let mut out_t = Vec::with_capacity(steps + 1);
    let mut out_v = Vec::with_capacity(steps + 1);
    let mut out_s = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let t = if steps == 0 {
            0.0
        } else {
            horizon * j as f64 / steps as f64
        };
        let s = tc.mu(t)?;
        let v = state_path.at(s);
        let d = drift(spec, v[0], v[1]);
        let m = m_along(spec, v, s)?;
        out_t.push(t);
        out_v.push(v);
        out_s.push([d[0] / m, d[1] / m]);
    }
    let path = PricePath {
        times: out_t,
        values: out_v,
        slopes: out_s,
        h: h_wall,
    };
    check_spread(&path)?;
    Ok(path)
}

/// Wall-time price path by RK4 directly on `dgamma/dt = drift / m`.
pub fn solve_direct(spec: &ModelSpec, gamma0: [f64; 2], horizon: f64, h: f64) -> Result<PricePath> {
    integrate_rk4(
        |_, y| {
            let d = drift(spec, y[0], y[1]);
            let m = spec.m(y[0], y[1]);
            [d[0] / m, d[1] / m]
        },
        0.0,
        gamma0,
        horizon,
        h,
    )
}

/// Largest difference between two paths on a common grid.
pub fn max_difference(a: &PricePath, b: &PricePath) -> Result<f64> {
    if a.times.len() != b.times.len() {
        return Err(Error::Scheme("paths live on different grids".into()));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs()))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks;
    use crate::family::QuoteFunction;

    fn drifting(kappa: f64, m: f64) -> ModelSpec {
        let mut spec = benchmarks::poisson();
        spec.active.a = QuoteFunction::constant(0.25);
        spec.active.b = QuoteFunction::constant(0.25);
        spec.active.e = QuoteFunction::constant(0.25 + kappa / 2.0);
        spec.active.f = QuoteFunction::constant(0.25 - kappa / 2.0);
        spec.m = Some(QuoteFunction::constant(m));
        spec
    }

    #[test]
    fn zero_field_is_constant() {
        let spec = benchmarks::poisson();
        let p = solve_autonomous(&spec, [0.0, 1.0], 2.0, 2.0 / 4096.0).unwrap();
        assert!(p.values.iter().all(|v| *v == [0.0, 1.0]));
    }

    #[test]
    fn constant_rate() {
        let spec = drifting(0.4, 1.0);
        let p = solve_autonomous(&spec, [0.0, 1.0], 1.0, 1.0 / 64.0).unwrap();
        for (t, v) in p.times.iter().zip(&p.values) {
            assert_eq!(v[0], 0.0);
            assert!((v[1] - (1.0 + 0.4 * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn spread_constant_under_stationarity() {
        let mut spec = benchmarks::poisson();
        spec.active.a = QuoteFunction::constant(0.1);
        spec.active.b = QuoteFunction::constant(0.4);
        spec.active.e = QuoteFunction::constant(0.4);
        spec.active.f = QuoteFunction::constant(0.1);
        let p = solve_autonomous(&spec, [0.0, 0.5], 1.0, 1.0 / 512.0).unwrap();
        for v in &p.values {
            assert!((v[1] - v[0] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn parabola_reversed() {
        let (b0, t_total) = (1.0, 1.0);
        let spec = benchmarks::ask_parabola_reversed(b0, t_total);
        let p = solve_autonomous(&spec, [spec.bid0, spec.ask0], t_total / 2.0, t_total / 4096.0).unwrap();
        let err = p
            .times
            .iter()
            .zip(&p.values)
            .map(|(s, v)| (v[1] - (b0 + (t_total / 2.0 - s).powi(2))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err}");
        assert!(p.values.iter().all(|v| v[0] == b0));
    }

    #[test]
    fn signed_parabola_on_full_interval() {
        let (b0, t_total) = (1.0, 1.0);
        let p = integrate_rk4(
            |t, _| [0.0, 2.0 * (t - t_total / 2.0)],
            0.0,
            [b0, b0 + t_total * t_total / 4.0],
            t_total,
            t_total / 4096.0,
        )
        .unwrap();
        for (t, v) in p.times.iter().zip(&p.values) {
            assert!((v[1] - (b0 + (t - t_total / 2.0).powi(2))).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_order() {
        // a' = a - b with b = 0 has the solution a0 * exp(t).
        let field = |_: f64, y: [f64; 2]| [0.0, y[1] - y[0]];
        let err = |h: f64| {
            let p = integrate_rk4(field, 0.0, [0.0, 1.0], 1.0, h).unwrap();
            p.times
                .iter()
                .zip(&p.values)
                .map(|(t, v)| (v[1] - t.exp()).abs())
                .fold(0.0, f64::max)
        };
        let r = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn identity_and_constant_time_change() {
        let spec = drifting(0.4, 1.0);
        let p = solve_autonomous(&spec, [0.0, 1.0], 1.0, 1.0 / 256.0).unwrap();
        let tc = time_change(&spec, &p).unwrap();
        for (t, mu) in tc.wall_times.iter().zip(&tc.mu_values) {
            assert!((t - mu).abs() < 1e-12);
        }
        let spec2 = drifting(0.4, 2.0);
        let tc2 = time_change(&spec2, &p).unwrap();
        assert!((tc2.wall_horizon() - 2.0).abs() < 1e-12);
        assert!((tc2.mu(1.5).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn quadratic_time_change() {
        let mut spec = drifting(0.0, 1.0);
        spec.active.a = QuoteFunction::constant(0.0);
        spec.active.b = QuoteFunction::constant(0.0);
        spec.active.e = QuoteFunction::constant(1.0);
        spec.active.f = QuoteFunction::constant(0.0);
        spec.m = Some(QuoteFunction::LinearSpread { c0: 0.0, c1: 1.0 });
        let p = solve_autonomous(&spec, [0.0, 1.0], 2.0, 2.0 / 4096.0).unwrap();
        let tc = time_change(&spec, &p).unwrap();
        // y(t) = t + t^2 / 2, so y(1) = 1.5.
        assert!((tc.y(1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!((tc.mu(1.5).unwrap() - 1.0).abs() < 1e-8);
        for (t, mu) in tc.wall_times.iter().zip(&tc.mu_values) {
            assert!((tc.y(*mu).unwrap() - t).abs() < 1e-8);
            assert!((mu - (-1.0 + (1.0 + 2.0 * t).sqrt())).abs() < 1e-8);
        }
        assert!(tc.mu_values.windows(2).all(|w| w[0] <= w[1]));
        assert!(matches!(tc.mu(tc.wall_horizon() + 1.0), Err(Error::Range(_, _))));
    }

    #[test]
    fn full_solution_composes_time_change() {
        let spec = drifting(0.4, 1.0);
        let a = solve_full(&spec, [0.0, 1.0], 1.0, 1.0 / 512.0).unwrap();
        let b = solve_autonomous(&spec, [0.0, 1.0], 1.0, 1.0 / 512.0).unwrap();
        assert!(max_difference(&a, &b).unwrap() <= 1e-12);

        let spec2 = drifting(0.4, 2.0);
        let c = solve_full(&spec2, [0.0, 1.0], 1.0, 1.0 / 512.0).unwrap();
        for (t, v) in c.times.iter().zip(&c.values) {
            assert!((v[1] - (1.0 + 0.2 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_solution_matches_direct_integration() {
        let mut spec = drifting(0.0, 1.0);
        spec.active.a = QuoteFunction::constant(0.1);
        spec.active.b = QuoteFunction::constant(0.2);
        spec.active.e = QuoteFunction::LinearSpread { c0: 0.5, c1: -0.2 };
        spec.active.f = QuoteFunction::LinearSpread { c0: 0.2, c1: 0.2 };
        spec.m = Some(QuoteFunction::LinearSpread { c0: 0.5, c1: 0.5 });
        let h = 1.0 / 4096.0;
        let a = solve_full(&spec, [0.0, 1.0], 1.0, h).unwrap();
        let b = solve_direct(&spec, [0.0, 1.0], 1.0, h).unwrap();
        let d = max_difference(&a, &b).unwrap();
        assert!(d <= 1e-8, "difference {d}");
    }

    #[test]
    fn normalized_poisson_keeps_autonomous_path() {
        let mut spec = benchmarks::poisson();
        spec.active.e = QuoteFunction::constant(0.3);
        spec.active.f = QuoteFunction::constant(0.2);
        let a = solve_full(&spec, [0.0, 1.0], 1.0, 1.0 / 1024.0).unwrap();
        let b = solve_autonomous(&spec, [0.0, 1.0], 1.0, 1.0 / 1024.0).unwrap();
        assert!(max_difference(&a, &b).unwrap() <= 1e-12);
    }

    #[test]
    fn hermite_interpolation_is_fourth_order() {
        let spec = drifting(0.4, 1.0);
        let p = solve_autonomous(&spec, [0.0, 1.0], 1.0, 0.1).unwrap();
        assert!((p.at(0.537)[1] - (1.0 + 0.4 * 0.537)).abs() < 1e-14);
    }
}
