use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{apply_event_in_place, initial_state, sample_event, sample_waiting, EventRecord};
use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::rng::RngStream;
use crate::scaling::ScalingParams;
use crate::state::BookState;

/// Settings of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub record_events: bool,
    pub max_events: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record_events: false,
            max_events: 100_000_000,
        }
    }
}

/// Book states sampled on an output time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ScalingParams,
    pub times: Vec<f64>,
    pub states: Vec<BookState>,
    pub events: Option<Vec<EventRecord>>,
    /// Number of events with time at most the horizon.
    pub event_count: u64,
}

impl Trajectory {
    /// Writes `t,bid,ask` rows.
    pub fn write_prices<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,bid,ask")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(w, "{},{},{}", num(*t), num(s.bid()), num(s.ask()))?;
        }
        Ok(())
    }

    /// Writes `t,side,bin_index,height` rows for every allocated bin.
    pub fn write_densities<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,side,bin_index,height")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            for (side, d) in [("buy", &s.vb), ("sell", &s.vs)] {
                for (i, h) in d.heights.iter().enumerate() {
                    writeln!(w, "{},{},{},{}", num(*t), side, d.lo + i as i64, num(*h))?;
                }
            }
        }
        Ok(())
    }
}

/// Step-by-step simulator of one path.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    spec: &'a ModelSpec,
    params: ScalingParams,
    state: BookState,
    tau: f64,
    k: u64,
    rng: RngStream,
}

impl<'a> Simulator<'a> {
    pub fn new(spec: &'a ModelSpec, params: ScalingParams, rng: RngStream) -> Result<Self> {
        let state = initial_state(spec, &params)?;
        Ok(Simulator {
            spec,
            params,
            state,
            tau: 0.0,
            k: 0,
            rng,
        })
    }

    pub fn state(&self) -> &BookState {
        &self.state
    }

    /// Time at which the current state came into force.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of events applied so far.
    pub fn events(&self) -> u64 {
        self.k
    }

    pub fn params(&self) -> &ScalingParams {
        &self.params
    }

    /// Draws the waiting time of the current state.
    pub fn draw_waiting(&mut self) -> f64 {
        sample_waiting(
            self.spec,
            &self.params,
            self.state.bid(),
            self.state.ask(),
            &mut self.rng,
        )
    }

    /// Draws and applies the next event, which comes into force at
    /// `tau + wait`.
    pub fn apply_next(&mut self, wait: f64) -> Result<EventRecord> {
        let kind = sample_event(self.spec, &self.params, &self.state, &mut self.rng)?;
        let draw = apply_event_in_place(&mut self.state, kind, self.spec, &self.params, &mut self.rng)?;
        self.k += 1;
        self.tau += wait;
        Ok(EventRecord {
            k: self.k,
            kind,
            tau: self.tau,
            omega: draw.map(|d| d.omega),
            pi: draw.map(|d| d.pi),
        })
    }

    /// Draws a waiting time and applies the next event.
    pub fn step(&mut self) -> Result<EventRecord> {
        let wait = self.draw_waiting();
        self.apply_next(wait)
    }
}

/// Simulates one path with stream 0 of `seed`.
pub fn run(spec: &ModelSpec, params: &ScalingParams, horizon: f64, grid: &[f64], seed: u64) -> Result<Trajectory> {
    run_with(
        spec,
        params,
        horizon,
        grid,
        RngStream::new(seed, 0),
        RunOptions::default(),
    )
}

/// Simulates one path and samples the right-continuous state on `grid`.
pub fn run_with(
    spec: &ModelSpec,
    params: &ScalingParams,
    horizon: f64,
    grid: &[f64],
    rng: RngStream,
    options: RunOptions,
) -> Result<Trajectory> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be nonnegative, got {horizon}")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|t| *t < 0.0 || *t > horizon) {
        return Err(Error::Config(
            "output grid must be increasing and inside [0, horizon]".into(),
        ));
    }
    let mut sim = Simulator::new(spec, *params, rng)?;
    let mut states = Vec::with_capacity(grid.len());
    let mut events = options.record_events.then(Vec::new);
    let mut g = 0;
    loop {
        let wait = sim.draw_waiting();
        let next = sim.tau() + wait;
        while g < grid.len() && grid[g] < next {
            states.push(sim.state().clone());
            g += 1;
        }
        if next > horizon {
            break;
        }
        if sim.events() >= options.max_events {
            return Err(Error::EventBudget {
                budget: options.max_events,
                time: sim.tau(),
            });
        }
        let rec = sim.apply_next(wait)?;
        if let Some(ev) = events.as_mut() {
            ev.push(rec);
        }
    }
    Ok(Trajectory {
        params: *params,
        times: grid.to_vec(),
        states,
        events,
        event_count: sim.events(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks;
    use crate::scaling::make_scaling;

    fn grid(horizon: f64, points: usize) -> Vec<f64> {
        (0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect()
    }

    #[test]
    fn empty_horizon_returns_initial_state() {
        let spec = benchmarks::poisson();
        let p = make_scaling(8, 0.6).unwrap();
        let tr = run(&spec, &p, 0.0, &[0.0], 1).unwrap();
        assert_eq!(tr.states.len(), 1);
        assert_eq!(tr.states[0], initial_state(&spec, &p).unwrap());
    }

    #[test]
    fn frozen_book_never_moves() {
        let spec = benchmarks::frozen();
        let p = make_scaling(64, 0.6).unwrap();
        let tr = run(&spec, &p, 1.0, &grid(1.0, 17), 4).unwrap();
        let s0 = initial_state(&spec, &p).unwrap();
        assert!(tr.event_count > 0);
        assert!(tr.states.iter().all(|s| *s == s0));
    }

    #[test]
    fn event_counts_are_poisson() {
        let spec = benchmarks::poisson();
        let p = make_scaling(8, 0.6).unwrap();
        let reps = 2000;
        let total: u64 = (0..reps)
            .map(|r| {
                run_with(&spec, &p, 1.0, &[0.0], RngStream::new(21, r), RunOptions::default())
                    .unwrap()
                    .event_count
            })
            .sum();
        let mean = total as f64 / reps as f64;
        let sd = (8.0f64 / reps as f64).sqrt();
        assert!((mean - 8.0).abs() < 3.0 * sd, "mean count {mean}");
    }

    #[test]
    fn runs_are_reproducible() {
        let spec = benchmarks::poisson();
        let p = make_scaling(32, 0.6).unwrap();
        let g = grid(1.0, 9);
        let a = run(&spec, &p, 1.0, &g, 77).unwrap();
        let b = run(&spec, &p, 1.0, &g, 77).unwrap();
        assert_eq!(a, b);
        let c = run(&spec, &p, 1.0, &g, 78).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn samples_are_right_continuous() {
        let spec = benchmarks::poisson();
        let p = make_scaling(16, 0.6).unwrap();
        let options = RunOptions {
            record_events: true,
            ..RunOptions::default()
        };
        let g = grid(1.0, 33);
        let tr = run_with(&spec, &p, 1.0, &g, RngStream::new(3, 0), options).unwrap();
        let events = tr.events.as_ref().unwrap();
        assert!(events.windows(2).all(|w| w[0].tau <= w[1].tau));
        assert!(events.iter().all(|e| e.omega.is_some() == e.kind.is_passive()));
        let mut sim = Simulator::new(&spec, p, RngStream::new(3, 0)).unwrap();
        let mut path = vec![(0.0, sim.state().clone())];
        for _ in 0..events.len() {
            let rec = sim.step().unwrap();
            path.push((rec.tau, sim.state().clone()));
        }
        for (t, s) in g.iter().zip(&tr.states) {
            let expected = &path.iter().rev().find(|(tau, _)| tau <= t).unwrap().1;
            assert_eq!(s, expected);
        }
    }

    #[test]
    fn event_budget_enforced() {
        let spec = benchmarks::poisson();
        let p = make_scaling(1000, 0.6).unwrap();
        let options = RunOptions {
            record_events: false,
            max_events: 10,
        };
        let err = run_with(&spec, &p, 1.0, &[0.0], RngStream::new(1, 0), options).unwrap_err();
        assert!(matches!(err, Error::EventBudget { budget: 10, .. }));
    }

    #[test]
    fn csv_export() {
        let spec = benchmarks::poisson();
        let p = make_scaling(8, 0.6).unwrap();
        let tr = run(&spec, &p, 1.0, &grid(1.0, 5), 2).unwrap();
        let mut buf = Vec::new();
        tr.write_prices(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,bid,ask");
        assert_eq!(lines.len(), 6);
        let last: Vec<f64> = lines[5].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[1], tr.states[4].bid());
        let mut buf = Vec::new();
        tr.write_densities(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,side,bin_index,height\n"));
    }
}
