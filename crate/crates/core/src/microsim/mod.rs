//! Discrete-event simulation of the n-th scaled order book model.

mod run;

pub use run::{run, run_with, RunOptions, Simulator, Trajectory};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridDensity, Shift};
use crate::model::ModelSpec;
use crate::scaling::ScalingParams;
use crate::state::{BookState, EventKind, Side};

/// One simulated event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Index of the state the event produced.
    pub k: u64,
    pub kind: EventKind,
    /// Time from which the produced state is in force.
    pub tau: f64,
    pub omega: Option<f64>,
    pub pi: Option<f64>,
}

/// Size and location drawn for a passive event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassiveDraw {
    pub omega: f64,
    pub pi: f64,
}

/// Samples the type of the next event at the current state.
pub fn sample_event<R: Rng + ?Sized>(
    spec: &ModelSpec,
    params: &ScalingParams,
    state: &BookState,
    rng: &mut R,
) -> Result<EventKind> {
    let probs = spec.event_probabilities(state.bid(), state.ask(), params.dp, state.spread_ticks() < 1)?;
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = None;
    for kind in EventKind::ALL {
        let p = probs.get(kind);
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = Some(kind);
        if u < cum {
            return Ok(kind);
        }
    }
    last.ok_or_else(|| Error::Model("no event has positive probability".into()))
}

/// Waiting time `phi(bid, ask) * dt` until the next event.
pub fn sample_waiting<R: Rng + ?Sized>(
    spec: &ModelSpec,
    params: &ScalingParams,
    bid: f64,
    ask: f64,
    rng: &mut R,
) -> f64 {
    spec.waiting.sample(bid, ask, rng) * params.dt
}

/// Draws the size and location of a passive event.
pub fn sample_passive<R: Rng + ?Sized>(spec: &ModelSpec, kind: EventKind, rng: &mut R) -> PassiveDraw {
    let omega = spec.omega.get(kind).sample(rng);
    let pi = spec.placement.get(kind).sample(rng);
    PassiveDraw { omega, pi }
}

/// Side a passive event acts on.
pub fn passive_side(kind: EventKind) -> Side {
    match kind {
        EventKind::A | EventKind::B | EventKind::C | EventKind::D => Side::Buy,
        _ => Side::Sell,
    }
}

/// Applies an active event in place.
pub fn apply_active(state: &mut BookState, kind: EventKind) -> Result<()> {
    match kind {
        EventKind::A => {
            state.vb.shift_in_place(Shift::Plus);
            state.bid_tick -= 1;
        }
        EventKind::B => {
            if state.spread_ticks() < 1 {
                return Err(Error::Model("in-spread buy order with zero spread".into()));
            }
            state.vb.shift_in_place(Shift::Minus);
            state.bid_tick += 1;
        }
        EventKind::E => {
            state.vs.shift_in_place(Shift::Plus);
            state.ask_tick += 1;
        }
        EventKind::F => {
            if state.spread_ticks() < 1 {
                return Err(Error::Model("in-spread sell order with zero spread".into()));
            }
            state.vs.shift_in_place(Shift::Minus);
            state.ask_tick -= 1;
        }
        other => return Err(Error::Model(format!("event {other:?} is not active"))),
    }
    Ok(())
}

/// Applies a passive event with a given draw in place.
pub fn apply_passive(state: &mut BookState, kind: EventKind, draw: PassiveDraw, params: &ScalingParams) -> Result<()> {
    let impact = params.impact();
    let side = passive_side(kind);
    let dx = state.dx;
    let j = (draw.pi / dx).floor() as i64;
    let density: &mut GridDensity = state.density_mut(side);
    match kind {
        EventKind::C | EventKind::G => {
            let factor = 1.0 - draw.omega * impact;
            assert!(
                (0.0..=1.0).contains(&factor),
                "cancelation factor {factor} outside [0, 1]"
            );
            if j >= density.lo && j < density.hi() {
                *density.get_mut(j) *= factor;
            }
        }
        EventKind::D | EventKind::H => {
            *density.get_mut(j) += draw.omega * impact;
        }
        other => return Err(Error::Model(format!("event {other:?} is not passive"))),
    }
    Ok(())
}

/// Applies an event, drawing the size and location of passive events.
pub fn apply_event<R: Rng + ?Sized>(
    state: &BookState,
    kind: EventKind,
    spec: &ModelSpec,
    params: &ScalingParams,
    rng: &mut R,
) -> Result<BookState> {
    let mut next = state.clone();
    apply_event_in_place(&mut next, kind, spec, params, rng)?;
    Ok(next)
}

pub(crate) fn apply_event_in_place<R: Rng + ?Sized>(
    state: &mut BookState,
    kind: EventKind,
    spec: &ModelSpec,
    params: &ScalingParams,
    rng: &mut R,
) -> Result<Option<PassiveDraw>> {
    if kind.is_active() {
        apply_active(state, kind)?;
        Ok(None)
    } else {
        let draw = sample_passive(spec, kind, rng);
        apply_passive(state, kind, draw, params)?;
        Ok(Some(draw))
    }
}

/// Nearest tick index of a price, ties towards minus infinity.
pub fn snap_to_tick(price: f64, dx: f64) -> i64 {
    (price / dx - 0.5).ceil() as i64
}

/// Bin averages of an initial density on the tick grid.
pub fn discretize_initial(spec: &ModelSpec, side: Side, dx: f64) -> Result<GridDensity> {
    let Some((lo, hi)) = spec.initial_support(side) else {
        return Ok(GridDensity::zero(dx));
    };
    let j0 = (lo / dx).floor() as i64;
    let j1 = (hi / dx).ceil() as i64;
    let mut heights = Vec::with_capacity((j1 - j0).max(0) as usize);
    for j in j0..j1 {
        let a = j as f64 * dx;
        heights.push((spec.initial_integral(side, a, a + dx)? / dx).max(0.0));
    }
    Ok(GridDensity::new(dx, j0, heights)?.trimmed())
}

/// Initial book: quotes snapped to the nearest tick and densities replaced
/// by their bin averages.
pub fn initial_state(spec: &ModelSpec, params: &ScalingParams) -> Result<BookState> {
    let dx = params.dx;
    let vb = discretize_initial(spec, Side::Buy, dx)?;
    let vs = discretize_initial(spec, Side::Sell, dx)?;
    BookState::new(dx, snap_to_tick(spec.bid0, dx), snap_to_tick(spec.ask0, dx), vb, vs)
}
