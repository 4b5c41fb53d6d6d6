//! Model configuration: event probabilities, placement laws, order sizes,
//! waiting times and initial densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{InitialDensity, OmegaLaw, Profile, QuoteFunction, WaitingLaw};
use crate::quad::gauss_piecewise;
use crate::state::{EventKind, Side};

/// Tolerance on the two probability normalizations.
pub const PROB_TOL: f64 = 1e-12;

/// Conditional probabilities of the active events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActiveProbs {
    pub a: QuoteFunction,
    pub b: QuoteFunction,
    pub e: QuoteFunction,
    pub f: QuoteFunction,
}

/// Conditional probabilities of the passive events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassiveProbs {
    pub c: QuoteFunction,
    pub d: QuoteFunction,
    pub g: QuoteFunction,
    pub h: QuoteFunction,
}

/// One entry per passive event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerPassive<T> {
    pub c: T,
    pub d: T,
    pub g: T,
    pub h: T,
}

impl<T> PerPassive<T> {
    pub fn get(&self, kind: EventKind) -> &T {
        match kind {
            EventKind::C => &self.c,
            EventKind::D => &self.d,
            EventKind::G => &self.g,
            EventKind::H => &self.h,
            other => panic!("event {other:?} is not passive"),
        }
    }
}

/// Full specification of a scaled order book model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub bid0: f64,
    pub ask0: f64,
    /// Support bound `M` of placement laws and initial densities.
    pub support: f64,
    /// Upper bound on placed order sizes.
    #[serde(default = "default_omega_bound")]
    pub omega_bound: f64,
    pub active: ActiveProbs,
    pub passive: PassiveProbs,
    pub placement: PerPassive<Profile>,
    pub omega: PerPassive<OmegaLaw>,
    pub waiting: WaitingLaw,
    /// Expected active-order inter-arrival in active time; defaults to the
    /// mean of the waiting law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<QuoteFunction>,
    pub vb0: InitialDensity,
    pub vs0: InitialDensity,
}

fn default_omega_bound() -> f64 {
    1.0
}

/// Event probabilities at a quote pair, ordered as [`EventKind::ALL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventProbabilities(pub [f64; 8]);

impl EventProbabilities {
    pub fn get(&self, kind: EventKind) -> f64 {
        self.0[kind.index()]
    }
}

impl ModelSpec {
    /// Raw conditional probabilities `p^I(bid, ask)`, ordered as
    /// [`EventKind::ALL`], without the zero-spread guard.
    pub fn conditional(&self, bid: f64, ask: f64) -> [f64; 8] {
        let a = &self.active;
        let p = &self.passive;
        [
            a.a.eval(bid, ask),
            a.b.eval(bid, ask),
            p.c.eval(bid, ask),
            p.d.eval(bid, ask),
            a.e.eval(bid, ask),
            a.f.eval(bid, ask),
            p.g.eval(bid, ask),
            p.h.eval(bid, ask),
        ]
    }

    /// Checks both normalizations and the codomain at a quote pair.
    pub fn check_probabilities(&self, bid: f64, ask: f64) -> Result<[f64; 8]> {
        let p = self.conditional(bid, ask);
        for (kind, v) in EventKind::ALL.iter().zip(p) {
            if !(v.is_finite() && (-PROB_TOL..=1.0 + PROB_TOL).contains(&v)) {
                return Err(Error::Model(format!(
                    "p{} = {v} outside [0, 1] at bid {bid}, ask {ask}",
                    kind.label()
                )));
            }
        }
        let active = p[0] + p[1] + p[4] + p[5];
        let passive = p[2] + p[3] + p[6] + p[7];
        if (active - 1.0).abs() > PROB_TOL && active.abs() > PROB_TOL {
            return Err(Error::Model(format!(
                "active probabilities sum to {active} at bid {bid}, ask {ask}"
            )));
        }
        if (passive - 1.0).abs() > PROB_TOL {
            return Err(Error::Model(format!(
                "passive probabilities sum to {passive} at bid {bid}, ask {ask}"
            )));
        }
        Ok(p.map(|v| v.clamp(0.0, 1.0)))
    }

    /// Unconditional probabilities of the next event in a model with
    /// active-order probability `dp`.
    ///
    /// A model whose active probabilities are all zero never moves its
    /// prices: every event is passive.
    ///
    /// With a zero spread the in-spread events B and F are disabled and
    /// the active mass is renormalized over A and E. If that leaves no
    /// active mass the next event is passive.
    pub fn event_probabilities(&self, bid: f64, ask: f64, dp: f64, zero_spread: bool) -> Result<EventProbabilities> {
        let mut p = self.check_probabilities(bid, ask)?;
        let mut active_weight = dp;
        if p[0] + p[1] + p[4] + p[5] <= PROB_TOL {
            active_weight = 0.0;
        }
        if zero_spread {
            p[EventKind::B.index()] = 0.0;
            p[EventKind::F.index()] = 0.0;
            let rest = p[EventKind::A.index()] + p[EventKind::E.index()];
            if rest > 0.0 {
                p[EventKind::A.index()] /= rest;
                p[EventKind::E.index()] /= rest;
            } else {
                active_weight = 0.0;
            }
        }
        let mut out = [0.0; 8];
        for kind in EventKind::ALL {
            let w = if kind.is_active() {
                active_weight
            } else {
                1.0 - active_weight
            };
            out[kind.index()] = w * p[kind.index()];
        }
        Ok(EventProbabilities(out))
    }

    /// `m(bid, ask)`.
    pub fn m(&self, bid: f64, ask: f64) -> f64 {
        match &self.m {
            Some(f) => f.eval(bid, ask),
            None => self.waiting.mean(bid, ask),
        }
    }

    pub fn initial(&self, side: Side) -> &InitialDensity {
        match side {
            Side::Buy => &self.vb0,
            Side::Sell => &self.vs0,
        }
    }

    /// Cancelation and placement events acting on a side.
    pub fn passive_pair(side: Side) -> (EventKind, EventKind) {
        match side {
            Side::Buy => (EventKind::C, EventKind::D),
            Side::Sell => (EventKind::G, EventKind::H),
        }
    }

    /// Stationary density `p_D E[w_D] f_D / (p_C E[w_C] f_C)` of one side at
    /// fixed quotes; zero where the source vanishes.
    pub fn stationary_value(&self, side: Side, bid: f64, ask: f64, x: f64) -> Result<f64> {
        let (cancel, place) = Self::passive_pair(side);
        let p = self.conditional(bid, ask);
        let source = p[place.index()] * self.omega.get(place).mean() * self.placement.get(place).pdf(x);
        if source == 0.0 {
            return Ok(0.0);
        }
        let decay = p[cancel.index()] * self.omega.get(cancel).mean() * self.placement.get(cancel).pdf(x);
        if decay <= 0.0 {
            return Err(Error::UndefinedStationary(x));
        }
        Ok(source / decay)
    }

    /// Value of the initial density of a side at relative price `x`.
    pub fn initial_value(&self, side: Side, x: f64) -> Result<f64> {
        match self.initial(side) {
            InitialDensity::Zero => Ok(0.0),
            InitialDensity::Scaled { mass, profile } => Ok(mass * profile.pdf(x)),
            InitialDensity::Stationary => self.stationary_value(side, self.bid0, self.ask0, x),
        }
    }

    /// Support of the initial density of a side (empty for the zero density).
    pub fn initial_support(&self, side: Side) -> Option<(f64, f64)> {
        match self.initial(side) {
            InitialDensity::Zero => None,
            InitialDensity::Scaled { profile, .. } => Some(profile.support()),
            InitialDensity::Stationary => Some(self.placement.get(Self::passive_pair(side).1).support()),
        }
    }

    /// `∫_a^b v0(x) dx` for one side, closed form where available.
    pub fn initial_integral(&self, side: Side, a: f64, b: f64) -> Result<f64> {
        match self.initial(side) {
            InitialDensity::Zero => Ok(0.0),
            InitialDensity::Scaled { mass, profile } => Ok(mass * profile.mass(a, b)),
            InitialDensity::Stationary => {
                let (cancel, place) = Self::passive_pair(side);
                let mut breaks = self.placement.get(cancel).breakpoints();
                breaks.extend(self.placement.get(place).breakpoints());
                let mut err = None;
                let v = gauss_piecewise(
                    |x| match self.stationary_value(side, self.bid0, self.ask0, x) {
                        Ok(v) => v,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    },
                    a,
                    b,
                    &breaks,
                    4,
                );
                match err {
                    Some(e) => Err(e),
                    None => Ok(v),
                }
            }
        }
    }

    /// Validates the configuration; messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        let m = self.support;
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Config("model.support: must be positive".into()));
        }
        if !(self.omega_bound.is_finite() && self.omega_bound > 0.0) {
            return Err(Error::Config("model.omega_bound: must be positive".into()));
        }
        if !(self.bid0.is_finite() && self.ask0.is_finite()) {
            return Err(Error::Config("model.bid0: initial quotes must be finite".into()));
        }
        if self.bid0 > self.ask0 {
            return Err(Error::Config("model.ask0: initial ask below initial bid".into()));
        }
        for (name, f) in [
            ("a", &self.active.a),
            ("b", &self.active.b),
            ("e", &self.active.e),
            ("f", &self.active.f),
        ] {
            f.validate(&format!("model.active.{name}"))?;
        }
        for (name, f) in [
            ("c", &self.passive.c),
            ("d", &self.passive.d),
            ("g", &self.passive.g),
            ("h", &self.passive.h),
        ] {
            f.validate(&format!("model.passive.{name}"))?;
        }
        for (name, kind) in [
            ("c", EventKind::C),
            ("d", EventKind::D),
            ("g", EventKind::G),
            ("h", EventKind::H),
        ] {
            self.placement
                .get(kind)
                .validate(&format!("model.placement.{name}"), m)?;
            let law = self.omega.get(kind);
            let key = format!("model.omega.{name}");
            if matches!(kind, EventKind::C | EventKind::G) {
                law.validate_proportion(&key)?;
            } else {
                law.validate_volume(&key, self.omega_bound)?;
            }
        }
        self.waiting.validate("model.waiting")?;
        if let Some(f) = &self.m {
            f.validate("model.m")?;
        }
        let mm = self.m(self.bid0, self.ask0);
        if !(mm.is_finite() && mm > 0.0) {
            return Err(Error::Config(format!("model.m: must be positive, got {mm}")));
        }
        let wm = self.waiting.mean(self.bid0, self.ask0);
        if !(wm.is_finite() && wm > 0.0) {
            return Err(Error::Config(format!("model.waiting: mean must be positive, got {wm}")));
        }
        self.check_probabilities(self.bid0, self.ask0)
            .map_err(|e| Error::Config(format!("model.active/passive: {e}")))?;
        for (side, key) in [(Side::Buy, "model.vb0"), (Side::Sell, "model.vs0")] {
            if let InitialDensity::Scaled { mass, profile } = self.initial(side) {
                if !(mass.is_finite() && *mass >= 0.0) {
                    return Err(Error::Config(format!("{key}.mass: must be nonnegative")));
                }
                profile.validate(&format!("{key}.profile"), m)?;
            }
            if let InitialDensity::Stationary = self.initial(side) {
                let (lo, hi) = self.initial_support(side).unwrap_or((0.0, 0.0));
                for k in 0..=200 {
                    let x = lo + (hi - lo) * k as f64 / 200.0;
                    self.stationary_value(side, self.bid0, self.ask0, x)
                        .map_err(|e| Error::Config(format!("{key}: {e}")))?;
                }
            }
        }
        Ok(())
    }
}
