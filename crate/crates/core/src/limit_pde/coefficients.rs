use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::limit_ode::PricePath;
use crate::model::ModelSpec;
use crate::quad::gauss_piecewise;
use crate::state::{EventKind, Side};

/// A function of time.
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A function of time and relative price.
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// A function of relative price.
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients of the volume PDE of one side,
/// `u_t = (right - left) u_x + decay u + source`.
#[derive(Clone)]
pub struct SideCoefficients {
    /// Rate of one-tick translations towards the origin (A or E).
    pub right: TimeFn,
    /// Rate of one-tick translations away from the origin (B or F).
    pub left: TimeFn,
    /// Nonpositive decay coefficient.
    pub decay: FieldFn,
    /// Nonnegative source coefficient.
    pub source: FieldFn,
    /// Interval outside which decay and source vanish.
    pub window: (f64, f64),
    /// Relative prices where decay or source may be nonsmooth.
    pub breaks: Vec<f64>,
    /// Whether no coefficient depends on time.
    pub time_independent: bool,
}

impl fmt::Debug for SideCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SideCoefficients")
            .field("window", &self.window)
            .field("breaks", &self.breaks)
            .field("time_independent", &self.time_independent)
            .finish_non_exhaustive()
    }
}

impl SideCoefficients {
    /// Time-independent coefficients from plain functions.
    pub fn constant<B, C>(right: f64, left: f64, decay: B, source: C, window: (f64, f64)) -> Self
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (lo, hi) = window;
        SideCoefficients {
            right: Arc::new(move |_| right),
            left: Arc::new(move |_| left),
            decay: Arc::new(move |_, x| if x < lo || x > hi { 0.0 } else { decay(x) }),
            source: Arc::new(move |_, x| if x < lo || x > hi { 0.0 } else { source(x) }),
            window,
            breaks: vec![lo, hi],
            time_independent: true,
        }
    }

    /// Advection speed `right - left`.
    pub fn advection(&self, t: f64) -> f64 {
        (self.right)(t) - (self.left)(t)
    }

    /// Bin averages of decay and source over `[j dx, (j + 1) dx)` for
    /// `j` in `lo..hi`.
    pub fn bin_averages(&self, t: f64, dx: f64, lo: i64, hi: i64) -> (Vec<f64>, Vec<f64>) {
        let mut decay = Vec::with_capacity((hi - lo).max(0) as usize);
        let mut source = Vec::with_capacity((hi - lo).max(0) as usize);
        for j in lo..hi {
            let a = j as f64 * dx;
            let b = a + dx;
            if b <= self.window.0 || a >= self.window.1 {
                decay.push(0.0);
                source.push(0.0);
                continue;
            }
            decay.push(gauss_piecewise(|x| (self.decay)(t, x), a, b, &self.breaks, 2) / dx);
            source.push(gauss_piecewise(|x| (self.source)(t, x), a, b, &self.breaks, 2) / dx);
        }
        (decay, source)
    }
}

/// Coefficients of both sides.
#[derive(Clone, Debug)]
pub struct PdeCoefficients {
    pub buy: SideCoefficients,
    pub sell: SideCoefficients,
}

impl PdeCoefficients {
    pub fn side(&self, side: Side) -> &SideCoefficients {
        match side {
            Side::Buy => &self.buy,
            Side::Sell => &self.sell,
        }
    }

    /// Coefficients along a state-time price path.
    pub fn from_model(spec: &ModelSpec, path: &PricePath) -> Self {
        let constant = path.values.iter().all(|v| *v == path.values[0]);
        if constant {
            return Self::at_quotes(spec, path.values[0]);
        }
        let spec = Arc::new(spec.clone());
        let path = Arc::new(path.clone());
        let horizon = path.horizon();
        let quotes = move |t: f64| path.at(t.min(horizon));
        PdeCoefficients {
            buy: side_from_model(&spec, Side::Buy, Arc::new(quotes.clone()), false),
            sell: side_from_model(&spec, Side::Sell, Arc::new(quotes), false),
        }
    }

    /// Coefficients with the quotes frozen at `gamma`.
    pub fn at_quotes(spec: &ModelSpec, gamma: [f64; 2]) -> Self {
        let spec = Arc::new(spec.clone());
        PdeCoefficients {
            buy: side_from_model(&spec, Side::Buy, Arc::new(move |_| gamma), true),
            sell: side_from_model(&spec, Side::Sell, Arc::new(move |_| gamma), true),
        }
    }
}

type QuotesFn = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

fn side_from_model(spec: &Arc<ModelSpec>, side: Side, quotes: QuotesFn, time_independent: bool) -> SideCoefficients {
    let (right_kind, left_kind) = match side {
        Side::Buy => (EventKind::A, EventKind::B),
        Side::Sell => (EventKind::E, EventKind::F),
    };
    let (cancel, place) = ModelSpec::passive_pair(side);
    let prob = |kind: EventKind| -> TimeFn {
        let spec = spec.clone();
        let quotes = quotes.clone();
        Arc::new(move |t| {
            let q = quotes(t);
            spec.conditional(q[0], q[1])[kind.index()]
        })
    };
    let p_cancel = prob(cancel);
    let p_place = prob(place);
    let w_cancel = spec.omega.get(cancel).mean();
    let w_place = spec.omega.get(place).mean();
    let f_cancel = spec.placement.get(cancel).clone();
    let f_place = spec.placement.get(place).clone();
    let (c0, c1) = f_cancel.support();
    let (d0, d1) = f_place.support();
    let mut breaks = f_cancel.breakpoints();
    breaks.extend(f_place.breakpoints());
    SideCoefficients {
        right: prob(right_kind),
        left: prob(left_kind),
        decay: Arc::new(move |t, x| -p_cancel(t) * w_cancel * f_cancel.pdf(x)),
        source: Arc::new(move |t, x| p_place(t) * w_place * f_place.pdf(x)),
        window: (c0.min(d0), c1.max(d1)),
        breaks,
        time_independent,
    }
}

/// Initial density of one side as a function with known support.
#[derive(Clone)]
pub struct InitialProfile {
    pub value: SpaceFn,
    pub support: Option<(f64, f64)>,
    pub breaks: Vec<f64>,
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialProfile")
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl InitialProfile {
    pub fn zero() -> Self {
        InitialProfile {
            value: Arc::new(|_| 0.0),
            support: None,
            breaks: Vec::new(),
        }
    }

    /// `f` restricted to `support`.
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, support: (f64, f64)) -> Self {
        let (lo, hi) = support;
        InitialProfile {
            value: Arc::new(move |x| if x < lo || x > hi { 0.0 } else { f(x) }),
            support: Some(support),
            breaks: vec![lo, hi],
        }
    }

    /// The configured initial density of a side.
    pub fn from_model(spec: &ModelSpec, side: Side) -> Result<Self> {
        let support = spec.initial_support(side);
        if support.is_none() {
            return Ok(Self::zero());
        }
        // Surface configuration errors once instead of inside the closure.
        let (lo, hi) = support.unwrap_or((0.0, 0.0));
        spec.initial_value(side, 0.5 * (lo + hi))?;
        let spec = Arc::new(spec.clone());
        let mut breaks = vec![lo, hi];
        let (cancel, place) = ModelSpec::passive_pair(side);
        breaks.extend(spec.placement.get(cancel).breakpoints());
        breaks.extend(spec.placement.get(place).breakpoints());
        Ok(InitialProfile {
            value: Arc::new(move |x| spec.initial_value(side, x).unwrap_or(0.0)),
            support,
            breaks,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }
}

/// Initial densities of both sides.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub buy: InitialProfile,
    pub sell: InitialProfile,
}

impl InitialData {
    pub fn from_model(spec: &ModelSpec) -> Result<Self> {
        Ok(InitialData {
            buy: InitialProfile::from_model(spec, Side::Buy)?,
            sell: InitialProfile::from_model(spec, Side::Sell)?,
        })
    }

    pub fn side(&self, side: Side) -> &InitialProfile {
        match side {
            Side::Buy => &self.buy,
            Side::Sell => &self.sell,
        }
    }
}
