//! Ready-made model specifications used by tests, benches and examples.

use crate::family::{InitialDensity, OmegaLaw, Profile, QuoteFunction, WaitingLaw};
use crate::model::{ActiveProbs, ModelSpec, PassiveProbs, PerPassive};

fn constant(v: f64) -> QuoteFunction {
    QuoteFunction::constant(v)
}

/// Poisson order flow normalized to unit total rate: exponential waiting
/// times with mean one, equal rates for all active and all passive events,
/// uniform cancelation locations and bump-shaped placement locations.
pub fn poisson() -> ModelSpec {
    let support = 2.0;
    let bump = Profile::Bump {
        center: 0.5,
        half_width: 1.5,
    };
    ModelSpec {
        bid0: 0.0,
        ask0: 1.0,
        support,
        omega_bound: 1.0,
        active: ActiveProbs {
            a: constant(0.25),
            b: constant(0.25),
            e: constant(0.25),
            f: constant(0.25),
        },
        passive: PassiveProbs {
            c: constant(0.25),
            d: constant(0.25),
            g: constant(0.25),
            h: constant(0.25),
        },
        placement: PerPassive {
            c: Profile::Uniform {
                lo: -support,
                hi: support,
            },
            d: bump.clone(),
            g: Profile::Uniform {
                lo: -support,
                hi: support,
            },
            h: bump,
        },
        omega: PerPassive {
            c: OmegaLaw::Deterministic { value: 0.5 },
            d: OmegaLaw::Deterministic { value: 1.0 },
            g: OmegaLaw::Deterministic { value: 0.5 },
            h: OmegaLaw::Deterministic { value: 1.0 },
        },
        waiting: WaitingLaw::Exponential { mean: constant(1.0) },
        m: None,
        vb0: InitialDensity::Scaled {
            mass: 1.0,
            profile: Profile::Bump {
                center: 0.5,
                half_width: 1.0,
            },
        },
        vs0: InitialDensity::Scaled {
            mass: 1.0,
            profile: Profile::Bump {
                center: 0.5,
                half_width: 1.0,
            },
        },
    }
}

/// The Poisson benchmark started from its stationary densities.
pub fn stationary() -> ModelSpec {
    ModelSpec {
        vb0: InitialDensity::Stationary,
        vs0: InitialDensity::Stationary,
        ..poisson()
    }
}

/// Poisson order flow on a wider support with small placements, started
/// from its stationary densities `(8 / 15) cos^4(pi x / 8)` on `[-4, 4]`.
pub fn smooth_stationary() -> ModelSpec {
    let support = 4.0;
    let uniform = Profile::Uniform {
        lo: -support,
        hi: support,
    };
    let bump = Profile::Bump {
        center: 0.0,
        half_width: support,
    };
    let mut spec = stationary();
    spec.support = support;
    spec.placement = PerPassive {
        c: uniform.clone(),
        d: bump.clone(),
        g: uniform,
        h: bump,
    };
    spec.omega.d = OmegaLaw::Deterministic { value: 0.1 };
    spec.omega.h = OmegaLaw::Deterministic { value: 0.1 };
    spec
}

/// A book that never changes: no active events and zero-size passive events.
pub fn frozen() -> ModelSpec {
    let mut spec = poisson();
    spec.active = ActiveProbs {
        a: constant(0.0),
        b: constant(0.0),
        e: constant(0.0),
        f: constant(0.0),
    };
    spec.omega = PerPassive {
        c: OmegaLaw::Deterministic { value: 0.0 },
        d: OmegaLaw::Deterministic { value: 0.0 },
        g: OmegaLaw::Deterministic { value: 0.0 },
        h: OmegaLaw::Deterministic { value: 0.0 },
    };
    spec
}

/// Ask dynamics `da/dt = -2 sqrt(a - b0)` with a constant bid `b0`.
///
/// Started from `a = b0 + horizon^2 / 4`, its solution over
/// `[0, horizon / 2]` is `a(s) = b0 + (horizon / 2 - s)^2`, which is the
/// parabola `b0 + (t - horizon / 2)^2` on `[horizon / 2, horizon]` traversed
/// backwards in time. Requires `horizon <= 1` so that the probabilities
/// stay in `[0, 1]`.
pub fn ask_parabola_reversed(b0: f64, horizon: f64) -> ModelSpec {
    let mut spec = poisson();
    spec.bid0 = b0;
    spec.ask0 = b0 + horizon * horizon / 4.0;
    spec.active = ActiveProbs {
        a: constant(0.0),
        b: constant(0.0),
        e: QuoteFunction::SqrtSpread {
            offset: 0.5,
            c: -1.0,
            reference: b0,
        },
        f: QuoteFunction::SqrtSpread {
            offset: 0.5,
            c: 1.0,
            reference: b0,
        },
    };
    spec.waiting = WaitingLaw::Deterministic { mean: constant(1.0) };
    spec
}

/// Exponential cancelation and placement laws on `[0, support]` with rates
/// `kappa_c < kappa_d`; the stationary buy density is `k1 exp(-(kappa_d -
/// kappa_c) x)`.
pub fn exponential_book(kappa_c: f64, kappa_d: f64, support: f64) -> ModelSpec {
    let mut spec = poisson();
    spec.support = support;
    spec.placement = PerPassive {
        c: Profile::Exponential {
            kappa: kappa_c,
            lo: 0.0,
            hi: support,
        },
        d: Profile::Exponential {
            kappa: kappa_d,
            lo: 0.0,
            hi: support,
        },
        g: Profile::Exponential {
            kappa: kappa_c,
            lo: 0.0,
            hi: support,
        },
        h: Profile::Exponential {
            kappa: kappa_d,
            lo: 0.0,
            hi: support,
        },
    };
    spec.vb0 = InitialDensity::Stationary;
    spec.vs0 = InitialDensity::Stationary;
    spec
}
