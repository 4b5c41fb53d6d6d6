//! Parametric function families used to configure a model.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar function of the best bid and ask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuoteFunction {
    /// `value`.
    Constant { value: f64 },
    /// `c0 + c1 * (ask - bid)`.
    LinearSpread { c0: f64, c1: f64 },
    /// `offset + c * sqrt(max(ask - reference, 0))`.
    SqrtSpread {
        #[serde(default)]
        offset: f64,
        c: f64,
        reference: f64,
    },
}

impl QuoteFunction {
    pub fn constant(value: f64) -> Self {
        QuoteFunction::Constant { value }
    }

    pub fn eval(&self, bid: f64, ask: f64) -> f64 {
        match *self {
            QuoteFunction::Constant { value } => value,
            QuoteFunction::LinearSpread { c0, c1 } => c0 + c1 * (ask - bid),
            QuoteFunction::SqrtSpread { offset, c, reference } => offset + c * (ask - reference).max(0.0).sqrt(),
        }
    }

    /// Partial derivatives `(d/dbid, d/dask)` where they exist.
    pub fn gradient(&self, bid: f64, ask: f64) -> (f64, f64) {
        let _ = bid;
        match *self {
            QuoteFunction::Constant { .. } => (0.0, 0.0),
            QuoteFunction::LinearSpread { c1, .. } => (-c1, c1),
            QuoteFunction::SqrtSpread { c, reference, .. } => {
                let r = ask - reference;
                if r > 0.0 {
                    (0.0, 0.5 * c / r.sqrt())
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    fn check_finite(&self, key: &str) -> Result<()> {
        let params: Vec<f64> = match *self {
            QuoteFunction::Constant { value } => vec![value],
            QuoteFunction::LinearSpread { c0, c1 } => vec![c0, c1],
            QuoteFunction::SqrtSpread { offset, c, reference } => vec![offset, c, reference],
        };
        if params.iter().all(|p| p.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config(format!("{key}: parameters must be finite")))
        }
    }

    pub(crate) fn validate(&self, key: &str) -> Result<()> {
        self.check_finite(key)
    }
}

/// A probability density on a compact interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// Constant density `1 / (hi - lo)` on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Density proportional to `exp(-kappa * x)` on `[lo, hi]`.
    Exponential { kappa: f64, lo: f64, hi: f64 },
    /// `4 / (3 w) * cos^4(pi (x - center) / (2 w))` on `[center - w, center + w]`.
    Bump { center: f64, half_width: f64 },
}

impl Profile {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Profile::Uniform { lo, hi } | Profile::Exponential { lo, hi, .. } => (lo, hi),
            Profile::Bump { center, half_width } => (center - half_width, center + half_width),
        }
    }

    pub fn validate(&self, key: &str, bound: f64) -> Result<()> {
        let (lo, hi) = self.support();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("{key}: empty or invalid support [{lo}, {hi}]")));
        }
        if lo < -bound - 1e-12 || hi > bound + 1e-12 {
            return Err(Error::Config(format!(
                "{key}: support [{lo}, {hi}] leaves [-{bound}, {bound}]"
            )));
        }
        if let Profile::Exponential { kappa, .. } = self {
            if !kappa.is_finite() {
                return Err(Error::Config(format!("{key}: kappa must be finite")));
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match *self {
            Profile::Uniform { lo, hi } => 1.0 / (hi - lo),
            Profile::Exponential { kappa, lo, hi } => {
                if kappa == 0.0 {
                    1.0 / (hi - lo)
                } else {
                    let len = hi - lo;
                    kappa * (-kappa * (x - lo)).exp() / -(-kappa * len).exp_m1()
                }
            }
            Profile::Bump { center, half_width } => {
                let c = (PI * (x - center) / (2.0 * half_width)).cos();
                4.0 / (3.0 * half_width) * c.powi(4)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match *self {
            Profile::Uniform { lo, hi } => (x - lo) / (hi - lo),
            Profile::Exponential { kappa, lo, hi } => {
                if kappa == 0.0 {
                    (x - lo) / (hi - lo)
                } else {
                    (-kappa * (x - lo)).exp_m1() / (-kappa * (hi - lo)).exp_m1()
                }
            }
            Profile::Bump { center, half_width } => {
                let th = PI * (x - center) / (2.0 * half_width);
                let prim = |t: f64| 3.0 * t / 8.0 + (2.0 * t).sin() / 4.0 + (4.0 * t).sin() / 32.0;
                (prim(th) - prim(-PI / 2.0)) / (3.0 * PI / 8.0)
            }
        }
    }

    /// Probability of `[a, b)`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Profile::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Profile::Exponential { kappa, lo, hi } => {
                let u: f64 = rng.random();
                if kappa == 0.0 {
                    lo + (hi - lo) * u
                } else {
                    let z = -(u * (-kappa * (hi - lo)).exp_m1()).ln_1p() / kappa;
                    (lo + z).clamp(lo, hi)
                }
            }
            Profile::Bump { center, half_width } => loop {
                let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
                let c = (PI * v / 2.0).cos();
                if rng.random::<f64>() < c.powi(4) {
                    break center + half_width * v;
                }
            },
        }
    }

    /// Points where the density fails to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        vec![lo, hi]
    }
}

/// Distribution of the relative order size or cancelation proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaLaw {
    Deterministic { value: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl OmegaLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            OmegaLaw::Deterministic { value } => value,
            OmegaLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            OmegaLaw::Deterministic { value } => value * value,
            OmegaLaw::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
        }
    }

    fn range(&self) -> (f64, f64) {
        match *self {
            OmegaLaw::Deterministic { value } => (value, value),
            OmegaLaw::Uniform { lo, hi } => (lo, hi),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            OmegaLaw::Deterministic { value } => value,
            OmegaLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    /// Cancelation proportions must lie in `[0, 1)`.
    pub(crate) fn validate_proportion(&self, key: &str) -> Result<()> {
        let (lo, hi) = self.range();
        let ok = lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi && hi <= 1.0;
        let strict = match self {
            OmegaLaw::Deterministic { value } => *value < 1.0,
            OmegaLaw::Uniform { .. } => true,
        };
        if ok && strict {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{key}: cancelation proportion must lie in [0, 1)"
            )))
        }
    }

    pub(crate) fn validate_volume(&self, key: &str, bound: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi && hi <= bound {
            Ok(())
        } else {
            Err(Error::Config(format!("{key}: order size must lie in [0, {bound}]")))
        }
    }
}

/// Law of the waiting time between two events, in units of the time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaitingLaw {
    /// `phi = mean(bid, ask)`.
    Deterministic { mean: QuoteFunction },
    /// `phi ~ Exp` with the given mean.
    Exponential { mean: QuoteFunction },
    /// `phi = shift + width * U` with `U` uniform on `[0, 1)`.
    ShiftedUniform { shift: f64, width: f64 },
}

impl WaitingLaw {
    pub fn mean(&self, bid: f64, ask: f64) -> f64 {
        match self {
            WaitingLaw::Deterministic { mean } | WaitingLaw::Exponential { mean } => mean.eval(bid, ask),
            WaitingLaw::ShiftedUniform { shift, width } => shift + 0.5 * width,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, bid: f64, ask: f64, rng: &mut R) -> f64 {
        match self {
            WaitingLaw::Deterministic { mean } => mean.eval(bid, ask),
            WaitingLaw::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean.eval(bid, ask) * e
            }
            WaitingLaw::ShiftedUniform { shift, width } => shift + width * rng.random::<f64>(),
        }
    }

    pub(crate) fn validate(&self, key: &str) -> Result<()> {
        match self {
            WaitingLaw::Deterministic { mean } | WaitingLaw::Exponential { mean } => mean.validate(key),
            WaitingLaw::ShiftedUniform { shift, width } => {
                if shift.is_finite() && width.is_finite() && *shift > 0.0 && *width >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("{key}: need shift > 0 and width >= 0")))
                }
            }
        }
    }
}

/// Initial relative volume density of one side of the book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDensity {
    Zero,
    /// `mass * profile(x)`.
    Scaled {
        mass: f64,
        profile: Profile,
    },
    /// The stationary density of the passive dynamics at the initial quotes.
    Stationary,
}
