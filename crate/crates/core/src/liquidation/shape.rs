use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::csvfmt::num;
use crate::error::{Error, Result};

/// Relative tolerance of numerical impact inversion.
pub const INVERSE_TOL: f64 = 1e-12;

/// Standing volume density `f(x)` at distance `x >= 0` from the best quote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeProfile {
    /// `f(x) = delta` on `[0, ∞)`.
    Block { delta: f64 },
    /// `f(x) = k1 exp(-k2 x)` on `[0, ∞)`, with total depth `k1 / k2`.
    Exponential { k1: f64, k2: f64 },
    /// Piecewise-linear interpolation of samples with `x[0] = 0`; zero
    /// beyond the last sample.
    Tabulated { x: Vec<f64>, f: Vec<f64> },
}

impl ShapeProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            ShapeProfile::Block { delta } => {
                if !(*delta > 0.0 && delta.is_finite()) {
                    return Err(Error::Config(format!("block height must be positive, got {delta}")));
                }
            }
            ShapeProfile::Exponential { k1, k2 } => {
                if !(*k1 > 0.0 && *k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
                    return Err(Error::Config(format!(
                        "exponential shape needs positive k1, k2, got {k1}, {k2}"
                    )));
                }
            }
            ShapeProfile::Tabulated { x, f } => {
                if x.len() < 2 || x.len() != f.len() {
                    return Err(Error::Config("tabulated shape needs at least two (x, f) pairs".into()));
                }
                if x[0] != 0.0 || x.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("tabulated shape needs increasing x starting at 0".into()));
                }
                if f.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::Config(
                        "tabulated shape values must be finite and nonnegative".into(),
                    ));
                }
                if f.iter().all(|v| *v == 0.0) {
                    return Err(Error::Config("tabulated shape has no volume".into()));
                }
            }
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            ShapeProfile::Block { delta } => *delta,
            ShapeProfile::Exponential { k1, k2 } => k1 * (-k2 * x).exp(),
            ShapeProfile::Tabulated { x: xs, f } => {
                let last = xs.len() - 1;
                if x > xs[last] {
                    return 0.0;
                }
                let i = xs.partition_point(|v| *v <= x).clamp(1, last);
                let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                f[i - 1] + w * (f[i] - f[i - 1])
            }
        }
    }

    /// Total volume `∫_0^∞ f`.
    pub fn depth(&self) -> f64 {
        match self {
            ShapeProfile::Block { .. } => f64::INFINITY,
            ShapeProfile::Exponential { k1, k2 } => k1 / k2,
            ShapeProfile::Tabulated { x, f } => x
                .windows(2)
                .zip(f.windows(2))
                .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
                .sum(),
        }
    }

    /// `F(d) = ∫_0^d f`.
    pub fn cumulative(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        match self {
            ShapeProfile::Block { delta } => delta * d,
            ShapeProfile::Exponential { k1, k2 } => -(k1 / k2) * (-k2 * d).exp_m1(),
            ShapeProfile::Tabulated { x, f } => {
                let mut acc = 0.0;
                for i in 1..x.len() {
                    if d >= x[i] {
                        acc += 0.5 * (x[i] - x[i - 1]) * (f[i - 1] + f[i]);
                    } else {
                        let fd = self.density(d);
                        acc += 0.5 * (d - x[i - 1]) * (f[i - 1] + fd);
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Displacement `D` with `F(D) = E`.
    pub fn impact_inverse(&self, volume: f64) -> Result<f64> {
        if volume.is_nan() || volume < 0.0 {
            return Err(Error::Data(format!("trade size must be nonnegative, got {volume}")));
        }
        if volume == 0.0 {
            return Ok(0.0);
        }
        let depth = self.depth();
        match self {
            ShapeProfile::Block { delta } => Ok(volume / delta),
            ShapeProfile::Exponential { k1, k2 } => {
                let kappa = k1 / k2;
                if volume >= kappa {
                    return Err(Error::DepthExceeded {
                        requested: volume,
                        available: depth,
                    });
                }
                Ok(-(-volume / kappa).ln_1p() / k2)
            }
            ShapeProfile::Tabulated { x, .. } => {
                if volume > depth * (1.0 + 1e-12) {
                    return Err(Error::DepthExceeded {
                        requested: volume,
                        available: depth,
                    });
                }
                let (mut lo, mut hi) = (0.0, x[x.len() - 1]);
                while hi - lo > INVERSE_TOL * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if self.cumulative(mid) < volume {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// `dD/dE = 1 / f(D)` at trade size `volume`.
    pub fn impact_slope(&self, volume: f64) -> Result<f64> {
        let d = self.impact_inverse(volume)?;
        let f = self.density(d);
        Ok(if f > 0.0 { 1.0 / f } else { f64::INFINITY })
    }

    /// Stationary density of one side of a model with the quotes frozen at
    /// `gamma`, sampled at `points` equally spaced locations on
    /// `[0, support]`.
    pub fn stationary(
        spec: &crate::model::ModelSpec,
        gamma: [f64; 2],
        side: crate::state::Side,
        points: usize,
    ) -> Result<Self> {
        let coeffs = crate::limit_pde::PdeCoefficients::at_quotes(spec, gamma);
        let points = points.max(2);
        let x: Vec<f64> = (0..points)
            .map(|i| spec.support * i as f64 / (points - 1) as f64)
            .collect();
        let f = crate::limit_pde::stationary(coeffs.side(side), &x)?;
        let shape = ShapeProfile::Tabulated { x, f };
        shape.validate()?;
        Ok(shape)
    }

    /// Writes `x,f` rows on the given grid.
    pub fn write_csv<W: Write>(&self, xs: &[f64], mut w: W) -> Result<()> {
        writeln!(w, "x,f")?;
        for x in xs {
            writeln!(w, "{},{}", num(*x), num(self.density(*x)))?;
        }
        Ok(())
    }
}

/// A possibly time-dependent shape: `profiles[i]` applies from `times[i]`
/// until the next listed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFunction {
    pub times: Vec<f64>,
    pub profiles: Vec<ShapeProfile>,
}

impl ShapeFunction {
    pub fn constant(profile: ShapeProfile) -> Self {
        ShapeFunction {
            times: vec![0.0],
            profiles: vec![profile],
        }
    }

    pub fn piecewise(times: Vec<f64>, profiles: Vec<ShapeProfile>) -> Result<Self> {
        if times.is_empty() || times.len() != profiles.len() || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "shape times must be nonempty, increasing and match the profiles".into(),
            ));
        }
        for p in &profiles {
            p.validate()?;
        }
        Ok(ShapeFunction { times, profiles })
    }

    /// Profile in force at time `t`.
    pub fn at(&self, t: f64) -> &ShapeProfile {
        let i = self.times.partition_point(|s| *s <= t).max(1) - 1;
        &self.profiles[i]
    }

    pub fn impact_inverse(&self, t: f64, volume: f64) -> Result<f64> {
        self.at(t).impact_inverse(volume)
    }
}

/// Bid-ask spread as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpreadPath {
    Constant {
        value: f64,
    },
    /// Linear interpolation of `(times, values)`, constant beyond the ends.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl SpreadPath {
    /// Spread `ask - bid` along a price path.
    pub fn from_prices(path: &crate::limit_ode::PricePath) -> Self {
        SpreadPath::Tabulated {
            times: path.times.clone(),
            values: path.values.iter().map(|v| v[1] - v[0]).collect(),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            SpreadPath::Constant { value } => *value,
            SpreadPath::Tabulated { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[last] {
                    return values[last];
                }
                let i = times.partition_point(|s| *s <= t).clamp(1, last);
                let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }
}

/// Fitted decay rate of level-by-level rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    pub kappa: f64,
    /// Per-level estimate minus `kappa`.
    pub residuals: Vec<f64>,
}

/// Decay rate `kappa` from ratios `eta_i / eta_{i+1} = exp(kappa dx)` of
/// rates at neighbouring price levels.
pub fn recover_kappa(ratios: &[f64], dx: f64) -> Result<KappaFit> {
    if ratios.is_empty() {
        return Err(Error::Data("no rate ratios given".into()));
    }
    if dx.is_nan() || dx <= 0.0 {
        return Err(Error::Data(format!("tick size must be positive, got {dx}")));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Data(format!("rate ratio must be positive, got {r}")));
    }
    let levels: Vec<f64> = ratios.iter().map(|r| r.ln() / dx).collect();
    let kappa = levels.iter().sum::<f64>() / levels.len() as f64;
    Ok(KappaFit {
        kappa,
        residuals: levels.iter().map(|k| k - kappa).collect(),
    })
}
