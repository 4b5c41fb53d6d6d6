use std::path::Path;

use lobflow_core::liquidation::{Method, ShapeProfile};
use lobflow_core::{Error, ModelSpec, Side};
use serde::{Deserialize, Serialize};

/// Complete input of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub scaling: ScalingSection,
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liquidation: Option<LiquidationSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub alpha: f64,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<u64>,
}

fn default_ladder() -> Vec<u64> {
    vec![8, 32, 128]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub seed: u64,
    /// Model index used by `simulate` and for the tick grid of `limit`.
    #[serde(default = "default_n")]
    pub n: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Allowed relative increase of the median error between rungs.
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default)]
    pub tmda: TmdaSection,
}

fn default_grid_points() -> usize {
    64
}

fn default_n() -> u64 {
    32
}

fn default_reps() -> usize {
    50
}

fn default_slack() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmdaSection {
    pub eps: f64,
    pub reps: usize,
}

impl Default for TmdaSection {
    fn default() -> Self {
        TmdaSection { eps: 1.0, reps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiquidationSection {
    pub times: Vec<f64>,
    pub total: f64,
    pub method: Method,
    pub shape: ShapeSource,
    pub spread: SpreadSource,
}

/// Where the shape function comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSource {
    /// One profile per listed start time.
    Parametric {
        #[serde(default = "default_shape_times")]
        times: Vec<f64>,
        profiles: Vec<ShapeProfile>,
    },
    /// The model's stationary density at its initial quotes.
    Stationary {
        side: SideName,
        #[serde(default = "default_shape_points")]
        points: usize,
    },
}

fn default_shape_times() -> Vec<f64> {
    vec![0.0]
}

fn default_shape_points() -> usize {
    2001
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Buy,
    Sell,
}

impl From<SideName> for Side {
    fn from(s: SideName) -> Side {
        match s {
            SideName::Buy => Side::Buy,
            SideName::Sell => Side::Sell,
        }
    }
}

/// Where the spread path comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpreadSource {
    Constant {
        value: f64,
    },
    /// The wall-time limit price path of the model.
    Limit,
}

fn config_error(msg: String) -> anyhow::Error {
    Error::Config(msg).into()
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.model.validate()?;
        let a = self.scaling.alpha;
        if !(a > 0.5 && a < 1.0) {
            return Err(config_error(format!("scaling.alpha: must lie in (1/2, 1), got {a}")));
        }
        let ladder = &self.scaling.ladder;
        if ladder.is_empty() || ladder.contains(&0) || ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_error(
                "scaling.ladder: must be positive and strictly increasing".into(),
            ));
        }
        let r = &self.run;
        if !(r.horizon >= 0.0 && r.horizon.is_finite()) {
            return Err(config_error(format!(
                "run.horizon: must be finite and nonnegative, got {}",
                r.horizon
            )));
        }
        if r.grid_points < 2 {
            return Err(config_error("run.grid_points: must be at least 2".into()));
        }
        if r.n == 0 {
            return Err(config_error("run.n: must be positive".into()));
        }
        if r.slack.is_nan() || r.slack < 0.0 {
            return Err(config_error("run.slack: must be nonnegative".into()));
        }
        if r.tmda.eps.is_nan() || r.tmda.eps <= 0.0 || r.tmda.reps == 0 {
            return Err(config_error("run.tmda: eps and reps must be positive".into()));
        }
        if let Some(l) = &self.liquidation {
            if l.times.is_empty() || l.times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(config_error(
                    "liquidation.times: must be nonempty and increasing".into(),
                ));
            }
            if !(l.total >= 0.0 && l.total.is_finite()) {
                return Err(config_error("liquidation.total: must be finite and nonnegative".into()));
            }
            if let ShapeSource::Parametric { times, profiles } = &l.shape {
                if times.len() != profiles.len() {
                    return Err(config_error(
                        "liquidation.shape: times and profiles differ in length".into(),
                    ));
                }
                for p in profiles {
                    p.validate()
                        .map_err(|e| config_error(format!("liquidation.shape: {e}")))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(name: &str) -> String {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        std::fs::read_to_string(path).unwrap()
    }

    fn message(err: anyhow::Error) -> String {
        format!("{err:#}")
    }

    #[test]
    fn shipped_configs_round_trip() {
        for name in [
            "poisson.json",
            "stationary.json",
            "frozen.json",
            "parabola.json",
            "liquidation_block.json",
        ] {
            let parsed = RunConfig::parse(&load(name)).unwrap();
            let text = serde_json::to_string_pretty(&parsed).unwrap();
            let again = RunConfig::parse(&text).unwrap();
            assert_eq!(parsed, again, "{name}");
            assert_eq!(text, serde_json::to_string_pretty(&again).unwrap(), "{name}");
        }
    }

    #[test]
    fn invalid_alpha_names_the_key() {
        let mut v: serde_json::Value = serde_json::from_str(&load("poisson.json")).unwrap();
        v["scaling"]["alpha"] = serde_json::json!(1.2);
        let err = RunConfig::parse(&v.to_string()).unwrap_err();
        assert!(message(err).contains("scaling.alpha"));
    }

    #[test]
    fn reversed_ladder_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&load("poisson.json")).unwrap();
        v["scaling"]["ladder"] = serde_json::json!([128, 32, 8]);
        let err = RunConfig::parse(&v.to_string()).unwrap_err();
        assert!(message(err).contains("scaling.ladder"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&load("poisson.json")).unwrap();
        v["run"]["speed"] = serde_json::json!(3);
        let err = RunConfig::parse(&v.to_string()).unwrap_err();
        let text = message(err);
        assert!(text.contains("speed") && text.contains("line"), "{text}");
        assert!(matches!(
            RunConfig::parse("{\"model\": 1}").unwrap_err().downcast_ref::<Error>(),
            Some(Error::Config(_))
        ));
    }

    #[test]
    fn model_invariants_are_checked_on_load() {
        let mut v: serde_json::Value = serde_json::from_str(&load("poisson.json")).unwrap();
        v["model"]["support"] = serde_json::json!(-1.0);
        let err = RunConfig::parse(&v.to_string()).unwrap_err();
        assert!(message(err).contains("model.support"));
    }

    #[test]
    fn shape_lengths_must_match() {
        let mut v: serde_json::Value = serde_json::from_str(&load("liquidation_block.json")).unwrap();
        v["liquidation"]["shape"]["times"] = serde_json::json!([0.0, 0.5]);
        let err = RunConfig::parse(&v.to_string()).unwrap_err();
        assert!(message(err).contains("liquidation.shape"));
    }
}
