//! Run configuration (`cfg.json`).
//!
//! Every section has defaults; only `epsilon` is required. Unknown keys are
//! rejected and every constraint violation names the offending key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elasticity::ElasticitySpec;
use crate::error::{DddError, Result};
use crate::evolution::{Simulation, StepPolicy};
use crate::kernels::{KernelEvaluator, MollifierProfile, GAUSSIAN_NORMALIZATION};
use crate::mobility::{MobilityKind, MobilityModel, DEFAULT_SCREW_TOLERANCE};
use crate::quadrature::{LineQuadratureRule, DEFAULT_SPHERE_ORDER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub elasticity: ElasticitySpec,
    #[serde(default)]
    pub mobility: MobilityConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub step: StepPolicy,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed for sampling-based checks.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicDragConfig {
    pub m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BccDragConfig {
    #[serde(rename = "B_eg")]
    pub b_eg: f64,
    #[serde(rename = "B_ec")]
    pub b_ec: f64,
    #[serde(rename = "B_s")]
    pub b_s: f64,
}

/// `{"alpha": 1, "isotropic": {"m": 1}}` or
/// `{"alpha": 1, "bcc": {"B_eg": .., "B_ec": .., "B_s": ..}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityConfig {
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropic: Option<IsotropicDragConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bcc: Option<BccDragConfig>,
    #[serde(default = "screw_tolerance")]
    pub screw_tolerance: f64,
}

fn one() -> f64 {
    1.0
}

fn screw_tolerance() -> f64 {
    DEFAULT_SCREW_TOLERANCE
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig {
            alpha: 1.0,
            isotropic: Some(IsotropicDragConfig { m: 1.0 }),
            bcc: None,
            screw_tolerance: DEFAULT_SCREW_TOLERANCE,
        }
    }
}

impl MobilityConfig {
    pub fn build(&self) -> Result<MobilityModel> {
        let kind = match (self.isotropic, self.bcc) {
            (Some(i), None) => MobilityKind::IsotropicDrag { m: i.m },
            (None, Some(b)) => MobilityKind::BccDrag {
                b_eg: b.b_eg,
                b_ec: b.b_ec,
                b_s: b.b_s,
            },
            (None, None) => MobilityKind::IsotropicDrag { m: 1.0 },
            (Some(_), Some(_)) => return Err(config_error("mobility", "give either `isotropic` or `bcc`, not both")),
        };
        let model = MobilityModel {
            alpha: self.alpha,
            kind,
            screw_tolerance: self.screw_tolerance,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes in `cos θ` of the spherical rule.
    pub sphere: usize,
    /// Gauss–Legendre nodes per segment.
    pub line: usize,
    /// `N_φ`; only changed to test the oracle check.
    pub normalization: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            sphere: DEFAULT_SPHERE_ORDER,
            line: 4,
            normalization: GAUSSIAN_NORMALIZATION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write a network snapshot every this many steps (0: initial and final only).
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { snapshot_every: 10 }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> DddError {
    DddError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Re-labels a parameter error with the config path of its section.
fn in_section(section: &str, e: DddError) -> DddError {
    match e {
        DddError::InvalidParameter { name, reason } => config_error(&format!("{section}.{name}"), reason),
        other => other,
    }
}

impl SimulationConfig {
    pub fn minimal(epsilon: f64) -> Self {
        SimulationConfig {
            epsilon,
            elasticity: ElasticitySpec::default(),
            mobility: MobilityConfig::default(),
            quadrature: QuadratureConfig::default(),
            step: StepPolicy::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(config_error("epsilon", format!("must be positive and finite, got {}", self.epsilon)));
        }
        self.elasticity.build().map_err(|e| in_section("elasticity", e))?;
        self.mobility.build().map_err(|e| in_section("mobility", e))?;
        if self.quadrature.sphere < 2 {
            return Err(config_error("quadrature.sphere", "must be at least 2"));
        }
        if self.quadrature.line == 0 {
            return Err(config_error("quadrature.line", "must be at least 1"));
        }
        if !(self.quadrature.normalization > 0.0) {
            return Err(config_error("quadrature.normalization", "must be positive"));
        }
        self.step.validate().map_err(|e| in_section("step", e))?;
        Ok(())
    }

    pub fn evaluator(&self) -> Result<KernelEvaluator> {
        let profile = MollifierProfile::with_normalization(self.epsilon, self.quadrature.normalization)?;
        KernelEvaluator::new(self.elasticity.build()?, profile, self.quadrature.sphere)
    }

    pub fn line_rule(&self) -> Result<LineQuadratureRule> {
        LineQuadratureRule::new(self.quadrature.line)
    }

    pub fn simulation(&self) -> Result<Simulation> {
        Simulation::new(self.evaluator()?, self.mobility.build()?, self.line_rule()?, self.step)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimulationConfig = serde_json::from_str(text).map_err(|e| {
            let key = if e.is_data() { "config" } else { "json" };
            config_error(key, format!("{e}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| DddError::io(path, e))?;
    SimulationConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = SimulationConfig::from_json(r#"{"epsilon": 0.1}"#).unwrap();
        assert_eq!(cfg, SimulationConfig::minimal(0.1));
        assert!(cfg.to_json().contains("\"snapshot_every\""));
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match SimulationConfig::from_json(text).unwrap_err() {
            DddError::Config { key, message } => (key, message),
            e => panic!("{e}"),
        };
        assert_eq!(key(r#"{"epsilon": -1}"#).0, "epsilon");
        assert_eq!(key(r#"{"epsilon": 1, "step": {"c1": 0}}"#).0, "step.c1");
        assert_eq!(key(r#"{"epsilon": 1, "mobility": {"alpha": -2}}"#).0, "mobility.alpha");
        assert_eq!(key(r#"{"epsilon": 1, "step": {"h_min": 2}}"#).0, "step.h_max");
        let (k, m) = key(r#"{"epsilon": 1, "stepp": {}}"#);
        assert_eq!(k, "config");
        assert!(m.contains("stepp") && m.contains("line 1"), "{m}");
        let (_, m) = key("{\"epsilon\": 1,\n \"mobility\": {\"bcc\": {\"B_eg\": 1}}}");
        assert!(m.contains("B_ec") && m.contains("line 2"), "{m}");
    }

    #[test]
    fn round_trip_is_exact() {
        let text = r#"{"epsilon": 0.1, "mobility": {"alpha": 0.3, "bcc": {"B_eg": 1.0, "B_ec": 0.1, "B_s": 0.7}},
            "step": {"c1": 0.05, "t_end": 12.5}, "seed": 9}"#;
        let a = SimulationConfig::from_json(text).unwrap();
        let b = SimulationConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        assert!(matches!(a.mobility.build().unwrap().kind, MobilityKind::BccDrag { .. }));
    }

    #[test]
    fn both_mobility_kinds_are_rejected() {
        let e = SimulationConfig::from_json(r#"{"epsilon": 1, "mobility": {"isotropic": {"m": 1}, "bcc": {"B_eg": 1, "B_ec": 1, "B_s": 1}}}"#);
        assert!(matches!(e, Err(DddError::Config { key, .. }) if key == "mobility"));
    }
}
