//! Project configuration file handling.
//!
//! One TOML document configures every subsystem. Parsing is strict:
//! unknown keys are fatal, because a silently ignored key in a mm/rad
//! codebase usually means a unit or spelling mistake. Every section is
//! optional and defaults to the shipped robot.

use serde::Deserialize;

use crate::chain::{ChainConfiguration, ChainSpec, EfficiencyBands, LinkKind};
use crate::error::{Error, Result};
use crate::gait::{GaitParameters, PlanLimits};
use crate::leg::{ElbowBranch, LegGeometry};
use crate::optimize::OptimizeOptions;
use crate::pipeline::PipelineConfig;
use crate::tendon::{self, TendonJacobian};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    #[serde(default)]
    pub leg: LegSection,
    #[serde(default)]
    pub limits: LimitsSection,
    #[serde(default)]
    pub gait: GaitSection,
    #[serde(default)]
    pub tendon: TendonSection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub efficiency: EfficiencySection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub optimization: OptimizationSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSection {
    pub l1: f64,
    pub l2: f64,
    pub ground_offset: f64,
    pub elbow_branch: ElbowBranch,
}

impl Default for LegSection {
    fn default() -> Self {
        Self {
            l1: 125.0,
            l2: 125.0,
            ground_offset: 200.0,
            elbow_branch: ElbowBranch::Positive,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    pub q_min: f64,
    pub q_max: f64,
    pub max_step: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        let d = PlanLimits::default();
        Self {
            q_min: d.q_min,
            q_max: d.q_max,
            max_step: d.max_step,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitSection {
    pub stride: f64,
    pub swing_height: f64,
    pub samples_per_phase: usize,
}

impl Default for GaitSection {
    fn default() -> Self {
        let d = GaitParameters::default();
        Self {
            stride: d.stride,
            swing_height: d.swing_height,
            samples_per_phase: d.samples_per_phase,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TendonSection {
    /// Run the design optimizer instead of using fixed jacobians.
    #[serde(default)]
    pub optimize: bool,
    pub front: Option<JacobianSection>,
    pub back: Option<JacobianSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianSection {
    pub g: [[f64; 2]; 2],
    pub q0: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub links: usize,
    pub link_length: f64,
    pub pulley_radius: f64,
    pub wire_diameter: f64,
    pub half_spacing: f64,
    pub joint_limit: f64,
    /// Explicit per-link pattern; omitted links alternate parallel/twisted.
    pub axis_pattern: Option<Vec<LinkKind>>,
}

impl Default for ChainSection {
    fn default() -> Self {
        let d = ChainSpec::default();
        Self {
            links: d.links,
            link_length: d.link_length,
            pulley_radius: d.pulley_radius,
            wire_diameter: d.wire_diameter,
            half_spacing: d.half_spacing,
            joint_limit: d.joint_limit,
            axis_pattern: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencySection {
    pub per_pulley: [f64; 2],
    pub pulley_count: u32,
    pub mu: [f64; 2],
}

impl Default for EfficiencySection {
    fn default() -> Self {
        let d = EfficiencyBands::default();
        Self {
            per_pulley: d.per_pulley_range,
            pulley_count: d.pulley_count,
            mu: d.mu_range,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub max_wire_speed: f64,
    pub min_step_time: f64,
    pub control_rate: f64,
    pub walking_scale: f64,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let d = PipelineConfig::default();
        Self {
            max_wire_speed: d.max_wire_speed,
            min_step_time: d.min_step_time,
            control_rate: d.control_rate,
            walking_scale: d.walking_scale,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationSection {
    pub norm_lower: f64,
    pub entry_upper: f64,
    pub starts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for OptimizationSection {
    fn default() -> Self {
        let o = OptimizeOptions::default();
        Self {
            norm_lower: 60.0,
            entry_upper: 40.0,
            starts: o.starts,
            max_iters: o.max_iters,
            tolerance: o.tolerance,
        }
    }
}

impl ProjectConfig {
    /// Strict parse; the error message carries the offending line and key.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn leg_geometry(&self) -> Result<LegGeometry> {
        LegGeometry::new(self.leg.l1, self.leg.l2, self.leg.ground_offset)
    }

    pub fn elbow_branch(&self) -> ElbowBranch {
        self.leg.elbow_branch
    }

    pub fn gait_parameters(&self) -> GaitParameters {
        GaitParameters {
            stride: self.gait.stride,
            swing_height: self.gait.swing_height,
            samples_per_phase: self.gait.samples_per_phase,
            ground_offset: self.leg.ground_offset,
        }
    }

    pub fn plan_limits(&self) -> Result<PlanLimits> {
        let l = &self.limits;
        if !(l.q_min < l.q_max) || !(l.max_step > 0.0) {
            return Err(Error::invalid(
                "limits",
                "need q_min < q_max and a positive step bound",
            ));
        }
        Ok(PlanLimits {
            q_min: l.q_min,
            q_max: l.q_max,
            max_step: l.max_step,
        })
    }

    /// Configured jacobian pair, or the shipped fine-tuned values.
    pub fn tendon_pair(&self) -> Result<(TendonJacobian, TendonJacobian)> {
        let build = |j: &JacobianSection, which: &str| -> Result<TendonJacobian> {
            // TOML admits nan/inf literals; keep them out of the math
            if j.g
                .iter()
                .flatten()
                .chain(j.q0.iter())
                .any(|v| !v.is_finite())
            {
                return Err(Error::Config(format!(
                    "tendon.{which}: entries must be finite"
                )));
            }
            Ok(TendonJacobian::from_rows(j.g, j.q0))
        };
        match (&self.tendon.front, &self.tendon.back) {
            (None, None) => Ok((tendon::default_front(), tendon::default_back())),
            (Some(f), Some(b)) => Ok((build(f, "front")?, build(b, "back")?)),
            _ => Err(Error::Config(
                "tendon.front and tendon.back must be given together".into(),
            )),
        }
    }

    pub fn chain_spec(&self) -> Result<ChainSpec> {
        let c = &self.chain;
        let axis_pattern = match &c.axis_pattern {
            Some(p) => p.clone(),
            None => (0..c.links)
                .map(|i| {
                    if i % 2 == 0 {
                        LinkKind::Parallel
                    } else {
                        LinkKind::Twisted
                    }
                })
                .collect(),
        };
        let spec = ChainSpec {
            links: c.links,
            link_length: c.link_length,
            pulley_radius: c.pulley_radius,
            wire_diameter: c.wire_diameter,
            half_spacing: c.half_spacing,
            joint_limit: c.joint_limit,
            axis_pattern,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn efficiency_bands(&self) -> Result<EfficiencyBands> {
        let e = &self.efficiency;
        for v in e.per_pulley {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(
                    "efficiency",
                    "per-pulley efficiency must lie in (0, 1]",
                ));
            }
        }
        if !(e.mu[0] > 0.0) || !(e.mu[1] >= e.mu[0]) || e.per_pulley[1] < e.per_pulley[0] {
            return Err(Error::invalid(
                "efficiency",
                "bands must be ordered and positive",
            ));
        }
        Ok(EfficiencyBands {
            per_pulley_range: e.per_pulley,
            pulley_count: e.pulley_count,
            mu_range: e.mu,
        })
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let p = PipelineConfig {
            max_wire_speed: self.pipeline.max_wire_speed,
            min_step_time: self.pipeline.min_step_time,
            control_rate: self.pipeline.control_rate,
            walking_scale: self.pipeline.walking_scale,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn optimize_options(&self, seed: u64) -> OptimizeOptions {
        OptimizeOptions {
            starts: self.optimization.starts,
            seed,
            max_iters: self.optimization.max_iters,
            tolerance: self.optimization.tolerance,
        }
    }
}

/// Parse a JSON document holding a list of chain configurations
/// (an array of per-joint half-angle arrays).
pub fn parse_chain_configurations(text: &str) -> Result<Vec<ChainConfiguration>> {
    let raw: Vec<Vec<f64>> =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("configurations: {e}")))?;
    Ok(raw.into_iter().map(ChainConfiguration).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_yields_defaults() {
        let cfg = ProjectConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.leg_geometry().unwrap(), LegGeometry::default());
        assert_eq!(cfg.gait_parameters(), GaitParameters::default());
        let (front, back) = cfg.tendon_pair().unwrap();
        assert_eq!(front, tendon::default_front());
        assert_eq!(back, tendon::default_back());
        assert_eq!(cfg.chain_spec().unwrap(), ChainSpec::default());
        assert_eq!(cfg.pipeline_config().unwrap(), PipelineConfig::default());
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let err = ProjectConfig::from_toml_str("[leg]\nl1 = 125.0\nl3 = 10.0\n").unwrap_err();
        let message = err.to_string();
        assert!(
            message.contains("l3"),
            "diagnostic should name the key: {message}"
        );

        let err = ProjectConfig::from_toml_str("[nonsense]\nx = 1\n").unwrap_err();
        assert!(err.to_string().contains("nonsense"));
    }

    #[test]
    fn malformed_document_reports_location() {
        let err = ProjectConfig::from_toml_str("[leg\nl1 = ").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn explicit_tendon_pair_round_trips() {
        let text = r#"
[tendon.front]
g = [[40.0, 0.0], [20.0, -40.0]]
q0 = [2.2, 1.9]

[tendon.back]
g = [[-40.0, 0.0], [-20.0, 40.0]]
q0 = [2.2, 1.7]
"#;
        let cfg = ProjectConfig::from_toml_str(text).unwrap();
        let (front, back) = cfg.tendon_pair().unwrap();
        assert_eq!(front.g[(1, 0)], 20.0);
        assert_eq!(back.q0.y, 1.7);
    }

    #[test]
    fn half_tendon_pair_rejected() {
        let text = "[tendon.front]\ng = [[1.0, 0.0], [0.0, 1.0]]\nq0 = [0.0, 0.0]\n";
        assert!(ProjectConfig::from_toml_str(text)
            .unwrap()
            .tendon_pair()
            .is_err());
    }

    #[test]
    fn chain_pattern_length_checked() {
        let text = "[chain]\nlinks = 3\nlink_length = 174.0\npulley_radius = 15.0\nwire_diameter = 2.0\nhalf_spacing = 30.0\njoint_limit = 1.0\naxis_pattern = [\"parallel\"]\n";
        let cfg = ProjectConfig::from_toml_str(text).unwrap();
        assert!(cfg.chain_spec().is_err());
    }

    #[test]
    fn configurations_json() {
        let list = parse_chain_configurations("[[0.1, 0.2], [0.0, 0.0]]").unwrap();
        assert_eq!(list.len(), 2);
        assert_eq!(list[0].0, vec![0.1, 0.2]);
        assert!(parse_chain_configurations("{\"not\": \"a list\"}").is_err());
    }
}
