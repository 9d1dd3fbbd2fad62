//! Serial chain of decoupled joints used as a mechanical power cable.
//!
//! Each joint is a rigid intermediate member carrying two equal pulleys.
//! The incoming link hinges on the first pulley's axis, the outgoing link
//! on the second, and a synchronizer splits the joint deflection equally,
//! so a joint set to half-angle theta bends the chain by 2*theta. The wire
//! enters parallel to the incoming link, wraps the first pulley, crosses
//! between the pulleys on the common tangent fixed in the member, wraps
//! the second pulley and leaves parallel to the outgoing link. Because
//! every tangent point is fixed in the body it belongs to, the routed
//! length cannot depend on the configuration — the path-length function
//! below computes every arc and segment from tangent geometry and the
//! invariance is asserted by tests rather than assumed.
//!
//! Pulley centers sit at (-r, +s*e) and (+r, -s*e) around the joint
//! midpoint, where e is the half spacing and s alternates sign joint to
//! joint so the wire snakes top/bottom through the chain. The axial
//! stagger of 2r makes the inter-pulley tangent perpendicular to the
//! chain axis. Twisted links roll the following joint's plane 90 degrees
//! about the link axis; the crossing segment between planes is modelled
//! as a straight guide-to-guide run.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint-plane placement of a link relative to its predecessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    /// Same bending plane as the previous joint.
    Parallel,
    /// Bending plane rolled 90 degrees about the link's long axis.
    Twisted,
}

/// Geometry of the decoupled-joint chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub links: usize,
    /// Joint pitch (mm): distance between consecutive joint midpoints.
    pub link_length: f64,
    pub pulley_radius: f64,
    pub wire_diameter: f64,
    /// Transverse distance from the joint midpoint to each pulley center (mm).
    pub half_spacing: f64,
    /// Maximum per-joint half-angle (rad); the joint bends by twice this.
    pub joint_limit: f64,
    pub axis_pattern: Vec<LinkKind>,
}

impl Default for ChainSpec {
    fn default() -> Self {
        Self {
            links: 7,
            link_length: 174.0,
            pulley_radius: 15.0,
            wire_diameter: 2.0,
            half_spacing: 30.0,
            joint_limit: std::f64::consts::FRAC_PI_3,
            axis_pattern: (0..7)
                .map(|i| {
                    if i % 2 == 0 {
                        LinkKind::Parallel
                    } else {
                        LinkKind::Twisted
                    }
                })
                .collect(),
        }
    }
}

impl ChainSpec {
    /// Pulley-diameter to wire-diameter ratio, the quantity the per-pulley
    /// efficiency figures are keyed on.
    pub fn diameter_ratio(&self) -> f64 {
        2.0 * self.pulley_radius / self.wire_diameter
    }

    /// Pulleys a through-wire touches: two per joint.
    pub fn pulley_count(&self) -> u32 {
        2 * self.links as u32
    }

    /// Check dimensions and verify the wire stays tangent (no pulley
    /// interference, no wrap collapsing to zero) across the joint range.
    pub fn validate(&self) -> Result<()> {
        if self.links == 0 {
            return Err(Error::invalid("chain spec", "need at least one link"));
        }
        if self.axis_pattern.len() != self.links {
            return Err(Error::invalid(
                "chain spec",
                format!(
                    "axis pattern has {} entries for {} links",
                    self.axis_pattern.len(),
                    self.links
                ),
            ));
        }
        let r = self.pulley_radius;
        if !(r > 0.0) || !(self.wire_diameter > 0.0) || !(self.half_spacing > 0.0) {
            return Err(Error::invalid(
                "chain spec",
                "pulley radius, wire diameter and half spacing must be positive",
            ));
        }
        if self.link_length <= 2.0 * r {
            return Err(Error::invalid(
                "chain spec",
                format!(
                    "link length {} must exceed the 2r joint stagger {}",
                    self.link_length,
                    2.0 * r
                ),
            ));
        }
        if !(self.joint_limit > 0.0) || self.joint_limit >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid(
                "chain spec",
                "joint limit must lie in (0, pi/2)",
            ));
        }
        for theta in [-self.joint_limit, 0.0, self.joint_limit] {
            let (w1, w2) = wrap_angles_single(self, theta);
            if !(w1 > 1e-9)
                || !(w2 > 1e-9)
                || w1 >= std::f64::consts::PI
                || w2 >= std::f64::consts::PI
            {
                return Err(Error::invalid(
                    "chain spec",
                    format!("wrap angle leaves (0, pi) at half-angle {theta:.4}"),
                ));
            }
            // entry line must clear the far pulley: the tangent to pulley 1
            // pivots about its center as the incoming link bends
            let e = self.half_spacing;
            let normal = Vector3::new(-theta.sin(), theta.cos(), 0.0);
            let center_gap = Vector3::new(2.0 * r, -2.0 * e, 0.0);
            let clearance = (center_gap.dot(&normal) - r).abs();
            if clearance < r - 1e-9 {
                return Err(Error::invalid(
                    "chain spec",
                    format!(
                        "entry tangent interferes with the second pulley at half-angle {theta:.4}"
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Per-joint half-angles of one chain posture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfiguration(pub Vec<f64>);

impl ChainConfiguration {
    pub fn zero(spec: &ChainSpec) -> Self {
        Self(vec![0.0; spec.links])
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        if self.0.len() != spec.links {
            return Err(Error::invalid(
                "chain configuration",
                format!("{} half-angles for {} joints", self.0.len(), spec.links),
            ));
        }
        for (joint, &angle) in self.0.iter().enumerate() {
            if !angle.is_finite() || angle.abs() > spec.joint_limit {
                return Err(Error::ChainJointLimit {
                    joint,
                    angle,
                    limit: spec.joint_limit,
                });
            }
        }
        Ok(())
    }

    /// Total chain deformation: sum of |2*theta| over the joints.
    pub fn cumulative_bend(&self) -> f64 {
        self.0.iter().map(|t| 2.0 * t.abs()).sum()
    }
}

fn rot_z(theta: f64) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta),
    )
}

fn rot_x(theta: f64) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_axis_angle(&Vector3::x_axis(), theta),
    )
}

fn trans(x: f64, y: f64, z: f64) -> Isometry3<f64> {
    Isometry3::translation(x, y, z)
}

fn normalize_positive(mut a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    while a < 0.0 {
        a += tau;
    }
    while a >= tau {
        a -= tau;
    }
    a
}

/// Angle of `point` around `center` measured in the xy plane of `frame`.
fn angle_in_plane(frame: &Isometry3<f64>, point: Point3<f64>, center: Point3<f64>) -> f64 {
    let inv = frame.inverse();
    let d = inv.transform_point(&point) - inv.transform_point(&center);
    d.y.atan2(d.x)
}

/// Rest-independent wrap angles of a single joint at half-angle theta,
/// evaluated on a standalone joint (used by spec validation).
fn wrap_angles_single(spec: &ChainSpec, theta: f64) -> (f64, f64) {
    let r = spec.pulley_radius;
    let e = spec.half_spacing;
    let hinge1 = trans(-r, e, 0.0);
    let m = hinge1 * rot_z(theta);
    let c1 = Point3::from(hinge1.translation.vector);
    let hinge2 = m * trans(2.0 * r, -2.0 * e, 0.0);
    let c2 = Point3::from(hinge2.translation.vector);
    let l_out = hinge2 * rot_z(theta);
    let t_in = hinge1.transform_point(&Point3::new(0.0, r, 0.0));
    let b1 = m.transform_point(&Point3::new(r, 0.0, 0.0));
    let b2 = m.transform_point(&Point3::new(r, -2.0 * e, 0.0));
    let t_out = l_out.transform_point(&Point3::new(0.0, -r, 0.0));
    let w1 = normalize_positive(angle_in_plane(&m, t_in, c1) - angle_in_plane(&m, b1, c1));
    let w2 = normalize_positive(angle_in_plane(&m, t_out, c2) - angle_in_plane(&m, b2, c2));
    (w1, w2)
}

/// One joint's contribution as traversed by the geometry walk.
#[derive(Debug, Clone, Copy)]
pub struct JointWireSegments {
    /// Wrap angles on the two pulleys (rad).
    pub wraps: (f64, f64),
    /// Straight run between the joint's pulleys (mm).
    pub bridge: f64,
    /// Straight run from the previous joint's exit to this entry (mm);
    /// zero for the first joint, whose entry is the base anchor.
    pub lead_in: f64,
}

struct ChainWalk {
    segments: Vec<JointWireSegments>,
    poses: Vec<Isometry3<f64>>,
    tie_off: f64,
    pulley_radius: f64,
}

/// Walk the chain once, collecting wire segments and link-end poses.
fn walk(spec: &ChainSpec, config: &ChainConfiguration) -> Result<ChainWalk> {
    spec.validate()?;
    config.validate(spec)?;
    let r = spec.pulley_radius;
    let e = spec.half_spacing;
    let len = spec.link_length;

    let mut sigma = 1.0f64;
    let mut frame = Isometry3::identity(); // centerline frame at the joint midpoint
    let mut prev_exit: Option<Point3<f64>> = None;
    let mut segments = Vec::with_capacity(spec.links);
    let mut poses = Vec::with_capacity(spec.links);

    for (k, &theta) in config.0.iter().enumerate() {
        let hinge1 = frame * trans(-r, sigma * e, 0.0);
        let m = hinge1 * rot_z(theta);
        let c1 = Point3::from(hinge1.translation.vector);
        let hinge2 = m * trans(2.0 * r, -2.0 * sigma * e, 0.0);
        let c2 = Point3::from(hinge2.translation.vector);
        let link_out = hinge2 * rot_z(theta);

        let t_in = hinge1.transform_point(&Point3::new(0.0, sigma * r, 0.0));
        let b1 = m.transform_point(&Point3::new(r, 0.0, 0.0));
        let b2 = m.transform_point(&Point3::new(r, -2.0 * sigma * e, 0.0));
        let t_out = link_out.transform_point(&Point3::new(0.0, -sigma * r, 0.0));

        let w1 =
            normalize_positive(sigma * (angle_in_plane(&m, t_in, c1) - angle_in_plane(&m, b1, c1)));
        let w2 = normalize_positive(
            sigma * (angle_in_plane(&m, t_out, c2) - angle_in_plane(&m, b2, c2)),
        );
        let bridge = (b2 - b1).norm();
        let lead_in = prev_exit.map_or(0.0, |p| (t_in - p).norm());
        segments.push(JointWireSegments {
            wraps: (w1, w2),
            bridge,
            lead_in,
        });
        prev_exit = Some(t_out);

        let post = link_out * trans(-r, sigma * e, 0.0);
        let end = post * trans(len, 0.0, 0.0);
        poses.push(end);

        if k + 1 < spec.links {
            frame = end;
            if spec.axis_pattern[k + 1] == LinkKind::Twisted {
                frame *= rot_x(std::f64::consts::FRAC_PI_2);
            }
            sigma = -sigma;
        }
    }

    Ok(ChainWalk {
        segments,
        poses,
        tie_off: len - 2.0 * r,
        pulley_radius: r,
    })
}

/// Total routed wire length through the chain (mm), from the entry tangent
/// of the first joint to a tie-off one link past the last joint.
pub fn wire_path_length(spec: &ChainSpec, config: &ChainConfiguration) -> Result<f64> {
    let w = walk(spec, config)?;
    let mut total = w.tie_off;
    for seg in &w.segments {
        total += w.pulley_radius * (seg.wraps.0 + seg.wraps.1) + seg.bridge + seg.lead_in;
    }
    Ok(total)
}

/// Wrap angles of every joint's pulley pair for a configuration.
pub fn wrap_angles(spec: &ChainSpec, config: &ChainConfiguration) -> Result<Vec<(f64, f64)>> {
    Ok(walk(spec, config)?
        .segments
        .iter()
        .map(|s| s.wraps)
        .collect())
}

/// Link-end poses of the chain. The frame origin sits on the centerline at
/// the first joint's midpoint; a straight chain puts link k's end at
/// (k+1) * link_length along x.
pub fn chain_forward_kinematics(
    spec: &ChainSpec,
    config: &ChainConfiguration,
) -> Result<Vec<Isometry3<f64>>> {
    Ok(walk(spec, config)?.poses)
}

/// Transmission efficiency model of one power run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EfficiencyModel {
    /// Pulley relay: fixed per-pulley efficiency raised to the pulley count,
    /// independent of how the chain is bent.
    DecoupledChain {
        per_pulley_efficiency: f64,
        pulley_count: u32,
    },
    /// Tendon-sheath run: capstan decay exp(-mu * bend) over the cumulative
    /// wrap angle.
    Tsm { mu: f64 },
}

/// Efficiency at a given cumulative bend (rad).
pub fn transmission_efficiency(model: &EfficiencyModel, cumulative_bend: f64) -> f64 {
    match *model {
        EfficiencyModel::DecoupledChain {
            per_pulley_efficiency,
            pulley_count,
        } => per_pulley_efficiency.powi(pulley_count as i32),
        EfficiencyModel::Tsm { mu } => (-mu * cumulative_bend).exp(),
    }
}

/// Min/max efficiency bands to sweep against each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBands {
    pub per_pulley_range: [f64; 2],
    pub pulley_count: u32,
    pub mu_range: [f64; 2],
}

impl Default for EfficiencyBands {
    fn default() -> Self {
        Self {
            per_pulley_range: [0.98, 0.99],
            pulley_count: 14,
            mu_range: [0.04, 0.2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub bend: f64,
    pub chain_min: f64,
    pub chain_max: f64,
    pub tsm_min: f64,
    pub tsm_max: f64,
}

/// Evaluate both bands over the given bends. The chain rows are constant by
/// model; the sheath rows decay, dropping below the chain band past the
/// crossover bend.
pub fn efficiency_comparison(bends: &[f64], bands: &EfficiencyBands) -> Vec<ComparisonRow> {
    let chain_lo = EfficiencyModel::DecoupledChain {
        per_pulley_efficiency: bands.per_pulley_range[0],
        pulley_count: bands.pulley_count,
    };
    let chain_hi = EfficiencyModel::DecoupledChain {
        per_pulley_efficiency: bands.per_pulley_range[1],
        pulley_count: bands.pulley_count,
    };
    let tsm_lo = EfficiencyModel::Tsm {
        mu: bands.mu_range[1],
    };
    let tsm_hi = EfficiencyModel::Tsm {
        mu: bands.mu_range[0],
    };
    bends
        .iter()
        .map(|&bend| ComparisonRow {
            bend,
            chain_min: transmission_efficiency(&chain_lo, bend),
            chain_max: transmission_efficiency(&chain_hi, bend),
            tsm_min: transmission_efficiency(&tsm_lo, bend),
            tsm_max: transmission_efficiency(&tsm_hi, bend),
        })
        .collect()
}

/// Bend beyond which even the best-case sheath falls under the worst-case
/// chain: exp(-mu_min * bend) = chain_min.
pub fn crossover_bend(bands: &EfficiencyBands) -> f64 {
    let chain_min = bands.per_pulley_range[0].powi(bands.pulley_count as i32);
    -chain_min.ln() / bands.mu_range[0]
}
