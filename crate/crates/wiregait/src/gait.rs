//! Trot-gait plan construction.
//!
//! The target foot path is a comb: a straight stance line on the ground
//! plane and a raised return arc. Only the stance half is tracked exactly
//! (by inverse kinematics); the airborne half of each leg is whatever the
//! wire coupling dictates, which is the whole point of the mechanism. Front
//! and back legs of one side share a wire pair, so their motions are locked
//! to each other through the coupling map; the left side runs the right
//! side's cycle shifted by half a period.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leg::{
    forward_kinematics, inverse_kinematics, reachable, ElbowBranch, FootPosition, JointAngles,
    LegGeometry,
};
use crate::tendon::{coupling_map, wire_displacement, TendonJacobian};

/// Stride, clearance and sampling of the target comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParameters {
    /// Stance travel along the ground (mm).
    pub stride: f64,
    /// Peak swing clearance of the target arc above the ground (mm).
    pub swing_height: f64,
    /// Samples per phase; a full cycle has twice this many.
    pub samples_per_phase: usize,
    /// Ground plane depth below the shoulder (mm, positive down).
    pub ground_offset: f64,
}

impl Default for GaitParameters {
    fn default() -> Self {
        Self {
            stride: 80.0,
            swing_height: 40.0,
            samples_per_phase: 50,
            ground_offset: 200.0,
        }
    }
}

impl GaitParameters {
    pub fn validate(&self, geom: &LegGeometry) -> Result<()> {
        if !(self.stride > 0.0) || !(self.swing_height > 0.0) {
            return Err(Error::invalid(
                "gait parameters",
                "stride and swing height must be positive",
            ));
        }
        if self.samples_per_phase < 2 {
            return Err(Error::invalid(
                "gait parameters",
                "need at least 2 samples per phase",
            ));
        }
        // the stance extremes are the farthest points of the whole comb and
        // its midpoint is the nearest, so these three pin the annulus check
        for x in [self.stride / 2.0, -self.stride / 2.0, 0.0] {
            let p = FootPosition::new(x, -self.ground_offset);
            if !reachable(geom, p) {
                return Err(Error::UnreachableTrajectory {
                    sample: 0,
                    source: Box::new(Error::UnreachableTarget {
                        x: p.x,
                        y: p.y,
                        distance: p.distance_from_shoulder(),
                        min_reach: geom.min_reach(),
                        max_reach: geom.max_reach(),
                    }),
                });
            }
        }
        Ok(())
    }
}

/// Point of the target swing arc at phase fraction `u` in [0, 1]:
/// linear return in x with a sinusoidal height bump peaking at `u` = 1/2.
pub fn swing_arc_point(p: &GaitParameters, u: f64) -> FootPosition {
    FootPosition::new(
        -p.stride / 2.0 + p.stride * u,
        -p.ground_offset + p.swing_height * (std::f64::consts::PI * u).sin(),
    )
}

/// Target comb for the front and back legs, 2N points each.
///
/// Stance half: N points evenly spaced from +stride/2 to -stride/2 on the
/// ground line. Swing half: N interior points of the return arc (endpoints
/// excluded so every swing sample clears the ground). The back sequence is
/// the front one rotated by N samples, making the phases complementary.
pub fn target_foot_trajectory(
    geom: &LegGeometry,
    p: &GaitParameters,
) -> Result<(Vec<FootPosition>, Vec<FootPosition>)> {
    p.validate(geom)?;
    let n = p.samples_per_phase;
    let mut front = Vec::with_capacity(2 * n);
    for i in 0..n {
        let x = p.stride / 2.0 - p.stride * i as f64 / (n - 1) as f64;
        front.push(FootPosition::new(x, -p.ground_offset));
    }
    for j in 0..n {
        front.push(swing_arc_point(p, (j + 1) as f64 / (n + 1) as f64));
    }
    for (i, pt) in front.iter().enumerate() {
        if !reachable(geom, *pt) {
            return Err(Error::UnreachableTrajectory {
                sample: i,
                source: Box::new(Error::UnreachableTarget {
                    x: pt.x,
                    y: pt.y,
                    distance: pt.distance_from_shoulder(),
                    min_reach: geom.min_reach(),
                    max_reach: geom.max_reach(),
                }),
            });
        }
    }
    let back: Vec<FootPosition> = (0..2 * n).map(|i| front[(i + n) % (2 * n)]).collect();
    Ok((front, back))
}

/// Ordered joint angles of one leg over part or all of a cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSequence(pub Vec<JointAngles>);

impl JointSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_step(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| (w[1].q1 - w[0].q1).abs().max((w[1].q2 - w[0].q2).abs()))
            .fold(0.0, f64::max)
    }
}

/// Joint interval and per-sample step bound enforced on IK-derived sequences.
///
/// The step bound guards against elbow-branch flips between consecutive IK
/// solutions. Coupled (swing) sequences are affine images of a stance
/// sequence, so they cannot branch-flip; they are held to the step bound and
/// to the plan's clearance invariant but not to the interval, whose purpose
/// is to sanity-check IK output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanLimits {
    pub q_min: f64,
    pub q_max: f64,
    pub max_step: f64,
}

impl Default for PlanLimits {
    fn default() -> Self {
        Self {
            q_min: -std::f64::consts::FRAC_PI_2,
            q_max: std::f64::consts::PI,
            max_step: 0.2,
        }
    }
}

/// IK of the stance half of the comb: N points tracking the ground line.
pub fn stance_joint_sequence(
    geom: &LegGeometry,
    p: &GaitParameters,
    branch: ElbowBranch,
) -> Result<JointSequence> {
    let (front, _) = target_foot_trajectory(geom, p)?;
    let mut seq = Vec::with_capacity(p.samples_per_phase);
    for (i, pt) in front[..p.samples_per_phase].iter().enumerate() {
        let q =
            inverse_kinematics(geom, *pt, branch).map_err(|e| Error::UnreachableTrajectory {
                sample: i,
                source: Box::new(e),
            })?;
        seq.push(q);
    }
    Ok(JointSequence(seq))
}

/// Pointwise coupling of a stance sequence: the motion forced on the
/// opposite leg of the pair while `stance` tracks the ground.
pub fn derive_swing_sequence(
    stance: &JointSequence,
    front_t: &TendonJacobian,
    back_t: &TendonJacobian,
) -> Result<JointSequence> {
    stance
        .0
        .iter()
        .map(|&q| coupling_map(front_t, back_t, q))
        .collect::<Result<Vec<_>>>()
        .map(JointSequence)
}

/// Joint and foot trace of one leg over a full cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegTrace {
    pub joints: Vec<JointAngles>,
    pub feet: Vec<FootPosition>,
}

/// Cycle-closure metrics of a plan: joint/wire jumps at the two phase
/// seams (stance-to-swing hand-over and the wrap back to sample zero).
/// Zero only for coupling-consistent designs; reported, not enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub joint_seam: f64,
    pub joint_wrap: f64,
    pub wire_seam: f64,
    pub wire_wrap: f64,
}

/// Full four-leg trot plan plus the drive-wire displacement series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitPlan {
    pub geometry: LegGeometry,
    pub params: GaitParameters,
    pub right_front: LegTrace,
    pub right_back: LegTrace,
    pub left_front: LegTrace,
    pub left_back: LegTrace,
    /// Per-sample wire displacement of the right and left wire pairs (mm).
    pub right_wires: Vec<[f64; 2]>,
    pub left_wires: Vec<[f64; 2]>,
    pub closure: ClosureReport,
}

impl GaitPlan {
    pub fn samples(&self) -> usize {
        self.right_wires.len()
    }

    pub fn samples_per_phase(&self) -> usize {
        self.samples() / 2
    }

    /// True if the right-side front leg is in stance at sample `i`
    /// (phase A). Exactly one leg per side is in stance at any sample.
    pub fn right_front_in_stance(&self, i: usize) -> bool {
        i < self.samples_per_phase()
    }

    /// Wire commands as (right1, right2, left1, left2) rows for the pipeline.
    pub fn wire_rows(&self) -> Vec<[f64; 4]> {
        self.right_wires
            .iter()
            .zip(&self.left_wires)
            .map(|(r, l)| [r[0], r[1], l[0], l[1]])
            .collect()
    }
}

fn max_component_diff(a: JointAngles, b: JointAngles) -> f64 {
    (a.q1 - b.q1).abs().max((a.q2 - b.q2).abs())
}

fn check_interval(seq: &JointSequence, limits: &PlanLimits, what: &'static str) -> Result<()> {
    for (i, q) in seq.0.iter().enumerate() {
        if q.q1 < limits.q_min || q.q1 > limits.q_max || q.q2 < limits.q_min || q.q2 > limits.q_max
        {
            return Err(Error::PlanInvariant {
                invariant: what,
                sample: i,
                detail: format!(
                    "({:.4}, {:.4}) outside [{:.4}, {:.4}]",
                    q.q1, q.q2, limits.q_min, limits.q_max
                ),
            });
        }
    }
    Ok(())
}

fn check_step(seq: &JointSequence, limits: &PlanLimits, what: &'static str) -> Result<()> {
    for (i, w) in seq.0.windows(2).enumerate() {
        let step = max_component_diff(w[1], w[0]);
        if step > limits.max_step {
            return Err(Error::PlanInvariant {
                invariant: what,
                sample: i + 1,
                detail: format!("step {step:.4} rad exceeds {:.4}", limits.max_step),
            });
        }
    }
    Ok(())
}

/// Build the full trot plan.
///
/// Right side, phase A: front leg tracks the stance line by IK while the
/// back leg follows the coupling; phase B swaps roles. The wire series is
/// evaluated on the stance leg of each phase (the coupled leg yields the
/// same values by construction; the residual is re-checked below). The
/// left side is the right side shifted by exactly N samples.
pub fn build_gait_plan(
    geom: &LegGeometry,
    params: &GaitParameters,
    front_t: &TendonJacobian,
    back_t: &TendonJacobian,
    branch: ElbowBranch,
    limits: &PlanLimits,
) -> Result<GaitPlan> {
    let n = params.samples_per_phase;
    let stance = stance_joint_sequence(geom, params, branch)?;
    check_interval(&stance, limits, "stance joint limits")?;
    check_step(&stance, limits, "stance step bound")?;

    let back_swing = derive_swing_sequence(&stance, front_t, back_t)?;
    let front_swing = derive_swing_sequence(&stance, back_t, front_t)?;
    check_step(&back_swing, limits, "swing step bound")?;
    check_step(&front_swing, limits, "swing step bound")?;

    let mut rf_joints = stance.0.clone();
    rf_joints.extend_from_slice(&front_swing.0);
    let mut rb_joints = back_swing.0.clone();
    rb_joints.extend_from_slice(&stance.0);

    let trace = |joints: &[JointAngles]| LegTrace {
        joints: joints.to_vec(),
        feet: joints
            .iter()
            .map(|&q| forward_kinematics(geom, q))
            .collect(),
    };
    let right_front = trace(&rf_joints);
    let right_back = trace(&rb_joints);

    let rotate = |t: &LegTrace| LegTrace {
        joints: (0..2 * n).map(|i| t.joints[(i + n) % (2 * n)]).collect(),
        feet: (0..2 * n).map(|i| t.feet[(i + n) % (2 * n)]).collect(),
    };
    let left_front = rotate(&right_front);
    let left_back = rotate(&right_back);

    let mut right_wires = Vec::with_capacity(2 * n);
    for q in &stance.0 {
        let l = wire_displacement(front_t, *q).0;
        right_wires.push([l.x, l.y]);
    }
    for q in &stance.0 {
        let l = wire_displacement(back_t, *q).0;
        right_wires.push([l.x, l.y]);
    }
    let left_wires: Vec<[f64; 2]> = (0..2 * n).map(|i| right_wires[(i + n) % (2 * n)]).collect();

    // invariant: stance feet on the ground line, swing feet strictly above
    let ground = -params.ground_offset;
    for i in 0..2 * n {
        let (stance_foot, swing_foot) = if i < n {
            (right_front.feet[i], right_back.feet[i])
        } else {
            (right_back.feet[i], right_front.feet[i])
        };
        if (stance_foot.y - ground).abs() > 1e-6 {
            return Err(Error::PlanInvariant {
                invariant: "stance-foot tracking",
                sample: i,
                detail: format!("|y - ground| = {:.3e} mm", (stance_foot.y - ground).abs()),
            });
        }
        if !(swing_foot.y > ground) {
            return Err(Error::PlanInvariant {
                invariant: "swing-foot clearance",
                sample: i,
                detail: format!("y = {:.6} mm not above ground {:.6}", swing_foot.y, ground),
            });
        }
    }

    // invariant: the shared wire sees identical displacement on both legs
    for i in 0..2 * n {
        let lf = wire_displacement(front_t, right_front.joints[i]).0;
        let lb = wire_displacement(back_t, right_back.joints[i]).0;
        let residual = (lf - lb).amax();
        if residual > 1e-9 {
            return Err(Error::PlanInvariant {
                invariant: "coupling consistency",
                sample: i,
                detail: format!("wire residual {residual:.3e} mm"),
            });
        }
    }

    let wire_diff = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    let closure = ClosureReport {
        joint_seam: max_component_diff(rf_joints[n], rf_joints[n - 1]),
        joint_wrap: max_component_diff(rf_joints[0], rf_joints[2 * n - 1]),
        wire_seam: wire_diff(right_wires[n], right_wires[n - 1]),
        wire_wrap: wire_diff(right_wires[0], right_wires[2 * n - 1]),
    };

    Ok(GaitPlan {
        geometry: *geom,
        params: *params,
        right_front,
        right_back,
        left_front,
        left_back,
        right_wires,
        left_wires,
        closure,
    })
}

/// Ideal full-cycle joint sequences (Q^f, Q^b): IK of the whole comb,
/// including the target swing arc. These are the sequences the design
/// optimizer tries to make coupling-consistent; the realized plan never
/// follows the arc.
pub fn ideal_joint_sequences(
    geom: &LegGeometry,
    p: &GaitParameters,
    branch: ElbowBranch,
) -> Result<(Vec<JointAngles>, Vec<JointAngles>)> {
    let (front_pts, _) = target_foot_trajectory(geom, p)?;
    let n = p.samples_per_phase;
    let qf: Vec<JointAngles> = front_pts
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            inverse_kinematics(geom, *pt, branch).map_err(|e| Error::UnreachableTrajectory {
                sample: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let qb: Vec<JointAngles> = (0..2 * n).map(|i| qf[(i + n) % (2 * n)]).collect();
    Ok((qf, qb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tendon::{default_back, default_front};
    use approx::assert_abs_diff_eq;

    fn geom() -> LegGeometry {
        LegGeometry::default()
    }

    #[test]
    fn stance_endpoints_two_samples() {
        let p = GaitParameters {
            samples_per_phase: 2,
            ..Default::default()
        };
        let (front, _) = target_foot_trajectory(&geom(), &p).unwrap();
        assert_abs_diff_eq!(front[0].x, 40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(front[0].y, -200.0, epsilon = 1e-12);
        assert_abs_diff_eq!(front[1].x, -40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(front[1].y, -200.0, epsilon = 1e-12);
    }

    #[test]
    fn back_is_front_rotated_half_cycle() {
        let p = GaitParameters {
            samples_per_phase: 7,
            ..Default::default()
        };
        let (front, back) = target_foot_trajectory(&geom(), &p).unwrap();
        let n = p.samples_per_phase;
        for i in 0..2 * n {
            assert_eq!(front[i], back[(i + n) % (2 * n)]);
        }
    }

    #[test]
    fn swing_arc_peak_is_ground_plus_clearance() {
        let p = GaitParameters::default();
        let peak = swing_arc_point(&p, 0.5);
        assert_abs_diff_eq!(peak.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(peak.y, -160.0, epsilon = 1e-12);
        // with an odd sample count the middle swing sample lands on the peak
        let p5 = GaitParameters {
            samples_per_phase: 5,
            ..p
        };
        let (front, _) = target_foot_trajectory(&geom(), &p5).unwrap();
        let mid_swing = front[5 + 2];
        assert_abs_diff_eq!(mid_swing.y, -160.0, epsilon = 1e-12);
    }

    #[test]
    fn swing_samples_strictly_above_ground() {
        let p = GaitParameters {
            samples_per_phase: 4,
            ..Default::default()
        };
        let (front, _) = target_foot_trajectory(&geom(), &p).unwrap();
        for pt in &front[4..] {
            assert!(pt.y > -200.0);
        }
    }

    #[test]
    fn unreachable_ground_rejected() {
        let p = GaitParameters {
            ground_offset: 260.0,
            ..Default::default()
        };
        let err = target_foot_trajectory(&geom(), &p).unwrap_err();
        assert!(matches!(err, Error::UnreachableTrajectory { .. }));
    }

    #[test]
    fn stance_sequence_tracks_ground_and_mirrors() {
        let p = GaitParameters {
            samples_per_phase: 2,
            ..Default::default()
        };
        let seq = stance_joint_sequence(&geom(), &p, ElbowBranch::Positive).unwrap();
        assert_eq!(seq.len(), 2);
        // same elbow on the symmetric stance line, feet mirrored in x
        assert_abs_diff_eq!(seq.0[0].q2, seq.0[1].q2, epsilon = 1e-12);
        let f0 = forward_kinematics(&geom(), seq.0[0]);
        let f1 = forward_kinematics(&geom(), seq.0[1]);
        assert_abs_diff_eq!(f0.x, -f1.x, epsilon = 1e-9);
        assert_abs_diff_eq!(f0.y, f1.y, epsilon = 1e-9);
        assert_abs_diff_eq!(f0.y, -200.0, epsilon = 1e-9);
        // law-of-cosines oracle at the stance midpoint
        let mid = stance_joint_sequence(
            &geom(),
            &GaitParameters {
                samples_per_phase: 3,
                ..p
            },
            ElbowBranch::Positive,
        )
        .unwrap();
        assert_abs_diff_eq!(mid.0[1].q1, -0.6435011087932844, epsilon = 1e-12);
        assert_abs_diff_eq!(mid.0[1].q2, 1.2870022175865687, epsilon = 1e-12);
    }

    #[test]
    fn swing_sequence_maps_tie_off() {
        let stance = JointSequence(vec![JointAngles::new(2.6, 1.0)]);
        let swing = derive_swing_sequence(&stance, &default_front(), &default_back()).unwrap();
        assert_abs_diff_eq!(swing.0[0].q1, 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(swing.0[0].q2, 2.6, epsilon = 1e-12);
    }

    #[test]
    fn default_plan_passes_invariants() {
        let plan = build_gait_plan(
            &geom(),
            &GaitParameters::default(),
            &default_front(),
            &default_back(),
            ElbowBranch::Positive,
            &PlanLimits::default(),
        )
        .unwrap();
        assert_eq!(plan.samples(), 100);
        // left equals right shifted by N
        let n = plan.samples_per_phase();
        for i in 0..plan.samples() {
            assert_eq!(
                plan.left_front.joints[i],
                plan.right_front.joints[(i + n) % (2 * n)]
            );
            assert_eq!(plan.left_wires[i], plan.right_wires[(i + n) % (2 * n)]);
        }
        // clearance margin of the shipped parameters, frozen from the
        // construction swept numerically over the stance range
        let min_clearance = (0..plan.samples())
            .map(|i| {
                let swing = if plan.right_front_in_stance(i) {
                    plan.right_back.feet[i]
                } else {
                    plan.right_front.feet[i]
                };
                swing.y + 200.0
            })
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(min_clearance, 30.517904473596673, epsilon = 1e-6);
    }

    #[test]
    fn wire_series_definition_at_sample_zero() {
        let plan = build_gait_plan(
            &geom(),
            &GaitParameters::default(),
            &default_front(),
            &default_back(),
            ElbowBranch::Positive,
            &PlanLimits::default(),
        )
        .unwrap();
        let l = wire_displacement(&default_front(), plan.right_front.joints[0]).0;
        assert_abs_diff_eq!(plan.right_wires[0][0], l.x, epsilon = 1e-12);
        assert_abs_diff_eq!(plan.right_wires[0][1], l.y, epsilon = 1e-12);
    }

    #[test]
    fn shipped_parameters_closure_is_reported_not_hidden() {
        // the shipped design is not coupling-consistent on this comb, so the
        // cycle cannot close exactly; the plan must report the truthful gap
        let plan = build_gait_plan(
            &geom(),
            &GaitParameters::default(),
            &default_front(),
            &default_back(),
            ElbowBranch::Positive,
            &PlanLimits::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(plan.closure.joint_seam, 5.533221256594652, epsilon = 1e-6);
        assert_abs_diff_eq!(plan.closure.wire_seam, 193.66274398081288, epsilon = 1e-6);
        assert_abs_diff_eq!(plan.closure.joint_wrap, 5.533221256594654, epsilon = 1e-6);
        assert_abs_diff_eq!(plan.closure.wire_wrap, 193.66274398081288, epsilon = 1e-6);
    }

    #[test]
    fn complementarity_exactly_one_stance_leg_per_side() {
        let plan = build_gait_plan(
            &geom(),
            &GaitParameters::default(),
            &default_front(),
            &default_back(),
            ElbowBranch::Positive,
            &PlanLimits::default(),
        )
        .unwrap();
        let ground = -plan.params.ground_offset;
        for i in 0..plan.samples() {
            let front_on = (plan.right_front.feet[i].y - ground).abs() <= 1e-6;
            let back_on = (plan.right_back.feet[i].y - ground).abs() <= 1e-6;
            assert!(front_on ^ back_on, "sample {i}");
        }
    }

    #[test]
    fn ideal_sequences_are_complementary() {
        let p = GaitParameters {
            samples_per_phase: 10,
            ..Default::default()
        };
        let (qf, qb) = ideal_joint_sequences(&geom(), &p, ElbowBranch::Positive).unwrap();
        assert_eq!(qf.len(), 20);
        for i in 0..20 {
            assert_eq!(qf[i], qb[(i + 10) % 20]);
        }
    }

    #[test]
    fn step_bound_violation_reported() {
        // two-sample stance hops 80 mm in one step, far over 0.2 rad
        let p = GaitParameters {
            samples_per_phase: 2,
            ..Default::default()
        };
        let err = build_gait_plan(
            &geom(),
            &p,
            &default_front(),
            &default_back(),
            ElbowBranch::Positive,
            &PlanLimits::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::PlanInvariant {
                invariant: "stance step bound",
                ..
            }
        ));
    }
}
