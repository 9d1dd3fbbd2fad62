//! Planar two-revolute-joint leg hanging from the body frame.
//!
//! Angle convention: both joints are measured from the straight-down
//! posture, positive rotating the foot forward. The shoulder sits at the
//! frame origin, x points forward and y up, so a standing leg has its
//! foot near (0, -ground_offset). Units are millimetres and radians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Link lengths and ground-plane offset of one 2-link leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegGeometry {
    /// Upper link length (mm).
    pub l1: f64,
    /// Lower link length (mm).
    pub l2: f64,
    /// Vertical distance from shoulder to ground plane (mm, positive down).
    pub ground_offset: f64,
}

impl LegGeometry {
    pub fn new(l1: f64, l2: f64, ground_offset: f64) -> Result<Self> {
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(Error::invalid(
                "leg geometry",
                "link lengths must be positive",
            ));
        }
        if !(ground_offset > 0.0) {
            return Err(Error::invalid(
                "leg geometry",
                "ground offset must be positive",
            ));
        }
        if ground_offset >= l1 + l2 {
            // the nominal foothold straight below the shoulder is already
            // out of reach, so no trajectory on this ground plane exists
            return Err(Error::UnreachableTarget {
                x: 0.0,
                y: -ground_offset,
                distance: ground_offset,
                min_reach: (l1 - l2).abs(),
                max_reach: l1 + l2,
            });
        }
        Ok(Self {
            l1,
            l2,
            ground_offset,
        })
    }

    /// Outer radius of the reachable annulus.
    pub fn max_reach(&self) -> f64 {
        self.l1 + self.l2
    }

    /// Inner radius of the reachable annulus.
    pub fn min_reach(&self) -> f64 {
        (self.l1 - self.l2).abs()
    }
}

impl Default for LegGeometry {
    fn default() -> Self {
        Self {
            l1: 125.0,
            l2: 125.0,
            ground_offset: 200.0,
        }
    }
}

/// Shoulder and elbow angles of one leg (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAngles {
    pub q1: f64,
    pub q2: f64,
}

impl JointAngles {
    pub fn new(q1: f64, q2: f64) -> Self {
        Self { q1, q2 }
    }
}

/// Foot coordinates in the shoulder frame (mm, x forward, y up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootPosition {
    pub x: f64,
    pub y: f64,
}

impl FootPosition {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_from_shoulder(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Which way the elbow folds. `Positive` keeps q2 >= 0 (knee backward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElbowBranch {
    #[default]
    Positive,
    Negative,
}

impl ElbowBranch {
    fn sign(self) -> f64 {
        match self {
            ElbowBranch::Positive => 1.0,
            ElbowBranch::Negative => -1.0,
        }
    }
}

/// Foot position for given joint angles. Total on finite input.
pub fn forward_kinematics(geom: &LegGeometry, q: JointAngles) -> FootPosition {
    let x = geom.l1 * q.q1.sin() + geom.l2 * (q.q1 + q.q2).sin();
    let y = -(geom.l1 * q.q1.cos() + geom.l2 * (q.q1 + q.q2).cos());
    FootPosition { x, y }
}

/// True iff the point lies inside the closed reachable annulus.
pub fn reachable(geom: &LegGeometry, p: FootPosition) -> bool {
    let d = p.distance_from_shoulder();
    geom.min_reach() <= d && d <= geom.max_reach()
}

/// Joint angles reaching `p` on the requested elbow branch.
///
/// The elbow comes from the law of cosines, the shoulder from the
/// two-argument arctangent corrected by the wrist offset angle. Succeeds
/// exactly on the set where [`reachable`] is true.
pub fn inverse_kinematics(
    geom: &LegGeometry,
    p: FootPosition,
    branch: ElbowBranch,
) -> Result<JointAngles> {
    if !reachable(geom, p) {
        return Err(Error::UnreachableTarget {
            x: p.x,
            y: p.y,
            distance: p.distance_from_shoulder(),
            min_reach: geom.min_reach(),
            max_reach: geom.max_reach(),
        });
    }
    let d2 = p.x * p.x + p.y * p.y;
    // clamp so boundary points survive rounding in d2
    let cos_q2 =
        ((d2 - geom.l1 * geom.l1 - geom.l2 * geom.l2) / (2.0 * geom.l1 * geom.l2)).clamp(-1.0, 1.0);
    let q2 = branch.sign() * cos_q2.acos();
    let k1 = geom.l1 + geom.l2 * q2.cos();
    let k2 = geom.l2 * q2.sin();
    let q1 = p.x.atan2(-p.y) - k2.atan2(k1);
    Ok(JointAngles { q1, q2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn geom() -> LegGeometry {
        LegGeometry::default()
    }

    /// Law-of-cosines oracle for the elbow: cos q2 = (d^2 - l1^2 - l2^2) / (2 l1 l2).
    fn elbow_oracle(g: &LegGeometry, p: FootPosition) -> f64 {
        let d2 = p.x * p.x + p.y * p.y;
        ((d2 - g.l1 * g.l1 - g.l2 * g.l2) / (2.0 * g.l1 * g.l2)).acos()
    }

    #[test]
    fn fk_fully_extended_down() {
        let p = forward_kinematics(&geom(), JointAngles::new(0.0, 0.0));
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, -250.0, epsilon = 1e-12);
    }

    #[test]
    fn fk_fully_extended_forward() {
        let p = forward_kinematics(&geom(), JointAngles::new(std::f64::consts::FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(p.x, 250.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fk_bent_elbow() {
        // two-term trig sum evaluated independently; cross-checked against
        // the inverse solution for (0, -200) below
        let p = forward_kinematics(&geom(), JointAngles::new(0.0, 1.2870022));
        assert_abs_diff_eq!(p.x, 119.99999938447007, epsilon = 1e-9);
        assert_abs_diff_eq!(p.y, -160.00000211038824, epsilon = 1e-9);
    }

    #[test]
    fn ik_workspace_boundary() {
        let q = inverse_kinematics(
            &geom(),
            FootPosition::new(0.0, -250.0),
            ElbowBranch::Positive,
        )
        .unwrap();
        assert_abs_diff_eq!(q.q1, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q.q2, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn ik_standing_point_matches_law_of_cosines() {
        let p = FootPosition::new(0.0, -200.0);
        let q = inverse_kinematics(&geom(), p, ElbowBranch::Positive).unwrap();
        // cos q2 = (200^2 - 125^2 - 125^2) / (2 * 125^2) = 0.28
        assert_abs_diff_eq!(q.q2, elbow_oracle(&geom(), p), epsilon = 1e-12);
        assert_abs_diff_eq!(q.q2, 1.2870022175865687, epsilon = 1e-12);
        assert_abs_diff_eq!(q.q1, -0.6435011087932844, epsilon = 1e-12);
        let back = forward_kinematics(&geom(), q);
        assert_abs_diff_eq!(back.x, p.x, epsilon = 1e-9);
        assert_abs_diff_eq!(back.y, p.y, epsilon = 1e-9);
    }

    #[test]
    fn ik_unreachable_errors() {
        let err = inverse_kinematics(
            &geom(),
            FootPosition::new(300.0, 0.0),
            ElbowBranch::Positive,
        )
        .unwrap_err();
        match err {
            Error::UnreachableTarget {
                distance,
                max_reach,
                ..
            } => {
                assert_abs_diff_eq!(distance, 300.0, epsilon = 1e-12);
                assert_abs_diff_eq!(max_reach, 250.0, epsilon = 1e-12);
            }
            other => panic!("expected UnreachableTarget, got {other:?}"),
        }
    }

    #[test]
    fn reachable_annulus_edges() {
        let g = geom();
        assert!(reachable(&g, FootPosition::new(0.0, -250.0)));
        assert!(!reachable(&g, FootPosition::new(0.0, -251.0)));
        let asym = LegGeometry::new(100.0, 150.0, 200.0).unwrap();
        // inner annulus radius |100 - 150| = 50 > 40
        assert!(!reachable(&asym, FootPosition::new(0.0, -40.0)));
        assert!(reachable(&asym, FootPosition::new(0.0, -50.0)));
    }

    #[test]
    fn both_branches_reach_interior_point() {
        let g = geom();
        let p = FootPosition::new(30.0, -180.0);
        for branch in [ElbowBranch::Positive, ElbowBranch::Negative] {
            let q = inverse_kinematics(&g, p, branch).unwrap();
            match branch {
                ElbowBranch::Positive => assert!(q.q2 >= 0.0),
                ElbowBranch::Negative => assert!(q.q2 <= 0.0),
            }
            let back = forward_kinematics(&g, q);
            assert_abs_diff_eq!(back.x, p.x, epsilon = 1e-9);
            assert_abs_diff_eq!(back.y, p.y, epsilon = 1e-9);
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(LegGeometry::new(0.0, 125.0, 200.0).is_err());
        assert!(LegGeometry::new(125.0, 125.0, 250.0).is_err());
        assert!(LegGeometry::new(125.0, 125.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn fk_ik_round_trip(q1 in -1.5..3.1, q2 in 0.05..3.0) {
            let g = geom();
            let q = JointAngles::new(q1, q2);
            // the shoulder solution comes out of atan2, so the identity
            // holds on the branch where q1 + wrist offset does not wrap
            let offset = (g.l2 * q2.sin()).atan2(g.l1 + g.l2 * q2.cos());
            prop_assume!((q1 + offset).abs() < std::f64::consts::PI - 1e-6);
            let p = forward_kinematics(&g, q);
            prop_assume!(p.distance_from_shoulder() >= g.min_reach() + 1e-6);
            let q_back = inverse_kinematics(&g, p, ElbowBranch::Positive).unwrap();
            prop_assert!((q_back.q1 - q.q1).abs() < 1e-9);
            prop_assert!((q_back.q2 - q.q2).abs() < 1e-9);
        }

        #[test]
        fn ik_succeeds_exactly_on_reachable(x in -300.0..300.0, y in -300.0..300.0) {
            let g = geom();
            let p = FootPosition::new(x, y);
            let ok = inverse_kinematics(&g, p, ElbowBranch::Positive).is_ok();
            prop_assert_eq!(ok, reachable(&g, p));
        }

        #[test]
        fn fk_stays_within_reach(q1 in -6.3..6.3, q2 in -6.3..6.3) {
            let g = geom();
            let p = forward_kinematics(&g, JointAngles::new(q1, q2));
            prop_assert!(p.distance_from_shoulder() <= g.max_reach() + 1e-9);
        }
    }
}
