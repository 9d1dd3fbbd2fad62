//! Linear wire-displacement model of a tendon-driven leg pair.
//!
//! A leg's drive wires displace as l = G (q - q0) where G is the tendon
//! jacobian (mm of wire per rad of joint, a convention — the units are not
//! fixed by the mechanism) and q0 the joint angles at which the wires were
//! tied off. Routing one wire pair through the front and the back leg of a
//! side forces both legs to share l, which induces the coupling map
//! implemented here.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::leg::JointAngles;

/// Determinant magnitude below which a jacobian is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-6;

/// 2x2 coupling matrix plus tie-off joint angles for one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TendonJacobian {
    pub g: Matrix2<f64>,
    pub q0: Vector2<f64>,
}

impl TendonJacobian {
    pub fn new(g: Matrix2<f64>, q0: Vector2<f64>) -> Self {
        Self { g, q0 }
    }

    pub fn from_rows(rows: [[f64; 2]; 2], q0: [f64; 2]) -> Self {
        Self {
            g: Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]),
            q0: Vector2::new(q0[0], q0[1]),
        }
    }

    pub fn det(&self) -> f64 {
        self.g.determinant()
    }

    /// Inverse of the coupling matrix, or a singular-jacobian error.
    pub fn checked_inverse(&self) -> Result<Matrix2<f64>> {
        let det = self.det();
        if det.abs() < SINGULARITY_THRESHOLD {
            return Err(Error::SingularJacobian {
                det,
                threshold: SINGULARITY_THRESHOLD,
            });
        }
        Ok(Matrix2::new(
            self.g[(1, 1)],
            -self.g[(0, 1)],
            -self.g[(1, 0)],
            self.g[(0, 0)],
        ) / det)
    }
}

/// Wire length change relative to the tie-off state (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireDisplacement(pub Vector2<f64>);

/// l = G (q - q0).
pub fn wire_displacement(t: &TendonJacobian, q: JointAngles) -> WireDisplacement {
    let dq = Vector2::new(q.q1 - t.q0.x, q.q2 - t.q0.y);
    WireDisplacement(t.g * dq)
}

/// q = q0 + G^-1 l.
pub fn joint_angles_from_wire(t: &TendonJacobian, l: WireDisplacement) -> Result<JointAngles> {
    let q = t.q0 + t.checked_inverse()? * l.0;
    Ok(JointAngles::new(q.x, q.y))
}

/// Back-leg angles forced by the shared wire when the front leg is at `qf`:
/// q^b = q0^b + (G^b)^-1 G^f (q^f - q0^f).
pub fn coupling_map(
    front: &TendonJacobian,
    back: &TendonJacobian,
    qf: JointAngles,
) -> Result<JointAngles> {
    joint_angles_from_wire(back, wire_displacement(front, qf))
}

/// Shipped fine-tuned drive parameters (front leg).
pub fn default_front() -> TendonJacobian {
    TendonJacobian::from_rows([[35.0, 0.0], [7.5, -35.0]], [2.6, 1.0])
}

/// Shipped fine-tuned drive parameters (back leg).
pub fn default_back() -> TendonJacobian {
    TendonJacobian::from_rows([[-35.0, 0.0], [7.5, 35.0]], [1.7, 2.6])
}
