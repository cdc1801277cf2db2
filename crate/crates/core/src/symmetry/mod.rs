//! C2 magnetic subsites and sign-flip solution families.
//!
//! Two magnetically inequivalent subsites are related by a π rotation about
//! the crystal C2 axis. Independently, the sign of each Zeeman principal
//! value is invisible in the level spectrum: flipping g_i together with the
//! reflection `S'_i = R_M·S_i·R_Mᵀ` applied to Q leaves every eigenvalue
//! unchanged, giving eight spectrum-equivalent solutions per state.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::model::StateModel;
use crate::spinops::{rot_z, wrap_deg, EulerAngles, SymmetricTensor3, ZeemanParams};

/// Orientation of the C2 axis in the lab frame, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C2Axis {
    pub alpha: f64,
    pub beta: f64,
}

impl C2Axis {
    pub fn new(alpha_deg: f64, beta_deg: f64) -> Self {
        C2Axis {
            alpha: alpha_deg,
            beta: beta_deg,
        }
    }

    /// Unit axis `(sinβ cosα, sinβ sinα, cosβ)`.
    pub fn direction(&self) -> Vector3<f64> {
        let (sa, ca) = self.alpha.to_radians().sin_cos();
        let (sb, cb) = self.beta.to_radians().sin_cos();
        Vector3::new(sb * ca, sb * sa, cb)
    }

    /// Axis through a (not necessarily unit) direction vector.
    pub fn from_direction(v: &Vector3<f64>) -> Self {
        let n = v.normalize();
        let beta = n.z.clamp(-1.0, 1.0).acos().to_degrees();
        let alpha = if n.x.abs() < 1e-15 && n.y.abs() < 1e-15 {
            0.0
        } else {
            n.y.atan2(n.x).to_degrees()
        };
        C2Axis::new(alpha, beta)
    }

    /// Representative of the axis line with β ∈ [0°, 90°] and α ∈ (−180°, 180°].
    pub fn canonical(&self) -> Self {
        let mut d = self.direction();
        if d.z < 0.0 || (d.z == 0.0 && (d.y < 0.0 || (d.y == 0.0 && d.x < 0.0))) {
            d = -d;
        }
        let c = C2Axis::from_direction(&d);
        C2Axis::new(wrap_deg(c.alpha), c.beta)
    }

    /// Angle between two axis lines, degrees in [0, 90].
    pub fn angle_to(&self, other: &C2Axis) -> f64 {
        let c = self.direction().dot(&other.direction()).abs().min(1.0);
        c.acos().to_degrees()
    }
}

/// `R_C2 = Rᵀ(α, β, 0)·Rz(π)·R(α, β, 0)`, the π rotation about the axis.
pub fn c2_rotation(axis: &C2Axis) -> Matrix3<f64> {
    let r = EulerAngles::from_degrees(axis.alpha, axis.beta, 0.0).matrix();
    let m = r.transpose() * rot_z(PI) * r;
    // Rz(π) carries sin(π) ≈ 1e−16; project back onto the exact involution
    let n = axis.direction();
    let exact = 2.0 * n * n.transpose() - Matrix3::identity();
    if (m - exact).abs().max() < 1e-12 {
        exact
    } else {
        m
    }
}

/// Subsite-2 tensors `R_C2·T·R_C2ᵀ` from subsite 1.
pub fn subsite_tensors(
    q1: &SymmetricTensor3,
    m1: &SymmetricTensor3,
    axis: &C2Axis,
) -> (SymmetricTensor3, SymmetricTensor3) {
    let r = c2_rotation(axis);
    (q1.rotated(&r), m1.rotated(&r))
}

/// Subsite-2 state model: both Euler frames pre-multiplied by R_C2.
pub fn subsite_model(model: &StateModel, axis: &C2Axis) -> StateModel {
    let r = c2_rotation(axis);
    StateModel {
        q_angles: EulerAngles::from_matrix(&(r * model.q_angles.matrix())),
        m_angles: EulerAngles::from_matrix(&(r * model.m_angles.matrix())),
        ..*model
    }
}

/// Signs of (g1, g2, g3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignPattern(pub [i8; 3]);

impl SignPattern {
    /// The eight patterns in the order +++, −++, +−+, ++−, −+−, +−−, −−+, −−−.
    pub const ALL: [SignPattern; 8] = [
        SignPattern([1, 1, 1]),
        SignPattern([-1, 1, 1]),
        SignPattern([1, -1, 1]),
        SignPattern([1, 1, -1]),
        SignPattern([-1, 1, -1]),
        SignPattern([1, -1, -1]),
        SignPattern([-1, -1, 1]),
        SignPattern([-1, -1, -1]),
    ];

    pub fn all_positive() -> Self {
        SignPattern([1, 1, 1])
    }

    pub fn of(g: &ZeemanParams) -> Self {
        SignPattern(g.0.map(|x| if x < 0.0 { -1 } else { 1 }))
    }

    pub fn is_all_positive(&self) -> bool {
        self.0 == [1, 1, 1]
    }

    /// Position in [`SignPattern::ALL`].
    pub fn table_index(&self) -> usize {
        SignPattern::ALL.iter().position(|p| p == self).unwrap_or(0)
    }

    pub fn label(&self) -> [char; 3] {
        self.0.map(|s| if s < 0 { '-' } else { '+' })
    }
}

impl core::fmt::Display for SignPattern {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for c in self.label() {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Negates g_i (`axis` ∈ {0, 1, 2}) and applies `Q' = S'_i·Q·S'_iᵀ`.
///
/// M keeps its Euler angles; the returned Q angles come from the standard
/// ZYZ decomposition (β ∈ [0°, 180°]).
pub fn sign_flip(model: &StateModel, axis: usize) -> StateModel {
    assert!(axis < 3, "axis index must be 0, 1 or 2");
    let rm = model.m_angles.matrix();
    let mut s = Matrix3::identity();
    s[(axis, axis)] = -1.0;
    let s_prime = rm * s * rm.transpose();
    // S'·R_Q is improper; flipping one principal axis restores det = +1
    // without changing the tensor
    let frame = s_prime * model.q_angles.matrix() * Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
    let mut zeeman = model.zeeman;
    zeeman.0[axis] = -zeeman.0[axis];
    StateModel {
        quadrupole: model.quadrupole,
        q_angles: EulerAngles::from_matrix(&frame),
        zeeman,
        m_angles: model.m_angles,
    }
}

/// One member of a [`SolutionFamily`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionMember {
    pub signs: SignPattern,
    pub model: StateModel,
}

/// The eight spectrum-equivalent solutions of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    /// Sign pattern of the model the family was generated from.
    pub base: SignPattern,
    /// Members in [`SignPattern::ALL`] order.
    pub members: Vec<SolutionMember>,
}

impl SolutionFamily {
    pub fn member(&self, signs: SignPattern) -> Option<&SolutionMember> {
        self.members.iter().find(|m| m.signs == signs)
    }
}

/// Builds all eight sign patterns by flipping the axes whose sign differs
/// from the base model's.
pub fn enumerate_solutions(model: &StateModel) -> SolutionFamily {
    let base = SignPattern::of(&model.zeeman);
    let members = SignPattern::ALL
        .iter()
        .map(|&signs| {
            let mut m = *model;
            for i in 0..3 {
                if signs.0[i] != base.0[i] {
                    m = sign_flip(&m, i);
                }
            }
            SolutionMember { signs, model: m }
        })
        .collect();
    SolutionFamily { base, members }
}
