//! ZYZ Euler angles and the elementary rotations they are built from.
//!
//! The matrices follow the passive form: `rot_z(a)` carries `+sin(a)` at row 1,
//! column 2, and the composite rotation is `R = Rz(γ)·Ry(β)·Rz(α)`. A tensor
//! with principal values `diag(d)` is placed in the lab frame as `R·diag(d)·Rᵀ`,
//! so the columns of `R` are its principal axes.

use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Rotation about z by `angle` radians.
pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation about y by `angle` radians.
pub fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// Wraps an angle in radians to `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Wraps an angle in degrees to `(-180, 180]`.
pub fn wrap_deg(angle: f64) -> f64 {
    wrap_pi(angle.to_radians()).to_degrees()
}

/// Euler triple (α, β, γ) in ZYZ order, stored in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "EulerDegrees", into = "EulerDegrees")]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Degree-valued wire form of [`EulerAngles`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerDegrees {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl From<EulerDegrees> for EulerAngles {
    fn from(d: EulerDegrees) -> Self {
        EulerAngles::from_degrees(d.alpha, d.beta, d.gamma)
    }
}

impl From<EulerAngles> for EulerDegrees {
    fn from(e: EulerAngles) -> Self {
        let [alpha, beta, gamma] = e.degrees();
        EulerDegrees { alpha, beta, gamma }
    }
}

// Proper sign flips of a principal-axis frame; they leave R·diag·Rᵀ unchanged.
const AXIS_SIGN_GROUP: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [-1.0, -1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0],
];

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    pub fn from_degrees(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles::new(alpha.to_radians(), beta.to_radians(), gamma.to_radians())
    }

    pub fn degrees(&self) -> [f64; 3] {
        [
            self.alpha.to_degrees(),
            self.beta.to_degrees(),
            self.gamma.to_degrees(),
        ]
    }

    /// `R = Rz(γ)·Ry(β)·Rz(α)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        euler_rotation(self)
    }

    /// Same rotation with α, γ ∈ (−180°, 180°] and β ∈ [0°, 180°].
    pub fn canonical(&self) -> Self {
        let mut alpha = self.alpha;
        let mut beta = wrap_pi(self.beta);
        let mut gamma = self.gamma;
        if beta < 0.0 {
            // Rz(γ)Ry(−β)Rz(α) = Rz(γ+π)Ry(β)Rz(α+π)
            beta = -beta;
            alpha += PI;
            gamma += PI;
        }
        EulerAngles::new(wrap_pi(alpha), beta, wrap_pi(gamma))
    }

    /// Recovers the ZYZ triple of a proper rotation, with β ∈ [0, π].
    ///
    /// At β ∈ {0, π} only α ± γ is defined; γ is then set to zero.
    pub fn from_matrix(r: &Matrix3<f64>) -> Self {
        let cb = r[(2, 2)].clamp(-1.0, 1.0);
        let beta = cb.acos();
        let sb = beta.sin();
        if sb.abs() > 1e-9 {
            let alpha = r[(2, 1)].atan2(r[(2, 0)]);
            let gamma = r[(1, 2)].atan2(-r[(0, 2)]);
            EulerAngles::new(alpha, beta, gamma)
        } else if cb > 0.0 {
            EulerAngles::new(r[(0, 1)].atan2(r[(0, 0)]), 0.0, 0.0)
        } else {
            EulerAngles::new((-r[(0, 1)]).atan2(-r[(0, 0)]), PI, 0.0)
        }
    }

    /// Canonical triple describing the same *tensor orientation*.
    ///
    /// A principal-axis frame is defined only up to flipping the sign of two
    /// axes, so four rotations describe the same tensor. The representative
    /// returned has β ∈ [0°, 90°] and α ∈ (−90°, 90°] (ties at the range edges
    /// are resolved by the first variant found).
    pub fn orientation_canonical(&self) -> Self {
        let r = self.matrix();
        let mut fallback = None;
        for signs in AXIS_SIGN_GROUP {
            let e = EulerAngles::from_matrix(&(r * Matrix3::from_diagonal(&Vector3::from(signs))));
            let ok_beta = e.beta <= PI / 2.0 + 1e-12;
            let ok_alpha = e.alpha > -PI / 2.0 && e.alpha <= PI / 2.0 + 1e-12;
            if ok_beta && ok_alpha {
                return e;
            }
            if ok_beta && fallback.is_none() {
                fallback = Some(e);
            }
        }
        fallback.unwrap_or(*self)
    }

    /// Among the rotations describing the same tensor orientation, the
    /// Euler triple closest (componentwise, modulo 360°) to `reference`.
    pub fn closest_equivalent(&self, reference: &EulerAngles) -> Self {
        let r = self.matrix();
        let mut best = *self;
        let mut best_dist = f64::INFINITY;
        for signs in AXIS_SIGN_GROUP {
            let e = EulerAngles::from_matrix(&(r * Matrix3::from_diagonal(&Vector3::from(signs))));
            // (α, β, γ) and (α+π, −β, γ+π) are the same rotation
            let alias = EulerAngles::new(e.alpha + PI, -e.beta, e.gamma + PI);
            for cand in [e, alias] {
                let d = cand.max_component_distance(reference);
                if d < best_dist {
                    best_dist = d;
                    best = EulerAngles::new(
                        reference.alpha + wrap_pi(cand.alpha - reference.alpha),
                        reference.beta + wrap_pi(cand.beta - reference.beta),
                        reference.gamma + wrap_pi(cand.gamma - reference.gamma),
                    );
                }
            }
        }
        best
    }

    /// Largest componentwise angle difference in radians, modulo 2π.
    pub fn max_component_distance(&self, other: &EulerAngles) -> f64 {
        let da = wrap_pi(self.alpha - other.alpha).abs();
        let db = wrap_pi(self.beta - other.beta).abs();
        let dg = wrap_pi(self.gamma - other.gamma).abs();
        da.max(db).max(dg)
    }
}

/// `R(α, β, γ) = Rz(γ)·Ry(β)·Rz(α)`.
pub fn euler_rotation(e: &EulerAngles) -> Matrix3<f64> {
    rot_z(e.gamma) * rot_y(e.beta) * rot_z(e.alpha)
}

/// Rotation angle (radians) of `aᵀ·b`, minimized over the proper axis sign
/// flips of `b`. This is the misorientation between two tensor frames.
pub fn frame_misorientation(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    AXIS_SIGN_GROUP
        .iter()
        .map(|s| {
            let m = a.transpose() * b * Matrix3::from_diagonal(&Vector3::from(*s));
            ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}
