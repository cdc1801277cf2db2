use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::euler::{euler_rotation, EulerAngles};

/// Real symmetric 3×3 interaction tensor (MHz for Q, MHz/T for M).
///
/// Construction symmetrizes its input, so the stored matrix is exactly
/// symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricTensor3(Matrix3<f64>);

impl SymmetricTensor3 {
    pub fn new(m: Matrix3<f64>) -> Self {
        SymmetricTensor3((m + m.transpose()) * 0.5)
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        SymmetricTensor3(Matrix3::from_diagonal(&Vector3::from(d)))
    }

    pub fn zero() -> Self {
        SymmetricTensor3(Matrix3::zeros())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `R·T·Rᵀ`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        SymmetricTensor3::new(r * self.0 * r.transpose())
    }

    /// Principal values in ascending order with matching unit eigenvectors
    /// (as columns, right-handed).
    pub fn principal(&self) -> (Vector3<f64>, Matrix3<f64>) {
        let eig = SymmetricEigen::new(self.0);
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = Vector3::new(
            eig.eigenvalues[idx[0]],
            eig.eigenvalues[idx[1]],
            eig.eigenvalues[idx[2]],
        );
        let mut vecs = Matrix3::from_columns(&[
            eig.eigenvectors.column(idx[0]).into_owned(),
            eig.eigenvectors.column(idx[1]).into_owned(),
            eig.eigenvectors.column(idx[2]).into_owned(),
        ]);
        if vecs.determinant() < 0.0 {
            vecs.column_mut(0).neg_mut();
        }
        (values, vecs)
    }

    pub fn principal_values(&self) -> [f64; 3] {
        let (v, _) = self.principal();
        [v[0], v[1], v[2]]
    }

    pub fn max_abs_diff(&self, other: &SymmetricTensor3) -> f64 {
        (self.0 - other.0).abs().max()
    }
}

/// Quadrupole parameters; principal values are `diag(−E, E, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupoleParams {
    /// MHz
    pub d: f64,
    /// MHz
    pub e: f64,
}

impl QuadrupoleParams {
    pub fn new(d: f64, e: f64) -> Self {
        QuadrupoleParams { d, e }
    }

    pub fn principal_values(&self) -> [f64; 3] {
        [-self.e, self.e, self.d]
    }

    /// η = 3E/D.
    pub fn ellipticity(&self) -> f64 {
        3.0 * self.e / self.d
    }

    /// `|η| > 1` means E is no longer the minor term and the (D, E) labeling
    /// is unconventional.
    pub fn ellipticity_warning(&self) -> bool {
        self.ellipticity().abs() > 1.0
    }

    pub fn is_valid(&self) -> bool {
        self.d.is_finite() && self.e.is_finite() && self.d != 0.0
    }

    pub fn doublet_order(&self) -> super::DoubletOrder {
        super::DoubletOrder::from_sign(self.d)
    }
}

/// Zeeman principal values g1, g2, g3 in MHz/T. Signs are free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanParams(pub [f64; 3]);

impl ZeemanParams {
    pub fn new(g1: f64, g2: f64, g3: f64) -> Self {
        ZeemanParams([g1, g2, g3])
    }

    pub fn isotropic(g: f64) -> Self {
        ZeemanParams([g; 3])
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }
}

/// `R(e)·diag(−E, E, D)·R(e)ᵀ`.
pub fn build_q(p: &QuadrupoleParams, e: &EulerAngles) -> SymmetricTensor3 {
    SymmetricTensor3::from_diagonal(p.principal_values()).rotated(&euler_rotation(e))
}

/// `R(e)·diag(g1, g2, g3)·R(e)ᵀ`.
pub fn build_m(p: &ZeemanParams, e: &EulerAngles) -> SymmetricTensor3 {
    SymmetricTensor3::from_diagonal(p.0).rotated(&euler_rotation(e))
}

/// Reference frame in which tensors are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Coil frame (X, Y, Z) in which the fit parameters are defined.
    #[default]
    Lab,
    /// Crystal frame (D1, D2, b).
    Crystal,
}

/// Frame change between lab (X, Y, Z) and crystal (D1, D2, b) axes.
///
/// `F = R(α_C2, β_C2, γ)` maps lab components to crystal components:
/// `T_crystal = F·T_lab·Fᵀ`. The opposite direction is available for
/// completeness through [`FrameTransform::crystal_to_lab`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    f: Matrix3<f64>,
}

impl FrameTransform {
    pub fn new(alpha_c2_deg: f64, beta_c2_deg: f64, gamma_deg: f64) -> Self {
        FrameTransform {
            f: euler_rotation(&EulerAngles::from_degrees(alpha_c2_deg, beta_c2_deg, gamma_deg)),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.f
    }

    pub fn lab_to_crystal(&self, t: &SymmetricTensor3) -> SymmetricTensor3 {
        t.rotated(&self.f)
    }

    pub fn crystal_to_lab(&self, t: &SymmetricTensor3) -> SymmetricTensor3 {
        t.rotated(&self.f.transpose())
    }

    pub fn vector_lab_to_crystal(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.f * v
    }

    pub fn vector_crystal_to_lab(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.f.transpose() * v
    }

    pub fn express(&self, t: &SymmetricTensor3, frame: Frame) -> SymmetricTensor3 {
        match frame {
            Frame::Lab => *t,
            Frame::Crystal => self.lab_to_crystal(t),
        }
    }
}
