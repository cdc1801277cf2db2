//! First-order doublet splittings, splitting ellipsoids, and the warm-start
//! estimators of the staged fit.
//!
//! Inside a zero-field doublet the Zeeman term reduces to a traceless 2×2
//! block, so `δ_k = 2λ_k⁺` with `λ_k⁺² = cᵀ·G_k·c`, `c = Mᵀ·B`. `G_k` is a
//! fixed quadratic form of the quadrupole tensor; for isotropic M it is the
//! splitting ellipsoid of doublet k.

mod estimate;

pub use estimate::{
    estimate_c2_axis, estimate_q_orientation, separate_subsite_forms, C2Estimate, QOrientationEstimate,
};

use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinops::{
    eigensystem, quadrupole_term, spin_operators, Doublet, DoubletOrder, Hermitian6, QuadrupoleParams,
    SymmetricTensor3,
};

/// Zeeman operators reduced to the three zero-field doublets of a Q tensor.
#[derive(Debug, Clone)]
pub struct DoubletBlocks {
    /// `blocks[k][j] = V_kᴴ·I_j·V_k`, indexed by [`Doublet::index`].
    blocks: [[Matrix2<Complex64>; 3]; 3],
}

impl DoubletBlocks {
    pub fn new(q: &SymmetricTensor3) -> Self {
        let ops = spin_operators();
        let (_, vecs) = eigensystem(&quadrupole_term(&ops, q));
        let order = DoubletOrder::from_tensor(q);
        let comps: [&Hermitian6; 3] = ops.components();
        let blocks = core::array::from_fn(|ki| {
            let rank = order.energy_rank(Doublet::from_index(ki));
            let v = vecs.columns(2 * rank, 2).into_owned();
            core::array::from_fn(|j| {
                let b = v.adjoint() * comps[j] * &v;
                Matrix2::new(b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)])
            })
        });
        DoubletBlocks { blocks }
    }

    /// Reduced block of `c·Î` for doublet `k`.
    pub fn block(&self, k: Doublet, c: &Vector3<f64>) -> Matrix2<Complex64> {
        let b = &self.blocks[k.index()];
        b[0] * Complex64::new(c.x, 0.0) + b[1] * Complex64::new(c.y, 0.0) + b[2] * Complex64::new(c.z, 0.0)
    }

    /// Eigenvalue spread of the reduced block, i.e. `2λ_k⁺` for coupling `c`.
    pub fn spread(&self, k: Doublet, c: &Vector3<f64>) -> f64 {
        let m = self.block(k, c);
        let d = m[(0, 0)].re - m[(1, 1)].re;
        (d * d + 4.0 * m[(0, 1)].norm_sqr()).sqrt()
    }

    /// Quadratic form `G_k` with `λ_k⁺² = cᵀ·G_k·c`.
    pub fn quadratic_form(&self, k: Doublet) -> Matrix3<f64> {
        let b = &self.blocks[k.index()];
        let diff: [f64; 3] = core::array::from_fn(|j| b[j][(0, 0)].re - b[j][(1, 1)].re);
        let off: [Complex64; 3] = core::array::from_fn(|j| b[j][(0, 1)]);
        Matrix3::from_fn(|i, j| 0.25 * (diff[i] * diff[j] + 4.0 * (off[i] * off[j].conj()).re))
    }
}

/// First-order splittings δ_k (kHz) indexed by [`Doublet::index`], from the
/// reduced Zeeman blocks of the zero-field doublets.
pub fn first_order_splitting(q: &SymmetricTensor3, m: &SymmetricTensor3, field_mt: &Vector3<f64>) -> [f64; 3] {
    let blocks = DoubletBlocks::new(q);
    let c = m.matrix().transpose() * field_mt * 1e-3;
    Doublet::ALL.map(|k| blocks.spread(k, &c) * 1e3)
}

/// Semi-axes `(c_k1, c_k2, c_k3)` of the doublet-k ellipsoid for M = 1, in
/// the principal frame of `diag(−E, E, D)`.
pub fn ellipsoid_coefficients(p: &QuadrupoleParams, k: Doublet) -> [f64; 3] {
    let blocks = DoubletBlocks::new(&SymmetricTensor3::from_diagonal(p.principal_values()));
    let g = blocks.quadratic_form(k);
    [g[(0, 0)].max(0.0).sqrt(), g[(1, 1)].max(0.0).sqrt(), g[(2, 2)].max(0.0).sqrt()]
}

/// Unit direction `(sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    /// radians
    pub theta: f64,
    /// radians
    pub phi: f64,
    /// `δ_k/(2|B|)`, MHz/T
    pub value: f64,
}

/// Principal axes of a fitted splitting ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    /// Semi-axes (MHz/T), ascending.
    pub semi_axes: [f64; 3],
    /// Matching unit axes as columns.
    pub axes: Matrix3<f64>,
}

/// Splitting surface `λ_k⁺(n)` of one doublet.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingSurface {
    pub doublet: Doublet,
    pub samples: Vec<SurfaceSample>,
    /// Fitted `C` with `λ⁺² = nᵀ·C·n`, (MHz/T)².
    pub form: Option<Matrix3<f64>>,
}

impl SplittingSurface {
    pub fn from_samples(doublet: Doublet, samples: Vec<SurfaceSample>) -> Self {
        SplittingSurface {
            doublet,
            samples,
            form: None,
        }
    }

    /// Surface with a known quadratic form and no samples.
    pub fn from_form(doublet: Doublet, form: Matrix3<f64>) -> Self {
        SplittingSurface {
            doublet,
            samples: Vec::new(),
            form: Some((form + form.transpose()) * 0.5),
        }
    }

    /// First-order surface of (Q, M) on an `n_theta × n_phi` grid with
    /// θ at cell centres of [0, π] and φ on [0, 2π).
    pub fn first_order(q: &SymmetricTensor3, m: &SymmetricTensor3, k: Doublet, n_theta: usize, n_phi: usize) -> Self {
        let blocks = DoubletBlocks::new(q);
        let mut samples = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * core::f64::consts::PI / n_theta as f64;
            for j in 0..n_phi {
                let phi = j as f64 * 2.0 * core::f64::consts::PI / n_phi as f64;
                let c = m.matrix().transpose() * direction(theta, phi);
                samples.push(SurfaceSample {
                    theta,
                    phi,
                    value: 0.5 * blocks.spread(k, &c),
                });
            }
        }
        SplittingSurface::from_samples(k, samples)
    }

    /// Linear least squares for the six entries of C from `λ² = nᵀ·C·n`.
    pub fn fit_form(&mut self) -> Result<Matrix3<f64>> {
        if let Some(c) = self.form {
            if self.samples.is_empty() {
                return Ok(c);
            }
        }
        let rows: Vec<(Vector3<f64>, f64)> = self
            .samples
            .iter()
            .map(|s| (direction(s.theta, s.phi), s.value * s.value))
            .collect();
        let c = fit_quadratic_form(&rows)?;
        self.form = Some(c);
        Ok(c)
    }

    pub fn ellipsoid(&mut self) -> Result<Ellipsoid> {
        let c = self.fit_form()?;
        Ok(ellipsoid_of(&c))
    }

    /// `(θ, φ, value)` rows for plotting.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.theta, s.phi, s.value))
    }
}

pub(crate) fn ellipsoid_of(c: &Matrix3<f64>) -> Ellipsoid {
    let t = SymmetricTensor3::new(*c);
    let (vals, axes) = t.principal();
    Ellipsoid {
        semi_axes: [vals[0].max(0.0).sqrt(), vals[1].max(0.0).sqrt(), vals[2].max(0.0).sqrt()],
        axes,
    }
}

/// Fits symmetric C with `y ≈ nᵀ·C·n` over `(n, y)` pairs.
pub fn fit_quadratic_form(rows: &[(Vector3<f64>, f64)]) -> Result<Matrix3<f64>> {
    if rows.len() < 6 {
        return Err(Error::IllConditioned("a quadratic form needs at least 6 directions"));
    }
    let mut ata = nalgebra::Matrix6::<f64>::zeros();
    let mut aty = nalgebra::Vector6::<f64>::zeros();
    for (n, y) in rows {
        let a = nalgebra::Vector6::new(
            n.x * n.x,
            n.y * n.y,
            n.z * n.z,
            2.0 * n.x * n.y,
            2.0 * n.x * n.z,
            2.0 * n.y * n.z,
        );
        ata += a * a.transpose();
        aty += a * *y;
    }
    let eig = SymmetricEigen::new(ata);
    let lmax = eig.eigenvalues.max();
    if eig.eigenvalues.min() <= lmax * 1e-10 {
        return Err(Error::IllConditioned("sample directions do not determine a quadratic form"));
    }
    let x = eig.eigenvectors * eig.eigenvalues.map(|l| 1.0 / l).component_mul(&(eig.eigenvectors.transpose() * aty));
    Ok(Matrix3::new(x[0], x[3], x[4], x[3], x[1], x[5], x[4], x[5], x[2]))
}
