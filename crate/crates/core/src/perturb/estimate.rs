use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector2, Vector3, Vector4};
#[allow(unused_imports)]
use num_traits::Float;

use super::{ellipsoid_of, DoubletBlocks, SplittingSurface};
use crate::error::{Error, Result};
use crate::fitting::ObservationSet;
use crate::lsq::{levenberg_marquardt, LmOptions};
use crate::spectra::LineKind;
use crate::spinops::{euler_rotation, Doublet, EulerAngles, QuadrupoleParams, SymmetricTensor3};
use crate::symmetry::C2Axis;

/// Q-orientation warm start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOrientationEstimate {
    pub angles: EulerAngles,
    /// Isotropic Zeeman factor implied by the ellipsoid sizes, MHz/T.
    pub g_iso: f64,
    /// Root-mean-square relative misfit of the quadratic forms.
    pub form_misfit: f64,
    /// RMS angle (degrees) between well-separated principal axes of the
    /// data ellipsoids and the matching axes of the estimate.
    pub rms_misalignment_deg: f64,
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn frob2(m: &Matrix3<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Best rotation R and scale s² with `C_k ≈ s²·R·G_k·Rᵀ` for all surfaces,
/// where `G_k` are the isotropic-M ellipsoid forms of `quad`.
///
/// Assumes M ≈ g·1, so that the measured ellipsoids share the Q frame.
pub fn estimate_q_orientation(surfaces: &[SplittingSurface], quad: &QuadrupoleParams) -> Result<QOrientationEstimate> {
    if surfaces.is_empty() {
        return Err(Error::IllConditioned("no splitting surfaces given"));
    }
    let mut forms = Vec::with_capacity(surfaces.len());
    for s in surfaces {
        let mut s = s.clone();
        forms.push((s.doublet, s.fit_form()?));
    }
    let blocks = DoubletBlocks::new(&SymmetricTensor3::from_diagonal(quad.principal_values()));
    let g: Vec<Matrix3<f64>> = forms.iter().map(|(k, _)| blocks.quadratic_form(*k)).collect();

    // axes i, j are distinguishable if some doublet separates them
    let gmax = g.iter().map(|m| m.diagonal().max()).fold(0.0, f64::max);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let sep = g.iter().map(|m| (m[(i, i)] - m[(j, j)]).abs()).fold(0.0, f64::max);
        if sep <= 1e-6 * gmax {
            return Err(Error::IllConditioned("ellipsoids are axially degenerate; Q orientation unidentifiable"));
        }
    }

    let scale_and_cost = |r: &Matrix3<f64>| {
        let rotated: Vec<Matrix3<f64>> = g.iter().map(|gk| r * gk * r.transpose()).collect();
        let num: f64 = rotated.iter().zip(&forms).map(|(a, (_, c))| a.dot(c)).sum();
        let den: f64 = rotated.iter().map(frob2).sum();
        let s2 = num / den;
        let cost: f64 = rotated.iter().zip(&forms).map(|(a, (_, c))| frob2(&(c - a * s2))).sum();
        (s2, cost)
    };

    let mut best: Option<(Matrix3<f64>, f64)> = None;
    for (_, c) in &forms {
        let (_, vecs) = SymmetricTensor3::new(*c).principal();
        for p in PERMUTATIONS {
            let mut r = Matrix3::from_columns(&[vecs.column(p[0]), vecs.column(p[1]), vecs.column(p[2])]);
            if r.determinant() < 0.0 {
                r.column_mut(0).neg_mut();
            }
            let (s2, cost) = scale_and_cost(&r);
            if s2 > 0.0 && best.is_none_or(|(_, bc)| cost < bc) {
                best = Some((r, cost));
            }
        }
    }
    let (r0, _) = best.ok_or(Error::IllConditioned("no positive-scale orientation found"))?;
    let e0 = EulerAngles::from_matrix(&r0);
    let (s2_0, _) = scale_and_cost(&r0);
    let norm = forms.iter().map(|(_, c)| frob2(c)).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    let residual = |x: &[f64], out: &mut Vec<f64>| -> Result<()> {
        out.clear();
        let r = euler_rotation(&EulerAngles::new(x[0], x[1], x[2]));
        for ((_, c), gk) in forms.iter().zip(&g) {
            let d = (c - r * gk * r.transpose() * x[3]) / norm;
            for i in 0..3 {
                for j in i..3 {
                    out.push(d[(i, j)]);
                }
            }
        }
        Ok(())
    };
    let opts = LmOptions {
        max_iterations: 200,
        ..LmOptions::default()
    };
    let fit = levenberg_marquardt(residual, &[e0.alpha, e0.beta, e0.gamma, s2_0], &[1e-6, 1e-6, 1e-6, 1e-6 * s2_0.abs().max(1e-9)], &opts)?;
    let angles = EulerAngles::new(fit.x[0], fit.x[1], fit.x[2]).canonical();
    let s2 = fit.x[3];
    let r = angles.matrix();
    let n_entries = (forms.len() * 6) as f64;

    let mut sq = 0.0;
    let mut count = 0usize;
    for (k, (_, c)) in forms.iter().enumerate() {
        let el = ellipsoid_of(c);
        let model = r * g[k] * r.transpose();
        let el_model = ellipsoid_of(&model);
        let sa = el.semi_axes;
        let top = sa[2].max(f64::MIN_POSITIVE);
        for a in 0..3 {
            let separated = (0..3).filter(|&b| b != a).all(|b| (sa[a] - sa[b]).abs() > 0.05 * top);
            if separated {
                let cosang = el.axes.column(a).dot(&el_model.axes.column(a)).abs().min(1.0);
                let ang = cosang.acos().to_degrees();
                sq += ang * ang;
                count += 1;
            }
        }
    }
    Ok(QOrientationEstimate {
        angles,
        g_iso: s2.max(0.0).sqrt(),
        form_misfit: (fit.cost / n_entries).sqrt(),
        rms_misalignment_deg: if count > 0 { (sq / count as f64).sqrt() } else { 0.0 },
    })
}

/// C2-even and C2-odd parts of one doublet's quadratic form, recovered from
/// unordered subsite pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsiteForms {
    pub doublet: Doublet,
    /// Part commuting with R_C2 (lab frame).
    pub even: Matrix3<f64>,
    /// Part anticommuting with R_C2, up to an overall sign (lab frame).
    pub odd: Matrix3<f64>,
    /// Number of (a, b) pairs used.
    pub pairs: usize,
}

impl SubsiteForms {
    /// Subsite form `even + sign·odd`; the sign is the subsite-labeling choice.
    pub fn form(&self, sign: f64) -> Matrix3<f64> {
        self.even + self.odd * sign
    }
}

// Orthonormal frame whose third axis is the C2 axis.
fn c2_frame(axis: &C2Axis) -> Matrix3<f64> {
    let u = axis.direction();
    let helper = if u.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = helper.cross(&u).normalize();
    let e2 = u.cross(&e1);
    Matrix3::from_columns(&[e1, e2, u])
}

/// Per-doublet quadratic forms of subsite 1 from unordered subsite pairs.
///
/// With `y = (δ/2|B|)²` and the two subsites related by `R_C2`, the pair sum
/// `y_a + y_b` is linear in the C2-even part of C and `(y_a − y_b)²` is
/// linear in products of the two C2-odd entries. Only groups with exactly
/// two lines enter.
pub fn separate_subsite_forms(obs: &ObservationSet, axis: &C2Axis, kind: LineKind) -> Result<Vec<SubsiteForms>> {
    let w = c2_frame(axis);
    let mut out = Vec::new();
    for k in Doublet::ALL {
        let mut ata_s = Matrix4::<f64>::zeros();
        let mut aty_s = Vector4::<f64>::zeros();
        let mut ata_o = Matrix3::<f64>::zeros();
        let mut aty_o = Vector3::<f64>::zeros();
        let mut pairs = 0usize;
        for grp in obs.groups() {
            if grp.kind != kind || grp.offsets_khz.len() != 2 {
                continue;
            }
            let doublet = match kind {
                LineKind::Hole => grp.transition.excited,
                LineKind::Antihole => grp.transition.ground,
            };
            if doublet != k {
                continue;
            }
            let b = obs.points()[grp.point].field_mt;
            let bn = b.norm();
            if bn <= 0.0 {
                continue;
            }
            let n = w.transpose() * (b / bn);
            let ya = (grp.offsets_khz[0] / (2.0 * bn)).powi(2);
            let yb = (grp.offsets_khz[1] / (2.0 * bn)).powi(2);
            let a = Vector4::new(2.0 * n.x * n.x, 2.0 * n.y * n.y, 2.0 * n.z * n.z, 4.0 * n.x * n.y);
            ata_s += a * a.transpose();
            aty_s += a * (ya + yb);
            let z2 = 16.0 * n.z * n.z;
            let ao = Vector3::new(z2 * n.x * n.x, z2 * 2.0 * n.x * n.y, z2 * n.y * n.y);
            ata_o += ao * ao.transpose();
            aty_o += ao * (ya - yb).powi(2);
            pairs += 1;
        }
        if pairs < 6 {
            continue;
        }
        let xs = solve_spd4(&ata_s, &aty_s).ok_or(Error::IllConditioned("subsite sums do not determine the even form"))?;
        let xo = solve_spd3(&ata_o, &aty_o);
        let (cxz, cyz) = match xo {
            Some(p) => {
                // [[c_xz², c_xz c_yz], [·, c_yz²]] is rank one; take its leading factor
                let m = Matrix2::new(p[0], p[1], p[1], p[2]);
                let eig = SymmetricEigen::new(m);
                let (i, &l) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .expect("2 eigenvalues");
                let v: Vector2<f64> = eig.eigenvectors.column(i).into_owned() * l.max(0.0).sqrt();
                if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
                    (-v.x, -v.y)
                } else {
                    (v.x, v.y)
                }
            }
            None => (0.0, 0.0),
        };
        let even_c2 = Matrix3::new(xs[0], xs[3], 0.0, xs[3], xs[1], 0.0, 0.0, 0.0, xs[2]);
        let odd_c2 = Matrix3::new(0.0, 0.0, cxz, 0.0, 0.0, cyz, cxz, cyz, 0.0);
        out.push(SubsiteForms {
            doublet: k,
            even: w * even_c2 * w.transpose(),
            odd: w * odd_c2 * w.transpose(),
            pairs,
        });
    }
    Ok(out)
}

fn solve_spd4(a: &Matrix4<f64>, b: &Vector4<f64>) -> Option<Vector4<f64>> {
    let eig = SymmetricEigen::new(*a);
    if eig.eigenvalues.min() <= eig.eigenvalues.max() * 1e-12 {
        return None;
    }
    Some(eig.eigenvectors * eig.eigenvalues.map(|l| 1.0 / l).component_mul(&(eig.eigenvectors.transpose() * b)))
}

fn solve_spd3(a: &Matrix3<f64>, b: &Vector3<f64>) -> Option<Vector3<f64>> {
    let eig = SymmetricEigen::new(*a);
    if eig.eigenvalues.min() <= eig.eigenvalues.max() * 1e-12 {
        return None;
    }
    Some(eig.eigenvectors * eig.eigenvalues.map(|l| 1.0 / l).component_mul(&(eig.eigenvectors.transpose() * b)))
}

/// C2-axis warm start and the coincidence directions behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct C2Estimate {
    pub axis: C2Axis,
    /// Unit field directions where the two subsites coincide.
    pub coincidences: Vec<Vector3<f64>>,
    /// Indices into `coincidences` lying in the fitted plane.
    pub inliers: Vec<usize>,
}

/// Largest angle (degrees) a coincidence direction may sit off the plane ⊥ C2
/// and still count as an inlier.
const PLANE_TOLERANCE_DEG: f64 = 3.0;

/// Estimates the C2 axis as the normal of the plane holding the field
/// directions where the subsite lines coincide.
///
/// The per-point score is the mean `|a − b|` over all (transition, kind)
/// groups that report two lines. Coincidences are exact zeros or local
/// minima well below the median score; each minimum is located between scan
/// points by V-shaped interpolation. A consensus search over pairs of
/// coincidences rejects accidental ones and those along the axis itself.
pub fn estimate_c2_axis(obs: &ObservationSet) -> Result<C2Estimate> {
    let npts = obs.points().len();
    let mut sum = alloc::vec![0.0; npts];
    let mut cnt = alloc::vec![0usize; npts];
    for g in obs.groups() {
        if g.offsets_khz.len() == 2 {
            sum[g.point] += (g.offsets_khz[0] - g.offsets_khz[1]).abs();
            cnt[g.point] += 1;
        }
    }
    // points with pair information, in scan order
    let mut seq: Vec<(usize, f64)> = (0..npts).filter(|&p| cnt[p] > 0).map(|p| (p, sum[p] / cnt[p] as f64)).collect();
    if seq.is_empty() {
        return Err(Error::InsufficientCoincidences { found: 0 });
    }
    seq.sort_by_key(|&(p, _)| obs.points()[p].scan_n);
    let field = |p: usize| obs.points()[p].field_mt;

    let max_score = seq.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut scores: Vec<f64> = seq.iter().map(|s| s.1).collect();
    scores.sort_by(f64::total_cmp);
    let median = scores[scores.len() / 2];
    let flat = 1e-6 * max_score.max(1e-3);

    let mut dirs: Vec<Vector3<f64>> = Vec::new();
    for i in 0..seq.len() {
        let (p, s) = seq[i];
        let b = field(p);
        if b.norm() == 0.0 {
            continue;
        }
        if s <= flat {
            dirs.push(b.normalize());
            continue;
        }
        if i == 0 || i + 1 == seq.len() {
            continue;
        }
        let (sl, sr) = (seq[i - 1].1, seq[i + 1].1);
        if !(s <= sl && s <= sr && s < 0.25 * median) || sl <= flat || sr <= flat {
            continue;
        }
        // V through the three points: apex on the side of the lower neighbour
        let (nb, slope) = if sl >= sr { (seq[i + 1].0, sl - s) } else { (seq[i - 1].0, sr - s) };
        let frac = if slope > 0.0 { (s / slope).min(1.0) } else { 0.0 };
        let bi = b;
        let bj = field(nb);
        let v = bi + (bj - bi) * frac;
        if v.norm() > 0.0 {
            dirs.push(v.normalize());
        }
    }
    if dirs.len() < 2 {
        return Err(Error::InsufficientCoincidences { found: dirs.len() });
    }

    let tol = PLANE_TOLERANCE_DEG.to_radians().sin();
    let inliers_of = |nrm: &Vector3<f64>| -> Vec<usize> { (0..dirs.len()).filter(|&i| dirs[i].dot(nrm).abs() <= tol).collect() };
    let mut best: Option<(Vec<usize>, f64)> = None;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let c = dirs[i].cross(&dirs[j]);
            if c.norm() < 10f64.to_radians().sin() {
                continue;
            }
            let nrm = c.normalize();
            let inl = inliers_of(&nrm);
            let spread: f64 = inl.iter().map(|&k| dirs[k].dot(&nrm).powi(2)).sum();
            let better = match &best {
                None => true,
                Some((bi, bs)) => inl.len() > bi.len() || (inl.len() == bi.len() && spread < *bs),
            };
            if better {
                best = Some((inl, spread));
            }
        }
    }
    let (inliers, _) = best.ok_or(Error::InsufficientCoincidences { found: dirs.len() })?;
    if inliers.len() < 2 {
        return Err(Error::InsufficientCoincidences { found: inliers.len() });
    }
    let mut scatter = Matrix3::<f64>::zeros();
    for &k in &inliers {
        scatter += dirs[k] * dirs[k].transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let imin = eig.eigenvalues.imin();
    let normal = eig.eigenvectors.column(imin).into_owned();
    Ok(C2Estimate {
        axis: C2Axis::from_direction(&normal).canonical(),
        coincidences: dirs,
        inliers,
    })
}
