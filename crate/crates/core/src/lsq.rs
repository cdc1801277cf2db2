//! Dense Levenberg–Marquardt with a central-difference Jacobian.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub cost_tolerance: f64,
    /// Stop when every parameter step is below `step_tolerance × difference step`.
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 100,
            cost_tolerance: 1e-12,
            step_tolerance: 1e-6,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    /// Jacobian at `x` (rows = residuals).
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Central-difference Jacobian of `f` at `x` with per-parameter steps `h`.
pub fn jacobian<F>(f: &mut F, x: &[f64], h: &[f64], n_res: usize, evals: &mut usize) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64], &mut Vec<f64>) -> Result<()>,
{
    let mut jac = DMatrix::zeros(n_res, x.len());
    let mut xp = x.to_vec();
    let mut rp = Vec::with_capacity(n_res);
    let mut rm = Vec::with_capacity(n_res);
    for j in 0..x.len() {
        xp[j] = x[j] + h[j];
        f(&xp, &mut rp)?;
        xp[j] = x[j] - h[j];
        f(&xp, &mut rm)?;
        xp[j] = x[j];
        *evals += 2;
        if rp.len() != n_res || rm.len() != n_res {
            return Err(Error::InvalidInput("residual count changed between evaluations"));
        }
        for i in 0..n_res {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h[j]);
        }
    }
    Ok(jac)
}

/// Minimizes `Σ rᵢ(x)²`. Never returns a point with higher cost than `x0`.
pub fn levenberg_marquardt<F>(mut f: F, x0: &[f64], h: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: FnMut(&[f64], &mut Vec<f64>) -> Result<()>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = Vec::new();
    f(&x, &mut r)?;
    let mut evals = 1;
    let m = r.len();
    if m == 0 {
        return Err(Error::EmptyObservations);
    }
    let mut cost = sum_sq(&r);
    let mut lambda = opts.initial_damping;
    let mut jac = jacobian(&mut f, &x, h, m, &mut evals)?;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; n];
    let mut r_trial = Vec::with_capacity(m);

    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        let mut small_step = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            for i in 0..n {
                trial[i] = x[i] + delta[i];
            }
            small_step = (0..n).all(|i| delta[i].abs() <= opts.step_tolerance * h[i]);
            let ok = f(&trial, &mut r_trial).is_ok();
            evals += 1;
            let c_trial = if ok { sum_sq(&r_trial) } else { f64::INFINITY };
            if c_trial < cost {
                let rel = (cost - c_trial) / cost.max(f64::MIN_POSITIVE);
                x.copy_from_slice(&trial);
                core::mem::swap(&mut r, &mut r_trial);
                cost = c_trial;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < opts.cost_tolerance || small_step {
                    converged = true;
                }
                break;
            }
            if small_step {
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            converged = small_step || cost == 0.0;
            break;
        }
        jac = jacobian(&mut f, &x, h, m, &mut evals)?;
        if converged || cost == 0.0 {
            converged = true;
            break;
        }
    }
    Ok(LmOutcome {
        x,
        residuals: r,
        cost,
        jacobian: jac,
        iterations,
        evaluations: evals,
        converged,
    })
}

/// `(JᵀJ)⁻¹ · cost/(m − n)`.
///
/// Fails with [`Error::SingularNormalMatrix`] carrying the unit null
/// direction when the normal matrix is numerically rank deficient.
pub fn covariance(jac: &DMatrix<f64>, cost: f64) -> Result<DMatrix<f64>> {
    let (m, n) = jac.shape();
    let jtj = jac.transpose() * jac;
    // scale to unit diagonal so units of the parameters do not matter
    let d: Vec<f64> = (0..n).map(|i| jtj[(i, i)].sqrt()).collect();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        let mut null = vec![0.0; n];
        null[i] = 1.0;
        return Err(Error::SingularNormalMatrix { null_direction: null });
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| jtj[(i, j)] / (d[i] * d[j]));
    let eig = SymmetricEigen::new(scaled.clone());
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if lmin <= lmax * 1e-14 {
        let v = eig.eigenvectors.column(imin);
        let mut null: Vec<f64> = (0..n).map(|i| v[i] / d[i]).collect();
        let norm = null.iter().map(|x| x * x).sum::<f64>().sqrt();
        null.iter_mut().for_each(|x| *x /= norm);
        return Err(Error::SingularNormalMatrix { null_direction: null });
    }
    let inv = eig.eigenvectors.clone()
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l))
        * eig.eigenvectors.transpose();
    let dof = if m > n { (m - n) as f64 } else { 1.0 };
    let s2 = cost / dof;
    Ok(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] / (d[i] * d[j]) * s2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.2).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let out = levenberg_marquardt(
            |p: &[f64], r: &mut Vec<f64>| {
                r.clear();
                r.extend(ts.iter().zip(&ys).map(|(t, y)| p[0] * (-p[1] * t).exp() - y));
                Ok(())
            },
            &[1.0, 0.1],
            &[1e-6, 1e-6],
            &LmOptions::default(),
        )
        .unwrap();
        assert!((out.x[0] - 2.5).abs() < 1e-8);
        assert!((out.x[1] - 0.7).abs() < 1e-8);
        assert!(out.converged);
    }

    #[test]
    fn covariance_detects_null_direction() {
        // r = a + b only depends on the sum
        let jac = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        match covariance(&jac, 1.0) {
            Err(Error::SingularNormalMatrix { null_direction }) => {
                assert!((null_direction[0] + null_direction[1]).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn covariance_of_line_fit() {
        let jac = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let cov = covariance(&jac, 2.0).unwrap();
        // (JᵀJ)⁻¹ = [[0.7, −0.3], [−0.3, 0.2]], s² = 1
        assert!((cov[(0, 0)] - 0.7).abs() < 1e-12);
        assert!((cov[(0, 1)] + 0.3).abs() < 1e-12);
        assert!((cov[(1, 1)] - 0.2).abs() < 1e-12);
    }
}
