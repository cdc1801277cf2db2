//! Least-squares fitting of one state's eleven parameters to measured
//! side-hole and main-antihole positions.
//!
//! [`Objective`] turns parameters into weighted residuals, [`anneal`] does
//! the global search, [`refine`] the local Levenberg–Marquardt polish with
//! covariance errors, and [`bootstrap_fit`] chains the perturbative warm
//! starts with both.

mod anneal;
mod compare;
mod objective;
mod observations;
mod params;

pub use anneal::{anneal, AnnealOutcome, AnnealSchedule, AnnealSummary};
pub use compare::{align_to, deviation, equivalent_params, ParamDeviation};
pub use objective::{Assignment, FitSetup, Objective};
pub use observations::{synthetic_observations, Observation, ObservationGroup, ObservationSet, ScanPoint, SyntheticSpec};
pub use params::{FitParams, ParamMask};

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FitStage, Result};
use crate::lsq::{covariance, levenberg_marquardt, LmOptions, LmOutcome};
use crate::model::StateKind;
use crate::perturb::{estimate_c2_axis, estimate_q_orientation, separate_subsite_forms, SplittingSurface};
use crate::spinops::{EulerAngles, QuadrupoleParams, ZeemanParams};

/// Difference steps: degrees for angles, MHz/T for g.
const ANGLE_STEP: f64 = 1e-4;
const G_STEP: f64 = 1e-5;

/// Outcome of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub target: StateKind,
    /// Held fixed during the fit.
    pub quadrupole: QuadrupoleParams,
    pub params: FitParams,
    /// One standard deviation; zero for parameters that were held fixed.
    pub std_errors: FitParams,
    /// Weighted residuals `(predicted − observed)/σ`.
    pub residuals: Vec<f64>,
    /// RMS of `predicted − observed`, kHz.
    pub rms_khz: f64,
    /// Sum of squared weighted residuals.
    pub cost: f64,
    pub converged: bool,
    /// Objective evaluations spent, including warm-start stages.
    pub evaluations: usize,
    pub anneal: Option<AnnealSummary>,
    pub seed: Option<u64>,
}

fn steps(mask: &ParamMask) -> Vec<f64> {
    mask.free().map(|i| if (3..6).contains(&i) { G_STEP } else { ANGLE_STEP }).collect()
}

/// Levenberg–Marquardt over the free parameters of `mask`, without errors.
pub fn minimize(objective: &mut Objective<'_>, init: &FitParams, mask: &ParamMask, opts: &LmOptions) -> Result<(FitParams, LmOutcome)> {
    let free: Vec<usize> = mask.free().collect();
    if free.is_empty() {
        return Err(Error::InvalidInput("no free parameters"));
    }
    let base = init.to_array();
    let x0: Vec<f64> = free.iter().map(|&i| base[i]).collect();
    let h = steps(mask);
    let out = levenberg_marquardt(
        |x: &[f64], r: &mut Vec<f64>| {
            let mut a = base;
            for (k, &i) in free.iter().enumerate() {
                a[i] = x[k];
            }
            objective.residuals(&FitParams::from_array(a), r)
        },
        &x0,
        &h,
        opts,
    )?;
    let mut a = base;
    for (k, &i) in free.iter().enumerate() {
        a[i] = out.x[k];
    }
    Ok((FitParams::from_array(a), out))
}

/// Local least-squares refinement with covariance-based standard errors.
///
/// Never returns a higher cost than `init`. Fails with
/// [`Error::SingularNormalMatrix`] (null direction over all eleven
/// parameters) when a parameter combination is not determined by the data.
pub fn refine(objective: &mut Objective<'_>, init: &FitParams, mask: &ParamMask, opts: &LmOptions) -> Result<FitResult> {
    let (params, out) = minimize(objective, init, mask, opts)?;
    let free: Vec<usize> = mask.free().collect();
    let cov = covariance(&out.jacobian, out.cost).map_err(|e| match e {
        Error::SingularNormalMatrix { null_direction } => {
            let mut full = alloc::vec![0.0; FitParams::LEN];
            for (k, &i) in free.iter().enumerate() {
                full[i] = null_direction[k];
            }
            Error::SingularNormalMatrix { null_direction: full }
        }
        other => other,
    })?;
    let mut err = [0.0; 11];
    for (k, &i) in free.iter().enumerate() {
        err[i] = cov[(k, k)].max(0.0).sqrt();
    }
    let records = objective.records();
    let obs = objective.observations();
    let sq: f64 = out
        .residuals
        .iter()
        .zip(&records)
        .map(|(r, &i)| (r * obs.records()[i].sigma_khz).powi(2))
        .sum();
    let setup = objective.setup();
    Ok(FitResult {
        target: setup.target,
        quadrupole: setup.template.state(setup.target).quadrupole,
        params: params.canonical(),
        std_errors: FitParams::from_array(err),
        rms_khz: (sq / out.residuals.len() as f64).sqrt(),
        residuals: out.residuals,
        cost: out.cost,
        converged: out.converged,
        evaluations: objective.evaluations(),
        anneal: None,
        seed: None,
    })
}

/// Settings of [`bootstrap_fit`] and [`direct_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub schedule: AnnealSchedule,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            schedule: AnnealSchedule {
                t_final_ratio: 1e-3,
                moves_per_parameter: 2,
                ..AnnealSchedule::default()
            },
            seed: 0,
            max_iterations: 200,
        }
    }
}

impl FitOptions {
    fn lm(&self) -> LmOptions {
        LmOptions {
            max_iterations: self.max_iterations,
            ..LmOptions::default()
        }
    }
}

/// Anneal over all eleven parameters from `init`, then refine.
pub fn direct_fit(obs: &ObservationSet, setup: &FitSetup, init: &FitParams, opts: &FitOptions) -> Result<FitResult> {
    let mut objective = Objective::new(obs, setup)?;
    let a = anneal(&mut objective, init, &ParamMask::ALL, &opts.schedule, opts.seed)?;
    let mut res = refine(&mut objective, &a.params, &ParamMask::ALL, &opts.lm())?;
    res.anneal = Some(a.summary);
    res.seed = Some(opts.seed);
    Ok(res)
}

/// Warm start of the staged fit: C2 axis from subsite coincidences and Q
/// angles from the splitting ellipsoids, with isotropic M.
pub fn warm_start(obs: &ObservationSet, setup: &FitSetup) -> Result<FitParams> {
    let c2 = estimate_c2_axis(obs).map_err(|e| e.at_stage(FitStage::C2Axis))?.axis;
    if coplanar_fields(obs) {
        return Err(Error::IllConditioned("field directions are coplanar").at_stage(FitStage::QOrientation));
    }
    let kind = FitSetup::kind_of(setup.target);
    let quad = setup.template.state(setup.target).quadrupole;
    let forms = separate_subsite_forms(obs, &c2, kind).map_err(|e| e.at_stage(FitStage::QOrientation))?;
    if forms.is_empty() {
        return Err(Error::IllConditioned("no doublet has enough subsite pairs").at_stage(FitStage::QOrientation));
    }
    // the odd part of each form is known up to sign; the first fixes the subsite labels
    let mut best = None;
    let mut first_err = None;
    for bits in 0..(1u32 << (forms.len() - 1)) {
        let surfaces: Vec<SplittingSurface> = forms
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let sign = if i > 0 && bits & (1 << (i - 1)) != 0 { -1.0 } else { 1.0 };
                SplittingSurface::from_form(f.doublet, f.form(sign))
            })
            .collect();
        match estimate_q_orientation(&surfaces, &quad) {
            Ok(est) => {
                if best.as_ref().is_none_or(|b: &crate::perturb::QOrientationEstimate| est.form_misfit < b.form_misfit) {
                    best = Some(est);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let est = match (best, first_err) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e.at_stage(FitStage::QOrientation)),
        (None, None) => unreachable!("at least one sign pattern is tried"),
    };
    Ok(FitParams::from_parts(&est.angles, &ZeemanParams::isotropic(est.g_iso), &EulerAngles::default(), &c2))
}

fn coplanar_fields(obs: &ObservationSet) -> bool {
    let mut s = nalgebra::Matrix3::zeros();
    for r in obs.records() {
        let n = r.field_mt.norm();
        if n > 0.0 {
            let u = r.field_mt / n;
            s += u * u.transpose();
        }
    }
    let ev = s.symmetric_eigenvalues();
    ev.min() <= 1e-9 * ev.max().max(f64::MIN_POSITIVE)
}

/// Staged fit: fix D, E; estimate the C2 axis and the Q angles
/// perturbatively; anneal and refine the six M parameters; refine all
/// eleven. Errors name the stage that failed.
pub fn bootstrap_fit(obs: &ObservationSet, setup: &FitSetup, opts: &FitOptions) -> Result<FitResult> {
    let mut objective = Objective::new(obs, setup)?;
    let init = warm_start(obs, setup)?;
    let stage3 = |objective: &mut Objective<'_>| -> Result<(FitParams, AnnealSummary)> {
        let a = anneal(objective, &init, &ParamMask::ZEEMAN, &opts.schedule, opts.seed)?;
        let (p, _) = minimize(objective, &a.params, &ParamMask::ZEEMAN, &opts.lm())?;
        Ok((p, a.summary))
    };
    let (p3, summary) = stage3(&mut objective).map_err(|e| e.at_stage(FitStage::ZeemanOnly))?;
    let mut res = refine(&mut objective, &p3, &ParamMask::ALL, &opts.lm()).map_err(|e| e.at_stage(FitStage::Full))?;
    res.anneal = Some(summary);
    res.seed = Some(opts.seed);
    Ok(res)
}
