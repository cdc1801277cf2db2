use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{FitParams, Objective, ParamMask};
use crate::error::{Error, Result};

/// Geometric cooling schedule with single-parameter Gaussian moves.
///
/// Energies are mean squared weighted residuals. The start temperature is
/// `t0_scale` times the initial energy and cooling stops at
/// `t_final_ratio · T0`. Proposal widths scale with `sqrt(T/T0)`, floored
/// at `min_width_fraction` of their start value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealSchedule {
    pub t0_scale: f64,
    pub cooling: f64,
    pub t_final_ratio: f64,
    /// Moves per temperature for each free parameter.
    pub moves_per_parameter: usize,
    pub max_evaluations: usize,
    /// degrees
    pub angle_width: f64,
    /// MHz/T
    pub g_width: f64,
    pub min_width_fraction: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t0_scale: 1.0,
            cooling: 0.97,
            t_final_ratio: 1e-4,
            moves_per_parameter: 10,
            max_evaluations: 200_000,
            angle_width: 10.0,
            g_width: 0.5,
            min_width_fraction: 0.01,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t0_scale > 0.0
            && self.t0_scale.is_finite()
            && self.cooling > 0.0
            && self.cooling < 1.0
            && self.t_final_ratio > 0.0
            && self.t_final_ratio < 1.0
            && self.moves_per_parameter >= 1
            && self.max_evaluations >= 1
            && self.angle_width > 0.0
            && self.g_width > 0.0
            && self.min_width_fraction > 0.0
            && self.min_width_fraction <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("annealing schedule needs T0 > Tmin > 0, 0 < cooling < 1 and at least one step"))
        }
    }

    /// Number of temperature levels from T0 to Tmin.
    pub fn levels(&self) -> usize {
        (self.t_final_ratio.ln() / self.cooling.ln()).ceil().max(1.0) as usize
    }

    fn width(&self, index: usize) -> f64 {
        if (3..6).contains(&index) {
            self.g_width
        } else {
            self.angle_width
        }
    }
}

/// What an annealing run did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSummary {
    pub seed: u64,
    pub initial_rms: f64,
    pub final_rms: f64,
    pub t0: f64,
    pub temperature_levels: usize,
    pub evaluations: usize,
    pub accepted: usize,
    /// True when the evaluation budget ran out before Tmin.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    /// Best parameters seen.
    pub params: FitParams,
    pub cost: f64,
    pub summary: AnnealSummary,
}

/// Simulated annealing over the free parameters of `mask`.
///
/// Returns the best point seen, so the result is never worse than `init`.
/// Proposals outside the g bounds and failed evaluations are rejected.
pub fn anneal(
    objective: &mut Objective<'_>,
    init: &FitParams,
    mask: &ParamMask,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<AnnealOutcome> {
    schedule.validate()?;
    let free: Vec<usize> = mask.free().collect();
    if free.is_empty() {
        return Err(Error::InvalidInput("no free parameters"));
    }
    let n = objective.len() as f64;
    let init_cost = objective.cost(init)?;
    let mut evals = 1usize;
    let e0 = init_cost / n;
    let t0 = (schedule.t0_scale * e0).max(f64::MIN_POSITIVE);
    let t_min = t0 * schedule.t_final_ratio;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = init.to_array();
    let mut e = e0;
    let mut best = x;
    let mut best_e = e0;
    let mut accepted = 0usize;
    let mut levels = 0usize;
    let mut t = t0;
    let mut budget_exhausted = false;
    let moves = schedule.moves_per_parameter * free.len();

    'outer: while t > t_min {
        levels += 1;
        let shrink = (t / t0).sqrt().max(schedule.min_width_fraction);
        for _ in 0..moves {
            if evals >= schedule.max_evaluations {
                budget_exhausted = true;
                break 'outer;
            }
            let i = free[rng.random_range(0..free.len())];
            let z: f64 = StandardNormal.sample(&mut rng);
            let mut trial = x;
            trial[i] += z * schedule.width(i) * shrink;
            let p = FitParams::from_array(trial);
            if !objective.setup().in_bounds(&p) {
                continue;
            }
            evals += 1;
            let Ok(c) = objective.cost(&p) else {
                continue;
            };
            let et = c / n;
            let u: f64 = rng.random();
            if et <= e || u < (-(et - e) / t).exp() {
                x = trial;
                e = et;
                accepted += 1;
                if e < best_e {
                    best = x;
                    best_e = e;
                }
            }
        }
        t *= schedule.cooling;
    }
    Ok(AnnealOutcome {
        params: FitParams::from_array(best),
        cost: best_e * n,
        summary: AnnealSummary {
            seed,
            initial_rms: e0.sqrt(),
            final_rms: best_e.sqrt(),
            t0,
            temperature_levels: levels,
            evaluations: evals,
            accepted,
            budget_exhausted,
        },
    })
}
