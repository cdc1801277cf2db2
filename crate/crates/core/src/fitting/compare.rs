use alloc::vec::Vec;

use nalgebra::Matrix3;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::FitParams;
use crate::spinops::{wrap_deg, EulerAngles, QuadrupoleParams, ZeemanParams};
use crate::symmetry::{enumerate_solutions, subsite_model, C2Axis};

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Largest differences between two parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDeviation {
    /// degrees, modulo 360°
    pub max_angle_deg: f64,
    /// Largest `|g − g_ref| / |g_ref|`.
    pub max_g_rel: f64,
    /// Per-parameter differences in [`FitParams::NAMES`] order.
    pub components: [f64; 11],
}

/// Componentwise deviation of `p` from `reference`, angles wrapped.
pub fn deviation(p: &FitParams, reference: &FitParams) -> ParamDeviation {
    let a = p.to_array();
    let b = reference.to_array();
    let mut comp = [0.0; 11];
    for i in 0..11 {
        comp[i] = a[i] - b[i];
    }
    for i in FitParams::ANGLES {
        comp[i] = wrap_deg(comp[i]);
    }
    let max_angle_deg = FitParams::ANGLES.iter().map(|&i| comp[i].abs()).fold(0.0, f64::max);
    let max_g_rel = (3..6).map(|i| comp[i].abs() / b[i].abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    ParamDeviation {
        max_angle_deg,
        max_g_rel,
        components: comp,
    }
}

fn closest_axis(c: &C2Axis, reference: &C2Axis) -> C2Axis {
    let flipped = C2Axis::new(c.alpha + 180.0, 180.0 - c.beta);
    let d = |x: &C2Axis| wrap_deg(x.alpha - reference.alpha).abs().max(wrap_deg(x.beta - reference.beta).abs());
    let best = if d(&flipped) < d(c) { flipped } else { *c };
    C2Axis::new(
        reference.alpha + wrap_deg(best.alpha - reference.alpha),
        reference.beta + wrap_deg(best.beta - reference.beta),
    )
}

fn closest_angles(e: &EulerAngles, reference: &EulerAngles) -> EulerAngles {
    e.closest_equivalent(reference)
}

/// Representation of the model described by `p` closest to `reference`.
///
/// Searches the swap of the two subsite labels, the sign family of the
/// state, the six orderings of the principal M values and the Euler aliases
/// of each frame. None of these change any predicted spectrum.
pub fn align_to(p: &FitParams, reference: &FitParams, quad: &QuadrupoleParams) -> FitParams {
    let c2 = closest_axis(&p.c2(), &reference.c2());
    let model = p.state_model(*quad);
    let swapped = subsite_model(&model, &c2);
    let ref_q = reference.q_angles();
    let ref_m = reference.m_angles();
    let mut best = *p;
    let mut best_score = f64::INFINITY;
    for base in [model, swapped] {
        for member in enumerate_solutions(&base).members {
            let s = member.model;
            let q = closest_angles(&s.q_angles, &ref_q);
            let rm = s.m_angles.matrix();
            for perm in PERMUTATIONS {
                let mut r = Matrix3::from_columns(&[rm.column(perm[0]), rm.column(perm[1]), rm.column(perm[2])]);
                if r.determinant() < 0.0 {
                    r.column_mut(0).neg_mut();
                }
                let g = ZeemanParams::new(s.zeeman.0[perm[0]], s.zeeman.0[perm[1]], s.zeeman.0[perm[2]]);
                let m = closest_angles(&EulerAngles::from_matrix(&r), &ref_m);
                let cand = FitParams::from_parts(&q, &g, &m, &c2);
                let dev = deviation(&cand, reference);
                let score = dev.max_angle_deg + 100.0 * dev.max_g_rel;
                if score < best_score {
                    best_score = score;
                    best = cand;
                }
            }
        }
    }
    best
}

/// All subsite-swap and sign-family variants of `p` (16 parameter sets).
pub fn equivalent_params(p: &FitParams, quad: &QuadrupoleParams) -> Vec<FitParams> {
    let c2 = p.c2();
    let model = p.state_model(*quad);
    let mut out = Vec::with_capacity(16);
    for base in [model, subsite_model(&model, &c2)] {
        for member in enumerate_solutions(&base).members {
            let s = member.model;
            out.push(FitParams::from_parts(&s.q_angles, &s.zeeman, &s.m_angles, &c2));
        }
    }
    out
}
