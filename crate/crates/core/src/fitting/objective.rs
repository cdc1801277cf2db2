use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{FitParams, ObservationSet};
use crate::error::{Error, Result};
use crate::model::{SiteModel, StateKind};
use crate::spectra::{LineKind, Subsite};
use crate::spinops::StateHamiltonian;
use crate::symmetry::{subsite_tensors, C2Axis};

/// What is fitted and how observed lines are matched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSetup {
    /// State whose parameters are free.
    pub target: StateKind,
    /// Supplies the fixed state, γ and the target's D, E.
    pub template: SiteModel,
    /// Largest |predicted − observed| (kHz) that counts as a match.
    pub gate_khz: f64,
    /// Also fit lines of the fixed state; they constrain the C2 axis.
    pub include_fixed_state: bool,
    /// Allowed range of the principal M values, MHz/T.
    pub g_bounds: [f64; 2],
}

impl FitSetup {
    pub fn new(template: SiteModel, target: StateKind) -> Self {
        FitSetup {
            target,
            template,
            gate_khz: 30.0,
            include_fixed_state: true,
            g_bounds: [-20.0, 20.0],
        }
    }

    pub fn fixed_state(&self) -> StateKind {
        match self.target {
            StateKind::Ground => StateKind::Excited,
            StateKind::Excited => StateKind::Ground,
        }
    }

    /// Line kind that measures the splitting of `state`.
    pub fn kind_of(state: StateKind) -> LineKind {
        match state {
            StateKind::Ground => LineKind::Antihole,
            StateKind::Excited => LineKind::Hole,
        }
    }

    pub fn in_bounds(&self, p: &FitParams) -> bool {
        let [lo, hi] = self.g_bounds;
        [p.g1, p.g2, p.g3].iter().all(|g| *g >= lo && *g <= hi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gate_khz > 0.0 && self.gate_khz.is_finite()) {
            return Err(Error::InvalidInput("gate must be positive"));
        }
        if !(self.g_bounds[0] < self.g_bounds[1]) {
            return Err(Error::InvalidInput("g bounds must be increasing"));
        }
        if !self.template.is_valid() {
            return Err(Error::InvalidInput("template model has invalid parameters"));
        }
        Ok(())
    }
}

/// Predicted line an observation was matched to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub record: usize,
    /// `None` when nothing fell inside the gate.
    pub subsite: Option<Subsite>,
    pub predicted_khz: Option<f64>,
}

struct Group {
    point: usize,
    doublet: usize,
    target: bool,
    records: Vec<usize>,
}

/// Weighted residuals of a [`FitSetup`] against an [`ObservationSet`].
///
/// One residual per used record, in record order: `(predicted − observed)/σ`
/// when a predicted subsite line lies within the gate, otherwise `gate/σ`.
/// Two observed lines of one group are paired with the two subsite
/// predictions in sorted order; a lone line takes the nearest prediction.
pub struct Objective<'a> {
    obs: &'a ObservationSet,
    setup: &'a FitSetup,
    groups: Vec<Group>,
    slot: Vec<Option<usize>>,
    n_used: usize,
    target_points: Vec<bool>,
    fixed_points: Vec<bool>,
    fixed1: Vec<[f64; 3]>,
    fixed2: Option<(C2Axis, Vec<[f64; 3]>)>,
    evaluations: usize,
}

fn failed(e: Error) -> Error {
    Error::ModelEvaluationFailed(Box::new(e))
}

impl<'a> Objective<'a> {
    pub fn new(obs: &'a ObservationSet, setup: &'a FitSetup) -> Result<Self> {
        setup.validate()?;
        let target_kind = FitSetup::kind_of(setup.target);
        let npts = obs.points().len();
        let mut groups = Vec::new();
        let mut slot = vec![None; obs.len()];
        let mut n_used = 0;
        let mut target_points = vec![false; npts];
        let mut fixed_points = vec![false; npts];
        for (i, r) in obs.records().iter().enumerate() {
            let target = r.kind == target_kind;
            if !target && !setup.include_fixed_state {
                continue;
            }
            slot[i] = Some(n_used);
            n_used += 1;
            let point = obs.point_of(i);
            let doublet = match r.kind {
                LineKind::Hole => r.transition.excited.index(),
                LineKind::Antihole => r.transition.ground.index(),
            };
            if target {
                target_points[point] = true;
            } else {
                fixed_points[point] = true;
            }
            let found = groups.iter_mut().rev().find(|g: &&mut Group| {
                g.point == point && g.doublet == doublet && g.target == target && {
                    let first = &obs.records()[g.records[0]];
                    first.transition == r.transition
                }
            });
            match found {
                Some(g) => g.records.push(i),
                None => groups.push(Group {
                    point,
                    doublet,
                    target,
                    records: vec![i],
                }),
            }
        }
        if n_used == 0 {
            return Err(Error::EmptyObservations);
        }
        let mut fixed1 = vec![[0.0; 3]; npts];
        let fixed = setup.template.state(setup.fixed_state());
        let h = StateHamiltonian::new(&fixed.q_tensor(), &fixed.m_tensor());
        for (p, used) in fixed_points.iter().enumerate() {
            if *used {
                fixed1[p] = h.levels(&obs.points()[p].field_mt).map_err(failed)?.splittings_khz;
            }
        }
        Ok(Objective {
            obs,
            setup,
            groups,
            slot,
            n_used,
            target_points,
            fixed_points,
            fixed1,
            fixed2: None,
            evaluations: 0,
        })
    }

    pub fn setup(&self) -> &FitSetup {
        self.setup
    }

    pub fn observations(&self) -> &ObservationSet {
        self.obs
    }

    /// Number of residuals.
    pub fn len(&self) -> usize {
        self.n_used
    }

    pub fn is_empty(&self) -> bool {
        self.n_used == 0
    }

    /// Objective evaluations so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Record index of each residual.
    pub fn records(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_used];
        for (i, s) in self.slot.iter().enumerate() {
            if let Some(k) = s {
                out[*k] = i;
            }
        }
        out
    }

    fn refresh_fixed2(&mut self, c2: &C2Axis) -> Result<()> {
        if matches!(&self.fixed2, Some((axis, _)) if axis == c2) {
            return Ok(());
        }
        let fixed = self.setup.template.state(self.setup.fixed_state());
        let (q2, m2) = subsite_tensors(&fixed.q_tensor(), &fixed.m_tensor(), c2);
        let h = StateHamiltonian::new(&q2, &m2);
        let mut out = vec![[0.0; 3]; self.fixed_points.len()];
        for (p, used) in self.fixed_points.iter().enumerate() {
            if *used {
                out[p] = h.levels(&self.obs.points()[p].field_mt).map_err(failed)?.splittings_khz;
            }
        }
        self.fixed2 = Some((*c2, out));
        Ok(())
    }

    /// Fills `out` with the weighted residuals at `p`.
    pub fn residuals(&mut self, p: &FitParams, out: &mut Vec<f64>) -> Result<()> {
        self.evaluate(p, out, None)
    }

    /// Residuals plus the matched prediction of every used record.
    pub fn residuals_assigned(&mut self, p: &FitParams, out: &mut Vec<f64>) -> Result<Vec<Assignment>> {
        let mut asg = Vec::with_capacity(self.n_used);
        self.evaluate(p, out, Some(&mut asg))?;
        Ok(asg)
    }

    /// Sum of squared weighted residuals.
    pub fn cost(&mut self, p: &FitParams) -> Result<f64> {
        let mut r = Vec::with_capacity(self.n_used);
        self.residuals(p, &mut r)?;
        Ok(r.iter().map(|v| v * v).sum())
    }

    fn evaluate(&mut self, p: &FitParams, out: &mut Vec<f64>, mut asg: Option<&mut Vec<Assignment>>) -> Result<()> {
        self.evaluations += 1;
        if !self.setup.in_bounds(p) {
            return Err(failed(Error::InvalidInput("g value outside bounds")));
        }
        let quad = self.setup.template.state(self.setup.target).quadrupole;
        let model = p.state_model(quad);
        if !model.is_valid() {
            return Err(failed(Error::InvalidInput("non-finite parameters")));
        }
        let c2 = p.c2();
        if self.fixed_points.iter().any(|&b| b) {
            self.refresh_fixed2(&c2)?;
        }
        let q1 = model.q_tensor();
        let m1 = model.m_tensor();
        let (q2, m2) = subsite_tensors(&q1, &m1, &c2);
        let h1 = StateHamiltonian::new(&q1, &m1);
        let h2 = StateHamiltonian::new(&q2, &m2);
        let npts = self.target_points.len();
        let mut target = vec![[[0.0; 3]; 2]; npts];
        for (i, used) in self.target_points.iter().enumerate() {
            if *used {
                let b = &self.obs.points()[i].field_mt;
                target[i] = [
                    h1.levels(b).map_err(failed)?.splittings_khz,
                    h2.levels(b).map_err(failed)?.splittings_khz,
                ];
            }
        }
        out.clear();
        out.resize(self.n_used, 0.0);
        if let Some(a) = asg.as_deref_mut() {
            a.clear();
            a.resize(
                self.n_used,
                Assignment {
                    record: 0,
                    subsite: None,
                    predicted_khz: None,
                },
            );
        }
        let fixed2 = &self.fixed2;
        let gate = self.setup.gate_khz;
        for g in &self.groups {
            let preds = if g.target {
                [target[g.point][0][g.doublet], target[g.point][1][g.doublet]]
            } else {
                let f2 = fixed2.as_ref().map(|(_, v)| v[g.point][g.doublet]).unwrap_or(0.0);
                [self.fixed1[g.point][g.doublet], f2]
            };
            let recs = &self.obs.records();
            let mut matched = [(0usize, 0usize); 8];
            let n = g.records.len().min(matched.len());
            if n == 2 {
                let (a, b) = (g.records[0], g.records[1]);
                let (lo, hi) = if recs[a].offset_khz <= recs[b].offset_khz { (a, b) } else { (b, a) };
                let (plo, phi) = if preds[0] <= preds[1] { (0, 1) } else { (1, 0) };
                matched[0] = (lo, plo);
                matched[1] = (hi, phi);
            } else {
                for (j, &r) in g.records.iter().take(n).enumerate() {
                    let o = recs[r].offset_khz;
                    let s = if (preds[0] - o).abs() <= (preds[1] - o).abs() { 0 } else { 1 };
                    matched[j] = (r, s);
                }
            }
            for &(r, s) in &matched[..n] {
                let rec = &recs[r];
                let diff = preds[s] - rec.offset_khz;
                let k = self.slot[r].expect("grouped records are used");
                let inside = diff.abs() <= gate;
                out[k] = if inside { diff / rec.sigma_khz } else { gate / rec.sigma_khz };
                if let Some(a) = asg.as_deref_mut() {
                    a[k] = Assignment {
                        record: r,
                        subsite: inside.then_some(if s == 0 { Subsite::One } else { Subsite::Two }),
                        predicted_khz: inside.then_some(preds[s]),
                    };
                }
            }
        }
        Ok(())
    }
}
