//! Relative optical oscillator strengths between hyperfine levels.
//!
//! At zero field the strength of doublet pair (k, l) is
//! `Tr(P_g^k·P_e^l)/2` with `P` the doublet projectors, which does not
//! depend on the basis inside a degenerate doublet. At finite field the
//! 6×6 map `|⟨g_i|e_j⟩|²` over exact eigenvectors is used instead.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::model::{SiteModel, StateModel};
use crate::reference::G_FREE_ION;
use crate::spectra::Subsite;
use crate::spinops::{
    eigensystem, hamiltonian, quadrupole_term, spin_operators, Doublet, DoubletOrder, Hermitian6, SymmetricTensor3,
    ZeemanParams,
};
use crate::symmetry::{enumerate_solutions, subsite_model, SignPattern, SolutionFamily};

/// Rows are ground doublets (1/2, 3/2, 5/2), columns excited doublets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingTable(pub [[f64; 3]; 3]);

impl BranchingTable {
    pub fn row_sums(&self) -> [f64; 3] {
        self.0.map(|r| r.iter().sum())
    }

    pub fn column_sums(&self) -> [f64; 3] {
        core::array::from_fn(|j| (0..3).map(|i| self.0[i][j]).sum())
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochastic_defect(&self) -> f64 {
        self.row_sums()
            .iter()
            .chain(self.column_sums().iter())
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_deviation(&self, other: &[[f64; 3]; 3]) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other[i][j]).abs());
            }
        }
        m
    }

    pub fn rms_deviation(&self, other: &[[f64; 3]; 3]) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += (self.0[i][j] - other[i][j]).powi(2);
            }
        }
        (s / 9.0).sqrt()
    }

    fn mean(&self, other: &BranchingTable) -> BranchingTable {
        BranchingTable(core::array::from_fn(|i| core::array::from_fn(|j| 0.5 * (self.0[i][j] + other.0[i][j]))))
    }
}

impl fmt::Display for BranchingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>8} {:>8} {:>8}", "g \\ e", "±1/2", "±3/2", "±5/2")?;
        for (i, row) in self.0.iter().enumerate() {
            let label = ["±1/2", "±3/2", "±5/2"][i];
            writeln!(f, "{:>8} {:>8.3} {:>8.3} {:>8.3}", label, row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

// Zero-field eigenvectors with columns grouped by doublet index.
fn doublet_basis(q: &SymmetricTensor3) -> Hermitian6 {
    let ops = spin_operators();
    let (_, vecs) = eigensystem(&quadrupole_term(&ops, q));
    reorder_by_doublet(&vecs, DoubletOrder::from_tensor(q))
}

fn reorder_by_doublet(vecs: &Hermitian6, order: DoubletOrder) -> Hermitian6 {
    let mut out = Hermitian6::zeros();
    for k in Doublet::ALL {
        let rank = order.energy_rank(k);
        for s in 0..2 {
            out.set_column(2 * k.index() + s, &vecs.column(2 * rank + s));
        }
    }
    out
}

fn overlap_squares(g: &Hermitian6, e: &Hermitian6) -> [[f64; 6]; 6] {
    let o = g.adjoint() * e;
    core::array::from_fn(|i| core::array::from_fn(|j| o[(i, j)].norm_sqr()))
}

fn block_sum(map: &[[f64; 6]; 6]) -> BranchingTable {
    BranchingTable(core::array::from_fn(|k| {
        core::array::from_fn(|l| {
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += map[2 * k + a][2 * l + b];
                }
            }
            0.5 * s
        })
    }))
}

/// Zero-field table of two states given in the same frame.
pub fn branching_table(ground: &StateModel, excited: &StateModel) -> BranchingTable {
    let g = doublet_basis(&ground.q_tensor());
    let e = doublet_basis(&excited.q_tensor());
    block_sum(&overlap_squares(&g, &e))
}

/// Table of subsite 1 or 2 of a site (a merged tag gives the mean).
pub fn subsite_table(site: &SiteModel, subsite: Subsite) -> BranchingTable {
    match subsite {
        Subsite::One => branching_table(&site.ground, &site.excited),
        Subsite::Two => branching_table(&subsite_model(&site.ground, &site.c2), &subsite_model(&site.excited, &site.c2)),
        Subsite::Both => subsite_averaged_table(site),
    }
}

/// Mean of the two subsite tables.
pub fn subsite_averaged_table(site: &SiteModel) -> BranchingTable {
    subsite_table(site, Subsite::One).mean(&subsite_table(site, Subsite::Two))
}

/// `|⟨g_i|e_j⟩|²` between exact eigenstates at one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMap {
    /// mT
    pub field_mt: Vector3<f64>,
    pub subsite: Subsite,
    /// Rows are ground levels, columns excited levels; both ordered as
    /// (1/2 lower, 1/2 upper, 3/2 lower, 3/2 upper, 5/2 lower, 5/2 upper).
    pub values: [[f64; 6]; 6],
}

impl TransitionMap {
    /// Sums each 2×2 doublet block and halves it.
    pub fn block_table(&self) -> BranchingTable {
        block_sum(&self.values)
    }

    pub fn stochastic_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            let row: f64 = self.values[i].iter().sum();
            let col: f64 = (0..6).map(|k| self.values[k][i]).sum();
            worst = worst.max((row - 1.0).abs()).max((col - 1.0).abs());
        }
        worst
    }
}

/// Transition-strength map of one subsite at field `field_mt`.
///
/// Levels are labeled by energy rank inside the zero-field doublet order,
/// which follows the doublets adiabatically while the Zeeman term stays
/// below the quadrupole gaps.
pub fn transition_map(site: &SiteModel, field_mt: &Vector3<f64>, subsite: Subsite) -> TransitionMap {
    let eigvecs = |s: &StateModel| {
        let s = match subsite {
            Subsite::Two => subsite_model(s, &site.c2),
            _ => *s,
        };
        let q = s.q_tensor();
        let (_, v) = eigensystem(&hamiltonian(&q, &s.m_tensor(), field_mt));
        reorder_by_doublet(&v, DoubletOrder::from_tensor(&q))
    };
    let g = eigvecs(&site.ground);
    let e = eigvecs(&site.excited);
    TransitionMap {
        field_mt: *field_mt,
        subsite,
        values: overlap_squares(&g, &e),
    }
}

/// Measured table with per-entry uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredTable {
    pub values: [[f64; 3]; 3],
    pub errors: [[f64; 3]; 3],
}

impl MeasuredTable {
    pub fn uniform(values: [[f64; 3]; 3], error: f64) -> Self {
        MeasuredTable {
            values,
            errors: [[error; 3]; 3],
        }
    }

    /// Same table with every uncertainty multiplied by `factor`.
    pub fn scaled_errors(&self, factor: f64) -> Self {
        MeasuredTable {
            values: self.values,
            errors: self.errors.map(|r| r.map(|e| e * factor)),
        }
    }
}

/// One (ground, excited) sign pairing scored against a measured table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPairing {
    pub ground: SignPattern,
    pub excited: SignPattern,
    pub table: BranchingTable,
    pub max_deviation: f64,
    pub rms_deviation: f64,
    /// Every entry lies within its uncertainty.
    pub within_errors: bool,
}

/// Deviations closer than this rank as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Pairings ranked by max deviation; ties go to the earlier sign patterns
/// in [`SignPattern::ALL`] order, ground first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRanking {
    pub pairings: Vec<ScoredPairing>,
}

impl SolutionRanking {
    pub fn best(&self) -> Option<&ScoredPairing> {
        self.pairings.first()
    }

    pub fn within_errors(&self) -> impl Iterator<Item = &ScoredPairing> {
        self.pairings.iter().filter(|p| p.within_errors)
    }
}

/// Scores every pairing of the two sign families against `measured`.
///
/// With `excited_all_positive` only the excited member with all-positive
/// g values is paired (8 pairings instead of 64).
pub fn select_solution(
    ground: &SolutionFamily,
    excited: &SolutionFamily,
    measured: &MeasuredTable,
    excited_all_positive: bool,
) -> SolutionRanking {
    let mut pairings = Vec::new();
    for g in &ground.members {
        for e in &excited.members {
            if excited_all_positive && !e.signs.is_all_positive() {
                continue;
            }
            let table = branching_table(&g.model, &e.model);
            let mut within = true;
            for i in 0..3 {
                for j in 0..3 {
                    if (table.0[i][j] - measured.values[i][j]).abs() > measured.errors[i][j] {
                        within = false;
                    }
                }
            }
            pairings.push(ScoredPairing {
                ground: g.signs,
                excited: e.signs,
                max_deviation: table.max_deviation(&measured.values),
                rms_deviation: table.rms_deviation(&measured.values),
                within_errors: within,
                table,
            });
        }
    }
    // members with all signs negated share Q and tie up to rounding
    let key = |p: &ScoredPairing| (p.ground.table_index(), p.excited.table_index());
    pairings.sort_by(|a, b| {
        if (a.max_deviation - b.max_deviation).abs() <= TIE_TOLERANCE {
            key(a).cmp(&key(b))
        } else {
            a.max_deviation.total_cmp(&b.max_deviation)
        }
    });
    SolutionRanking { pairings }
}

/// [`select_solution`] over the families generated from two base models.
pub fn select_solution_for(ground: &StateModel, excited: &StateModel, measured: &MeasuredTable, excited_all_positive: bool) -> SolutionRanking {
    select_solution(&enumerate_solutions(ground), &enumerate_solutions(excited), measured, excited_all_positive)
}

/// `α_i = 1 − g_i/g_N` with the free-ion moment `g_N` = 10.56 MHz/T.
pub fn quenching_alphas(g: &ZeemanParams) -> [f64; 3] {
    g.0.map(|x| 1.0 - x / G_FREE_ION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::spinops::EulerAngles;

    #[test]
    fn reference_table_matches_calculated_values() {
        let t = branching_table(&reference::ground_state(), &reference::excited_state());
        assert!(t.max_deviation(&reference::BRANCHING_CALC) <= 0.01, "{t}");
        assert!(t.stochastic_defect() < 1e-9);
    }

    #[test]
    fn identical_orientation_gives_identity() {
        let g = reference::ground_state();
        let mut e = reference::excited_state();
        e.q_angles = g.q_angles;
        e.quadrupole = crate::spinops::QuadrupoleParams::new(2.0 * g.quadrupole.d, 2.0 * g.quadrupole.e);
        let t = branching_table(&g, &e);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t.0[i][j] - want).abs() < 1e-9, "{t}");
            }
        }
    }

    #[test]
    fn subsites_agree_at_zero_field() {
        let site = reference::site();
        let a = subsite_table(&site, Subsite::One);
        let b = subsite_table(&site, Subsite::Two);
        assert!(a.max_deviation(&b.0) < 1e-9);
        assert!(subsite_averaged_table(&site).max_deviation(&a.0) < 1e-9);
    }

    #[test]
    fn zero_field_map_reduces_to_table() {
        let site = reference::site();
        let map = transition_map(&site, &Vector3::zeros(), Subsite::One);
        let t = branching_table(&site.ground, &site.excited);
        assert!(map.block_table().max_deviation(&t.0) < 1e-9);
        assert!(map.stochastic_defect() < 1e-9);
    }

    #[test]
    fn counts_pairings() {
        let m = MeasuredTable::uniform(reference::BRANCHING_EXP, reference::BRANCHING_EXP_ERR);
        let g = reference::ground_state();
        let e = reference::excited_state();
        assert_eq!(select_solution_for(&g, &e, &m, false).pairings.len(), 64);
        assert_eq!(select_solution_for(&g, &e, &m, true).pairings.len(), 8);
    }

    #[test]
    fn self_selection() {
        let g = reference::ground_state();
        let e = reference::excited_state();
        let fam_g = enumerate_solutions(&g);
        let fam_e = enumerate_solutions(&e);
        let pick = fam_g.members[5];
        let t = branching_table(&pick.model, &fam_e.members[0].model);
        let r = select_solution(&fam_g, &fam_e, &MeasuredTable::uniform(t.0, 0.03), true);
        let best = r.best().unwrap();
        // a sign pattern and its negation share Q and so the same table
        let negated = SignPattern(pick.signs.0.map(|s| -s));
        assert!(best.ground == pick.signs || best.ground == negated, "{}", best.ground);
        assert!(best.max_deviation < 1e-12);
    }

    #[test]
    fn quenching() {
        let a = quenching_alphas(&ZeemanParams::new(9.11, 10.56, -10.891));
        assert!((a[0] - 0.137).abs() < 1e-3);
        assert_eq!(a[1], 0.0);
        assert!((a[2] - 2.031).abs() < 1e-3);
    }

    #[test]
    fn global_rotation_invariance() {
        let g = reference::ground_state();
        let e = reference::excited_state();
        let r = EulerAngles::from_degrees(12.0, 70.0, -33.0).matrix();
        let rot = |s: &StateModel| StateModel {
            q_angles: EulerAngles::from_matrix(&(r * s.q_angles.matrix())),
            m_angles: EulerAngles::from_matrix(&(r * s.m_angles.matrix())),
            ..*s
        };
        let a = branching_table(&g, &e);
        let b = branching_table(&rot(&g), &rot(&e));
        assert!(a.max_deviation(&b.0) < 1e-9);
    }
}
