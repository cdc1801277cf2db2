use nalgebra::{Matrix3, Vector3, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{spin_operators, Hermitian6, SpinOperators};
use super::tensor::SymmetricTensor3;
use super::{Doublet, DoubletOrder};
use crate::error::{Error, Result};

/// mT → T
const MT_TO_T: f64 = 1e-3;

/// Quadrupole part `Î·Q·Î` (MHz).
pub fn quadrupole_term(ops: &SpinOperators, q: &SymmetricTensor3) -> Hermitian6 {
    let qm = q.matrix();
    let mut h = Hermitian6::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let c = qm[(a, b)];
            if c != 0.0 {
                h += ops.products[a][b] * Complex64::new(c, 0.0);
            }
        }
    }
    h
}

/// Zeeman part `B·M·Î` (MHz) for a field in mT and M in MHz/T.
pub fn zeeman_term(ops: &SpinOperators, m: &SymmetricTensor3, field_mt: &Vector3<f64>) -> Hermitian6 {
    let coupling = m.matrix().transpose() * field_mt * MT_TO_T;
    let mut h = Hermitian6::zeros();
    for (b, op) in ops.components().into_iter().enumerate() {
        h += op * Complex64::new(coupling[b], 0.0);
    }
    h
}

/// `H = Î·Q·Î + B·M·Î` in MHz; the quadratic Zeeman term is not modeled.
pub fn hamiltonian(q: &SymmetricTensor3, m: &SymmetricTensor3, field_mt: &Vector3<f64>) -> Hermitian6 {
    let ops = spin_operators();
    quadrupole_term(&ops, q) + zeeman_term(&ops, m, field_mt)
}

/// Eigenvalues of a Hermitian 6×6 matrix, ascending.
pub fn eigenvalues(h: &Hermitian6) -> [f64; 6] {
    let ev: Vector6<f64> = h.symmetric_eigenvalues();
    let mut out = [0.0; 6];
    out.copy_from_slice(ev.as_slice());
    out.sort_by(f64::total_cmp);
    out
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors as columns.
pub fn eigensystem(h: &Hermitian6) -> ([f64; 6], Hermitian6) {
    let eig = h.clone().symmetric_eigen();
    let mut idx = [0usize, 1, 2, 3, 4, 5];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = [0.0; 6];
    let mut vecs = Hermitian6::zeros();
    for (dst, &src) in idx.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vecs)
}

/// A state's Hamiltonian with the field-independent part precomputed.
///
/// Used wherever the same (Q, M) pair is evaluated at many fields.
#[derive(Debug, Clone)]
pub struct StateHamiltonian {
    quadrupole: Hermitian6,
    zeeman: Matrix3<f64>,
    components: [Hermitian6; 3],
    order: DoubletOrder,
}

impl StateHamiltonian {
    pub fn new(q: &SymmetricTensor3, m: &SymmetricTensor3) -> Self {
        let ops = spin_operators();
        StateHamiltonian {
            quadrupole: quadrupole_term(&ops, q),
            zeeman: *m.matrix(),
            components: [ops.ix, ops.iy, ops.iz],
            order: DoubletOrder::from_tensor(q),
        }
    }

    pub fn order(&self) -> DoubletOrder {
        self.order
    }

    pub fn at_field(&self, field_mt: &Vector3<f64>) -> Hermitian6 {
        let coupling = self.zeeman.transpose() * field_mt * MT_TO_T;
        let mut h = self.quadrupole;
        for (b, op) in self.components.iter().enumerate() {
            h += op * Complex64::new(coupling[b], 0.0);
        }
        h
    }

    pub fn levels(&self, field_mt: &Vector3<f64>) -> Result<LevelSet> {
        levels(&self.at_field(field_mt), self.order)
    }
}

/// Six hyperfine energies with their doublet pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    /// Energies in MHz, ascending.
    pub energies: [f64; 6],
    /// Level indices `(lower, upper)` of each doublet, indexed by
    /// [`Doublet::index`] (1/2, 3/2, 5/2).
    pub pairs: [(usize, usize); 3],
    /// Doublet splittings in kHz, indexed by [`Doublet::index`].
    pub splittings_khz: [f64; 3],
}

impl LevelSet {
    pub fn splitting_khz(&self, k: Doublet) -> f64 {
        self.splittings_khz[k.index()]
    }

    /// Zero-field style centre of a doublet, MHz.
    pub fn doublet_centre(&self, k: Doublet) -> f64 {
        let (a, b) = self.pairs[k.index()];
        0.5 * (self.energies[a] + self.energies[b])
    }

    /// Gaps between adjacent doublet centres in ascending-energy order, MHz.
    pub fn doublet_gaps(&self) -> [f64; 2] {
        let e = &self.energies;
        let c0 = 0.5 * (e[0] + e[1]);
        let c1 = 0.5 * (e[2] + e[3]);
        let c2 = 0.5 * (e[4] + e[5]);
        [c1 - c0, c2 - c1]
    }
}

/// Pairs sorted eigenvalues into adjacent doublets and labels them.
///
/// Fails with [`Error::DegeneracyAmbiguous`] once the Zeeman splitting is no
/// longer small against the quadrupole gaps (the weak-field model breaks).
pub fn levels(h: &Hermitian6, order: DoubletOrder) -> Result<LevelSet> {
    levels_from_energies(eigenvalues(h), order)
}

pub fn levels_from_energies(energies: [f64; 6], order: DoubletOrder) -> Result<LevelSet> {
    let e = energies;
    let intra = [e[1] - e[0], e[3] - e[2], e[5] - e[4]];
    let inter = (e[2] - e[1]).min(e[4] - e[3]);
    let widest = intra.iter().copied().fold(0.0, f64::max);
    if inter < 10.0 * widest {
        return Err(Error::DegeneracyAmbiguous {
            gap_mhz: inter,
            splitting_mhz: widest,
        });
    }
    let by_energy = [(0, 1), (2, 3), (4, 5)];
    let mut pairs = [(0, 0); 3];
    let mut splittings_khz = [0.0; 3];
    for k in Doublet::ALL {
        let slot = order.energy_rank(k);
        pairs[k.index()] = by_energy[slot];
        splittings_khz[k.index()] = intra[slot] * 1e3;
    }
    Ok(LevelSet {
        energies: e,
        pairs,
        splittings_khz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinops::{build_m, build_q, EulerAngles, QuadrupoleParams, ZeemanParams};

    fn ground_q() -> SymmetricTensor3 {
        build_q(
            &QuadrupoleParams::new(-12.3797, -2.735),
            &EulerAngles::from_degrees(-29.90, 53.48, 124.05),
        )
    }

    fn ground_m() -> SymmetricTensor3 {
        build_m(
            &ZeemanParams::new(4.30, 5.559, -10.891),
            &EulerAngles::from_degrees(105.25, 163.74, 124.56),
        )
    }

    fn max_abs(m: &Hermitian6) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_field_ground_gaps() {
        let h = hamiltonian(&ground_q(), &SymmetricTensor3::zero(), &Vector3::zeros());
        let lv = levels(&h, DoubletOrder::Inverted).unwrap();
        let mut gaps = lv.doublet_gaps();
        gaps.sort_by(f64::total_cmp);
        assert!((gaps[0] / 34.54 - 1.0).abs() < 0.01, "{gaps:?}");
        assert!((gaps[1] / 46.25 - 1.0).abs() < 0.01, "{gaps:?}");
        for s in lv.splittings_khz {
            assert!(s.abs() < 1e-6);
        }
    }

    #[test]
    fn zero_field_excited_gaps() {
        let q = build_q(
            &QuadrupoleParams::new(27.26, 5.85),
            &EulerAngles::from_degrees(165.30, 154.91, 107.81),
        );
        let h = hamiltonian(&q, &SymmetricTensor3::zero(), &Vector3::zeros());
        let lv = levels(&h, DoubletOrder::Normal).unwrap();
        let mut gaps = lv.doublet_gaps();
        gaps.sort_by(f64::total_cmp);
        assert!((gaps[0] / 75.0 - 1.0).abs() < 0.01, "{gaps:?}");
        assert!((gaps[1] / 102.0 - 1.0).abs() < 0.01, "{gaps:?}");
    }

    #[test]
    fn pure_zeeman_ladder() {
        let g = 7.0;
        let b = 3.0;
        let h = hamiltonian(
            &SymmetricTensor3::zero(),
            &SymmetricTensor3::from_diagonal([g; 3]),
            &Vector3::new(0.0, 0.0, b),
        );
        let ev = eigenvalues(&h);
        let want = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5].map(|m| g * b * 1e-3 * m);
        for i in 0..6 {
            assert!((ev[i] - want[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = hamiltonian(&ground_q(), &ground_m(), &Vector3::new(3.0, -7.0, 2.0));
        assert!(max_abs(&(h - h.adjoint())) < 1e-12);
    }

    #[test]
    fn weak_field_ground_splittings_below_400_khz() {
        // coil limits: 10 mT along X and Y, 5 mT along Z
        let sh = StateHamiltonian::new(&ground_q(), &ground_m());
        for b in [
            Vector3::new(10.0, 0.0, 0.0),
            Vector3::new(0.0, 10.0, 0.0),
            Vector3::new(0.0, 0.0, 5.0),
            Vector3::new(-10.0, 0.0, 0.0),
        ] {
            let lv = sh.levels(&b).unwrap();
            for s in lv.splittings_khz {
                assert!(s < 400.0, "{b:?}: {s}");
            }
        }
    }

    #[test]
    fn gauge_shift_keeps_splittings() {
        let h = hamiltonian(&ground_q(), &ground_m(), &Vector3::new(4.0, 1.0, -2.0));
        let shifted = h + Hermitian6::identity() * Complex64::new(123.4, 0.0);
        let a = levels(&h, DoubletOrder::Inverted).unwrap();
        let b = levels(&shifted, DoubletOrder::Inverted).unwrap();
        for k in 0..3 {
            assert!((a.splittings_khz[k] - b.splittings_khz[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn strong_field_is_ambiguous() {
        let h = hamiltonian(&ground_q(), &ground_m(), &Vector3::new(0.0, 0.0, 2000.0));
        assert!(matches!(
            levels(&h, DoubletOrder::Inverted),
            Err(Error::DegeneracyAmbiguous { .. })
        ));
    }

    #[test]
    fn state_hamiltonian_matches_direct_assembly() {
        let b = Vector3::new(1.0, 2.0, 3.0);
        let direct = hamiltonian(&ground_q(), &ground_m(), &b);
        let cached = StateHamiltonian::new(&ground_q(), &ground_m()).at_field(&b);
        assert!(max_abs(&(direct - cached)) < 1e-13);
    }

    #[test]
    fn eigensystem_diagonalizes() {
        let h = hamiltonian(&ground_q(), &ground_m(), &Vector3::new(1.0, 2.0, 3.0));
        let (vals, vecs) = eigensystem(&h);
        let d = vecs.adjoint() * h * vecs;
        for i in 0..6 {
            assert!((d[(i, i)].re - vals[i]).abs() < 1e-10);
        }
        assert!(max_abs(&(vecs.adjoint() * vecs - Hermitian6::identity())) < 1e-12);
    }
}
