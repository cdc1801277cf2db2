//! Angular-momentum operators, Euler rotations, interaction tensors,
//! Hamiltonian assembly and hyperfine level analysis for I = 5/2.

mod euler;
mod hamiltonian;
mod operators;
mod tensor;

pub use euler::{
    euler_rotation, frame_misorientation, rot_y, rot_z, wrap_deg, wrap_pi, EulerAngles,
    EulerDegrees,
};
pub use hamiltonian::{
    eigensystem, eigenvalues, hamiltonian, levels, levels_from_energies, quadrupole_term,
    zeeman_term, LevelSet, StateHamiltonian,
};
pub use operators::{spin_operators, Hermitian6, SpinOperators, DIM, SPIN};
pub use tensor::{
    build_m, build_q, Frame, FrameTransform, QuadrupoleParams, SymmetricTensor3, ZeemanParams,
};

use serde::{Deserialize, Serialize};

/// Zero-field doublet label ±k/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Doublet {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl Doublet {
    pub const ALL: [Doublet; 3] = [Doublet::Half, Doublet::ThreeHalves, Doublet::FiveHalves];

    pub fn index(self) -> usize {
        match self {
            Doublet::Half => 0,
            Doublet::ThreeHalves => 1,
            Doublet::FiveHalves => 2,
        }
    }

    /// The odd integer 2|m|: 1, 3 or 5.
    pub fn twice_m(self) -> u8 {
        match self {
            Doublet::Half => 1,
            Doublet::ThreeHalves => 3,
            Doublet::FiveHalves => 5,
        }
    }

    pub fn from_twice_m(k: u8) -> Option<Doublet> {
        match k {
            1 => Some(Doublet::Half),
            3 => Some(Doublet::ThreeHalves),
            5 => Some(Doublet::FiveHalves),
            _ => None,
        }
    }

    pub fn from_index(i: usize) -> Doublet {
        Doublet::ALL[i]
    }
}

/// Energy ordering of the zero-field doublets.
///
/// Labels follow the axial limit E → 0, where the ±m doublet sits at D·m²
/// (up to a constant). A positive D puts ±1/2 lowest, a negative D inverts
/// the ladder; a non-zero E never reorders the doublets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoubletOrder {
    /// D > 0: ±1/2, ±3/2, ±5/2 with increasing energy.
    Normal,
    /// D < 0: ±5/2, ±3/2, ±1/2 with increasing energy.
    Inverted,
}

impl DoubletOrder {
    pub fn from_sign(d: f64) -> Self {
        if d < 0.0 {
            DoubletOrder::Inverted
        } else {
            DoubletOrder::Normal
        }
    }

    /// D is the principal value of largest magnitude when |3E/D| ≤ 1.
    pub fn from_tensor(q: &SymmetricTensor3) -> Self {
        let pv = q.principal_values();
        let d = pv
            .iter()
            .copied()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        DoubletOrder::from_sign(d)
    }

    /// Position (0 = lowest) of doublet `k` in ascending energy.
    pub fn energy_rank(self, k: Doublet) -> usize {
        match self {
            DoubletOrder::Normal => k.index(),
            DoubletOrder::Inverted => 2 - k.index(),
        }
    }

    pub fn doublet_at_rank(self, rank: usize) -> Doublet {
        match self {
            DoubletOrder::Normal => Doublet::from_index(rank),
            DoubletOrder::Inverted => Doublet::from_index(2 - rank),
        }
    }
}
