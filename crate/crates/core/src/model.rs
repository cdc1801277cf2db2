//! Per-state and per-site parameter sets.

use serde::{Deserialize, Serialize};

use crate::spinops::{build_m, build_q, EulerAngles, QuadrupoleParams, SymmetricTensor3, ZeemanParams};
use crate::symmetry::C2Axis;

/// Electronic state a [`StateModel`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Ground,
    Excited,
}

/// Effective nuclear-spin Hamiltonian parameters of one electronic state,
/// expressed in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateModel {
    pub quadrupole: QuadrupoleParams,
    pub q_angles: EulerAngles,
    pub zeeman: ZeemanParams,
    pub m_angles: EulerAngles,
}

impl StateModel {
    pub fn q_tensor(&self) -> SymmetricTensor3 {
        build_q(&self.quadrupole, &self.q_angles)
    }

    pub fn m_tensor(&self) -> SymmetricTensor3 {
        build_m(&self.zeeman, &self.m_angles)
    }

    pub fn is_valid(&self) -> bool {
        let angles_ok = [self.q_angles, self.m_angles]
            .iter()
            .all(|e| e.alpha.is_finite() && e.beta.is_finite() && e.gamma.is_finite());
        self.quadrupole.is_valid() && self.zeeman.is_valid() && angles_ok
    }
}

/// Both electronic states of one crystallographic site, its C2 axis and the
/// in-plane crystal angle γ that completes the lab → (D1, D2, b) rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteModel {
    pub ground: StateModel,
    pub excited: StateModel,
    pub c2: C2Axis,
    /// degrees
    pub gamma: f64,
}

impl SiteModel {
    pub fn state(&self, kind: StateKind) -> &StateModel {
        match kind {
            StateKind::Ground => &self.ground,
            StateKind::Excited => &self.excited,
        }
    }

    pub fn state_mut(&mut self, kind: StateKind) -> &mut StateModel {
        match kind {
            StateKind::Ground => &mut self.ground,
            StateKind::Excited => &mut self.excited,
        }
    }

    pub fn frame(&self) -> crate::spinops::FrameTransform {
        crate::spinops::FrameTransform::new(self.c2.alpha, self.c2.beta, self.gamma)
    }

    pub fn is_valid(&self) -> bool {
        self.ground.is_valid()
            && self.excited.is_valid()
            && self.c2.alpha.is_finite()
            && self.c2.beta.is_finite()
            && self.gamma.is_finite()
    }
}
