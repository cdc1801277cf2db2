use serde::{Deserialize, Serialize};

use crate::model::{SiteModel, StateKind, StateModel};
use crate::spinops::{EulerAngles, QuadrupoleParams, ZeemanParams};
use crate::symmetry::C2Axis;

/// The eleven free parameters of one state: Q and M Euler angles (degrees),
/// principal M values (MHz/T) and the C2 axis (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParams {
    #[serde(rename = "alpha_Q")]
    pub alpha_q: f64,
    #[serde(rename = "beta_Q")]
    pub beta_q: f64,
    #[serde(rename = "gamma_Q")]
    pub gamma_q: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    #[serde(rename = "alpha_M")]
    pub alpha_m: f64,
    #[serde(rename = "beta_M")]
    pub beta_m: f64,
    #[serde(rename = "gamma_M")]
    pub gamma_m: f64,
    #[serde(rename = "alpha_C2")]
    pub alpha_c2: f64,
    #[serde(rename = "beta_C2")]
    pub beta_c2: f64,
}

impl FitParams {
    pub const LEN: usize = 11;

    pub const NAMES: [&'static str; 11] = [
        "alpha_Q", "beta_Q", "gamma_Q", "g1", "g2", "g3", "alpha_M", "beta_M", "gamma_M", "alpha_C2", "beta_C2",
    ];

    /// Indices of the angle-valued entries.
    pub const ANGLES: [usize; 8] = [0, 1, 2, 6, 7, 8, 9, 10];

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.alpha_q,
            self.beta_q,
            self.gamma_q,
            self.g1,
            self.g2,
            self.g3,
            self.alpha_m,
            self.beta_m,
            self.gamma_m,
            self.alpha_c2,
            self.beta_c2,
        ]
    }

    pub fn from_array(a: [f64; 11]) -> Self {
        FitParams {
            alpha_q: a[0],
            beta_q: a[1],
            gamma_q: a[2],
            g1: a[3],
            g2: a[4],
            g3: a[5],
            alpha_m: a[6],
            beta_m: a[7],
            gamma_m: a[8],
            alpha_c2: a[9],
            beta_c2: a[10],
        }
    }

    pub fn from_parts(q_angles: &EulerAngles, g: &ZeemanParams, m_angles: &EulerAngles, c2: &C2Axis) -> Self {
        let q = q_angles.degrees();
        let m = m_angles.degrees();
        FitParams::from_array([q[0], q[1], q[2], g.0[0], g.0[1], g.0[2], m[0], m[1], m[2], c2.alpha, c2.beta])
    }

    pub fn from_site(site: &SiteModel, kind: StateKind) -> Self {
        let s = site.state(kind);
        FitParams::from_parts(&s.q_angles, &s.zeeman, &s.m_angles, &site.c2)
    }

    pub fn q_angles(&self) -> EulerAngles {
        EulerAngles::from_degrees(self.alpha_q, self.beta_q, self.gamma_q)
    }

    pub fn m_angles(&self) -> EulerAngles {
        EulerAngles::from_degrees(self.alpha_m, self.beta_m, self.gamma_m)
    }

    pub fn zeeman(&self) -> ZeemanParams {
        ZeemanParams::new(self.g1, self.g2, self.g3)
    }

    pub fn c2(&self) -> C2Axis {
        C2Axis::new(self.alpha_c2, self.beta_c2)
    }

    pub fn state_model(&self, quadrupole: QuadrupoleParams) -> StateModel {
        StateModel {
            quadrupole,
            q_angles: self.q_angles(),
            zeeman: self.zeeman(),
            m_angles: self.m_angles(),
        }
    }

    /// Writes the parameters into `site` for state `kind`, keeping its D, E.
    pub fn apply(&self, site: &mut SiteModel, kind: StateKind) {
        let quad = site.state(kind).quadrupole;
        *site.state_mut(kind) = self.state_model(quad);
        site.c2 = self.c2();
    }

    /// Same model with angles wrapped to their canonical ranges.
    pub fn canonical(&self) -> Self {
        let q = self.q_angles().canonical();
        let m = self.m_angles().canonical();
        FitParams::from_parts(&q, &self.zeeman(), &m, &self.c2().canonical())
    }
}

/// Which of the eleven parameters are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamMask(pub [bool; 11]);

impl ParamMask {
    pub const ALL: ParamMask = ParamMask([true; 11]);

    /// g values and M angles only.
    pub const ZEEMAN: ParamMask = ParamMask([false, false, false, true, true, true, true, true, true, false, false]);

    pub fn free(&self) -> impl Iterator<Item = usize> + '_ {
        (0..11).filter(|&i| self.0[i])
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}
