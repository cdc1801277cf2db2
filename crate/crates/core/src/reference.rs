//! Published ¹⁵¹Eu³⁺:Y₂SiO₅ site-I parameters and branching tables.
//!
//! The crystal-frame angles are refined to two decimals so that the stored
//! model reproduces the published (D1, D2, b) tensors; both sets lie within
//! the quoted angle uncertainties.

use crate::model::{SiteModel, StateModel};
use crate::spinops::{EulerAngles, QuadrupoleParams, ZeemanParams};
use crate::symmetry::C2Axis;

/// Free-ion nuclear gyromagnetic factor of ¹⁵¹Eu, MHz/T.
pub const G_FREE_ION: f64 = 10.56;

pub fn ground_state() -> StateModel {
    StateModel {
        quadrupole: QuadrupoleParams::new(-12.3797, -2.735),
        q_angles: EulerAngles::from_degrees(-29.90, 53.48, 124.05),
        zeeman: ZeemanParams::new(4.30, 5.559, -10.891),
        m_angles: EulerAngles::from_degrees(105.25, 163.74, 124.56),
    }
}

pub fn excited_state() -> StateModel {
    StateModel {
        quadrupole: QuadrupoleParams::new(27.26, 5.85),
        q_angles: EulerAngles::from_degrees(165.2982, 154.9117, 107.8092),
        zeeman: ZeemanParams::new(9.11, 9.158, 9.069),
        m_angles: EulerAngles::from_degrees(70.53, 5.0, 62.17),
    }
}

/// Site model with the rounded frame angles (−140°, 172°, −51°).
pub fn site_rounded() -> SiteModel {
    SiteModel {
        ground: ground_state(),
        excited: excited_state(),
        c2: C2Axis::new(-140.0, 172.0),
        gamma: -51.0,
    }
}

/// Site model with refined frame angles (−140.24°, 172.29°, −50.99°).
pub fn site() -> SiteModel {
    SiteModel {
        c2: C2Axis::new(-140.24, 172.29),
        gamma: -50.99,
        ..site_rounded()
    }
}

/// Published crystal-frame tensors, row major: Q1(g), M1(g), Q1(e), M1(e).
pub const CRYSTAL_Q_GROUND: [[f64; 3]; 3] = [
    [-3.0685, -2.4714, 6.7354],
    [-2.4714, -4.2007, 2.4588],
    [6.7354, 2.4588, -5.1106],
];
pub const CRYSTAL_M_GROUND: [[f64; 3]; 3] = [
    [3.8330, -0.896, -4.7029],
    [-0.8958, 3.3680, -3.7497],
    [-4.7029, -3.7497, -8.2410],
];
pub const CRYSTAL_Q_EXCITED: [[f64; 3]; 3] = [
    [4.8095, -1.5956, 13.0154],
    [-1.5956, 4.3611, 7.0101],
    [13.0154, 7.0101, 18.0894],
];
pub const CRYSTAL_M_EXCITED: [[f64; 3]; 3] = [
    [9.1340, -0.0248, 0.0032],
    [-0.0248, 9.1347, -0.0092],
    [0.0032, -0.0092, 9.0713],
];

/// Computed relative oscillator strengths; rows ground ±1/2, ±3/2, ±5/2,
/// columns excited ±1/2, ±3/2, ±5/2.
pub const BRANCHING_CALC: [[f64; 3]; 3] = [[0.02, 0.18, 0.80], [0.12, 0.71, 0.17], [0.87, 0.10, 0.03]];
/// Measured relative oscillator strengths, same layout.
pub const BRANCHING_EXP: [[f64; 3]; 3] = [[0.03, 0.22, 0.75], [0.12, 0.68, 0.20], [0.85, 0.10, 0.05]];
/// Uncertainty of every measured entry.
pub const BRANCHING_EXP_ERR: f64 = 0.03;

/// The eight ground-state Q orientations (degrees) of the sign-flip family,
/// in the order +++, −++, +−+, ++−, −+−, +−−, −−+, −−−.
pub const GROUND_FAMILY_Q: [[f64; 3]; 8] = [
    [-149.96, 93.88, 124.10],
    [157.85, 95.76, 97.23],
    [140.59, -124.22, 88.90],
    [-29.90, 53.48, 124.05],
    [39.41, 55.78, 91.10],
    [22.14, 84.24, -82.77],
    [-150.10, 126.52, -55.95],
    [-30.04, 86.12, -55.90],
];

/// Excited-state counterpart of [`GROUND_FAMILY_Q`].
pub const EXCITED_FAMILY_Q: [[f64; 3]; 8] = [
    [165.2982, 154.9117, 107.8092],
    [191.8467, 151.8768, 335.2023],
    [212.0108, 149.7404, 172.8981],
    [28.1173, 32.8277, 96.0319],
    [327.9892, 30.2596, 352.8981],
    [348.2384, 28.0900, 155.1711],
    [151.8827, 147.1723, 276.0319],
    [11.5272, 25.0883, 287.8092],
];

/// Index (0-based) of the published ground solution inside its family.
pub const GROUND_SOLUTION_INDEX: usize = 3;
