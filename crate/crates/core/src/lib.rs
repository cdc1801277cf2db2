//! Effective nuclear-spin Hamiltonians for non-Kramers rare-earth ions with
//! I = 5/2 (e.g. ¹⁵¹Eu³⁺ in Y₂SiO₅) under weak magnetic fields.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`spinops`]: Euler rotations, quadrupole/Zeeman tensors, spin operators,
//!   Hamiltonian assembly and hyperfine level sets.
//! * [`symmetry`]: C2 magnetic subsites and the sign-flip solution families.
//! * [`perturb`]: first-order doublet splittings, splitting ellipsoids and the
//!   warm-start estimators used by the bootstrap fit.
//! * [`spectra`]: spiral field scans, hole/antihole line models and
//!   absorption profiles.
//! * [`fitting`]: residual model, simulated annealing, Levenberg–Marquardt
//!   refinement and the staged bootstrap fit.
//! * [`branching`]: optical branching ratios, solution selection, transition
//!   maps and quenching diagnostics.
//!
//! Units: energies in MHz, fields in mT, Zeeman tensors in MHz/T, line
//! offsets in kHz, angles in degrees at every user-facing boundary.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod branching;
pub mod error;
pub mod fitting;
pub mod lsq;
pub mod model;
pub mod perturb;
pub mod reference;
pub mod spectra;
pub mod spinops;
pub mod symmetry;

pub use error::{Error, Result};
pub use model::{SiteModel, StateKind, StateModel};
