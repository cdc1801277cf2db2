//! Run configuration: a JSON file whose keys are checked before any
//! computation, overridden field by field from the command line.

use std::path::{Path, PathBuf};

use hyperspin_core::branching::MeasuredTable;
use hyperspin_core::fitting::AnnealSchedule;
use hyperspin_core::spectra::{LineShape, LineWeights, SpiralScan, Transition};
use hyperspin_core::spinops::Frame;
use hyperspin_core::{SiteModel, StateKind};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const CONFIG_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub version: String,
    /// Site model JSON.
    pub model: Option<PathBuf>,
    /// Output directory.
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub scan: SpiralScan,
    pub width_khz: f64,
    pub shape: LineShape,
    pub weights: LineWeights,
    /// `[k, l]`
    pub transition: [u8; 2],
    pub frame: Frame,
    pub profile: ProfileConfig,
    pub fid: Option<FidConfig>,
    pub observations: ObservationConfig,
    pub fit: FitConfig,
    pub branching: BranchingConfig,
    pub ellipsoid: EllipsoidConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION.into(),
            model: None,
            out: None,
            seed: 0,
            scan: SpiralScan::standard(),
            width_khz: 10.0,
            shape: LineShape::Lorentzian,
            weights: LineWeights::default(),
            transition: [1, 5],
            frame: Frame::Lab,
            profile: ProfileConfig::default(),
            fid: None,
            observations: ObservationConfig::default(),
            fit: FitConfig::default(),
            branching: BranchingConfig::default(),
            ellipsoid: EllipsoidConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    /// Write one absorption profile per scan point.
    pub enabled: bool,
    pub span_khz: f64,
    pub step_khz: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            enabled: true,
            span_khz: 600.0,
            step_khz: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidConfig {
    pub lo_detune_mhz: f64,
    pub delay_us: f64,
}

impl Default for FidConfig {
    fn default() -> Self {
        FidConfig {
            lo_detune_mhz: 4.0,
            delay_us: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationConfig {
    /// `[k, l]` pairs written to the observation CSV.
    pub transitions: Vec<[u8; 2]>,
    pub sigma_khz: f64,
    /// Add Gaussian position noise of `sigma_khz`.
    pub noisy: bool,
    pub both_subsites: bool,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            transitions: vec![[1, 5], [3, 3], [5, 1]],
            sigma_khz: 1.0,
            noisy: false,
            both_subsites: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Observation CSV.
    pub observations: Option<PathBuf>,
    pub target: StateKind,
    pub gate_khz: f64,
    pub g_bounds: [f64; 2],
    pub include_fixed_state: bool,
    pub schedule: AnnealSchedule,
    pub max_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        let opts = hyperspin_core::fitting::FitOptions::default();
        FitConfig {
            observations: None,
            target: StateKind::Excited,
            gate_khz: 30.0,
            g_bounds: [-20.0, 20.0],
            include_fixed_state: true,
            schedule: opts.schedule,
            max_iterations: opts.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchingConfig {
    /// Measured table JSON (`values`, `errors`).
    pub measured: Option<PathBuf>,
    /// Restrict excited candidates to all-positive g values.
    pub excited_all_positive: bool,
}

impl Default for BranchingConfig {
    fn default() -> Self {
        BranchingConfig {
            measured: None,
            excited_all_positive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EllipsoidConfig {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        EllipsoidConfig { n_theta: 36, n_phi: 72 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::input(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| AppError::input(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AppError::Config(m.to_string()));
        if self.version != CONFIG_VERSION {
            return Err(AppError::Config(format!("version: expected \"{CONFIG_VERSION}\", found \"{}\"", self.version)));
        }
        SpiralScan::new(self.scan.bx, self.scan.by, self.scan.bz, self.scan.n).map_err(|e| AppError::Config(format!("scan: {e}")))?;
        if !(self.width_khz > 0.0 && self.width_khz.is_finite()) {
            return bad("width_khz must be positive");
        }
        self.transition()?;
        for t in &self.observations.transitions {
            Transition::new(t[0], t[1]).map_err(|_| AppError::Config(format!("observations.transitions: ({},{}) is not a transition", t[0], t[1])))?;
        }
        if !(self.observations.sigma_khz > 0.0) {
            return bad("observations.sigma_khz must be positive");
        }
        if !(self.profile.span_khz > 0.0 && self.profile.step_khz > 0.0) {
            return bad("profile.span_khz and profile.step_khz must be positive");
        }
        if let Some(f) = &self.fid {
            if !(f.lo_detune_mhz > 0.0 && f.delay_us >= 0.0) {
                return bad("fid.lo_detune_mhz must be positive and fid.delay_us non-negative");
            }
        }
        if !(self.fit.gate_khz > 0.0) {
            return bad("fit.gate_khz must be positive");
        }
        if !(self.fit.g_bounds[0] < self.fit.g_bounds[1]) {
            return bad("fit.g_bounds must be increasing");
        }
        self.fit.schedule.validate().map_err(|e| AppError::Config(format!("fit.schedule: {e}")))?;
        if self.ellipsoid.n_theta < 2 || self.ellipsoid.n_phi < 3 {
            return bad("ellipsoid grid needs n_theta >= 2 and n_phi >= 3");
        }
        Ok(())
    }

    pub fn transition(&self) -> Result<Transition> {
        let [k, l] = self.transition;
        Transition::new(k, l).map_err(|_| AppError::Config(format!("transition: ({k},{l}) must use labels 1, 3 or 5")))
    }

    pub fn observation_transitions(&self) -> Vec<Transition> {
        self.observations
            .transitions
            .iter()
            .filter_map(|t| Transition::new(t[0], t[1]).ok())
            .collect()
    }
}

/// Reads and validates a site model.
pub fn load_model(path: &Path) -> Result<SiteModel> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::input(path, e))?;
    let model: SiteModel = serde_json::from_str(&text).map_err(|e| AppError::input(path, e))?;
    if !model.is_valid() {
        return Err(AppError::Model(format!("{}: parameters must be finite with D != 0", path.display())));
    }
    Ok(model)
}

/// Measured branching table with per-entry errors.
pub fn load_measured(path: &Path) -> Result<MeasuredTable> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::input(path, e))?;
    let m: MeasuredTable = serde_json::from_str(&text).map_err(|e| AppError::input(path, e))?;
    let flat = m.values.iter().flatten().chain(m.errors.iter().flatten());
    if flat.clone().any(|v| !v.is_finite()) || m.errors.iter().flatten().any(|e| *e <= 0.0) {
        return Err(AppError::input(path, "values must be finite and errors positive"));
    }
    for (i, row) in m.values.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 0.1 {
            return Err(AppError::input(path, format!("row {} sums to {s}, expected about 1", i + 1)));
        }
    }
    Ok(m)
}
