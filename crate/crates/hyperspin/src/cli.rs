//! Argument parsing and dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperspin_core::spectra::SpiralScan;
use hyperspin_core::spinops::Frame;
use hyperspin_core::{reference, SiteModel, StateKind};

use crate::commands;
use crate::config::{load_measured, load_model, RunConfig};
use crate::error::{AppError, Result};
use crate::format::read_observations;
use crate::output::{Metadata, OutputSet, METADATA_FILE};
use crate::threads;

#[derive(Debug, Parser)]
#[command(name = "hyperspin", version, about = "Nuclear-spin Hamiltonians of I = 5/2 rare-earth ions under weak magnetic fields")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Run configuration JSON; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Site model JSON (built-in reference model when absent).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Spiral scan `Bx,By,Bz,N` (mT, mT, mT, points).
    #[arg(long, global = true, value_parser = parse_scan)]
    pub scan: Option<SpiralScan>,
    /// Line width (FWHM), kHz.
    #[arg(long = "width-khz", global = true)]
    pub width_khz: Option<f64>,
    /// Optical transition `k,l` with k, l in {1, 3, 5}.
    #[arg(long, global = true, value_parser = parse_transition)]
    pub transition: Option<[u8; 2]>,
    #[arg(long, global = true, value_enum)]
    pub frame: Option<FrameArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Lab,
    Crystal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Ground,
    Excited,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spiral-scan lines, fit observations, profiles and FID traces.
    Synth {
        /// Also write heterodyne FID traces.
        #[arg(long)]
        fid: bool,
        /// Add Gaussian noise to the observations.
        #[arg(long)]
        noisy: bool,
        /// Skip the per-point absorption profiles.
        #[arg(long)]
        no_profiles: bool,
    },
    /// Staged fit of one state's parameters to an observation CSV.
    Fit {
        /// Observation CSV.
        #[arg(long)]
        obs: Option<PathBuf>,
        #[arg(long, value_enum)]
        target: Option<StateArg>,
    },
    /// The eight sign solutions of each state.
    Solutions,
    /// Zero-field branching tables and sign-pairing ranking.
    Branching {
        /// Measured table JSON with `values` and `errors`.
        #[arg(long)]
        measured: Option<PathBuf>,
        /// Only consider all-positive excited g values.
        #[arg(long)]
        excited_positive: bool,
    },
    /// Level-resolved transition strengths along the scan.
    Map,
    /// Splitting surfaces and their ellipsoids.
    Ellipsoid,
}

fn parse_scan(s: &str) -> std::result::Result<SpiralScan, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err("expected Bx,By,Bz,N".into());
    }
    let f = |i: usize| parts[i].parse::<f64>().map_err(|_| format!("`{}` is not a number", parts[i]));
    let n = parts[3].parse::<usize>().map_err(|_| format!("`{}` is not a point count", parts[3]))?;
    SpiralScan::new(f(0)?, f(1)?, f(2)?, n).map_err(|e| e.to_string())
}

fn parse_transition(s: &str) -> std::result::Result<[u8; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [k, l] => {
            let k: u8 = k.parse().map_err(|_| format!("`{k}` is not 1, 3 or 5"))?;
            let l: u8 = l.parse().map_err(|_| format!("`{l}` is not 1, 3 or 5"))?;
            hyperspin_core::spectra::Transition::new(k, l).map_err(|e| e.to_string())?;
            Ok([k, l])
        }
        _ => Err("expected k,l".into()),
    }
}

/// Configuration after merging the optional file with the flags.
pub fn resolve_config(common: &Common, command: &Command) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.model {
        cfg.model = Some(m.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(s) = common.scan {
        cfg.scan = s;
    }
    if let Some(w) = common.width_khz {
        cfg.width_khz = w;
    }
    if let Some(t) = common.transition {
        cfg.transition = t;
    }
    if let Some(f) = common.frame {
        cfg.frame = match f {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Crystal => Frame::Crystal,
        };
    }
    match command {
        Command::Synth { fid, noisy, no_profiles } => {
            if *fid && cfg.fid.is_none() {
                cfg.fid = Some(Default::default());
            }
            cfg.observations.noisy |= *noisy;
            if *no_profiles {
                cfg.profile.enabled = false;
            }
        }
        Command::Fit { obs, target } => {
            if let Some(o) = obs {
                cfg.fit.observations = Some(o.clone());
            }
            if let Some(t) = target {
                cfg.fit.target = match t {
                    StateArg::Ground => StateKind::Ground,
                    StateArg::Excited => StateKind::Excited,
                };
            }
        }
        Command::Branching { measured, excited_positive } => {
            if let Some(m) = measured {
                cfg.branching.measured = Some(m.clone());
            }
            cfg.branching.excited_all_positive |= *excited_positive;
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth { .. } => "synth",
        Command::Fit { .. } => "fit",
        Command::Solutions => "solutions",
        Command::Branching { .. } => "branching",
        Command::Map => "map",
        Command::Ellipsoid => "ellipsoid",
    }
}

fn site_model(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<SiteModel> {
    match &cfg.model {
        Some(p) => load_model(p),
        None => {
            notes.push("model: built-in reference site".into());
            Ok(reference::site())
        }
    }
}

/// Runs one command and returns the files it produced (already written
/// when an output directory is configured).
pub fn execute(common: &Common, command: &Command) -> Result<OutputSet> {
    let cfg = resolve_config(common, command)?;
    let mut notes = Vec::new();
    let site = site_model(&cfg, &mut notes)?;
    let mut seed = None;
    let outputs = threads::install(|| -> Result<OutputSet> {
        match command {
            Command::Synth { .. } => {
                seed = Some(cfg.seed);
                commands::synth(&site, &cfg, cfg.fid.is_some())
            }
            Command::Fit { .. } => {
                seed = Some(cfg.seed);
                let path = cfg
                    .fit
                    .observations
                    .as_deref()
                    .ok_or_else(|| AppError::Config("fit needs --obs <csv>".into()))?;
                let obs = read_observations(path)?;
                commands::fit(&site, &obs, &cfg).map(|(_, o)| o)
            }
            Command::Solutions => commands::solutions(&site, cfg.frame),
            Command::Branching { .. } => {
                let measured = cfg.branching.measured.as_deref().map(load_measured).transpose()?;
                commands::branching(&site, measured.as_ref(), cfg.branching.excited_all_positive)
            }
            Command::Map => commands::map(&site, &cfg),
            Command::Ellipsoid => commands::ellipsoid(&site, &cfg),
        }
    })??;
    let out_dir: &Path = cfg.out.as_deref().unwrap_or(Path::new("hyperspin-out"));
    outputs.commit(out_dir)?;
    let mut meta = Metadata::new(command_name(command), seed, threads::effective_threads()?, &outputs);
    meta.notes = notes;
    let mut m = OutputSet::new();
    m.add_json(METADATA_FILE, &meta)?;
    m.commit(out_dir)?;
    Ok(outputs)
}

/// Entry point of the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli.common, &cli.command) {
        Ok(out) => {
            for p in out.paths() {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
