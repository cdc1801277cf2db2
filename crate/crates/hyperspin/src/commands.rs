//! Command bodies. Each builds the complete set of output files in memory
//! and returns it; the caller commits it.

use std::fmt::Write as _;

use hyperspin_core::branching::{
    select_solution, subsite_averaged_table, subsite_table, transition_map, BranchingTable, MeasuredTable, SolutionRanking,
};
use hyperspin_core::fitting::{bootstrap_fit, synthetic_observations, FitOptions, FitParams, FitResult, FitSetup, SyntheticSpec};
use hyperspin_core::perturb::{direction, estimate_q_orientation, SplittingSurface};
use hyperspin_core::spectra::{site_lines_with, synth_profile, ProfileGrid, SiteSplittings, Subsite};
use hyperspin_core::spinops::{Doublet, EulerAngles, Frame, SymmetricTensor3, ZeemanParams};
use hyperspin_core::symmetry::{enumerate_solutions, SolutionFamily};
use hyperspin_core::{SiteModel, StateKind, StateModel};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{AppError, Result};
use crate::fid::fid_trace;
use crate::format::{fid_csv, fmt9, lines_csv, observations_csv, profile_csv, ScanLines};
use crate::output::OutputSet;

/// Spiral-scan lines for one transition, observations for the fit,
/// optional per-point profiles and FID traces.
pub fn synth(site: &SiteModel, cfg: &RunConfig, with_fid: bool) -> Result<OutputSet> {
    let tr = cfg.transition()?;
    let eval = SiteSplittings::new(site);
    let scan = cfg.scan;
    let per_point: Vec<_> = (1..=scan.n)
        .into_par_iter()
        .map(|n| -> Result<_> {
            let b = scan.field(n)?;
            let lines = site_lines_with(&eval, &b, tr, &cfg.weights)?;
            Ok((n, scan.t(n)?, b, lines))
        })
        .collect::<Result<_>>()?;
    let mut out = OutputSet::new();
    out.add(
        "lines.csv",
        lines_csv(per_point.iter().map(|(n, t, b, lines)| ScanLines {
            n: *n,
            t: *t,
            field_mt: *b,
            lines,
        })),
    );

    let spec = SyntheticSpec {
        scan,
        transitions: cfg.observation_transitions(),
        sigma_khz: cfg.observations.sigma_khz,
        noisy: cfg.observations.noisy,
        seed: cfg.seed,
        both_subsites: cfg.observations.both_subsites,
    };
    out.add("observations.csv", observations_csv(&synthetic_observations(site, &spec)?));

    if cfg.profile.enabled || with_fid {
        let grid = ProfileGrid::new(cfg.profile.span_khz, cfg.profile.step_khz)?;
        let profiles: Vec<_> = per_point
            .par_iter()
            .map(|(_, _, _, lines)| synth_profile(lines, cfg.width_khz, &grid, cfg.shape))
            .collect::<std::result::Result<_, _>>()?;
        if cfg.profile.enabled {
            for ((n, ..), p) in per_point.iter().zip(&profiles) {
                out.add(format!("profiles/profile_{n:04}.csv"), profile_csv(p));
            }
        }
        if with_fid {
            let fc = cfg.fid.unwrap_or_default();
            // one seeded LO phase per shot
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4649_4400);
            let phases: Vec<f64> = (0..profiles.len()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            let traces: Vec<_> = profiles
                .par_iter()
                .zip(&phases)
                .map(|(p, &phi)| fid_trace(p, fc.lo_detune_mhz, fc.delay_us, phi))
                .collect::<Result<_>>()?;
            let mut index = String::from("n,phase_rad,delay_us,lo_detune_MHz,dt_us\n");
            for ((n, ..), t) in per_point.iter().zip(&traces) {
                out.add(format!("fid/fid_{n:04}.csv"), fid_csv(t));
                let _ = writeln!(index, "{n},{},{},{},{}", fmt9(t.phase), fmt9(t.delay_us), fmt9(t.lo_detune_mhz), fmt9(t.dt_us));
            }
            out.add("fid/index.csv", index);
        }
    }
    Ok(out)
}

fn fit_setup(site: &SiteModel, cfg: &RunConfig) -> FitSetup {
    let mut s = FitSetup::new(*site, cfg.fit.target);
    s.gate_khz = cfg.fit.gate_khz;
    s.g_bounds = cfg.fit.g_bounds;
    s.include_fixed_state = cfg.fit.include_fixed_state;
    s
}

/// Staged fit of the target state's eleven parameters.
pub fn fit(site: &SiteModel, obs: &hyperspin_core::fitting::ObservationSet, cfg: &RunConfig) -> Result<(FitResult, OutputSet)> {
    let setup = fit_setup(site, cfg);
    setup.validate().map_err(|e| AppError::Config(e.to_string()))?;
    let opts = FitOptions {
        schedule: cfg.fit.schedule,
        seed: cfg.seed,
        max_iterations: cfg.fit.max_iterations,
    };
    let res = bootstrap_fit(obs, &setup, &opts).map_err(AppError::Fit)?;
    let mut out = OutputSet::new();
    out.add_json("fit_result.json", &res)?;
    out.add("fit_summary.txt", fit_summary(&res));
    Ok((res, out))
}

/// Parameter table with one-sigma errors.
pub fn fit_summary(r: &FitResult) -> String {
    let mut s = String::new();
    let state = match r.target {
        StateKind::Ground => "ground",
        StateKind::Excited => "excited",
    };
    let _ = writeln!(s, "{:<12} {:>14} {:>12}", "parameter", state, "error");
    let _ = writeln!(s, "{:<12} {:>14} {:>12}", "D, MHz", fmt9(r.quadrupole.d), "fixed");
    let _ = writeln!(s, "{:<12} {:>14} {:>12}", "E, MHz", fmt9(r.quadrupole.e), "fixed");
    let v = r.params.to_array();
    let e = r.std_errors.to_array();
    for i in 0..FitParams::LEN {
        let unit = if (3..6).contains(&i) { "MHz/T" } else { "deg" };
        let _ = writeln!(s, "{:<12} {:>14.4} {:>12.4}", format!("{}, {unit}", FitParams::NAMES[i]), v[i], e[i]);
    }
    let _ = writeln!(s, "rms residual {:.4} kHz over {} lines", r.rms_khz, r.residuals.len());
    let _ = writeln!(s, "objective evaluations {}", r.evaluations);
    s
}

fn frame_matrix(site: &SiteModel, frame: Frame) -> Matrix3<f64> {
    match frame {
        Frame::Lab => Matrix3::identity(),
        Frame::Crystal => *site.frame().matrix(),
    }
}

/// Principal-frame Euler angles (degrees) seen from `frame`.
fn angles_in(site: &SiteModel, frame: Frame, e: &EulerAngles) -> [f64; 3] {
    EulerAngles::from_matrix(&(frame_matrix(site, frame) * e.matrix())).orientation_canonical().degrees()
}

fn tensor_in(site: &SiteModel, frame: Frame, t: &SymmetricTensor3) -> [[f64; 3]; 3] {
    let m = site.frame().express(t, frame);
    let m = m.matrix();
    core::array::from_fn(|i| core::array::from_fn(|j| m[(i, j)]))
}

#[derive(Serialize)]
struct MemberRow {
    solution: usize,
    signs: String,
    g: [f64; 3],
    q_angles_deg: [f64; 3],
    m_angles_deg: [f64; 3],
    q_tensor: [[f64; 3]; 3],
    m_tensor: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct SolutionsFile {
    frame: Frame,
    ground: Vec<MemberRow>,
    excited: Vec<MemberRow>,
}

fn member_rows(site: &SiteModel, frame: Frame, fam: &SolutionFamily) -> Vec<MemberRow> {
    fam.members
        .iter()
        .enumerate()
        .map(|(i, m)| MemberRow {
            solution: i + 1,
            signs: m.signs.to_string(),
            g: m.model.zeeman.0,
            q_angles_deg: angles_in(site, frame, &m.model.q_angles),
            m_angles_deg: angles_in(site, frame, &m.model.m_angles),
            q_tensor: tensor_in(site, frame, &m.model.q_tensor()),
            m_tensor: tensor_in(site, frame, &m.model.m_tensor()),
        })
        .collect()
}

/// The eight sign solutions of both states, JSON and a text table with
/// one row per sign pattern.
pub fn solutions(site: &SiteModel, frame: Frame) -> Result<OutputSet> {
    let fg = enumerate_solutions(&site.ground);
    let fe = enumerate_solutions(&site.excited);
    let file = SolutionsFile {
        frame,
        ground: member_rows(site, frame, &fg),
        excited: member_rows(site, frame, &fe),
    };
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:>8}  {:>5}  {:>9} {:>9} {:>9}  {:>9} {:>9} {:>9}",
        "solution", "signs", "aQ(g)", "bQ(g)", "cQ(g)", "aQ(e)", "bQ(e)", "cQ(e)"
    );
    for (g, e) in file.ground.iter().zip(&file.excited) {
        let [a, b, c] = g.q_angles_deg;
        let [x, y, z] = e.q_angles_deg;
        let _ = writeln!(text, "{:>8}  {:>5}  {a:>9.2} {b:>9.2} {c:>9.2}  {x:>9.4} {y:>9.4} {z:>9.4}", g.solution, g.signs);
    }
    let _ = writeln!(text, "angles in degrees, {} frame", frame_label(frame));
    let mut out = OutputSet::new();
    out.add_json("solutions.json", &file)?;
    out.add("solutions.txt", text);
    Ok(out)
}

fn frame_label(f: Frame) -> &'static str {
    match f {
        Frame::Lab => "lab",
        Frame::Crystal => "crystal",
    }
}

#[derive(Serialize)]
struct BranchingFile<'a> {
    subsite_1: BranchingTable,
    subsite_2: BranchingTable,
    averaged: BranchingTable,
    measured: Option<&'a MeasuredTable>,
    ranking: Option<&'a SolutionRanking>,
}

/// Text layout: one calculated row per ground doublet, followed by the
/// measured row when available.
pub fn branching_text(calc: &BranchingTable, measured: Option<&MeasuredTable>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>8} {:>12} {:>12} {:>12}", "g \\ e", "±1/2", "±3/2", "±5/2");
    let labels = ["±1/2", "±3/2", "±5/2"];
    for i in 0..3 {
        let r = calc.0[i];
        let _ = writeln!(s, "{:>8} {:>12.3} {:>12.3} {:>12.3}  (calc)", labels[i], r[0], r[1], r[2]);
        if let Some(m) = measured {
            let cell = |j: usize| format!("{:.2}({:.2})", m.values[i][j], m.errors[i][j]);
            let _ = writeln!(s, "{:>8} {:>12} {:>12} {:>12}  (exp)", "", cell(0), cell(1), cell(2));
        }
    }
    s
}

pub fn ranking_text(r: &SolutionRanking) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>4}  {:>6}  {:>7}  {:>9}  {:>9}  {}", "rank", "ground", "excited", "max dev", "rms dev", "within errors");
    for (i, p) in r.pairings.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:>4}  {:>6}  {:>7}  {:>9.4}  {:>9.4}  {}",
            i + 1,
            p.ground.to_string(),
            p.excited.to_string(),
            p.max_deviation,
            p.rms_deviation,
            if p.within_errors { "yes" } else { "no" }
        );
    }
    s
}

/// Zero-field branching tables and, with a measured table, the ranked
/// sign pairings.
pub fn branching(site: &SiteModel, measured: Option<&MeasuredTable>, excited_all_positive: bool) -> Result<OutputSet> {
    let averaged = subsite_averaged_table(site);
    let ranking = measured.map(|m| {
        select_solution(&enumerate_solutions(&site.ground), &enumerate_solutions(&site.excited), m, excited_all_positive)
    });
    let file = BranchingFile {
        subsite_1: subsite_table(site, Subsite::One),
        subsite_2: subsite_table(site, Subsite::Two),
        averaged,
        measured,
        ranking: ranking.as_ref(),
    };
    let mut out = OutputSet::new();
    out.add_json("branching.json", &file)?;
    out.add("branching.txt", branching_text(&averaged, measured));
    if let Some(r) = &ranking {
        out.add("ranking.txt", ranking_text(r));
    }
    Ok(out)
}

const LEVEL_DOUBLET: [&str; 6] = ["1/2", "1/2", "3/2", "3/2", "5/2", "5/2"];

/// Level-resolved transition strengths along the scan for both subsites.
pub fn map(site: &SiteModel, cfg: &RunConfig) -> Result<OutputSet> {
    let scan = cfg.scan;
    let rows: Vec<String> = (1..=scan.n)
        .into_par_iter()
        .map(|n| -> Result<String> {
            let b = scan.field(n)?;
            let mut s = String::new();
            for sub in [Subsite::One, Subsite::Two] {
                let m = transition_map(site, &b, sub);
                for i in 0..6 {
                    for j in 0..6 {
                        let _ = writeln!(
                            s,
                            "{n},{},{},{},{},{},{},{},{},{}",
                            fmt9(b.x),
                            fmt9(b.y),
                            fmt9(b.z),
                            sub.label(),
                            i + 1,
                            j + 1,
                            LEVEL_DOUBLET[i],
                            LEVEL_DOUBLET[j],
                            fmt9(m.values[i][j])
                        );
                    }
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut text = String::from("n,Bx_mT,By_mT,Bz_mT,subsite,ground_level,excited_level,ground_doublet,excited_doublet,strength\n");
    rows.iter().for_each(|r| text.push_str(r));
    let mut out = OutputSet::new();
    out.add("map.csv", text);
    Ok(out)
}

#[derive(Serialize)]
struct EllipsoidRow {
    doublet: String,
    /// kHz/mT, ascending
    semi_axes: [f64; 3],
    /// unit axes as rows, in the output frame
    axes: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct StateEllipsoids {
    state: StateKind,
    g_iso: f64,
    doublets: Vec<EllipsoidRow>,
    /// Q orientation inferred from the surfaces under an isotropic M.
    isotropic_q_angles_deg: Option<[f64; 3]>,
    rms_misalignment_deg: Option<f64>,
}

/// First-order splitting surfaces `λ⁺(n)` of both states next to the
/// surfaces an isotropic M of the same mean |g| would give.
pub fn ellipsoid(site: &SiteModel, cfg: &RunConfig) -> Result<OutputSet> {
    let f = frame_matrix(site, cfg.frame);
    let (nt, np) = (cfg.ellipsoid.n_theta, cfg.ellipsoid.n_phi);
    let mut out = OutputSet::new();
    let mut summary = Vec::new();
    for kind in [StateKind::Ground, StateKind::Excited] {
        let s: &StateModel = site.state(kind);
        let q = s.q_tensor();
        let m = s.m_tensor();
        let g_iso = s.zeeman.0.iter().map(|g| g.abs()).sum::<f64>() / 3.0;
        let iso = ZeemanParams::isotropic(g_iso);
        let m_iso = hyperspin_core::spinops::build_m(&iso, &EulerAngles::default());
        let mut surfaces: Vec<SplittingSurface> = Doublet::ALL.iter().map(|&k| SplittingSurface::first_order(&q, &m, k, nt, np)).collect();
        let iso_surfaces: Vec<SplittingSurface> =
            Doublet::ALL.iter().map(|&k| SplittingSurface::first_order(&q, &m_iso, k, nt, np)).collect();
        let mut text = String::from("doublet,theta_deg,phi_deg,x,y,z,lambda_kHz_per_mT,isotropic_lambda_kHz_per_mT\n");
        let mut rows = Vec::new();
        for (surf, iso_surf) in surfaces.iter_mut().zip(&iso_surfaces) {
            let label = format!("{}/2", surf.doublet.twice_m());
            for (a, b) in surf.samples.iter().zip(&iso_surf.samples) {
                let n = f * direction(a.theta, a.phi);
                let _ = writeln!(
                    text,
                    "{label},{},{},{},{},{},{},{}",
                    fmt9(a.theta.to_degrees()),
                    fmt9(a.phi.to_degrees()),
                    fmt9(n.x),
                    fmt9(n.y),
                    fmt9(n.z),
                    fmt9(a.value),
                    fmt9(b.value)
                );
            }
            let e = surf.ellipsoid()?;
            let axes = f * e.axes;
            rows.push(EllipsoidRow {
                doublet: label,
                semi_axes: e.semi_axes,
                axes: core::array::from_fn(|j| [axes[(0, j)], axes[(1, j)], axes[(2, j)]]),
            });
        }
        let est = estimate_q_orientation(&surfaces, &s.quadrupole).ok();
        summary.push(StateEllipsoids {
            state: kind,
            g_iso,
            doublets: rows,
            isotropic_q_angles_deg: est.as_ref().map(|e| angles_in(site, cfg.frame, &e.angles)),
            rms_misalignment_deg: est.as_ref().map(|e| e.rms_misalignment_deg),
        });
        let name = match kind {
            StateKind::Ground => "ellipsoid_ground.csv",
            StateKind::Excited => "ellipsoid_excited.csv",
        };
        out.add(name, text);
    }
    #[derive(Serialize)]
    struct File {
        frame: Frame,
        states: Vec<StateEllipsoids>,
    }
    out.add_json(
        "ellipsoid.json",
        &File {
            frame: cfg.frame,
            states: summary,
        },
    )?;
    Ok(out)
}
