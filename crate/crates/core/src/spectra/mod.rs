//! Spiral field scans, the hole/antihole pattern of a class-cleaned
//! transition, and absorption profiles built from it.
//!
//! For a transition |±k/2⟩g ↔ |±l/2⟩e burning at the centre leaves holes at
//! 0 and ±δe and antiholes at ±δg, ±(δg − δe) and ±(δg + δe).

use alloc::vec::Vec;
use core::fmt;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SiteModel;
use crate::spinops::{Doublet, StateHamiltonian};
use crate::symmetry::subsite_tensors;

/// Field sweep `B_n = (Bx√(1−t²)cos 6πt, −By·t, Bz√(1−t²)sin 6πt)` with
/// `t_n = −1 + 2(n−1)/(N−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpiralScan {
    /// mT
    pub bx: f64,
    /// mT
    pub by: f64,
    /// mT
    pub bz: f64,
    pub n: usize,
}

impl SpiralScan {
    pub fn new(bx: f64, by: f64, bz: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("spiral scan needs at least 2 points"));
        }
        if !(bx.is_finite() && by.is_finite() && bz.is_finite()) {
            return Err(Error::InvalidInput("spiral amplitudes must be finite"));
        }
        Ok(SpiralScan { bx, by, bz, n })
    }

    /// The coil-limited scan: 10/10/5 mT and 200 points.
    pub fn standard() -> Self {
        SpiralScan {
            bx: 10.0,
            by: 10.0,
            bz: 5.0,
            n: 200,
        }
    }

    /// Parameter t of the 1-based index `n`.
    pub fn t(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.n || self.n < 2 {
            return Err(Error::IndexOutOfRange { index: n, len: self.n });
        }
        Ok(-1.0 + 2.0 * (n - 1) as f64 / (self.n - 1) as f64)
    }

    pub fn field(&self, n: usize) -> Result<Vector3<f64>> {
        let t = self.t(n)?;
        let r = (1.0 - t * t).max(0.0).sqrt();
        let (s, c) = (6.0 * core::f64::consts::PI * t).sin_cos();
        Ok(Vector3::new(self.bx * r * c, -self.by * t, self.bz * r * s))
    }

    /// All fields in scan order, index 1 first.
    pub fn fields(&self) -> Vec<Vector3<f64>> {
        (1..=self.n).filter_map(|n| self.field(n).ok()).collect()
    }
}

/// Field of point `n` (1-based) of a spiral scan.
pub fn spiral_field(n: usize, scan: &SpiralScan) -> Result<Vector3<f64>> {
    scan.field(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Hole,
    Antihole,
}

impl LineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LineKind::Hole => "hole",
            LineKind::Antihole => "antihole",
        }
    }

    pub fn parse(s: &str) -> Option<LineKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hole" => Some(LineKind::Hole),
            "antihole" => Some(LineKind::Antihole),
            _ => None,
        }
    }

    /// Holes reduce absorption.
    pub fn sign(self) -> f64 {
        match self {
            LineKind::Hole => -1.0,
            LineKind::Antihole => 1.0,
        }
    }
}

/// Origin of a line inside the 3 + 6 pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineClass {
    Central,
    SideHole,
    MainAntihole,
    DifferenceAntihole,
    SumAntihole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subsite {
    One,
    Two,
    /// Coincident lines of both subsites merged into one.
    Both,
}

impl Subsite {
    pub fn label(self) -> &'static str {
        match self {
            Subsite::One => "1",
            Subsite::Two => "2",
            Subsite::Both => "both",
        }
    }
}

/// Optical transition |±k/2⟩g ↔ |±l/2⟩e.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub ground: Doublet,
    pub excited: Doublet,
}

impl Transition {
    /// From the odd integers k, l ∈ {1, 3, 5}.
    pub fn new(k: u8, l: u8) -> Result<Self> {
        match (Doublet::from_twice_m(k), Doublet::from_twice_m(l)) {
            (Some(ground), Some(excited)) => Ok(Transition { ground, excited }),
            _ => Err(Error::InvalidInput("transition labels must be 1, 3 or 5")),
        }
    }

    pub fn k(&self) -> u8 {
        self.ground.twice_m()
    }

    pub fn l(&self) -> u8 {
        self.excited.twice_m()
    }

    pub fn all() -> [Transition; 9] {
        core::array::from_fn(|i| Transition {
            ground: Doublet::from_index(i / 3),
            excited: Doublet::from_index(i % 3),
        })
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.k(), self.l())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    /// kHz, signed
    pub offset_khz: f64,
    pub kind: LineKind,
    pub class: LineClass,
    pub subsite: Subsite,
    pub weight: f64,
}

/// Relative line amplitudes from class counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineWeights {
    pub central: f64,
    pub side_hole: f64,
    pub main_antihole: f64,
    pub combination_antihole: f64,
}

impl Default for LineWeights {
    fn default() -> Self {
        LineWeights {
            central: 4.0,
            side_hole: 1.0,
            main_antihole: 2.0,
            combination_antihole: 1.0,
        }
    }
}

/// Lines closer than this are merged, kHz.
pub const MERGE_TOLERANCE_KHZ: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLines {
    pub transition: Option<Transition>,
    /// Sorted by offset.
    pub lines: Vec<Line>,
}

impl SpectrumLines {
    pub fn holes(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.kind == LineKind::Hole)
    }

    pub fn antiholes(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.kind == LineKind::Antihole)
    }

    pub fn offsets(&self, kind: LineKind) -> Vec<f64> {
        self.lines.iter().filter(|l| l.kind == kind).map(|l| l.offset_khz).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.weight).sum()
    }
}

// Clusters lines (sorted by offset) closer than the merge tolerance. The
// merged line keeps the kind and class of its heaviest member (the first
// one on ties) and carries the summed weight.
fn merge_sorted(lines: &mut Vec<Line>, subsite_of_merge: Subsite) {
    let mut out: Vec<Line> = Vec::with_capacity(lines.len());
    let mut i = 0;
    while i < lines.len() {
        let mut j = i + 1;
        while j < lines.len() && lines[j].offset_khz - lines[j - 1].offset_khz <= MERGE_TOLERANCE_KHZ {
            j += 1;
        }
        let cluster = &lines[i..j];
        if cluster.len() == 1 {
            out.push(cluster[0]);
        } else {
            let weight: f64 = cluster.iter().map(|l| l.weight).sum();
            let heaviest = cluster
                .iter()
                .fold(cluster[0], |best, l| if l.weight > best.weight { *l } else { best });
            let offset = if cluster.iter().any(|l| l.class == LineClass::Central) {
                0.0
            } else {
                cluster.iter().map(|l| l.offset_khz * l.weight).sum::<f64>() / weight
            };
            let subsite = if cluster.iter().all(|l| l.subsite == cluster[0].subsite) {
                cluster[0].subsite
            } else {
                subsite_of_merge
            };
            out.push(Line {
                offset_khz: offset,
                weight,
                subsite,
                ..heaviest
            });
        }
        i = j;
    }
    *lines = out;
}

fn sort_lines(lines: &mut [Line]) {
    lines.sort_by(|a, b| {
        a.offset_khz
            .total_cmp(&b.offset_khz)
            .then(a.kind.cmp(&b.kind))
            .then(a.class.cmp(&b.class))
    });
}

/// Hole/antihole pattern of one subsite with the default weights.
pub fn line_positions(dg_khz: f64, de_khz: f64) -> SpectrumLines {
    line_positions_with(dg_khz, de_khz, &LineWeights::default(), Subsite::One)
}

/// Hole/antihole pattern of one subsite. Only the non-negative half is
/// built and merged, then mirrored, so the result is exactly symmetric.
pub fn line_positions_with(dg_khz: f64, de_khz: f64, w: &LineWeights, subsite: Subsite) -> SpectrumLines {
    let dg = dg_khz.abs();
    let de = de_khz.abs();
    let mk = |offset_khz, kind, class, weight| Line {
        offset_khz,
        kind,
        class,
        subsite,
        weight,
    };
    // the central hole plus one member of each ± pair; members landing on
    // 0 count twice (both signs)
    let mut half = Vec::with_capacity(6);
    half.push(mk(0.0, LineKind::Hole, LineClass::Central, w.central));
    for (off, kind, class, weight) in [
        (de, LineKind::Hole, LineClass::SideHole, w.side_hole),
        (dg, LineKind::Antihole, LineClass::MainAntihole, w.main_antihole),
        ((dg - de).abs(), LineKind::Antihole, LineClass::DifferenceAntihole, w.combination_antihole),
        (dg + de, LineKind::Antihole, LineClass::SumAntihole, w.combination_antihole),
    ] {
        let weight = if off <= MERGE_TOLERANCE_KHZ { 2.0 * weight } else { weight };
        half.push(mk(off, kind, class, weight));
    }
    sort_lines(&mut half);
    merge_sorted(&mut half, subsite);
    let mut lines = Vec::with_capacity(2 * half.len());
    for l in half.iter().rev() {
        if l.offset_khz > 0.0 {
            lines.push(Line {
                offset_khz: -l.offset_khz,
                ..*l
            });
        }
    }
    lines.extend(half.iter().copied());
    SpectrumLines {
        transition: None,
        lines,
    }
}

/// Field evaluator for both states and both subsites of a site.
#[derive(Debug, Clone)]
pub struct SiteSplittings {
    /// `[ground, excited]` for subsite 1 and 2.
    states: [[StateHamiltonian; 2]; 2],
}

impl SiteSplittings {
    pub fn new(site: &SiteModel) -> Self {
        let build = |s: &crate::model::StateModel| {
            let q = s.q_tensor();
            let m = s.m_tensor();
            let (q2, m2) = subsite_tensors(&q, &m, &site.c2);
            (StateHamiltonian::new(&q, &m), StateHamiltonian::new(&q2, &m2))
        };
        let (g1, g2) = build(&site.ground);
        let (e1, e2) = build(&site.excited);
        SiteSplittings {
            states: [[g1, e1], [g2, e2]],
        }
    }

    /// `[δg, δe]` splittings (kHz) of all three doublets for one subsite
    /// (0 or 1): `out[state][doublet index]`.
    pub fn splittings(&self, subsite: usize, field_mt: &Vector3<f64>) -> Result<[[f64; 3]; 2]> {
        let [g, e] = &self.states[subsite];
        Ok([g.levels(field_mt)?.splittings_khz, e.levels(field_mt)?.splittings_khz])
    }

    /// `(δg, δe)` in kHz for a transition and subsite (0 or 1).
    pub fn transition_splittings(
        &self,
        subsite: usize,
        field_mt: &Vector3<f64>,
        tr: Transition,
    ) -> Result<(f64, f64)> {
        let [g, e] = self.splittings(subsite, field_mt)?;
        Ok((g[tr.ground.index()], e[tr.excited.index()]))
    }
}

/// Unmerged line sets of subsite 1 and subsite 2.
pub fn subsite_lines(site: &SiteModel, field_mt: &Vector3<f64>, tr: Transition) -> Result<[SpectrumLines; 2]> {
    let eval = SiteSplittings::new(site);
    subsite_lines_with(&eval, field_mt, tr, &LineWeights::default())
}

pub fn subsite_lines_with(
    eval: &SiteSplittings,
    field_mt: &Vector3<f64>,
    tr: Transition,
    w: &LineWeights,
) -> Result<[SpectrumLines; 2]> {
    let mut out = [0, 1].map(|_| SpectrumLines {
        transition: Some(tr),
        lines: Vec::new(),
    });
    for (s, tag) in [Subsite::One, Subsite::Two].into_iter().enumerate() {
        let (dg, de) = eval.transition_splittings(s, field_mt, tr)?;
        let mut lines = line_positions_with(dg, de, w, tag);
        lines.transition = Some(tr);
        out[s] = lines;
    }
    Ok(out)
}

/// Union of both subsites; same-kind lines of the two subsites that
/// coincide within the merge tolerance become one line tagged `Both`.
pub fn site_lines(site: &SiteModel, field_mt: &Vector3<f64>, tr: Transition) -> Result<SpectrumLines> {
    let eval = SiteSplittings::new(site);
    site_lines_with(&eval, field_mt, tr, &LineWeights::default())
}

pub fn site_lines_with(
    eval: &SiteSplittings,
    field_mt: &Vector3<f64>,
    tr: Transition,
    w: &LineWeights,
) -> Result<SpectrumLines> {
    let [a, b] = subsite_lines_with(eval, field_mt, tr, w)?;
    let mut merged = Vec::with_capacity(a.lines.len() + b.lines.len());
    for kind in [LineKind::Hole, LineKind::Antihole] {
        let mut group: Vec<Line> = a
            .lines
            .iter()
            .chain(b.lines.iter())
            .filter(|l| l.kind == kind)
            .copied()
            .collect();
        sort_lines(&mut group);
        merge_across_subsites(&mut group);
        merged.extend(group);
    }
    sort_lines(&mut merged);
    Ok(SpectrumLines {
        transition: Some(tr),
        lines: merged,
    })
}

// Pairs each subsite-1 line with a coincident subsite-2 line of the same
// kind; unpaired lines keep their tag.
fn merge_across_subsites(group: &mut Vec<Line>) {
    let mut out = Vec::with_capacity(group.len());
    let mut used = alloc::vec![false; group.len()];
    for i in 0..group.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let li = group[i];
        let partner = (i + 1..group.len()).find(|&j| {
            !used[j]
                && group[j].subsite != li.subsite
                && (group[j].offset_khz - li.offset_khz).abs() <= MERGE_TOLERANCE_KHZ
        });
        match partner {
            Some(j) => {
                used[j] = true;
                let lj = group[j];
                let offset = if li.offset_khz == 0.0 || lj.offset_khz == 0.0 {
                    0.0
                } else {
                    0.5 * (li.offset_khz + lj.offset_khz)
                };
                let heavier = if lj.weight > li.weight { lj } else { li };
                out.push(Line {
                    offset_khz: offset,
                    weight: li.weight + lj.weight,
                    subsite: Subsite::Both,
                    ..heavier
                });
            }
            None => out.push(li),
        }
    }
    *group = out;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineShape {
    #[default]
    Lorentzian,
    Gaussian,
}

/// Symmetric uniform frequency grid `−span, −span + step, …, +span` (kHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileGrid {
    pub span_khz: f64,
    pub step_khz: f64,
}

impl ProfileGrid {
    pub fn new(span_khz: f64, step_khz: f64) -> Result<Self> {
        if !(span_khz > 0.0 && step_khz > 0.0 && span_khz.is_finite() && step_khz.is_finite()) {
            return Err(Error::InvalidInput("profile grid needs positive span and step"));
        }
        Ok(ProfileGrid { span_khz, step_khz })
    }

    pub fn len(&self) -> usize {
        2 * (self.span_khz / self.step_khz).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> f64 {
        -((self.len() / 2) as f64) * self.step_khz
    }
}

impl Default for ProfileGrid {
    fn default() -> Self {
        ProfileGrid {
            span_khz: 600.0,
            step_khz: 0.5,
        }
    }
}

/// Absorption change on a uniform grid (arbitrary units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionProfile {
    pub start_khz: f64,
    pub step_khz: f64,
    pub values: Vec<f64>,
    /// Full width at half maximum of each line, kHz.
    pub width_khz: f64,
}

impl AbsorptionProfile {
    pub fn frequency(&self, i: usize) -> f64 {
        self.start_khz + i as f64 * self.step_khz
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.frequency(i))
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid-free area estimate `Σ v·step`.
    pub fn area(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step_khz
    }
}

/// Unit-area line shape with full width `width` at offset `x` from the centre.
pub fn line_shape(shape: LineShape, x: f64, width: f64) -> f64 {
    match shape {
        LineShape::Lorentzian => {
            let g = 0.5 * width;
            g / core::f64::consts::PI / (x * x + g * g)
        }
        LineShape::Gaussian => {
            let sigma = width / (2.0 * (2.0 * core::f64::consts::LN_2).sqrt());
            (-0.5 * (x / sigma) * (x / sigma)).exp() / (sigma * (2.0 * core::f64::consts::PI).sqrt())
        }
    }
}

/// Sum of unit-area lines: holes negative, antiholes positive, each scaled
/// by its weight.
pub fn synth_profile(lines: &SpectrumLines, width_khz: f64, grid: &ProfileGrid, shape: LineShape) -> Result<AbsorptionProfile> {
    if !(width_khz > 0.0 && width_khz.is_finite()) {
        return Err(Error::InvalidInput("line width must be positive"));
    }
    let n = grid.len();
    let start = grid.start();
    let mut values = alloc::vec![0.0; n];
    for (i, v) in values.iter_mut().enumerate() {
        let f = start + i as f64 * grid.step_khz;
        *v = lines
            .lines
            .iter()
            .map(|l| l.kind.sign() * l.weight * line_shape(shape, f - l.offset_khz, width_khz))
            .sum();
    }
    Ok(AbsorptionProfile {
        start_khz: start,
        step_khz: grid.step_khz,
        values,
        width_khz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    fn offs(s: &SpectrumLines, kind: LineKind) -> Vec<f64> {
        s.offsets(kind)
    }

    #[test]
    fn spiral_endpoints_and_midpoint() {
        let scan = SpiralScan::new(10.0, 10.0, 5.0, 201).unwrap();
        let b1 = scan.field(1).unwrap();
        assert!((b1 - Vector3::new(0.0, 10.0, 0.0)).norm() < 1e-12);
        let bn = scan.field(201).unwrap();
        assert!((bn - Vector3::new(0.0, -10.0, 0.0)).norm() < 1e-12);
        let mid = scan.field(101).unwrap();
        assert!((mid - Vector3::new(10.0, 0.0, 0.0)).norm() < 1e-12);
        assert!(matches!(scan.field(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(scan.field(202), Err(Error::IndexOutOfRange { .. })));
        assert!(SpiralScan::new(1.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn spiral_components_bounded() {
        let scan = SpiralScan::standard();
        for b in scan.fields() {
            assert!(b.x.abs() <= 10.0 + 1e-12 && b.y.abs() <= 10.0 + 1e-12 && b.z.abs() <= 5.0 + 1e-12);
        }
        assert_eq!(scan.fields().len(), 200);
    }

    #[test]
    fn generic_pattern() {
        let s = line_positions(100.0, 40.0);
        assert_eq!(offs(&s, LineKind::Hole), [-40.0, 0.0, 40.0]);
        assert_eq!(offs(&s, LineKind::Antihole), [-140.0, -100.0, -60.0, 60.0, 100.0, 140.0]);
        assert_eq!(s.lines.iter().filter(|l| l.class == LineClass::Central).count(), 1);
    }

    #[test]
    fn zero_excited_splitting() {
        let s = line_positions(100.0, 0.0);
        assert_eq!(offs(&s, LineKind::Hole), [0.0]);
        assert_eq!(offs(&s, LineKind::Antihole), [-100.0, 100.0]);
        // main + sum + difference all sit at ±δg
        let w: Vec<f64> = s.antiholes().map(|l| l.weight).collect();
        assert_eq!(w, [4.0, 4.0]);
        assert_eq!(s.holes().next().unwrap().weight, 6.0);
    }

    #[test]
    fn equal_splittings_merge_at_centre() {
        let s = line_positions(80.0, 80.0);
        let centre: Vec<&Line> = s.lines.iter().filter(|l| l.offset_khz == 0.0).collect();
        assert_eq!(centre.len(), 1);
        assert_eq!(centre[0].kind, LineKind::Hole);
        assert_eq!(centre[0].weight, 6.0);
        // side hole (1) and main antihole (2) coincide at ±80
        assert_eq!(offs(&s, LineKind::Hole), [0.0]);
        assert_eq!(offs(&s, LineKind::Antihole), [-160.0, -80.0, 80.0, 160.0]);
        assert_eq!(s.antiholes().map(|l| l.weight).collect::<Vec<_>>(), [1.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn pattern_symmetric() {
        for (g, e) in [(123.4, 56.7), (10.0, 10.05), (0.0, 0.0), (3.0, 300.0)] {
            let s = line_positions(g, e);
            let n = s.lines.len();
            for i in 0..n {
                assert_eq!(s.lines[i].offset_khz, -s.lines[n - 1 - i].offset_khz);
                assert_eq!(s.lines[i].kind, s.lines[n - 1 - i].kind);
            }
        }
    }

    #[test]
    fn zero_field_is_single_hole() {
        let site = reference::site();
        let tr = Transition::new(1, 1).unwrap();
        let s = site_lines(&site, &Vector3::zeros(), tr).unwrap();
        assert_eq!(s.lines.len(), 1);
        assert_eq!(s.lines[0].kind, LineKind::Hole);
        assert_eq!(s.lines[0].offset_khz, 0.0);
    }

    #[test]
    fn side_holes_are_excited_splittings() {
        let site = reference::site();
        let tr = Transition::new(1, 1).unwrap();
        let d1 = site.frame().vector_crystal_to_lab(&Vector3::new(10.0, 0.0, 0.0));
        let [a, _] = subsite_lines(&site, &d1, tr).unwrap();
        let e = site.excited;
        let lv = StateHamiltonian::new(&e.q_tensor(), &e.m_tensor()).levels(&d1).unwrap();
        let side: Vec<f64> = a.holes().filter(|l| l.offset_khz > 0.0).map(|l| l.offset_khz).collect();
        assert_eq!(side.len(), 1);
        assert!((side[0] - lv.splitting_khz(Doublet::Half)).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_fwhm_and_area() {
        let lines = SpectrumLines {
            transition: None,
            lines: alloc::vec![Line {
                offset_khz: 0.0,
                kind: LineKind::Hole,
                class: LineClass::Central,
                subsite: Subsite::One,
                weight: 1.0,
            }],
        };
        let grid = ProfileGrid::new(5.0, 0.01).unwrap();
        let p = synth_profile(&lines, 10.0, &grid, LineShape::Lorentzian).unwrap();
        let c = p.values.len() / 2;
        assert!(p.values[c] < 0.0);
        // grid ends at ±5 kHz = half maximum
        let half = p.values[c] / 2.0;
        assert!((p.values[0] - half).abs() < 1e-12);
        assert!((p.values[p.values.len() - 1] - half).abs() < 1e-12);
        let wide = synth_profile(&lines, 10.0, &ProfileGrid::new(50_000.0, 0.5).unwrap(), LineShape::Lorentzian).unwrap();
        assert!((wide.area() + 1.0).abs() < 2e-4);
    }

    #[test]
    fn gaussian_area() {
        let lines = line_positions(0.0, 0.0);
        let p = synth_profile(&lines, 10.0, &ProfileGrid::new(200.0, 0.1).unwrap(), LineShape::Gaussian).unwrap();
        assert!((p.area() + lines.total_weight()).abs() < 1e-9);
    }

    #[test]
    fn transitions_round_trip_labels() {
        let t = Transition::new(3, 5).unwrap();
        assert_eq!((t.k(), t.l()), (3, 5));
        assert_eq!(alloc::format!("{t}"), "3,5");
        assert!(Transition::new(2, 1).is_err());
        assert_eq!(Transition::all().len(), 9);
    }
}
