use alloc::vec::Vec;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SiteModel;
use crate::spectra::{LineKind, SiteSplittings, SpiralScan, Transition};

/// One measured line position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// 1-based scan index.
    pub scan_n: usize,
    /// mT
    pub field_mt: Vector3<f64>,
    pub transition: Transition,
    /// Side holes measure δe, main antiholes δg.
    pub kind: LineKind,
    /// Magnitude of the offset, kHz.
    pub offset_khz: f64,
    /// kHz
    pub sigma_khz: f64,
}

/// A distinct field point of an [`ObservationSet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub scan_n: usize,
    pub field_mt: Vector3<f64>,
}

/// Validated observations with their distinct field points.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    records: Vec<Observation>,
    points: Vec<ScanPoint>,
    /// `point_of[i]` indexes `points` for record `i`.
    point_of: Vec<usize>,
}

impl ObservationSet {
    pub fn new(records: Vec<Observation>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyObservations);
        }
        let mut points: Vec<ScanPoint> = Vec::new();
        let mut point_of = Vec::with_capacity(records.len());
        for r in &records {
            if !(r.offset_khz >= 0.0 && r.offset_khz.is_finite()) {
                return Err(Error::InvalidInput("observed offsets must be finite magnitudes (>= 0)"));
            }
            if !(r.sigma_khz > 0.0 && r.sigma_khz.is_finite()) {
                return Err(Error::InvalidInput("observation uncertainties must be positive"));
            }
            if !r.field_mt.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput("field components must be finite"));
            }
            // records of one point are usually adjacent; scan back a little
            let idx = points
                .iter()
                .rposition(|p| p.scan_n == r.scan_n && p.field_mt == r.field_mt)
                .unwrap_or_else(|| {
                    points.push(ScanPoint {
                        scan_n: r.scan_n,
                        field_mt: r.field_mt,
                    });
                    points.len() - 1
                });
            point_of.push(idx);
        }
        Ok(ObservationSet {
            records,
            points,
            point_of,
        })
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn points(&self) -> &[ScanPoint] {
        &self.points
    }

    pub fn point_of(&self, record: usize) -> usize {
        self.point_of[record]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, kind: LineKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    /// Same observations with every field and offset multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let recs = self
            .records
            .iter()
            .map(|r| Observation {
                field_mt: r.field_mt * factor,
                offset_khz: r.offset_khz * factor,
                sigma_khz: r.sigma_khz * factor,
                ..*r
            })
            .collect();
        ObservationSet::new(recs)
    }

    /// Observations grouped by (point, transition, kind), in record order.
    pub fn groups(&self) -> Vec<ObservationGroup> {
        let mut out: Vec<ObservationGroup> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let p = self.point_of[i];
            match out
                .iter_mut()
                .rev()
                .find(|g| g.point == p && g.transition == r.transition && g.kind == r.kind)
            {
                Some(g) => g.offsets_khz.push(r.offset_khz),
                None => out.push(ObservationGroup {
                    point: p,
                    transition: r.transition,
                    kind: r.kind,
                    offsets_khz: alloc::vec![r.offset_khz],
                }),
            }
        }
        out
    }
}

/// Lines of one kind observed for one transition at one field point.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationGroup {
    pub point: usize,
    pub transition: Transition,
    pub kind: LineKind,
    pub offsets_khz: Vec<f64>,
}

/// What a synthetic data set contains.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub scan: SpiralScan,
    pub transitions: Vec<Transition>,
    /// Position noise and the reported uncertainty, kHz.
    pub sigma_khz: f64,
    /// Add Gaussian noise of `sigma_khz` when true.
    pub noisy: bool,
    pub seed: u64,
    /// Report subsite 2 lines as well.
    pub both_subsites: bool,
}

impl SyntheticSpec {
    /// Spiral of 200 points at 10/10/5 mT, transitions (1,5), (3,3), (5,1),
    /// both subsites, 1 kHz uncertainty, no noise.
    pub fn standard() -> Self {
        SyntheticSpec {
            scan: SpiralScan::standard(),
            transitions: alloc::vec![
                Transition::new(1, 5).expect("valid"),
                Transition::new(3, 3).expect("valid"),
                Transition::new(5, 1).expect("valid"),
            ],
            sigma_khz: 1.0,
            noisy: false,
            seed: 0,
            both_subsites: true,
        }
    }
}

/// Side-hole (δe) and main-antihole (δg) positions of a site model along a
/// spiral scan, one record per subsite line.
pub fn synthetic_observations(site: &SiteModel, spec: &SyntheticSpec) -> Result<ObservationSet> {
    let eval = SiteSplittings::new(site);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.sigma_khz).map_err(|_| Error::InvalidInput("noise sigma must be positive"))?;
    let subsites: &[usize] = if spec.both_subsites { &[0, 1] } else { &[0] };
    let mut records = Vec::new();
    for n in 1..=spec.scan.n {
        let b = spec.scan.field(n)?;
        let split = [eval.splittings(0, &b)?, eval.splittings(1, &b)?];
        for &tr in &spec.transitions {
            for kind in [LineKind::Hole, LineKind::Antihole] {
                for &s in subsites {
                    let [g, e] = split[s];
                    let exact = match kind {
                        LineKind::Hole => e[tr.excited.index()],
                        LineKind::Antihole => g[tr.ground.index()],
                    };
                    let value = if spec.noisy { (exact + noise.sample(&mut rng)).abs() } else { exact };
                    records.push(Observation {
                        scan_n: n,
                        field_mt: b,
                        transition: tr,
                        kind,
                        offset_khz: value,
                        sigma_khz: spec.sigma_khz,
                    });
                }
            }
        }
    }
    ObservationSet::new(records)
}
