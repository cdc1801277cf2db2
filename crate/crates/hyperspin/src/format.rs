//! CSV and JSON file formats. Every float is written with 9 significant
//! digits.

use std::path::Path;

use hyperspin_core::fitting::{Observation, ObservationSet};
use hyperspin_core::spectra::{AbsorptionProfile, LineKind, SpectrumLines, Transition};
use nalgebra::Vector3;
use serde::Serialize;
use serde_json::Value;

use crate::error::{AppError, Result};
use crate::fid::FidTrace;

pub const LINES_HEADER: [&str; 9] = ["n", "t", "Bx_mT", "By_mT", "Bz_mT", "offset_kHz", "kind", "subsite", "weight"];
pub const PROFILE_HEADER: [&str; 2] = ["freq_kHz", "absorption"];
pub const FID_HEADER: [&str; 2] = ["time_us", "signal"];
pub const OBSERVATION_HEADER: [&str; 9] = ["scan_n", "Bx_mT", "By_mT", "Bz_mT", "k", "l", "kind", "offset_kHz", "sigma_kHz"];

/// `v` rounded to 9 significant digits.
pub fn round9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

/// Shortest decimal text of `round9(v)`.
pub fn fmt9(v: f64) -> String {
    let r = round9(v);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round9(x))) {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to 9 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| AppError::Config(e.to_string()))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| AppError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Line list of one scan point.
pub struct ScanLines<'a> {
    pub n: usize,
    pub t: f64,
    pub field_mt: Vector3<f64>,
    pub lines: &'a SpectrumLines,
}

pub fn lines_csv<'a>(points: impl IntoIterator<Item = ScanLines<'a>>) -> Vec<u8> {
    let rows = points.into_iter().flat_map(|p| {
        p.lines.lines.iter().map(move |l| {
            vec![
                p.n.to_string(),
                fmt9(p.t),
                fmt9(p.field_mt.x),
                fmt9(p.field_mt.y),
                fmt9(p.field_mt.z),
                fmt9(l.offset_khz),
                l.kind.as_str().to_string(),
                l.subsite.label().to_string(),
                fmt9(l.weight),
            ]
        })
    });
    csv_bytes(&LINES_HEADER, rows)
}

pub fn profile_csv(p: &AbsorptionProfile) -> Vec<u8> {
    csv_bytes(
        &PROFILE_HEADER,
        p.frequencies().zip(&p.values).map(|(f, v)| vec![fmt9(f), fmt9(*v)]),
    )
}

pub fn fid_csv(t: &FidTrace) -> Vec<u8> {
    csv_bytes(
        &FID_HEADER,
        t.samples.iter().enumerate().map(|(m, v)| vec![fmt9(t.time(m)), fmt9(*v)]),
    )
}

pub fn observations_csv(obs: &ObservationSet) -> Vec<u8> {
    csv_bytes(
        &OBSERVATION_HEADER,
        obs.records().iter().map(|r| {
            vec![
                r.scan_n.to_string(),
                fmt9(r.field_mt.x),
                fmt9(r.field_mt.y),
                fmt9(r.field_mt.z),
                r.transition.k().to_string(),
                r.transition.l().to_string(),
                r.kind.as_str().to_string(),
                fmt9(r.offset_khz),
                fmt9(r.sigma_khz),
            ]
        }),
    )
}

fn check_header(path: &Path, got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    let got: Vec<&str> = got.iter().map(str::trim).collect();
    if got != want {
        return Err(AppError::input(path, format!("header must be `{}`, found `{}`", want.join(","), got.join(","))));
    }
    Ok(())
}

/// Reads an observation CSV. Row numbers in errors count data rows from 1.
pub fn read_observations(path: &Path) -> Result<ObservationSet> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::input(path, e))?;
    parse_observations(path, &text)
}

pub fn parse_observations(path: &Path, text: &str) -> Result<ObservationSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| AppError::input(path, e))?.clone();
    check_header(path, &header, &OBSERVATION_HEADER)?;
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let bad = |message: String| AppError::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != OBSERVATION_HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", OBSERVATION_HEADER.len(), rec.len())));
        }
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("{}: `{}` is not a finite number", OBSERVATION_HEADER[j], &rec[j])))
        };
        let int = |j: usize| -> Result<usize> {
            rec[j]
                .parse::<usize>()
                .map_err(|_| bad(format!("{}: `{}` is not a non-negative integer", OBSERVATION_HEADER[j], &rec[j])))
        };
        let scan_n = int(0)?;
        let field_mt = Vector3::new(num(1)?, num(2)?, num(3)?);
        let (k, l) = (int(4)?, int(5)?);
        let transition = u8::try_from(k)
            .ok()
            .zip(u8::try_from(l).ok())
            .and_then(|(k, l)| Transition::new(k, l).ok())
            .ok_or_else(|| bad(format!("transition ({k},{l}) must use labels 1, 3 or 5")))?;
        let kind = LineKind::parse(&rec[6]).ok_or_else(|| bad(format!("kind: `{}` is not hole or antihole", &rec[6])))?;
        let offset_khz = num(7)?;
        let sigma_khz = num(8)?;
        if offset_khz < 0.0 {
            return Err(bad("offset_kHz must be a magnitude (>= 0)".into()));
        }
        if sigma_khz <= 0.0 {
            return Err(bad("sigma_kHz must be positive".into()));
        }
        records.push(Observation {
            scan_n,
            field_mt,
            transition,
            kind,
            offset_khz,
            sigma_khz,
        });
    }
    ObservationSet::new(records).map_err(|e| AppError::input(path, e))
}

/// Reads a `freq_kHz,absorption` profile. The grid must be uniform.
pub fn parse_profile(path: &Path, text: &str, width_khz: f64) -> Result<AbsorptionProfile> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| AppError::input(path, e))?.clone();
    check_header(path, &header, &PROFILE_HEADER)?;
    let mut f = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AppError::Row {
            path: path.to_path_buf(),
            row: i + 1,
            message: e.to_string(),
        })?;
        let parse = |j: usize| {
            rec.get(j).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| AppError::Row {
                path: path.to_path_buf(),
                row: i + 1,
                message: format!("{} is not a number", PROFILE_HEADER[j]),
            })
        };
        f.push(parse(0)?);
        values.push(parse(1)?);
    }
    if f.len() < 2 {
        return Err(AppError::input(path, "profile needs at least two rows"));
    }
    let step = (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64;
    Ok(AbsorptionProfile {
        start_khz: f[0],
        step_khz: step,
        values,
        width_khz,
    })
}
