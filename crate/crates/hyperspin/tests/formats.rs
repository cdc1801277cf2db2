use std::path::Path;

use hyperspin::format::{
    fmt9, observations_csv, parse_observations, parse_profile, profile_csv, round9, to_json, OBSERVATION_HEADER,
};
use hyperspin::AppError;
use hyperspin_core::fitting::{synthetic_observations, Observation, ObservationSet, SyntheticSpec};
use hyperspin_core::reference;
use hyperspin_core::spectra::{AbsorptionProfile, LineKind, SpiralScan, Transition};
use nalgebra::Vector3;
use proptest::prelude::*;

fn close9(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-300)
}

fn same_records(a: &ObservationSet, b: &ObservationSet) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.records().iter().zip(b.records()) {
        assert_eq!(x.scan_n, y.scan_n);
        assert_eq!(x.transition, y.transition);
        assert_eq!(x.kind, y.kind);
        assert!(close9(x.offset_khz, y.offset_khz));
        assert!(close9(x.sigma_khz, y.sigma_khz));
        for i in 0..3 {
            assert!(close9(x.field_mt[i], y.field_mt[i]) || (x.field_mt[i] - y.field_mt[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn observation_csv_round_trip() {
    let mut spec = SyntheticSpec::standard();
    spec.scan = SpiralScan::new(10.0, 10.0, 5.0, 12).unwrap();
    spec.noisy = true;
    let obs = synthetic_observations(&reference::site(), &spec).unwrap();
    let text = String::from_utf8(observations_csv(&obs)).unwrap();
    assert!(text.starts_with(&OBSERVATION_HEADER.join(",")));
    let back = parse_observations(Path::new("obs.csv"), &text).unwrap();
    same_records(&obs, &back);
    assert_eq!(back.points().len(), obs.points().len());
    // the written form is a fixed point
    assert_eq!(observations_csv(&back), text.as_bytes());
}

#[test]
fn profile_csv_round_trip() {
    let p = AbsorptionProfile {
        start_khz: -2.0,
        step_khz: 0.5,
        values: vec![0.0, 0.25, -1.0 / 3.0, 1e-7, 2.0],
        width_khz: 10.0,
    };
    let text = String::from_utf8(profile_csv(&p)).unwrap();
    assert_eq!(text.lines().next(), Some("freq_kHz,absorption"));
    let back = parse_profile(Path::new("p.csv"), &text, 10.0).unwrap();
    assert_eq!(back.start_khz, -2.0);
    assert_eq!(back.step_khz, 0.5);
    for (a, b) in p.values.iter().zip(&back.values) {
        assert!(close9(*a, *b) || (a - b).abs() < 1e-300);
    }
}

fn header() -> String {
    OBSERVATION_HEADER.join(",")
}

#[test]
fn malformed_row_reports_its_number() {
    let text = format!(
        "{}\n1,0,10,0,1,5,hole,12.5,1\n2,1,9,0.5,1,5,antihole,abc,1\n",
        header()
    );
    match parse_observations(Path::new("bad.csv"), &text) {
        Err(AppError::Row { row, message, .. }) => {
            assert_eq!(row, 2);
            assert!(message.contains("offset_kHz"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bad_transition_kind_and_sigma_are_row_errors() {
    for (row, expect) in [
        ("1,0,10,0,2,5,hole,12.5,1", "transition"),
        ("1,0,10,0,1,5,peak,12.5,1", "kind"),
        ("1,0,10,0,1,5,hole,12.5,0", "sigma"),
        ("1,0,10,0,1,5,hole,-3,1", "offset"),
        ("1,0,10,0,1,5,hole,12.5", "field"),
    ] {
        let text = format!("{}\n{row}\n", header());
        match parse_observations(Path::new("x.csv"), &text) {
            Err(AppError::Row { row: 1, message, .. }) => assert!(message.contains(expect), "{message}"),
            other => panic!("{row}: {other:?}"),
        }
    }
}

#[test]
fn wrong_header_and_empty_file_are_input_errors() {
    let e = parse_observations(Path::new("x.csv"), "a,b,c\n1,2,3\n").unwrap_err();
    assert!(matches!(e, AppError::Input { .. }));
    assert_eq!(e.exit_code(), 2);
    let e = parse_observations(Path::new("x.csv"), &format!("{}\n", header())).unwrap_err();
    assert!(matches!(e, AppError::Input { .. }));
}

#[test]
fn json_floats_are_rounded_to_nine_digits() {
    let s = to_json(&serde_json::json!({"a": 0.1 + 0.2, "b": [1.0 / 3.0], "c": 7})).unwrap();
    assert!(s.contains("0.3\n") || s.contains("0.3,"), "{s}");
    assert!(s.contains("0.333333333"));
    assert!(!s.contains("0.3333333333"));
    assert!(s.ends_with('\n'));
}

#[test]
fn fmt9_examples() {
    assert_eq!(fmt9(0.0), "0");
    assert_eq!(fmt9(-0.0), "0");
    assert_eq!(fmt9(1.0), "1");
    assert_eq!(fmt9(0.1 + 0.2), "0.3");
    assert_eq!(fmt9(123456789.4), "123456789");
    assert_eq!(fmt9(-2.5e-7), "-0.00000025");
}

fn transition() -> impl Strategy<Value = Transition> {
    (prop::sample::select(vec![1u8, 3, 5]), prop::sample::select(vec![1u8, 3, 5])).prop_map(|(k, l)| Transition::new(k, l).unwrap())
}

fn observation() -> impl Strategy<Value = Observation> {
    (
        1usize..50,
        prop::array::uniform3(-20.0f64..20.0),
        transition(),
        any::<bool>(),
        0.0f64..500.0,
        0.01f64..5.0,
    )
        .prop_map(|(scan_n, b, transition, hole, offset_khz, sigma_khz)| Observation {
            scan_n,
            field_mt: Vector3::from(b),
            transition,
            kind: if hole { LineKind::Hole } else { LineKind::Antihole },
            offset_khz,
            sigma_khz,
        })
}

proptest! {
    #[test]
    fn round9_is_idempotent_and_close(v in -1e12f64..1e12) {
        let r = round9(v);
        prop_assert_eq!(round9(r), r);
        prop_assert!((r - v).abs() <= 5e-9 * v.abs());
        prop_assert_eq!(fmt9(v).parse::<f64>().unwrap(), if r == 0.0 { 0.0 } else { r });
    }

    #[test]
    fn any_observation_set_round_trips(records in prop::collection::vec(observation(), 1..20)) {
        // one field per scan index
        let mut records = records;
        for r in records.iter_mut() {
            let n = r.scan_n as f64;
            r.field_mt = Vector3::new(n, -n / 3.0, 0.1 * n);
        }
        let obs = ObservationSet::new(records).unwrap();
        let text = String::from_utf8(observations_csv(&obs)).unwrap();
        let back = parse_observations(Path::new("p.csv"), &text).unwrap();
        same_records(&obs, &back);
    }
}
