use approx::assert_relative_eq;
use hyperspin_core::branching::{branching_table, select_solution, transition_map, MeasuredTable};
use hyperspin_core::fitting::{synthetic_observations, SyntheticSpec};
use hyperspin_core::reference;
use hyperspin_core::spectra::{
    line_positions, line_positions_with, synth_profile, LineShape, LineWeights, ProfileGrid, SiteSplittings, SpiralScan,
    Subsite,
};
use hyperspin_core::spinops::{
    build_m, build_q, eigenvalues, hamiltonian, spin_operators, EulerAngles, Hermitian6, QuadrupoleParams, StateHamiltonian,
    ZeemanParams,
};
use hyperspin_core::symmetry::{c2_rotation, enumerate_solutions, subsite_tensors, C2Axis};
use hyperspin_core::{SiteModel, StateModel};
use nalgebra::{Complex, Matrix3, Vector3};
use proptest::prelude::*;

fn angles() -> impl Strategy<Value = EulerAngles> {
    (-180.0..180.0f64, 0.0..180.0f64, -180.0..180.0f64).prop_map(|(a, b, c)| EulerAngles::from_degrees(a, b, c))
}

fn field(max: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-max..max, -max..max, -max..max).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn g_value() -> impl Strategy<Value = f64> {
    prop_oneof![-15.0..-2.0f64, 2.0..15.0f64]
}

fn state() -> impl Strategy<Value = StateModel> {
    (10.0..60.0f64, 0.05..0.3f64, angles(), g_value(), g_value(), g_value(), angles()).prop_map(
        |(d, eta, qa, g1, g2, g3, ma)| StateModel {
            quadrupole: QuadrupoleParams::new(d, eta * d / 3.0),
            q_angles: qa,
            zeeman: ZeemanParams::new(g1, g2, g3),
            m_angles: ma,
        },
    )
}

fn site() -> impl Strategy<Value = SiteModel> {
    (state(), state(), -180.0..180.0f64, 0.0..180.0f64).prop_map(|(ground, excited, a, b)| SiteModel {
        ground,
        excited,
        c2: C2Axis::new(a, b),
        gamma: 0.0,
    })
}

fn close(a: &Hermitian6, b: &Hermitian6, tol: f64) -> bool {
    (a - b).iter().all(|z| z.norm() < tol)
}

#[test]
fn spin_operator_commutators_and_casimir() {
    let ops = spin_operators();
    let (x, y, z) = (&ops.ix, &ops.iy, &ops.iz);
    let i = Complex::i();
    assert!(close(&(x * y - y * x), &(z * i), 1e-12));
    assert!(close(&(y * z - z * y), &(x * i), 1e-12));
    assert!(close(&(z * x - x * z), &(y * i), 1e-12));
    let casimir = x * x + y * y + z * z;
    assert!(close(&casimir, &(Hermitian6::identity() * Complex::new(8.75, 0.0)), 1e-12));
}

#[test]
fn zero_field_levels_pair_up() {
    let g = reference::ground_state();
    let ev = eigenvalues(&hamiltonian(&g.q_tensor(), &g.m_tensor(), &Vector3::zeros()));
    for k in 0..3 {
        assert!((ev[2 * k + 1] - ev[2 * k]).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rotations_are_orthonormal(e in angles()) {
        let r = e.matrix();
        prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_eigenvalues_are_principal_values(e in angles(), d in 5.0..60.0f64, g in (g_value(), g_value(), g_value())) {
        let p = QuadrupoleParams::new(d, 0.2 * d);
        let mut want = p.principal_values();
        let mut got = build_q(&p, &e).principal_values();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for k in 0..3 {
            prop_assert!((want[k] - got[k]).abs() < 1e-9);
        }
        let mut want = [g.0, g.1, g.2];
        let mut got = build_m(&ZeemanParams::new(g.0, g.1, g.2), &e).principal_values();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for k in 0..3 {
            prop_assert!((want[k] - got[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_is_frame_covariant(s in state(), r in angles(), b in field(20.0)) {
        let r = r.matrix();
        let a = eigenvalues(&hamiltonian(&s.q_tensor(), &s.m_tensor(), &b));
        let c = eigenvalues(&hamiltonian(&s.q_tensor().rotated(&r), &s.m_tensor().rotated(&r), &(r * b)));
        for k in 0..6 {
            prop_assert!((a[k] - c[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn splittings_are_even_in_field(s in state(), b in field(20.0)) {
        let h = StateHamiltonian::new(&s.q_tensor(), &s.m_tensor());
        let a = h.levels(&b).unwrap().splittings_khz;
        let c = h.levels(&(-b)).unwrap().splittings_khz;
        for k in 0..3 {
            prop_assert!((a[k] - c[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn sign_family_members_share_spectra(s in state(), b in field(20.0)) {
        let fam = enumerate_solutions(&s);
        let base = eigenvalues(&hamiltonian(&s.q_tensor(), &s.m_tensor(), &b));
        let scale = base.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for m in &fam.members {
            let ev = eigenvalues(&hamiltonian(&m.model.q_tensor(), &m.model.m_tensor(), &b));
            for k in 0..6 {
                prop_assert!((ev[k] - base[k]).abs() <= 1e-9 * scale, "{}", m.signs);
            }
        }
    }

    #[test]
    fn subsite_map_is_an_involution(s in state(), a in -180.0..180.0f64, b in 0.0..180.0f64) {
        let axis = C2Axis::new(a, b);
        let (q2, m2) = subsite_tensors(&s.q_tensor(), &s.m_tensor(), &axis);
        let (q1, m1) = subsite_tensors(&q2, &m2, &axis);
        prop_assert!(q1.max_abs_diff(&s.q_tensor()) < 1e-12);
        prop_assert!(m1.max_abs_diff(&s.m_tensor()) < 1e-12);
    }

    #[test]
    fn c2_rotation_depends_only_on_the_line(a in -180.0..180.0f64, b in 0.0..180.0f64) {
        let u = C2Axis::new(a, b);
        let v = C2Axis::from_direction(&(-u.direction()));
        prop_assert!((c2_rotation(&u) - c2_rotation(&v)).abs().max() < 1e-12);
    }

    #[test]
    fn branching_tables_are_doubly_stochastic(g in state(), e in state()) {
        let t = branching_table(&g, &e);
        prop_assert!(t.stochastic_defect() < 1e-9);
        prop_assert!(t.0.iter().flatten().all(|v| *v >= -1e-12));
    }

    #[test]
    fn transition_maps_are_doubly_stochastic(s in site(), b in field(50.0), two in any::<bool>()) {
        let sub = if two { Subsite::Two } else { Subsite::One };
        prop_assert!(transition_map(&s, &b, sub).stochastic_defect() < 1e-9);
    }

    #[test]
    fn ranking_ignores_common_error_scale(g in state(), e in state(), f in 0.1..10.0f64) {
        let fam_g = enumerate_solutions(&g);
        let fam_e = enumerate_solutions(&e);
        let m = MeasuredTable::uniform(reference::BRANCHING_EXP, reference::BRANCHING_EXP_ERR);
        let a = select_solution(&fam_g, &fam_e, &m, false);
        let b = select_solution(&fam_g, &fam_e, &m.scaled_errors(f), false);
        let key = |r: &hyperspin_core::branching::SolutionRanking| {
            r.pairings.iter().map(|p| (p.ground, p.excited)).collect::<Vec<_>>()
        };
        prop_assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn line_pattern_is_closed_under_negation(dg in 0.0..400.0f64, de in 0.0..400.0f64) {
        let s = line_positions(dg, de);
        let offsets: Vec<f64> = s.lines.iter().map(|l| l.offset_khz).collect();
        for (a, b) in offsets.iter().zip(offsets.iter().rev()) {
            prop_assert_eq!(*a, -*b);
        }
        let centrals = s.lines.iter().filter(|l| l.offset_khz == 0.0 && l.kind == hyperspin_core::spectra::LineKind::Hole).count();
        prop_assert_eq!(centrals, 1);
    }

    #[test]
    fn profile_is_linear_in_weights(dg in 20.0..300.0f64, de in 20.0..300.0f64, k in 0.1..5.0f64) {
        let w = LineWeights::default();
        let scaled = LineWeights {
            central: k * w.central,
            side_hole: k * w.side_hole,
            main_antihole: k * w.main_antihole,
            combination_antihole: k * w.combination_antihole,
        };
        let grid = ProfileGrid::new(500.0, 5.0).unwrap();
        let a = synth_profile(&line_positions_with(dg, de, &w, Subsite::One), 10.0, &grid, LineShape::Lorentzian).unwrap();
        let b = synth_profile(&line_positions_with(dg, de, &scaled, Subsite::One), 10.0, &grid, LineShape::Lorentzian).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((k * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn subsites_coincide_in_the_plane_normal_to_the_axis(t in 0.0..std::f64::consts::TAU, mag in 1.0..20.0f64) {
        let site = reference::site();
        let u = site.c2.direction();
        let e1 = u.cross(&Vector3::x()).normalize();
        let e2 = u.cross(&e1);
        let eval = SiteSplittings::new(&site);
        for b in [(e1 * t.cos() + e2 * t.sin()) * mag, u * mag] {
            let a = eval.splittings(0, &b).unwrap();
            let c = eval.splittings(1, &b).unwrap();
            for s in 0..2 {
                for k in 0..3 {
                    prop_assert!((a[s][k] - c[s][k]).abs() < 1e-6);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn synthesis_is_seed_deterministic(seed in any::<u64>()) {
        let mut spec = SyntheticSpec::standard();
        spec.scan = SpiralScan::new(10.0, 10.0, 5.0, 20).unwrap();
        spec.noisy = true;
        spec.seed = seed;
        let site = reference::site();
        let a = synthetic_observations(&site, &spec).unwrap();
        let b = synthetic_observations(&site, &spec).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn gauge_shift_leaves_splittings_unchanged() {
    let g = reference::ground_state();
    let b = Vector3::new(3.0, -4.0, 2.0);
    let h = hamiltonian(&g.q_tensor(), &g.m_tensor(), &b);
    let shifted = h + Hermitian6::identity() * Complex::new(7.5, 0.0);
    let a = eigenvalues(&h);
    let c = eigenvalues(&shifted);
    for k in 0..3 {
        assert_relative_eq!(a[2 * k + 1] - a[2 * k], c[2 * k + 1] - c[2 * k], epsilon = 1e-9);
    }
}
