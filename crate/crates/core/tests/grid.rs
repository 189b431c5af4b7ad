use std::path::PathBuf;

use ma_translators::grid::{check_rhs_condition, sample, Domain2D, GridError, GridFunction, RhsField};
use ma_translators::oracle::RadialProfile;
use ma_translators::Point2;
use proptest::prelude::*;

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/radial_dual_alpha8.gfn")
}

/// The shipped fixture: dual radial profile, α = 1/8, η = 1, on the disk of radius 8 with h = 1/2.
fn regenerate_fixture() -> GridFunction {
    RadialProfile::dual(0.125, 1.0).unwrap().sample(&Domain2D::disk(8.0).unwrap(), 0.5).unwrap()
}

#[test]
fn shipped_fixture_matches_regeneration() {
    let path = fixture_path();
    if std::env::var_os("REGENERATE_FIXTURES").is_some() {
        regenerate_fixture().save(&path).unwrap();
    }
    let loaded = GridFunction::load(&path).unwrap();
    let fresh = regenerate_fixture();
    assert_eq!(loaded, fresh);
    assert_eq!(loaded.len(), fresh.len());
}

#[test]
fn sample_examples() {
    let g = sample(|_| 0.0, &Domain2D::square(1.0).unwrap(), 0.5).unwrap();
    assert_eq!(g.len(), 25);
    assert!(g.values().iter().all(|&v| v == 0.0));

    let g = sample(|x| 0.5 * x.norm_sq(), &Domain2D::square(1.0).unwrap(), 1.0).unwrap();
    assert_eq!(g.len(), 9);
    let mut vals: Vec<f64> = g.values().to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    assert_eq!(vals, vec![0.0, 0.5, 1.0]);

    let f = RhsField::DualTranslator { alpha: 0.125, eta: 1.0 };
    assert_eq!(f.eval(Point2::new(1.0, 0.0)), 4.0);
}

#[test]
fn node_order_is_row_major_from_the_bottom() {
    let g = sample(|_| 1.0, &Domain2D::disk(2.0).unwrap(), 0.5).unwrap();
    for w in g.nodes().windows(2) {
        assert!((w[0].y, w[0].x) < (w[1].y, w[1].x));
    }
}

#[test]
fn sample_errors() {
    let d = Domain2D::square(1.0).unwrap();
    assert!(matches!(sample(|x| if x.x > 0.5 { f64::NAN } else { 0.0 }, &d, 0.5), Err(GridError::NonfiniteValue { .. })));
    let tri = Domain2D::polygon(vec![Point2::new(0.1, 0.1), Point2::new(0.4, 0.1), Point2::new(0.1, 0.4)]).unwrap();
    assert!(matches!(sample(|_| 0.0, &tri, 1.0), Err(GridError::EmptyDomain)));
}

#[test]
fn rhs_condition_examples() {
    let f = RhsField::DualTranslator { alpha: 0.125, eta: 1.0 };
    let rep = check_rhs_condition(&f, 0.125, 0.05, &[10.0]).unwrap();
    assert!((rep.deviation[0] - (1.01f64.powi(2) - 1.0)).abs() < 1e-12);
    assert!(check_rhs_condition(&RhsField::Constant(1.0), 0.25, 0.1, &[1.0]).is_err());
    let deg = RhsField::Degenerate { alpha: 0.125 };
    let rep = check_rhs_condition(&deg, 0.125, 0.1, &[10.0]).unwrap();
    assert_eq!(rep.deviation[0], 1.0);
}

#[test]
fn rhs_condition_decreases_to_zero() {
    let radii: Vec<f64> = (0..12).map(|k| 2f64.powi(k)).collect();
    for (alpha, eta) in [(0.125, 1.0), (0.2, 0.5), (1.0 / 6.0, 0.01)] {
        let rep = check_rhs_condition(&RhsField::DualTranslator { alpha, eta }, alpha, 1e-3, &radii).unwrap();
        assert!(rep.deviation.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.eventually_within);
        assert!(*rep.deviation.last().unwrap() < 1e-5);
    }
}

#[test]
fn malformed_files_report_lines() {
    let g = sample(|x| x.x, &Domain2D::square(1.0).unwrap(), 1.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.gfn");
    g.save(&p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let wrong_count = text.replace("n 9", "n 8");
    assert!(matches!(GridFunction::parse(&wrong_count), Err(GridError::MalformedFile { line: 4, .. })));
    let bad_value = text.replacen("-1 -1 -1", "-1 -1 x", 1);
    assert!(matches!(GridFunction::parse(&bad_value), Err(GridError::MalformedFile { line: 5, .. })));
    let truncated: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
    assert!(matches!(GridFunction::parse(&truncated), Err(GridError::MalformedFile { .. })));
}

fn domain_strategy() -> impl Strategy<Value = (Domain2D, f64)> {
    prop_oneof![
        (0.5f64..3.0, 0.1f64..0.5).prop_map(|(w, h)| (Domain2D::square(w).unwrap(), h)),
        (0.5f64..3.0, 0.1f64..0.5).prop_map(|(r, h)| (Domain2D::disk(r).unwrap(), h)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn save_load_is_bit_exact((d, h) in domain_strategy(), a in -10.0f64..10.0, b in -1e3f64..1e3) {
        let g = sample(|x| a * x.x.sin() + b * x.y.powi(3) + 1e-300 * x.x, &d, h).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.gfn");
        g.save(&p).unwrap();
        let back = GridFunction::load(&p).unwrap();
        prop_assert_eq!(back.nodes(), g.nodes());
        prop_assert!(back.values().iter().zip(g.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rhs_fields_are_positive_off_the_origin(
        x in -1e3f64..1e3, y in -1e3f64..1e3,
        alpha in 0.01f64..0.249, eta in 0.0f64..=1.0,
    ) {
        let p = Point2::new(x, y);
        prop_assume!(p.norm() > 1e-6);
        let dual = RhsField::DualTranslator { alpha, eta };
        prop_assert!(dual.eval(p) > 0.0);
        prop_assert!(RhsField::Constant(2.0).eval(p) > 0.0);
        if x.abs() >= 1e-2 && alpha >= 0.05 {
            let deg = RhsField::Degenerate { alpha };
            prop_assert!(deg.eval(p) > 0.0);
        }
    }
}
