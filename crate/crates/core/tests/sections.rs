use std::f64::consts::PI;

use ma_translators::geometry::{convex_contains, convex_hull, det2, mat_mul, mat_vec, singular_values2, transpose2, Mat2};
use ma_translators::grid::{sample, Domain2D, RhsField};
use ma_translators::measure::lower_envelope;
use ma_translators::oracle::{RadialProfile, SeparableSolution};
use ma_translators::sections::{
    balance_check, caffarelli_radius, doubling_constant, doubling_ratio, eccentricity, extract_section, extract_section_fn, extract_section_pl,
    john_ellipsoid, sublevel_compactness, DoublingOptions, EllipsoidFit, Normalization, Section, SectionError,
};
use ma_translators::analysis::geometric_levels;
use ma_translators::Point2;
use proptest::prelude::*;

fn in_ellipse(fit: &EllipsoidFit, x: Point2, scale: f64) -> bool {
    let d = x - fit.center;
    let m = fit.shape;
    d.x * (m[0][0] * d.x + m[0][1] * d.y) + d.y * (m[1][0] * d.x + m[1][1] * d.y) <= scale * scale
}

/// Checks `E ⊂ P ⊂ 2E` on a 100 × 100 grid over the bounding box of `P`.
fn check_containment(poly: &[Point2], fit: &EllipsoidFit) -> Result<(), String> {
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = (hi - lo) * 0.1;
    let (lo, hi) = (lo - pad, hi + pad);
    for i in 0..100 {
        for j in 0..100 {
            let x = Point2::new(lo.x + (hi.x - lo.x) * i as f64 / 99.0, lo.y + (hi.y - lo.y) * j as f64 / 99.0);
            let inside = convex_contains(poly, x);
            if in_ellipse(fit, x, 1.0 - 1e-9) && !inside {
                return Err(format!("{x:?} in the ellipse but not the polygon"));
            }
            if inside && !in_ellipse(fit, x, 2.0) {
                return Err(format!("{x:?} in the polygon but not the doubled ellipse"));
            }
        }
    }
    Ok(())
}

fn map_poly(b: &Mat2, poly: &[Point2]) -> Vec<Point2> {
    poly.iter().map(|&v| mat_vec(b, v)).collect()
}

#[test]
fn section_examples() {
    let q = |x: Point2| 0.5 * x.norm_sq();
    let s = extract_section_fn(&q, Point2::ORIGIN, Point2::ORIGIN, 0.5, 2048, 10.0).unwrap();
    assert!((s.area() - PI).abs() < 1e-5);
    // Tilting by p = (1, 0) and moving the base to x0 = (1, 0) gives the same disk.
    let s = extract_section_fn(&q, Point2::new(1.0, 0.0), Point2::new(1.0, 0.0), 0.5, 2048, 10.0).unwrap();
    assert!((s.area() - PI).abs() < 1e-5);
    assert!(s.polygon.iter().all(|v| ((*v - Point2::new(1.0, 0.0)).norm() - 1.0).abs() < 1e-9));

    let g = sample(q, &Domain2D::square(2.0).unwrap(), 0.02).unwrap();
    let s = extract_section(&g, Point2::ORIGIN, Point2::ORIGIN, 0.5).unwrap();
    assert!((s.area() - PI).abs() < 2e-3);
    assert!(matches!(extract_section(&g, Point2::ORIGIN, Point2::ORIGIN, 3.0), Err(SectionError::SectionNotCompact { .. })));
    assert!(matches!(extract_section(&g, Point2::ORIGIN, Point2::ORIGIN, 0.0), Err(SectionError::InvalidArgument(_))));

    let f = lower_envelope(g.nodes(), g.values()).unwrap();
    let s = extract_section_pl(&f, Point2::ORIGIN, Point2::ORIGIN, 0.5).unwrap();
    assert!((s.area() - PI).abs() < 2e-3);
    assert!(matches!(extract_section_pl(&f, Point2::ORIGIN, Point2::ORIGIN, 3.0), Err(SectionError::SectionNotCompact { .. })));
}

#[test]
fn radius_and_balance_of_the_quadratic() {
    assert!(matches!(caffarelli_radius(1.0, 0.0), Err(SectionError::DivideByZeroMass)));
    assert_eq!(caffarelli_radius(2.0, 4.0).unwrap(), 1.0);
    let q = |x: Point2| 0.5 * x.norm_sq();
    for t in [0.5, 2.0, 8.0] {
        let s = extract_section_fn(&q, Point2::ORIGIN, Point2::ORIGIN, t, 1024, 100.0).unwrap();
        let fit = john_ellipsoid(&s.polygon, Normalization::Symmetric).unwrap();
        assert!((eccentricity(&fit) - 1.0).abs() < 1e-4);
        let b = balance_check(&s, &fit, caffarelli_radius(t, s.area()).unwrap()).unwrap();
        // Disk of radius √(2t) against r = t/√(2πt): k₀ = √(4π).
        assert!((b.k0 - (4.0 * PI).sqrt()).abs() < 1e-3, "t={t}: {}", b.k0);
    }
}

#[test]
fn doubling_of_the_degenerate_weight() {
    let w = |x: Point2| x.x.abs().powi(4);
    for (c2, axes, angle) in [(0.0, (1.0, 1.0), 0.0), (0.3, (0.2, 0.5), 0.7), (-2.0, (3.0, 0.01), 2.0)] {
        let r = doubling_ratio(&w, Point2::new(0.0, c2), axes, angle).unwrap();
        assert!((r - 64.0).abs() < 1e-10, "{r}");
    }
    let off = doubling_ratio(&w, Point2::new(1.0, 0.0), (0.5, 0.5), 0.0).unwrap();
    assert!(off > 4.0 && off < 64.0);
    assert_eq!(doubling_ratio(&|_: Point2| 1.0, Point2::ORIGIN, (1.0, 2.0), 0.3).unwrap(), 4.0);

    let region = Domain2D::disk(1.0).unwrap();
    let est = doubling_constant(&w, &region, 200, 7, DoublingOptions::default()).unwrap();
    assert!(est.estimate <= 64.0 * (1.0 + 1e-9));
    assert!(est.estimate >= 60.0, "{}", est.estimate);
    let raw = doubling_constant(&w, &region, 200, 7, DoublingOptions { ascent_rounds: 0 }).unwrap();
    assert!(raw.estimate <= est.estimate);
    assert!(matches!(doubling_constant(&w, &region, 99, 7, DoublingOptions::default()), Err(SectionError::InvalidArgument(_))));
}

#[test]
fn doubling_is_monotone_in_nested_samples() {
    let f = RhsField::DualTranslator { alpha: 0.125, eta: 1.0 };
    let w = |x: Point2| f.eval(x);
    let region = Domain2D::square(2.0).unwrap();
    let mut last = 0.0;
    for n in [100, 150, 300] {
        let e = doubling_constant(&w, &region, n, 42, DoublingOptions { ascent_rounds: 5 }).unwrap();
        assert!(e.estimate >= last);
        last = e.estimate;
    }
    let a = doubling_constant(&w, &region, 150, 42, DoublingOptions { ascent_rounds: 5 }).unwrap();
    let b = doubling_constant(&w, &region, 150, 42, DoublingOptions { ascent_rounds: 5 }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn compactness_examples() {
    let v = sample(|x| x.norm_sq(), &Domain2D::disk(3.0).unwrap(), 0.1).unwrap();
    let bmin = (0..v.len()).filter(|&k| v.is_boundary_node(k)).map(|k| v.values()[k]).fold(f64::INFINITY, f64::min);
    let out = sublevel_compactness(&v, &[4.0, bmin * (1.0 - 1e-12), bmin, -1.0]);
    assert!(out[0].compact && out[0].margin > 0.9);
    assert!(out[1].compact);
    assert!(!out[2].compact);
    assert!(!out[3].compact);

    // The primal profile on a square too small to contain its top sub-level set.
    let p = RadialProfile::primal(0.125).unwrap().sample(&Domain2D::square(1.0).unwrap(), 0.05).unwrap();
    let top = p.values().iter().cloned().fold(f64::MIN, f64::max);
    let pmin = (0..p.len()).filter(|&k| p.is_boundary_node(k)).map(|k| p.values()[k]).fold(f64::INFINITY, f64::min);
    let out = sublevel_compactness(&p, &[top, 0.5 * pmin]);
    assert!(!out[0].compact);
    assert!(out[1].compact);
}

#[test]
fn separable_balance_is_uniform() {
    let sep = SeparableSolution::new(0.125, 1.0).unwrap();
    let sv = |x: Point2| sep.value(x);
    let f = RhsField::Degenerate { alpha: 0.125 };
    let mut ks = Vec::new();
    for t in geometric_levels(1.0, 2.0, 8) {
        let s = extract_section_fn(&sv, Point2::ORIGIN, Point2::ORIGIN, t, 1024, 1e3).unwrap();
        let fit = john_ellipsoid(&s.polygon, Normalization::Symmetric).unwrap();
        let r = caffarelli_radius(t, s.rhs_mass(&f)).unwrap();
        ks.push(balance_check(&s, &fit, r).unwrap().k0);
    }
    let spread = ks.iter().cloned().fold(0.0, f64::max) / ks.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 3.0, "{ks:?}");
}

fn convex_polygon() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..20).prop_filter_map("degenerate hull", |pts| {
        let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
        let hull = convex_hull(&pts);
        let area = ma_translators::geometry::signed_area(&hull);
        (hull.len() >= 3 && area > 0.5).then_some(hull)
    })
}

fn unimodular() -> impl Strategy<Value = Mat2> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.3f64..3.0, 0.0f64..PI).prop_map(|(s1, s2, l, th)| {
        let shear: Mat2 = [[1.0, s1], [0.0, 1.0]];
        let low: Mat2 = [[1.0, 0.0], [s2, 1.0]];
        let diag: Mat2 = [[l, 0.0], [0.0, 1.0 / l]];
        let rot: Mat2 = [[th.cos(), -th.sin()], [th.sin(), th.cos()]];
        mat_mul(&rot, &mat_mul(&diag, &mat_mul(&low, &shear)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn john_ellipse_is_inscribed_and_doubled_covers(poly in convex_polygon()) {
        let fit = john_ellipsoid(&poly, Normalization::Symmetric).unwrap();
        prop_assert!((det2(&fit.a) - 1.0).abs() < 1e-9);
        let r = check_containment(&poly, &fit);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn eccentricity_transforms_with_unimodular_maps(poly in convex_polygon(), b in unimodular()) {
        let fit = john_ellipsoid(&poly, Normalization::Symmetric).unwrap();
        let mapped = john_ellipsoid(&map_poly(&b, &poly), Normalization::Symmetric).unwrap();
        // The John ellipse of B·P is B applied to the John ellipse of P.
        let want = singular_values2(&mat_mul(&b, &fit.a)).0;
        prop_assert!((eccentricity(&mapped) - want).abs() < 1e-6 * want, "{} vs {}", eccentricity(&mapped), want);
        let c = mat_vec(&b, fit.center);
        prop_assert!((mapped.center - c).norm() < 1e-6 * (1.0 + c.norm()));
        let m = mat_mul(&transpose2(&b), &mat_mul(&mapped.shape, &b));
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((m[i][j] - fit.shape[i][j]).abs() < 1e-6 * (fit.shape[0][0] + fit.shape[1][1]));
            }
        }
    }

    #[test]
    fn balance_is_unimodular_invariant(b in unimodular(), t in 0.5f64..4.0, px in -0.5f64..0.5) {
        let v = |x: Point2| x.x.powi(4) + x.x * x.x + 0.5 * x.y * x.y + 0.3 * x.x * x.y;
        let f = |x: Point2| 1.0 + x.x * x.x;
        let x0 = Point2::new(0.2, -0.1);
        let p = Point2::new(px, 0.0);
        let s = extract_section_fn(&v, x0, p, t, 256, 100.0).unwrap();
        let fit = john_ellipsoid(&s.polygon, Normalization::Symmetric).unwrap();
        let k0 = balance_check(&s, &fit, caffarelli_radius(t, s.mass(f)).unwrap()).unwrap().k0;

        // Push everything forward by B; f becomes f ∘ B⁻¹ and det B = 1 keeps masses.
        let binv: Mat2 = [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]];
        let fb = |y: Point2| f(mat_vec(&binv, y));
        let sb = Section { base: mat_vec(&b, x0), slope: mat_vec(&transpose2(&binv), p), height: t, polygon: map_poly(&b, &s.polygon) };
        prop_assert!((sb.mass(fb) - s.mass(f)).abs() < 1e-9 * s.mass(f));
        let fitb = john_ellipsoid(&sb.polygon, Normalization::Symmetric).unwrap();
        let k0b = balance_check(&sb, &fitb, caffarelli_radius(t, sb.mass(fb)).unwrap()).unwrap().k0;
        prop_assert!((k0 - k0b).abs() < 1e-6 * k0, "{} vs {}", k0, k0b);
    }
}
