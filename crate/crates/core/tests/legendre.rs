use ma_translators::grid::{sample, Domain2D, GridFunction};
use ma_translators::legendre::{
    biconjugate, biconjugate_on, conjugate, default_dual_domain, legendre_transform, legendre_transform_brute, max_fd_slope, Method,
};
use ma_translators::measure::convexity_defect;
use ma_translators::Point2;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// `⟨y, x⟩ − u` in exact rational arithmetic.
fn gap(y: Point2, x: Point2, u: f64) -> BigRational {
    q(y.x) * q(x.x) + q(y.y) * q(x.y) - q(u)
}

/// Convex envelope at every node by minimizing over all triangles and segments of nodes.
fn brute_envelope(g: &GridFunction) -> Vec<f64> {
    let (x, v) = (g.nodes(), g.values());
    let n = x.len();
    let mut env = v.to_vec();
    for i in 0..n {
        let p = x[i];
        for a in 0..n {
            for b in a + 1..n {
                let d = x[b] - x[a];
                let w = p - x[a];
                if d.cross(w) == 0.0 {
                    let t = d.dot(w) / d.norm_sq();
                    if (0.0..=1.0).contains(&t) {
                        env[i] = env[i].min((1.0 - t) * v[a] + t * v[b]);
                    }
                    continue;
                }
                for c in b + 1..n {
                    let det = (x[b] - x[a]).cross(x[c] - x[a]);
                    if det == 0.0 {
                        continue;
                    }
                    let l1 = (x[b] - p).cross(x[c] - p) / det;
                    let l2 = (x[c] - p).cross(x[a] - p) / det;
                    let l3 = 1.0 - l1 - l2;
                    if l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0 {
                        env[i] = env[i].min(l1 * v[a] + l2 * v[b] + l3 * v[c]);
                    }
                }
            }
        }
    }
    env
}

#[test]
fn examples() {
    let u = sample(|x| 0.5 * x.norm_sq(), &Domain2D::square(2.0).unwrap(), 0.25).unwrap();
    let r = legendre_transform(&u, &Domain2D::square(1.0).unwrap(), 0.5).unwrap();
    let k = r.dual.index_of(1, 0).unwrap();
    assert_eq!(r.dual.values()[k], 0.125);

    let u = sample(|x| x.x + 2.0 * x.y, &Domain2D::square(1.0).unwrap(), 0.25).unwrap();
    let r = legendre_transform(&u, &Domain2D::square(2.0).unwrap(), 1.0).unwrap();
    assert_eq!(r.dual.values()[r.dual.index_of(1, 2).unwrap()], 0.0);

    let u = sample(|x| x.norm(), &Domain2D::square(1.0).unwrap(), 0.05).unwrap();
    let r = legendre_transform(&u, &Domain2D::square(0.5).unwrap(), 0.1).unwrap();
    let k = r.dual.index_of(3, 0).unwrap();
    assert!(r.dual.values()[k].abs() < 1e-12);
}

#[test]
fn conjugate_of_convex_sample_is_convex() {
    let u = sample(|x| (1.0 + x.norm_sq()).powf(1.5) + 0.3 * x.x, &Domain2D::disk(1.5).unwrap(), 0.1).unwrap();
    let d = default_dual_domain(&u, 0.1).unwrap();
    let r = legendre_transform(&u, &d, 0.1).unwrap();
    let vmax = r.dual.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(convexity_defect(r.dual.nodes(), r.dual.values()).unwrap() <= 8.0 * f64::EPSILON * vmax);
}

#[test]
fn biconjugate_of_convex_input_is_close() {
    let u = sample(|x| 0.5 * x.norm_sq(), &Domain2D::square(1.0).unwrap(), 0.1).unwrap();
    let hd = 0.05;
    let b = biconjugate(&u, hd).unwrap();
    let diam = u.domain().diameter();
    for (x, y) in u.values().iter().zip(b.values()) {
        assert!(y <= x);
        assert!(x - y <= 2.0 * hd * diam);
    }
}

#[test]
fn biconjugate_of_double_well_is_the_envelope() {
    let a = Point2::new(0.5, 0.0);
    let u = sample(|x| (x - a).norm().min((x + a).norm()), &Domain2D::square(1.0).unwrap(), 0.25).unwrap();
    let hd = 0.01;
    let b = biconjugate(&u, hd).unwrap();
    let env = brute_envelope(&u);
    let diam = u.domain().diameter();
    for k in 0..u.len() {
        assert!(b.values()[k] <= env[k] + 1e-12);
        assert!(env[k] - b.values()[k] <= 2.0 * hd * diam, "node {k}");
    }
    let mid = u.index_of(0, 0).unwrap();
    assert!(env[mid] < u.values()[mid] - 0.1);
    assert!(b.values()[mid] < u.values()[mid] - 0.1);
}

#[test]
fn biconjugate_of_perturbed_quadratic_changes_locally() {
    let mut u = sample(|x| x.norm_sq(), &Domain2D::square(1.0).unwrap(), 0.25).unwrap();
    let c = u.index_of(1, 1).unwrap();
    let mut vals = u.values().to_vec();
    vals[c] -= 1.0;
    u = u.with_values(vals).unwrap();
    let env = brute_envelope(&u);
    let hd = 0.02;
    let b = biconjugate(&u, hd).unwrap();
    let slope = max_fd_slope(&u);
    for k in 0..u.len() {
        assert!((b.values()[k] - env[k]).abs() <= 2.0 * hd * u.domain().diameter());
        // The dent only reaches nodes whose value can be undercut by chords through it.
        let far = (u.nodes()[k] - u.nodes()[c]).norm() > 1.0;
        if far {
            assert!((u.values()[k] - env[k]).abs() < 1e-12, "node {k} far from the dent changed");
        }
    }
    assert!(env[c] == u.values()[c] && slope > 0.0);
}

#[test]
fn involution_on_a_fixed_dual_lattice() {
    let a = Point2::new(0.4, 0.1);
    let u = sample(|x| (x - a).norm().min((x + a).norm()) + 0.2 * x.y * x.y, &Domain2D::disk(1.0).unwrap(), 0.1).unwrap();
    let d = default_dual_domain(&u, 0.05).unwrap();
    let b1 = biconjugate_on(&u, &d, 0.05).unwrap();
    let b2 = biconjugate_on(&b1, &d, 0.05).unwrap();
    assert_eq!(b1, b2);
    let c1 = biconjugate(&u, 0.05).unwrap();
    let c2 = biconjugate(&c1, 0.05).unwrap();
    assert_eq!(c1, c2);
}

#[test]
fn fast_equals_brute_on_small_grids() {
    for n in [1usize, 2, 3, 7, 16, 40] {
        for m in [2usize, 5, 40] {
            let w = (n.max(2) - 1) as f64 * 0.1;
            let h = (m - 1) as f64 * 0.1;
            let rect = Domain2D::polygon(vec![Point2::new(-0.05, -0.05), Point2::new(w, -0.05), Point2::new(w, h), Point2::new(-0.05, h)]).unwrap();
            let g = sample(|x| (9.0 * x.x * x.y).sin() + x.x.powi(3), &rect, 0.1).unwrap();
            if g.nodes().iter().all(|p| p.x == g.nodes()[0].x) || g.nodes().iter().all(|p| p.y == g.nodes()[0].y) {
                continue;
            }
            let dd = Domain2D::disk(4.0).unwrap();
            let f = legendre_transform(&g, &dd, 0.3).unwrap();
            let s = legendre_transform_brute(&g, &dd, 0.3).unwrap();
            assert_eq!(f.argmax, s.argmax, "{n}x{m}");
            assert_eq!(f.dual, s.dual);
        }
    }
}

fn random_grid(n: usize, m: usize, vals: &[f64]) -> GridFunction {
    let rect = Domain2D::polygon(vec![
        Point2::new(0.0, 0.0),
        Point2::new((n - 1) as f64 * 0.25, 0.0),
        Point2::new((n - 1) as f64 * 0.25, (m - 1) as f64 * 0.25),
        Point2::new(0.0, (m - 1) as f64 * 0.25),
    ])
    .unwrap();
    let g = sample(|_| 0.0, &rect, 0.25).unwrap();
    g.with_values(vals[..g.len()].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fast_path_is_exact(n in 2usize..=40, m in 2usize..=40, vals in prop::collection::vec(-5.0f64..5.0, 1600), qh in 0.05f64..0.7) {
        let g = random_grid(n, m, &vals);
        let d = Domain2D::square(6.0).unwrap();
        let a = conjugate(&g, &d, qh, Method::Separable).unwrap();
        let b = conjugate(&g, &d, qh, Method::BruteForce).unwrap();
        prop_assert_eq!(a.argmax, b.argmax);
        prop_assert_eq!(a.dual, b.dual);
    }

    #[test]
    fn fenchel_young_holds_exactly(n in 2usize..=8, m in 2usize..=8, vals in prop::collection::vec(-3.0f64..3.0, 64)) {
        let g = random_grid(n, m, &vals);
        let r = legendre_transform(&g, &Domain2D::disk(3.0).unwrap(), 0.37).unwrap();
        for (j, (&y, &s)) in r.dual.nodes().iter().zip(r.dual.values()).enumerate() {
            for (k, (&x, &u)) in g.nodes().iter().zip(g.values()).enumerate() {
                let e = gap(y, x, u);
                prop_assert!(e <= q(s));
                if k == r.argmax[j] {
                    // Equality up to the single upward rounding of the stored value.
                    let below = f64::from_bits(if s > 0.0 { s.to_bits() - 1 } else if s < 0.0 { s.to_bits() + 1 } else { (-f64::MIN_POSITIVE).to_bits() });
                    prop_assert!(e > q(below) || e == q(s));
                    // Ties go to the smallest index.
                    for kk in 0..k {
                        prop_assert!(gap(y, g.nodes()[kk], g.values()[kk]) < e);
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_reverses_order(vals in prop::collection::vec(-3.0f64..3.0, 100), bump in prop::collection::vec(0.0f64..1.0, 100)) {
        let u = random_grid(10, 10, &vals);
        let v = u.with_values(u.values().iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let d = Domain2D::square(2.0).unwrap();
        let us = legendre_transform(&u, &d, 0.25).unwrap();
        let vs = legendre_transform(&v, &d, 0.25).unwrap();
        for (a, b) in us.dual.values().iter().zip(vs.dual.values()) {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn biconjugate_is_a_minorant(vals in prop::collection::vec(-3.0f64..3.0, 49)) {
        let u = random_grid(7, 7, &vals);
        let b = biconjugate(&u, 0.2).unwrap();
        for (x, y) in u.values().iter().zip(b.values()) {
            prop_assert!(y <= x);
        }
    }
}
