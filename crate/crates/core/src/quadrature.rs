//! Quadrature rules: symmetric triangle rules, polygon fans, a polar disk
//! rule and adaptive Gauss–Kronrod on intervals.

use crate::geometry::{signed_area, Point2};

/// Barycentric points `(l1, l2, l3, weight)`; weights sum to one.
type TriRule = &'static [(f64, f64, f64, f64)];

const DEG1: TriRule = &[(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0)];

const DEG2: TriRule = &[
    (2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
    (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
];

const DEG3: TriRule = &[
    (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -27.0 / 48.0),
    (0.6, 0.2, 0.2, 25.0 / 48.0),
    (0.2, 0.6, 0.2, 25.0 / 48.0),
    (0.2, 0.2, 0.6, 25.0 / 48.0),
];

// Dunavant, 6 points.
const DEG4: TriRule = &[
    (0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011),
    (0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011),
    (0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011),
    (0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322),
    (0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322),
    (0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322),
];

// Dunavant, 7 points.
const DEG5: TriRule = &[
    (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506),
    (0.470142064105115, 0.059715871789770, 0.470142064105115, 0.132394152788506),
    (0.470142064105115, 0.470142064105115, 0.059715871789770, 0.132394152788506),
    (0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827),
    (0.101286507323456, 0.797426985353087, 0.101286507323456, 0.125939180544827),
    (0.101286507323456, 0.101286507323456, 0.797426985353087, 0.125939180544827),
];

/// Highest polynomial degree integrated exactly by [`triangle`].
pub const MAX_TRIANGLE_ORDER: usize = 5;

fn rule(order: usize) -> TriRule {
    match order {
        0 | 1 => DEG1,
        2 => DEG2,
        3 => DEG3,
        4 => DEG4,
        _ => DEG5,
    }
}

/// Integral of `w` over the triangle `abc`, exact for polynomials of degree ≤ `order` (capped at 5).
pub fn triangle<F: Fn(Point2) -> f64>(a: Point2, b: Point2, c: Point2, order: usize, w: &F) -> f64 {
    let area = signed_area(&[a, b, c]).abs();
    if area == 0.0 {
        return 0.0;
    }
    let s: f64 = rule(order)
        .iter()
        .map(|&(l1, l2, l3, wt)| {
            let p = Point2::new(l1 * a.x + l2 * b.x + l3 * c.x, l1 * a.y + l2 * b.y + l3 * c.y);
            wt * w(p)
        })
        .sum();
    area * s
}

/// Integral of `w` over a convex polygon by a fan of triangles from `apex`.
///
/// `apex` must lie in the closed polygon.
pub fn polygon_fan<F: Fn(Point2) -> f64>(poly: &[Point2], apex: Point2, order: usize, w: &F) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    (0..poly.len())
        .map(|i| triangle(apex, poly[i], poly[(i + 1) % poly.len()], order, w))
        .sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Product rule on the unit disk: Gauss–Legendre in `s = r²`, equispaced angles.
///
/// With `n_r` radial and `n_theta` angular points it is exact for polynomials
/// of degree ≤ min(2·`n_r`·2 − 1, `n_theta` − 1). Weights sum to π.
#[derive(Clone, Debug)]
pub struct DiskRule {
    pub points: Vec<(Point2, f64)>,
}

impl DiskRule {
    pub fn new(n_r: usize, n_theta: usize) -> Self {
        let gl = gauss_legendre(n_r);
        let mut points = Vec::with_capacity(n_r * n_theta);
        for &(s, ws) in &gl {
            let r = ((s + 1.0) * 0.5).sqrt();
            for k in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
                // ds dθ / 2 over s ∈ [0,1] and the [-1,1] → [0,1] jacobian.
                let w = ws * 0.5 * 0.5 * (2.0 * std::f64::consts::PI / n_theta as f64);
                points.push((Point2::from_polar(r, th), w));
            }
        }
        DiskRule { points }
    }

    /// Default rule: 3 radial by 8 angular points, exact through degree 7.
    pub fn order4() -> Self {
        DiskRule::new(3, 8)
    }
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for j in 0..7 {
        let x = h * GK_NODES[j];
        let s = f(c - x) + f(c + x);
        k += GK_WK[j] * s;
        if j % 2 == 1 {
            g += GK_WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth == 0 || (b - a).abs() < 1e-15 * (a.abs() + b.abs()) {
            return val;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    rec(f, a, b, tol, 40)
}
