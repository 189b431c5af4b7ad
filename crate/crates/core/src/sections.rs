//! Sections of convex functions and their affine normalization.
//!
//! A section `S_{t,x₀,p} = {x : v(x) ≤ v(x₀) + ⟨p, x − x₀⟩ + t}` is stored as a
//! convex polygon. The maximum-area inscribed ellipse `c + E·B₁` normalizes it;
//! `A = E / √det E` is the unimodular shape and `|A|` the eccentricity.

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{centroid, convex_hull, det2, inverse2, mat_vec, segment_distance, signed_area, singular_values2, Mat2, Point2};
use crate::grid::{Domain2D, GridFunction, RhsField};
use crate::measure::PLConvexFunction;
use crate::quadrature::{polygon_fan, DiskRule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SectionError {
    #[error("section at height {t} reaches the boundary of the computational domain")]
    SectionNotCompact { t: f64 },
    #[error("polygon is degenerate (area {area:e})")]
    DegeneratePolygon { area: f64 },
    #[error("section mass is zero")]
    DivideByZeroMass,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ellipse fit did not converge")]
    FitFailed,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Section {
    pub base: Point2,
    pub slope: Point2,
    pub height: f64,
    /// Counterclockwise vertices.
    pub polygon: Vec<Point2>,
}

impl Section {
    pub fn area(&self) -> f64 {
        signed_area(&self.polygon)
    }

    /// `∫_S f` by a fan rule exact through degree 4 on each triangle.
    pub fn mass<F: Fn(Point2) -> f64>(&self, f: F) -> f64 {
        polygon_fan(&self.polygon, centroid(&self.polygon), 4, &f)
    }

    pub fn rhs_mass(&self, f: &RhsField) -> f64 {
        self.mass(|x| f.eval(x))
    }
}

fn check_t(t: f64) -> Result<(), SectionError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SectionError::InvalidArgument(format!("height must be positive, got {t}")))
    }
}

fn finish(base: Point2, slope: Point2, t: f64, pts: &[Point2]) -> Result<Section, SectionError> {
    let polygon = convex_hull(pts);
    let area = signed_area(&polygon);
    if polygon.len() < 3 || !(area > 0.0) {
        return Err(SectionError::DegeneratePolygon { area });
    }
    Ok(Section { base, slope, height: t, polygon })
}

/// Section of a lattice function; level crossings are linearly interpolated along lattice edges.
///
/// Fails with [`SectionError::SectionNotCompact`] when a boundary node lies in the section.
pub fn extract_section(v: &GridFunction, x0: Point2, p: Point2, t: f64) -> Result<Section, SectionError> {
    check_t(t)?;
    let v0 = v
        .interpolate(x0)
        .ok_or_else(|| SectionError::InvalidArgument("base point outside the lattice".into()))?;
    let shifted = |k: usize| v.values()[k] - v0 - p.dot(v.nodes()[k] - x0);
    let mut pts = Vec::new();
    for k in 0..v.len() {
        let sk = shifted(k);
        if sk > t {
            continue;
        }
        if v.is_boundary_node(k) {
            return Err(SectionError::SectionNotCompact { t });
        }
        pts.push(v.nodes()[k]);
        let [i, j] = v.lattice_index(k);
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(m) = v.index_of(i + di, j + dj) {
                let sm = shifted(m);
                if sm > t {
                    let s = (t - sk) / (sm - sk);
                    pts.push(v.nodes()[k] + (v.nodes()[m] - v.nodes()[k]) * s);
                }
            }
        }
    }
    pts.push(x0);
    finish(x0, p, t, &pts)
}

/// Exact section of a piecewise-linear convex function: the hull of the sites cut by every face plane.
pub fn extract_section_pl(f: &PLConvexFunction, x0: Point2, p: Point2, t: f64) -> Result<Section, SectionError> {
    check_t(t)?;
    let v0 = f
        .value_at(x0)
        .ok_or_else(|| SectionError::InvalidArgument("base point outside the convex hull of the sites".into()))?;
    let level = v0 - p.dot(x0) + t;
    let mut poly = convex_hull(f.sites());
    let hull = poly.clone();
    for (g, c) in f.face_planes() {
        // g·x + c − p·x ≤ level
        poly = clip_halfplane(&poly, g - p, level - c);
        if poly.is_empty() {
            break;
        }
    }
    let touches = poly
        .iter()
        .any(|&q| hull.iter().enumerate().any(|(k, &a)| segment_distance(q, a, hull[(k + 1) % hull.len()]) <= 1e-12 * (1.0 + q.norm())));
    if touches {
        return Err(SectionError::SectionNotCompact { t });
    }
    finish(x0, p, t, &poly)
}

fn clip_halfplane(poly: &[Point2], d: Point2, c: f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let fa = a.dot(d) - c;
        let fb = b.dot(d) - c;
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            out.push(a + (b - a) * (fa / (fa - fb)));
        }
    }
    out
}

/// Section of a function given in closed form, by bisection along `n_rays` rays from `x0`.
///
/// The function is assumed convex and defined on the disk of radius `r_max` about `x0`.
pub fn extract_section_fn<V>(v: &V, x0: Point2, p: Point2, t: f64, n_rays: usize, r_max: f64) -> Result<Section, SectionError>
where
    V: Fn(Point2) -> f64 + Sync,
{
    check_t(t)?;
    if n_rays < 3 {
        return Err(SectionError::InvalidArgument("at least three rays are needed".into()));
    }
    let v0 = v(x0);
    let g = |x: Point2| v(x) - v0 - p.dot(x - x0) - t;
    let pts: Result<Vec<Point2>, SectionError> = (0..n_rays)
        .into_par_iter()
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n_rays as f64;
            let u = Point2::from_polar(1.0, th);
            let mut hi = (r_max * 1e-6).max(f64::MIN_POSITIVE);
            while g(x0 + u * hi) <= 0.0 {
                if hi >= r_max {
                    return Err(SectionError::SectionNotCompact { t });
                }
                hi = (2.0 * hi).min(r_max);
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(x0 + u * mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(x0 + u * lo)
        })
        .collect();
    finish(x0, p, t, &pts?)
}

/// Anything sections can be taken of.
#[derive(Clone, Copy)]
pub enum SectionSource<'a> {
    Grid(&'a GridFunction),
    Pl(&'a PLConvexFunction),
    /// A convex function in closed form, resolved by `n_rays` rays out to `r_max`.
    Analytic { v: &'a (dyn Fn(Point2) -> f64 + Sync), n_rays: usize, r_max: f64 },
}

impl SectionSource<'_> {
    pub fn section(&self, x0: Point2, p: Point2, t: f64) -> Result<Section, SectionError> {
        match *self {
            SectionSource::Grid(g) => extract_section(g, x0, p, t),
            SectionSource::Pl(f) => extract_section_pl(f, x0, p, t),
            SectionSource::Analytic { v, n_rays, r_max } => extract_section_fn(&v, x0, p, t, n_rays, r_max),
        }
    }
}

/// How the unimodular matrix is taken from the fitted ellipse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `A = E / √det E`, symmetric positive definite.
    #[default]
    Symmetric,
    /// `A = QΛ / √det Λ` from the eigen-decomposition `E = QΛQᵀ`.
    QLambda,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EllipsoidFit {
    pub center: Point2,
    /// Symmetric positive definite `E` with ellipse `center + E·B₁`.
    pub axes: Mat2,
    /// `M = E⁻²`, ellipse `{(x−c)ᵀ M (x−c) ≤ 1}`.
    pub shape: Mat2,
    /// Unimodular normalization of `E`.
    pub a: Mat2,
    /// `√det E`, so that `E = scale · A` in the symmetric case.
    pub scale: f64,
}

type V5 = SVector<f64, 5>;
type M5 = SMatrix<f64, 5, 5>;

/// Barrier objective, gradient and Hessian at `z = (e11, e12, e22, c1, c2)`.
fn barrier(z: &V5, normals: &[Point2], offsets: &[f64], t: f64) -> Option<(f64, V5, M5)> {
    let (e11, e12, e22) = (z[0], z[1], z[2]);
    let det = e11 * e22 - e12 * e12;
    if !(det > 0.0 && e11 > 0.0) {
        return None;
    }
    // −t log det E
    let inv = [[e22 / det, -e12 / det], [-e12 / det, e11 / det]];
    let basis: [Mat2; 3] = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]];
    let mut val = -t * det.ln();
    let mut grad = V5::zeros();
    let mut hess = M5::zeros();
    let ib: Vec<Mat2> = basis.iter().map(|b| crate::geometry::mat_mul(&inv, b)).collect();
    for i in 0..3 {
        grad[i] -= t * (ib[i][0][0] + ib[i][1][1]);
        for j in 0..3 {
            let prod = crate::geometry::mat_mul(&ib[i], &ib[j]);
            hess[(i, j)] += t * (prod[0][0] + prod[1][1]);
        }
    }
    for (a, &b) in normals.iter().zip(offsets) {
        let w = Point2::new(e11 * a.x + e12 * a.y, e12 * a.x + e22 * a.y);
        let n = w.norm();
        let s = b - a.dot(Point2::new(z[3], z[4])) - n;
        if !(s > 0.0) || n == 0.0 {
            return None;
        }
        val -= s.ln();
        let dw = [Point2::new(a.x, 0.0), Point2::new(a.y, a.x), Point2::new(0.0, a.y)];
        let mut ds = V5::zeros();
        for i in 0..3 {
            ds[i] = -w.dot(dw[i]) / n;
        }
        ds[3] = -a.x;
        ds[4] = -a.y;
        grad -= ds / s;
        hess += ds * ds.transpose() / (s * s);
        for i in 0..3 {
            for j in 0..3 {
                let d2n = dw[i].dot(dw[j]) / n - w.dot(dw[i]) * w.dot(dw[j]) / (n * n * n);
                hess[(i, j)] += d2n / s;
            }
        }
    }
    Some((val, grad, hess))
}

/// Maximum-area ellipse inscribed in a convex polygon.
pub fn john_ellipsoid(polygon: &[Point2], norm: Normalization) -> Result<EllipsoidFit, SectionError> {
    let hull = convex_hull(polygon);
    let area = signed_area(&hull);
    if hull.len() < 3 || !(area >= 1e-14) {
        return Err(SectionError::DegeneratePolygon { area });
    }
    let c0 = centroid(&hull);
    let scale = area.sqrt();
    let q: Vec<Point2> = hull.iter().map(|&v| (v - c0) * (1.0 / scale)).collect();
    let mut normals = Vec::with_capacity(q.len());
    let mut offsets = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let d = q[(k + 1) % q.len()] - q[k];
        let n = Point2::new(d.y, -d.x) * (1.0 / d.norm());
        normals.push(n);
        offsets.push(n.dot(q[k]));
    }
    let rho = 0.5 * offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(rho > 0.0) {
        return Err(SectionError::DegeneratePolygon { area });
    }
    let mut z = V5::from_column_slice(&[rho, 0.0, rho, 0.0, 0.0]);
    let m = q.len() as f64;
    let mut t = 1.0;
    loop {
        for _ in 0..200 {
            let (val, g, h) = barrier(&z, &normals, &offsets, t).ok_or(SectionError::FitFailed)?;
            let step = match h.cholesky() {
                Some(ch) => -ch.solve(&g),
                None => -h.lu().solve(&g).ok_or(SectionError::FitFailed)?,
            };
            let dec = -g.dot(&step);
            if dec < 1e-13 {
                break;
            }
            let mut s = 1.0;
            loop {
                let zn = z + step * s;
                if let Some((vn, _, _)) = barrier(&zn, &normals, &offsets, t) {
                    if vn <= val - 0.25 * s * dec {
                        z = zn;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-20 {
                    break;
                }
            }
            if s < 1e-20 {
                break;
            }
        }
        if m / t < 1e-11 {
            break;
        }
        t *= 8.0;
    }
    let e: Mat2 = [[z[0] * scale, z[1] * scale], [z[1] * scale, z[2] * scale]];
    let center = c0 + Point2::new(z[3], z[4]) * scale;
    Ok(fit_from_axes(center, e, norm))
}

fn fit_from_axes(center: Point2, e: Mat2, norm: Normalization) -> EllipsoidFit {
    let det = det2(&e);
    let sq = det.sqrt();
    let einv = inverse2(&e).expect("fitted ellipse is nondegenerate");
    let shape = crate::geometry::mat_mul(&einv, &einv);
    let a = match norm {
        Normalization::Symmetric => [[e[0][0] / sq, e[0][1] / sq], [e[1][0] / sq, e[1][1] / sq]],
        Normalization::QLambda => {
            let (q, lam) = sym_eigen(&e);
            let ql = [[q[0][0] * lam[0], q[0][1] * lam[1]], [q[1][0] * lam[0], q[1][1] * lam[1]]];
            [[ql[0][0] / sq, ql[0][1] / sq], [ql[1][0] / sq, ql[1][1] / sq]]
        }
    };
    EllipsoidFit { center, axes: e, shape, a, scale: sq }
}

/// Eigenvectors (as columns, larger eigenvalue first) and eigenvalues of a symmetric 2×2 matrix.
fn sym_eigen(m: &Mat2) -> (Mat2, [f64; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    let l1 = mean + rad;
    let l2 = mean - rad;
    let th = 0.5 * (2.0 * b).atan2(a - d);
    let (c, s) = (th.cos(), th.sin());
    ([[c, -s], [s, c]], [l1, l2])
}

/// Operator norm of the normalized matrix.
pub fn eccentricity(fit: &EllipsoidFit) -> f64 {
    singular_values2(&fit.a).0
}

/// `r = t · mass^{−1/2}`.
pub fn caffarelli_radius(t: f64, mass: f64) -> Result<f64, SectionError> {
    if mass == 0.0 {
        return Err(SectionError::DivideByZeroMass);
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(SectionError::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    Ok(t / mass.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Balance {
    /// Largest `|A⁻¹(v − x₀)| / r` over polygon vertices.
    pub outer: f64,
    /// `r` divided by the distance from `x₀` to the nearest edge, in `A⁻¹` coordinates.
    pub inner: f64,
    pub k0: f64,
}

/// Smallest `k₀` with `k₀⁻¹ A B_r ⊂ S − x₀ ⊂ k₀ A B_r`.
pub fn balance_check(section: &Section, fit: &EllipsoidFit, r: f64) -> Result<Balance, SectionError> {
    if section.polygon.len() < 3 {
        return Err(SectionError::DegeneratePolygon { area: section.area() });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(SectionError::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let ainv = inverse2(&fit.a).ok_or(SectionError::DegeneratePolygon { area: 0.0 })?;
    let mapped: Vec<Point2> = section.polygon.iter().map(|&v| mat_vec(&ainv, v - section.base)).collect();
    let outer = mapped.iter().map(|w| w.norm()).fold(0.0, f64::max) / r;
    let dmin = (0..mapped.len())
        .map(|k| segment_distance(Point2::ORIGIN, mapped[k], mapped[(k + 1) % mapped.len()]))
        .fold(f64::INFINITY, f64::min);
    let inner = if dmin > 0.0 { r / dmin } else { f64::INFINITY };
    Ok(Balance { outer, inner, k0: outer.max(inner) })
}

/// Verdict for one sub-level set `{v ≤ level}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CompactnessVerdict {
    pub level: f64,
    /// No boundary node lies in the sub-level set, and the set is nonempty.
    pub compact: bool,
    /// Smallest distance from the sub-level polygon to the domain boundary (zero when not compact).
    pub margin: f64,
}

pub fn sublevel_compactness(v: &GridFunction, levels: &[f64]) -> Vec<CompactnessVerdict> {
    let kmin = (0..v.len()).min_by(|&a, &b| v.values()[a].total_cmp(&v.values()[b])).unwrap_or(0);
    let x0 = v.nodes()[kmin];
    let vmin = v.values()[kmin];
    levels
        .iter()
        .map(|&level| {
            if level < vmin {
                return CompactnessVerdict { level, compact: false, margin: 0.0 };
            }
            let t = level - vmin;
            let sec = if t > 0.0 {
                extract_section(v, x0, Point2::ORIGIN, t)
            } else {
                Err(SectionError::DegeneratePolygon { area: 0.0 })
            };
            match sec {
                Ok(s) => {
                    let margin = s.polygon.iter().map(|&q| v.domain().distance_to_boundary(q)).fold(f64::INFINITY, f64::min);
                    CompactnessVerdict { level, compact: true, margin }
                }
                Err(SectionError::SectionNotCompact { .. }) => CompactnessVerdict { level, compact: false, margin: 0.0 },
                // A single interior node or a sliver: compact but too small to be a polygon.
                Err(_) => {
                    let compact = !v.is_boundary_node(kmin);
                    let margin = if compact { v.domain().distance_to_boundary(x0) } else { 0.0 };
                    CompactnessVerdict { level, compact, margin }
                }
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DoublingSample {
    pub center: Point2,
    pub semi_axes: (f64, f64),
    pub angle: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DoublingEstimate {
    pub estimate: f64,
    pub n_samples: usize,
    /// The sample attaining the estimate.
    pub worst: DoublingSample,
}

#[derive(Clone, Copy, Debug)]
pub struct DoublingOptions {
    /// Rounds of deterministic coordinate ascent applied to each sample; zero keeps raw samples.
    pub ascent_rounds: usize,
}

impl Default for DoublingOptions {
    fn default() -> Self {
        DoublingOptions { ascent_rounds: 40 }
    }
}

fn ellipse_map(axes: (f64, f64), angle: f64) -> Mat2 {
    let (c, s) = (angle.cos(), angle.sin());
    [[c * axes.0, -s * axes.1], [s * axes.0, c * axes.1]]
}

fn ellipse_inside(region: &Domain2D, c: Point2, axes: (f64, f64), angle: f64) -> bool {
    match region {
        Domain2D::Disk { radius } => c.norm() + axes.0.max(axes.1) <= *radius,
        Domain2D::Square { half_width } => {
            let m = ellipse_map(axes, angle);
            let ex = m[0][0].hypot(m[0][1]);
            let ey = m[1][0].hypot(m[1][1]);
            c.x.abs() + ex <= *half_width && c.y.abs() + ey <= *half_width
        }
        Domain2D::Polygon { vertices } => {
            let m = ellipse_map(axes, angle);
            (0..vertices.len()).all(|k| {
                let d = vertices[(k + 1) % vertices.len()] - vertices[k];
                let n = Point2::new(d.y, -d.x);
                let support = n.dot(c) + Point2::new(m[0][0] * n.x + m[1][0] * n.y, m[0][1] * n.x + m[1][1] * n.y).norm();
                support <= n.dot(vertices[k])
            })
        }
    }
}

struct Doubler<'a, F> {
    f: &'a F,
    region: &'a Domain2D,
    rule: DiskRule,
}

impl<F: Fn(Point2) -> f64 + Sync> Doubler<'_, F> {
    fn measure(&self, c: Point2, m: &Mat2) -> f64 {
        let jac = det2(m).abs();
        jac * self.rule.points.iter().map(|&(u, w)| w * (self.f)(c + mat_vec(m, u))).sum::<f64>()
    }

    /// `μ(E)/μ(½E)`, or `None` for ellipses leaving the region.
    fn ratio(&self, z: &[f64; 5]) -> Option<f64> {
        let c = Point2::new(z[0], z[1]);
        let axes = (z[2].exp(), z[3].exp());
        if !ellipse_inside(self.region, c, axes, z[4]) {
            return None;
        }
        let m = ellipse_map(axes, z[4]);
        let half = [[0.5 * m[0][0], 0.5 * m[0][1]], [0.5 * m[1][0], 0.5 * m[1][1]]];
        let inner = self.measure(c, &half);
        if !(inner > 0.0) {
            return None;
        }
        Some(self.measure(c, &m) / inner)
    }

    fn ascend(&self, mut z: [f64; 5], rounds: usize) -> ([f64; 5], f64) {
        let mut best = self.ratio(&z).unwrap_or(0.0);
        let a = z[2].exp().max(z[3].exp());
        let mut step = [0.5 * a, 0.5 * a, 0.5, 0.5, 0.5];
        for _ in 0..rounds {
            let mut improved = false;
            'coords: for k in 0..5 {
                for sgn in [1.0, -1.0] {
                    let mut q = z;
                    q[k] += sgn * step[k];
                    if let Some(r) = self.ratio(&q) {
                        if r > best {
                            best = r;
                            z = q;
                            improved = true;
                            break 'coords;
                        }
                    }
                }
            }
            if !improved {
                for s in &mut step {
                    *s *= 0.5;
                }
            }
        }
        (z, best)
    }
}

/// `μ(E)/μ(½E)` for the ellipse with the given center, semi-axes and angle, `μ = f dx`.
pub fn doubling_ratio<F>(f: &F, center: Point2, semi_axes: (f64, f64), angle: f64) -> Result<f64, SectionError>
where
    F: Fn(Point2) -> f64 + Sync,
{
    if !(semi_axes.0 > 0.0 && semi_axes.1 > 0.0 && center.is_finite() && angle.is_finite()) {
        return Err(SectionError::InvalidArgument("ellipse must have positive semi-axes".into()));
    }
    let region = Domain2D::Disk { radius: f64::INFINITY };
    let d = Doubler { f, region: &region, rule: DiskRule::order4() };
    d.ratio(&[center.x, center.y, semi_axes.0.ln(), semi_axes.1.ln(), angle]).ok_or(SectionError::DivideByZeroMass)
}

/// Supremum of `μ(E)/μ(½E)` over sampled ellipses `E ⊂ region`, `μ = f dx`.
///
/// Sample `k` draws from its own ChaCha stream keyed by `(seed, k)`, so a run
/// with more samples extends a run with fewer.
pub fn doubling_constant<F>(f: &F, region: &Domain2D, n_samples: usize, seed: u64, opts: DoublingOptions) -> Result<DoublingEstimate, SectionError>
where
    F: Fn(Point2) -> f64 + Sync,
{
    if n_samples < 100 {
        return Err(SectionError::InvalidArgument(format!("at least 100 samples are required, got {n_samples}")));
    }
    let (lo, hi) = region.bbox();
    let amin = 1e-2f64;
    let amax = region.diameter() / 4.0;
    if !(amax > amin) {
        return Err(SectionError::InvalidArgument("region is too small for the sampling range".into()));
    }
    let d = Doubler { f, region, rule: DiskRule::order4() };
    let samples: Vec<DoublingSample> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let z = loop {
                let c = Point2::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y));
                if !region.contains(c) {
                    continue;
                }
                let a1 = rng.random_range(amin.ln()..=amax.ln());
                let a2 = rng.random_range(amin.ln()..=amax.ln());
                let th = rng.random_range(0.0..std::f64::consts::PI);
                let z = [c.x, c.y, a1, a2, th];
                if d.ratio(&z).is_some() {
                    break z;
                }
            };
            let (z, ratio) = d.ascend(z, opts.ascent_rounds);
            DoublingSample { center: Point2::new(z[0], z[1]), semi_axes: (z[2].exp(), z[3].exp()), angle: z[4], ratio }
        })
        .collect();
    let worst = samples
        .iter()
        .copied()
        .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        .expect("at least one sample");
    Ok(DoublingEstimate { estimate: worst.ratio, n_samples, worst })
}
