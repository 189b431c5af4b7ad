//! Piecewise-linear convex functions and their Monge–Ampère measures.
//!
//! A [`PLConvexFunction`] is the lower convex envelope of finitely many lifted
//! sites. The subdifferential at an interior vertex is the convex polygon
//! spanned by the gradients of the incident faces, and the Monge–Ampère mass
//! of the vertex is its area. Sites on the planar convex hull carry unbounded
//! subdifferentials and are assigned no mass.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::geometry::{signed_area, Point2};
use crate::hull::{lower_hull, HullError};
use crate::quadrature;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("all sites are collinear")]
    DegenerateInput,
    #[error("sites {0} and {1} coincide")]
    DuplicateSite(usize, usize),
    #[error("non-finite coordinate or height at site {0}")]
    NonFinite(usize),
    #[error("{sites} sites but {heights} heights")]
    LengthMismatch { sites: usize, heights: usize },
    #[error("alpha = {0} is outside (0, 1/4)")]
    AlphaOutOfRange(f64),
    #[error("site index {0} out of range")]
    BadSubset(usize),
    #[error("malformed cell CSV at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
}

impl From<HullError> for MeasureError {
    fn from(e: HullError) -> Self {
        match e {
            HullError::Collinear => MeasureError::DegenerateInput,
            HullError::Duplicate(a, b) => MeasureError::DuplicateSite(a, b),
            HullError::NonFinite(i) => MeasureError::NonFinite(i),
        }
    }
}

/// Lower convex envelope of lifted sites.
#[derive(Clone, Debug)]
pub struct PLConvexFunction {
    sites: Vec<Point2>,
    heights: Vec<f64>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
    gradients: Vec<Point2>,
    active: Vec<bool>,
    on_hull: Vec<bool>,
    /// One incident (triangle, slot) per active site.
    incident: Vec<Option<(usize, usize)>>,
}

/// Builds the piecewise-linear convex envelope of `(sites[i], heights[i])`.
pub fn lower_envelope(sites: &[Point2], heights: &[f64]) -> Result<PLConvexFunction, MeasureError> {
    if sites.len() != heights.len() {
        return Err(MeasureError::LengthMismatch { sites: sites.len(), heights: heights.len() });
    }
    let hull = lower_hull(sites, heights)?;
    let gradients = hull
        .triangles
        .iter()
        .map(|t| face_gradient([sites[t[0]], sites[t[1]], sites[t[2]]], [heights[t[0]], heights[t[1]], heights[t[2]]]))
        .collect();
    let mut incident = vec![None; sites.len()];
    for (ti, t) in hull.triangles.iter().enumerate() {
        for (k, &v) in t.iter().enumerate() {
            incident[v].get_or_insert((ti, k));
        }
    }
    Ok(PLConvexFunction {
        sites: sites.to_vec(),
        heights: heights.to_vec(),
        triangles: hull.triangles,
        neighbors: hull.neighbors,
        gradients,
        active: hull.active,
        on_hull: hull.on_hull,
        incident,
    })
}

/// Gradient of the affine interpolant of three lifted points.
pub fn face_gradient(p: [Point2; 3], z: [f64; 3]) -> Point2 {
    let a = p[1] - p[0];
    let b = p[2] - p[0];
    let da = z[1] - z[0];
    let db = z[2] - z[0];
    let det = a.cross(b);
    Point2::new((da * b.y - db * a.y) / det, (a.x * db - b.x * da) / det)
}

impl PLConvexFunction {
    pub fn sites(&self) -> &[Point2] {
        &self.sites
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Neighbouring triangle across edge `(t[k], t[k+1])`.
    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        &self.neighbors
    }

    pub fn gradients(&self) -> &[Point2] {
        &self.gradients
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Site is a vertex of the envelope (not lifted above it).
    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    /// Site lies on the boundary of the convex hull of all sites.
    pub fn is_hull_site(&self, i: usize) -> bool {
        self.on_hull[i]
    }

    /// Active vertex strictly inside the convex hull of the sites.
    pub fn is_interior(&self, i: usize) -> bool {
        self.active[i] && !self.on_hull[i]
    }

    /// Plane of each triangle as `(gradient, offset)` with value `g·x + c`.
    pub fn face_planes(&self) -> Vec<(Point2, f64)> {
        self.triangles
            .iter()
            .zip(&self.gradients)
            .map(|(t, &g)| (g, self.heights[t[0]] - g.dot(self.sites[t[0]])))
            .collect()
    }

    /// Value of the envelope at `p`, or `None` outside the convex hull of the sites.
    pub fn value_at(&self, p: Point2) -> Option<f64> {
        let mut inside = false;
        let mut best = f64::NEG_INFINITY;
        for (t, &g) in self.triangles.iter().zip(&self.gradients) {
            let v = self.heights[t[0]] + g.dot(p - self.sites[t[0]]);
            best = best.max(v);
            if !inside {
                let tri = [self.sites[t[0]], self.sites[t[1]], self.sites[t[2]]];
                inside = crate::geometry::convex_contains(&tri, p);
            }
        }
        inside.then_some(best)
    }

    /// Envelope values at the sites; inactive sites get the envelope below them.
    pub fn envelope_heights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| if self.active[i] { self.heights[i] } else { self.value_at(self.sites[i]).unwrap_or(self.heights[i]) })
            .collect()
    }

    /// Faces incident to site `i` in counterclockwise order, or `None` for sites without a closed fan.
    fn fan(&self, i: usize) -> Option<Vec<usize>> {
        if !self.is_interior(i) {
            return None;
        }
        let (start, _) = self.incident[i]?;
        let mut out = vec![start];
        let mut t = start;
        loop {
            let k = self.triangles[t].iter().position(|&v| v == i)?;
            let next = self.neighbors[t][(k + 2) % 3]?;
            if next == start {
                return Some(out);
            }
            if out.len() > self.triangles.len() {
                return None;
            }
            out.push(next);
            t = next;
        }
    }
}

/// Largest height of a site above the convex envelope of all sites; zero for convex data.
pub fn convexity_defect(sites: &[Point2], heights: &[f64]) -> Result<f64, MeasureError> {
    let f = lower_envelope(sites, heights)?;
    let env = f.envelope_heights();
    Ok(heights.iter().zip(&env).map(|(h, e)| h - e).fold(0.0, f64::max))
}

/// Subdifferential polygon of one site in gradient space.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientCell {
    pub site: usize,
    /// Counterclockwise vertices; empty for boundary and inactive sites.
    pub polygon: Vec<Point2>,
    pub area: f64,
}

/// One cell per site, in site order.
pub fn subgradient_cells(f: &PLConvexFunction) -> Vec<SubgradientCell> {
    (0..f.len())
        .into_par_iter()
        .map(|i| match f.fan(i) {
            Some(faces) => {
                let polygon: Vec<Point2> = faces.iter().map(|&t| f.gradients[t]).collect();
                let area = signed_area(&polygon).max(0.0);
                SubgradientCell { site: i, polygon, area }
            }
            None => SubgradientCell { site: i, polygon: Vec::new(), area: 0.0 },
        })
        .collect()
}

/// Per-site masses and their total.
#[derive(Clone, Debug, PartialEq)]
pub struct MAMeasure {
    pub masses: Vec<f64>,
    pub total: f64,
}

pub fn ma_measure(cells: &[SubgradientCell]) -> MAMeasure {
    let masses: Vec<f64> = cells.iter().map(|c| c.area).collect();
    let total = masses.iter().sum();
    MAMeasure { masses, total }
}

/// Sum of cell areas over `subset` (site indices).
pub fn ma_mass(cells: &[SubgradientCell], subset: &[usize]) -> Result<f64, MeasureError> {
    subset
        .iter()
        .map(|&i| cells.get(i).map(|c| c.area).ok_or(MeasureError::BadSubset(i)))
        .sum()
}

/// Integral of `w` over each cell by a triangle fan rule exact to degree `order`.
pub fn weighted_mass<W>(cells: &[SubgradientCell], w: W, order: usize) -> Vec<f64>
where
    W: Fn(Point2) -> f64 + Sync,
{
    cells
        .par_iter()
        .map(|c| {
            if c.polygon.len() < 3 || c.area == 0.0 {
                0.0
            } else {
                quadrature::polygon_fan(&c.polygon, c.polygon[0], order, &w)
            }
        })
        .collect()
}

/// Default quadrature order for [`weighted_mass`].
pub const DEFAULT_ORDER: usize = 4;

/// Spherical area of the Gauss image over the given cells.
pub fn gauss_map_mass(cells: &[SubgradientCell]) -> f64 {
    weighted_mass(cells, |y| (1.0 + y.norm_sq()).powf(-1.5), DEFAULT_ORDER).iter().sum()
}

/// `Σ_{i ∈ subset} w(x_i) · mass_i`: a weight evaluated at the sites against the measure.
pub fn site_weighted_mass<W: Fn(Point2) -> f64>(
    f: &PLConvexFunction,
    cells: &[SubgradientCell],
    subset: &[usize],
    w: W,
) -> Result<f64, MeasureError> {
    subset
        .iter()
        .map(|&i| {
            let c = cells.get(i).ok_or(MeasureError::BadSubset(i))?;
            Ok(if c.area == 0.0 { 0.0 } else { w(f.sites[i]) * c.area })
        })
        .sum()
}

/// Both sides of `μ_u(S) = ∫_S w(∇u) dx` and their gap.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IdentityResidual {
    pub measure: f64,
    pub integral: f64,
    pub residual: f64,
    /// `residual / integral`, or infinity when the integral vanishes.
    pub relative: f64,
}

/// Compares the mass of `subset` with `Σ_T w(∇u|_T)·|T|/3` summed over subset vertices of each face.
pub fn check_gradient_identity<W: Fn(Point2) -> f64>(
    f: &PLConvexFunction,
    subset: &[usize],
    w: W,
) -> Result<IdentityResidual, MeasureError> {
    let mut member = vec![false; f.len()];
    for &i in subset {
        *member.get_mut(i).ok_or(MeasureError::BadSubset(i))? = true;
    }
    let cells = subgradient_cells(f);
    let measure: f64 = subset.iter().map(|&i| cells[i].area).sum();
    let mut integral = 0.0;
    for (t, &g) in f.triangles.iter().zip(&f.gradients) {
        let k = t.iter().filter(|&&v| member[v]).count();
        if k == 0 {
            continue;
        }
        let area = signed_area(&[f.sites[t[0]], f.sites[t[1]], f.sites[t[2]]]);
        integral += w(g) * area * k as f64 / 3.0;
    }
    let residual = (measure - integral).abs();
    let relative = if integral > 0.0 { residual / integral } else { f64::INFINITY };
    Ok(IdentityResidual { measure, integral, residual, relative })
}

/// The translator equation in measure form: weight `(1+|∇u|²)^{2−1/(2α)}`.
pub fn check_translator_identity(f: &PLConvexFunction, alpha: f64, subset: &[usize]) -> Result<IdentityResidual, MeasureError> {
    if !crate::alpha_in_range(alpha) {
        return Err(MeasureError::AlphaOutOfRange(alpha));
    }
    let e = 2.0 - 0.5 / alpha;
    check_gradient_identity(f, subset, |g| (1.0 + g.norm_sq()).powf(e))
}

/// Sensitivity of cell areas to site heights.
///
/// For a triangulation edge `{i, j}` with gradient jump `ℓ` across it,
/// `∂A_i/∂h_j = ℓ / |x_i − x_j|` and `∂A_i/∂h_i = −Σ_j ∂A_i/∂h_j`.
/// Rows are only meaningful for interior sites.
#[derive(Clone, Debug, Default)]
pub struct MassJacobian {
    pub diag: Vec<f64>,
    /// Unordered pairs `(i, j, ∂A_i/∂h_j)` with `i < j`; the matrix is symmetric.
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn mass_jacobian(f: &PLConvexFunction) -> MassJacobian {
    let mut diag = vec![0.0; f.len()];
    let mut edges = Vec::new();
    for (ti, t) in f.triangles.iter().enumerate() {
        for k in 0..3 {
            let Some(tj) = f.neighbors[ti][k] else { continue };
            if tj < ti {
                continue;
            }
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let jump = (f.gradients[ti] - f.gradients[tj]).norm();
            let c = jump / (f.sites[a] - f.sites[b]).norm();
            diag[a] -= c;
            diag[b] -= c;
            edges.push((a.min(b), a.max(b), c));
        }
    }
    MassJacobian { diag, edges }
}

/// Cells as CSV rows `site_index, area, v1x, v1y, …`.
pub fn cells_to_csv(cells: &[SubgradientCell]) -> String {
    let mut out = String::from("site_index,area,vertices\n");
    for c in cells {
        let _ = write!(out, "{},{}", c.site, c.area);
        for v in &c.polygon {
            let _ = write!(out, ",{},{}", v.x, v.y);
        }
        out.push('\n');
    }
    out
}

pub fn cells_from_csv(text: &str) -> Result<Vec<SubgradientCell>, MeasureError> {
    let bad = |line: usize, reason: &str| MeasureError::MalformedCsv { line, reason: reason.to_string() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.starts_with("site_index,area") => {}
        _ => return Err(bad(1, "missing header")),
    }
    let mut out = Vec::new();
    for (k, line) in lines {
        let ln = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() < 2 || f.len() % 2 != 0 {
            return Err(bad(ln, "expected site, area and coordinate pairs"));
        }
        let site = f[0].parse().map_err(|_| bad(ln, "bad site index"))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let area = num(f[1])?;
        let polygon = f[2..]
            .chunks(2)
            .map(|c| Ok(Point2::new(num(c[0])?, num(c[1])?)))
            .collect::<Result<Vec<_>, MeasureError>>()?;
        out.push(SubgradientCell { site, polygon, area });
    }
    Ok(out)
}
