//! Planar domains, lattice-sampled functions, right-hand-side families and
//! the `.gfn` text format.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::geometry::{boundary_distance, convex_contains, Point2};

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("non-finite value at node {index}")]
    NonfiniteValue { index: usize },
    #[error("no lattice node falls inside the domain")]
    EmptyDomain,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("alpha = {0} is outside (0, 1/4)")]
    AlphaOutOfRange(f64),
    #[error("invalid radii: {0}")]
    InvalidRadii(String),
    #[error("value count {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed file at line {line}: {reason}")]
    MalformedFile { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A convex planar domain. Squares and disks are centered at the origin.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain2D {
    Square { half_width: f64 },
    Disk { radius: f64 },
    /// Counterclockwise vertices in strictly convex position.
    Polygon { vertices: Vec<Point2> },
}

impl Domain2D {
    pub fn square(half_width: f64) -> Result<Self, GridError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(GridError::InvalidDomain(format!("square half-width {half_width}")));
        }
        Ok(Domain2D::Square { half_width })
    }

    pub fn disk(radius: f64) -> Result<Self, GridError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GridError::InvalidDomain(format!("disk radius {radius}")));
        }
        Ok(Domain2D::Disk { radius })
    }

    pub fn polygon(vertices: Vec<Point2>) -> Result<Self, GridError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GridError::InvalidDomain("polygon needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GridError::InvalidDomain("non-finite polygon vertex".into()));
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if robust::orient2d(a.coord(), b.coord(), c.coord()) <= 0.0 {
                return Err(GridError::InvalidDomain(format!(
                    "vertices {i}..{} are not in strictly convex counterclockwise position",
                    i + 2
                )));
            }
        }
        // A locally convex ccw loop can still wind twice; total turning must be 2π.
        let mut turning = 0.0;
        for i in 0..n {
            let d0 = vertices[(i + 1) % n] - vertices[i];
            let d1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            turning += d0.cross(d1).atan2(d0.dot(d1));
        }
        if (turning - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
            return Err(GridError::InvalidDomain("polygon is not simple".into()));
        }
        Ok(Domain2D::Polygon { vertices })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Domain2D::Square { .. } => "square",
            Domain2D::Disk { .. } => "disk",
            Domain2D::Polygon { .. } => "polygon",
        }
    }

    /// Membership with an absolute slack `tol` outward.
    pub fn contains_tol(&self, p: Point2, tol: f64) -> bool {
        match self {
            Domain2D::Square { half_width } => p.x.abs() <= half_width + tol && p.y.abs() <= half_width + tol,
            Domain2D::Disk { radius } => p.norm() <= radius + tol,
            Domain2D::Polygon { vertices } => {
                convex_contains(vertices, p) || (tol > 0.0 && boundary_distance(vertices, p) <= tol)
            }
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.contains_tol(p, 0.0)
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bbox(&self) -> (Point2, Point2) {
        match self {
            Domain2D::Square { half_width: w } => (Point2::new(-w, -w), Point2::new(*w, *w)),
            Domain2D::Disk { radius: r } => (Point2::new(-r, -r), Point2::new(*r, *r)),
            Domain2D::Polygon { vertices } => {
                let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain2D::Square { half_width } => 2.0 * std::f64::consts::SQRT_2 * half_width,
            Domain2D::Disk { radius } => 2.0 * radius,
            Domain2D::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max((*a - *b).norm());
                    }
                }
                d
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Domain2D::Square { half_width } => 4.0 * half_width * half_width,
            Domain2D::Disk { radius } => std::f64::consts::PI * radius * radius,
            Domain2D::Polygon { vertices } => crate::geometry::signed_area(vertices),
        }
    }

    /// Distance from an interior point to the domain boundary.
    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        match self {
            Domain2D::Square { half_width } => (half_width - p.x.abs()).min(half_width - p.y.abs()),
            Domain2D::Disk { radius } => radius - p.norm(),
            Domain2D::Polygon { vertices } => {
                let d = boundary_distance(vertices, p);
                if convex_contains(vertices, p) {
                    d
                } else {
                    -d
                }
            }
        }
    }

    fn params(&self) -> Vec<f64> {
        match self {
            Domain2D::Square { half_width } => vec![*half_width],
            Domain2D::Disk { radius } => vec![*radius],
            Domain2D::Polygon { vertices } => vertices.iter().flat_map(|v| [v.x, v.y]).collect(),
        }
    }
}

impl fmt::Display for Domain2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        for p in self.params() {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Lattice nodes `(i·h, j·h)` inside `domain`, ordered by `(j, i)`.
pub fn lattice_nodes(domain: &Domain2D, h: f64) -> Result<Vec<[i64; 2]>, GridError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GridError::InvalidSpacing(h));
    }
    let (lo, hi) = domain.bbox();
    let tol = 1e-9 * h;
    let i0 = (lo.x / h).floor() as i64 - 1;
    let i1 = (hi.x / h).ceil() as i64 + 1;
    let j0 = (lo.y / h).floor() as i64 - 1;
    let j1 = (hi.y / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            if domain.contains_tol(Point2::new(i as f64 * h, j as f64 * h), tol) {
                out.push([i, j]);
            }
        }
    }
    if out.is_empty() {
        return Err(GridError::EmptyDomain);
    }
    Ok(out)
}

/// Values of a function on the lattice nodes of a domain.
#[derive(Clone, Debug)]
pub struct GridFunction {
    domain: Domain2D,
    h: f64,
    ij: Vec<[i64; 2]>,
    nodes: Vec<Point2>,
    values: Vec<f64>,
    lookup: HashMap<[i64; 2], usize>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.h.to_bits() == other.h.to_bits()
            && self.ij == other.ij
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl GridFunction {
    /// Builds a grid function from values listed in lattice order.
    pub fn from_values(domain: Domain2D, h: f64, values: Vec<f64>) -> Result<Self, GridError> {
        let ij = lattice_nodes(&domain, h)?;
        if ij.len() != values.len() {
            return Err(GridError::LengthMismatch { expected: ij.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonfiniteValue { index });
        }
        let nodes = ij.iter().map(|&[i, j]| Point2::new(i as f64 * h, j as f64 * h)).collect();
        let lookup = ij.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        Ok(GridFunction { domain, h, ij, nodes, values, lookup })
    }

    pub fn domain(&self) -> &Domain2D {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integer lattice coordinates of node `k`.
    pub fn lattice_index(&self, k: usize) -> [i64; 2] {
        self.ij[k]
    }

    /// Node index at lattice coordinates `(i, j)`, if present.
    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        self.lookup.get(&[i, j]).copied()
    }

    /// A node lacking at least one of its four lattice neighbours.
    pub fn is_boundary_node(&self, k: usize) -> bool {
        let [i, j] = self.ij[k];
        [[1, 0], [-1, 0], [0, 1], [0, -1]]
            .iter()
            .any(|d| self.index_of(i + d[0], j + d[1]).is_none())
    }

    /// Replaces the values, keeping the lattice.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != self.len() {
            return Err(GridError::LengthMismatch { expected: self.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonfiniteValue { index });
        }
        Ok(GridFunction { values, ..self.clone() })
    }

    /// Bilinear interpolation inside a complete lattice square, `None` elsewhere.
    pub fn interpolate(&self, p: Point2) -> Option<f64> {
        let fx = p.x / self.h;
        let fy = p.y / self.h;
        if !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let i = fx.floor() as i64;
        let j = fy.floor() as i64;
        let (s, t) = (fx - i as f64, fy - j as f64);
        let v00 = self.values[self.index_of(i, j)?];
        let v10 = if s > 0.0 { self.values[self.index_of(i + 1, j)?] } else { v00 };
        let v01 = if t > 0.0 { self.values[self.index_of(i, j + 1)?] } else { v00 };
        let v11 = if s > 0.0 && t > 0.0 { self.values[self.index_of(i + 1, j + 1)?] } else if s > 0.0 { v10 } else { v01 };
        Some((1.0 - s) * (1.0 - t) * v00 + s * (1.0 - t) * v10 + (1.0 - s) * t * v01 + s * t * v11)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        let mut out = String::with_capacity(32 * self.len() + 64);
        out.push_str("GFN 1\n");
        out.push_str(&format!("domain {}\n", self.domain));
        out.push_str(&format!("h {}\n", self.h));
        out.push_str(&format!("n {}\n", self.len()));
        for (p, v) in self.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{} {} {}\n", p.x, p.y, v));
        }
        let path = path.as_ref();
        let tmp = path.with_extension("gfn.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(out.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GridError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses the text of a `.gfn` file.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let bad = |line: usize, reason: String| GridError::MalformedFile { line, reason };
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.split_whitespace().collect::<Vec<_>>()));
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, format!("unexpected end of file, expected {what}")));
        let num = |line: usize, s: &str| s.parse::<f64>().map_err(|_| bad(line, format!("not a number: {s:?}")));

        let (ln, toks) = next("header")?;
        if toks != ["GFN", "1"] {
            return Err(bad(ln, "expected header `GFN 1`".into()));
        }

        let (ln, toks) = next("domain line")?;
        if toks.len() < 3 || toks[0] != "domain" {
            return Err(bad(ln, "expected `domain <kind> <params>`".into()));
        }
        let params = toks[2..].iter().map(|s| num(ln, s)).collect::<Result<Vec<_>, _>>()?;
        let domain = match (toks[1], params.len()) {
            ("square", 1) => Domain2D::square(params[0]),
            ("disk", 1) => Domain2D::disk(params[0]),
            ("polygon", n) if n >= 6 && n % 2 == 0 => {
                Domain2D::polygon(params.chunks(2).map(|c| Point2::new(c[0], c[1])).collect())
            }
            (kind, _) => return Err(bad(ln, format!("bad domain specification for kind {kind:?}"))),
        }
        .map_err(|e| bad(ln, e.to_string()))?;

        let (ln, toks) = next("spacing line")?;
        if toks.len() != 2 || toks[0] != "h" {
            return Err(bad(ln, "expected `h <spacing>`".into()));
        }
        let h = num(ln, toks[1])?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(bad(ln, format!("spacing must be positive, got {h}")));
        }

        let (ln, toks) = next("count line")?;
        if toks.len() != 2 || toks[0] != "n" {
            return Err(bad(ln, "expected `n <count>`".into()));
        }
        let n: usize = toks[1].parse().map_err(|_| bad(ln, format!("bad node count {:?}", toks[1])))?;
        let ij = lattice_nodes(&domain, h).map_err(|e| bad(ln, e.to_string()))?;
        if n != ij.len() {
            return Err(bad(ln, format!("node count {n} does not match the lattice ({} nodes)", ij.len())));
        }

        let mut values = Vec::with_capacity(n);
        for (k, &[i, j]) in ij.iter().enumerate() {
            let (ln, toks) = next("node line").map_err(|_| bad(4 + k + 1, format!("missing node line {}", k + 1)))?;
            if toks.len() != 3 {
                return Err(bad(ln, "expected `x1 x2 value`".into()));
            }
            let x1 = num(ln, toks[0])?;
            let x2 = num(ln, toks[1])?;
            let v = num(ln, toks[2])?;
            if x1.to_bits() != (i as f64 * h).to_bits() || x2.to_bits() != (j as f64 * h).to_bits() {
                return Err(bad(ln, format!("node ({x1}, {x2}) is not lattice node {k}")));
            }
            if !v.is_finite() {
                return Err(bad(ln, "non-finite value".into()));
            }
            values.push(v);
        }
        for (ln, toks) in lines {
            if !toks.is_empty() {
                return Err(bad(ln, "trailing content after the last node".into()));
            }
        }
        GridFunction::from_values(domain, h, values)
    }
}

/// Samples `field` at every lattice node of `domain`.
pub fn sample<F: Fn(Point2) -> f64>(field: F, domain: &Domain2D, h: f64) -> Result<GridFunction, GridError> {
    let ij = lattice_nodes(domain, h)?;
    let values: Vec<f64> = ij.iter().map(|&[i, j]| field(Point2::new(i as f64 * h, j as f64 * h))).collect();
    GridFunction::from_values(domain.clone(), h, values)
}

/// Right-hand sides `f` of `det D²v = f`.
#[derive(Clone)]
pub enum RhsField {
    Constant(f64),
    /// `(η + |x|²)^{1/(2α) − 2}`.
    DualTranslator { alpha: f64, eta: f64 },
    /// `|x₁|^{1/α − 4}`, zero on the axis `x₁ = 0`.
    Degenerate { alpha: f64 },
    /// A radial profile `f(|x|)`.
    CustomRadial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for RhsField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhsField::Constant(c) => write!(f, "Constant({c})"),
            RhsField::DualTranslator { alpha, eta } => write!(f, "DualTranslator {{ alpha: {alpha}, eta: {eta} }}"),
            RhsField::Degenerate { alpha } => write!(f, "Degenerate {{ alpha: {alpha} }}"),
            RhsField::CustomRadial(_) => write!(f, "CustomRadial(..)"),
        }
    }
}

impl RhsField {
    /// Checks the parameter ranges of the variant.
    pub fn validate(&self) -> Result<(), GridError> {
        match *self {
            RhsField::Constant(c) if !(c > 0.0 && c.is_finite()) => {
                Err(GridError::InvalidDomain(format!("constant right-hand side must be positive, got {c}")))
            }
            RhsField::DualTranslator { alpha, eta } => {
                if !crate::alpha_in_range(alpha) {
                    Err(GridError::AlphaOutOfRange(alpha))
                } else if !(0.0..=1.0).contains(&eta) {
                    Err(GridError::InvalidDomain(format!("eta must lie in [0, 1], got {eta}")))
                } else {
                    Ok(())
                }
            }
            RhsField::Degenerate { alpha } if !crate::alpha_in_range(alpha) => Err(GridError::AlphaOutOfRange(alpha)),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: Point2) -> f64 {
        match self {
            RhsField::Constant(c) => *c,
            RhsField::DualTranslator { alpha, eta } => (eta + x.norm_sq()).powf(0.5 / alpha - 2.0),
            RhsField::Degenerate { alpha } => {
                if x.x == 0.0 {
                    0.0
                } else {
                    x.x.abs().powf(1.0 / alpha - 4.0)
                }
            }
            RhsField::CustomRadial(g) => g(x.norm()),
        }
    }
}

/// Per-radius deviation of `|x|^{4−1/α} f(x)` from one.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RhsConditionReport {
    pub radii: Vec<f64>,
    pub deviation: Vec<f64>,
    pub eps: f64,
    /// Whether the deviation is at most `eps` on the largest three radii.
    pub eventually_within: bool,
}

/// Angular samples per circle used by [`check_rhs_condition`].
pub const RHS_ANGLES: usize = 256;

pub fn check_rhs_condition(f: &RhsField, alpha: f64, eps: f64, radii: &[f64]) -> Result<RhsConditionReport, GridError> {
    if !crate::alpha_in_range(alpha) {
        return Err(GridError::AlphaOutOfRange(alpha));
    }
    if radii.is_empty() {
        return Err(GridError::InvalidRadii("no radii given".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(GridError::InvalidRadii("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GridError::InvalidRadii("radii must be strictly increasing".into()));
    }
    let expo = 4.0 - 1.0 / alpha;
    let deviation: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let scale = r.powf(expo);
            (0..RHS_ANGLES)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / RHS_ANGLES as f64;
                    (scale * f.eval(Point2::from_polar(r, th)) - 1.0).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let tail = deviation.len().saturating_sub(3);
    let eventually_within = deviation[tail..].iter().all(|&d| d <= eps);
    Ok(RhsConditionReport { radii: radii.to_vec(), deviation, eps, eventually_within })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_half_spacing_has_25_nodes() {
        let d = Domain2D::square(1.0).unwrap();
        let g = sample(|_| 0.0, &d, 0.5).unwrap();
        assert_eq!(g.len(), 25);
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadratic_on_nine_nodes() {
        let d = Domain2D::square(1.0).unwrap();
        let g = sample(|p| 0.5 * p.norm_sq(), &d, 1.0).unwrap();
        assert_eq!(g.len(), 9);
        let mut vals: Vec<f64> = g.values().to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        assert_eq!(vals, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn node_order_is_row_major() {
        let d = Domain2D::square(1.0).unwrap();
        let g = sample(|_| 0.0, &d, 1.0).unwrap();
        let n = g.nodes();
        assert_eq!(n[0], Point2::new(-1.0, -1.0));
        assert_eq!(n[1], Point2::new(0.0, -1.0));
        assert_eq!(n[3], Point2::new(-1.0, 0.0));
        assert!(g.is_boundary_node(0));
        assert!(!g.is_boundary_node(4));
    }

    #[test]
    fn lattice_is_symmetric_on_disk() {
        let d = Domain2D::disk(1.0).unwrap();
        let g = sample(|_| 1.0, &d, 0.3).unwrap();
        for k in 0..g.len() {
            let [i, j] = g.lattice_index(k);
            assert!(g.index_of(-i, j).is_some() && g.index_of(i, -j).is_some() && g.index_of(j, i).is_some());
        }
    }

    #[test]
    fn boundary_lattice_points_are_included() {
        let d = Domain2D::square(0.3).unwrap();
        let g = sample(|_| 0.0, &d, 0.1).unwrap();
        assert_eq!(g.len(), 49);
    }

    #[test]
    fn nonfinite_and_empty() {
        let d = Domain2D::square(1.0).unwrap();
        assert!(matches!(sample(|_| f64::NAN, &d, 0.5), Err(GridError::NonfiniteValue { index: 0 })));
        let tri = Domain2D::polygon(vec![Point2::new(0.1, 0.1), Point2::new(0.4, 0.1), Point2::new(0.1, 0.4)]).unwrap();
        assert!(matches!(sample(|_| 0.0, &tri, 1.0), Err(GridError::EmptyDomain)));
    }

    #[test]
    fn polygon_validation() {
        let cw = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)];
        assert!(Domain2D::polygon(cw).is_err());
        let collinear = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(1.0, 1.0)];
        assert!(Domain2D::polygon(collinear).is_err());
    }

    #[test]
    fn dual_translator_rhs_at_unit_point() {
        let f = RhsField::DualTranslator { alpha: 0.125, eta: 1.0 };
        assert_eq!(f.eval(Point2::new(1.0, 0.0)), 4.0);
    }

    #[test]
    fn rhs_condition_examples() {
        let f = RhsField::DualTranslator { alpha: 0.125, eta: 1.0 };
        let rep = check_rhs_condition(&f, 0.125, 0.05, &[10.0]).unwrap();
        assert!((rep.deviation[0] - ((1.0f64 + 1e-2).powi(2) - 1.0)).abs() < 1e-12);
        assert!((rep.deviation[0] - 0.0201).abs() < 1e-12);

        assert!(matches!(
            check_rhs_condition(&RhsField::Constant(1.0), 0.25, 0.1, &[10.0]),
            Err(GridError::AlphaOutOfRange(_))
        ));

        let g = RhsField::Degenerate { alpha: 0.125 };
        let rep = check_rhs_condition(&g, 0.125, 0.1, &[10.0]).unwrap();
        assert!((rep.deviation[0] - 1.0).abs() < 1e-12);
        assert!(!rep.eventually_within);
    }

    #[test]
    fn rhs_condition_decreases_for_dual_translator() {
        let f = RhsField::DualTranslator { alpha: 1.0 / 6.0, eta: 0.7 };
        let radii: Vec<f64> = (0..8).map(|k| 2f64.powi(k)).collect();
        let rep = check_rhs_condition(&f, 1.0 / 6.0, 1e-3, &radii).unwrap();
        assert!(rep.deviation.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.eventually_within);
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let d = Domain2D::square(1.0).unwrap();
        let g = sample(|p| 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y, &d, 0.25).unwrap();
        let p = Point2::new(0.1, -0.3);
        let want = 1.0 + 0.2 + 0.3 - 0.015;
        assert!((g.interpolate(p).unwrap() - want).abs() < 1e-14);
        assert!(g.interpolate(Point2::new(1.5, 0.0)).is_none());
        assert_eq!(g.interpolate(Point2::new(1.0, 1.0)), Some(1.0 + 2.0 - 1.0 + 0.5));
    }

    #[test]
    fn malformed_headers() {
        let e = GridFunction::parse("GFN 2\n").unwrap_err();
        assert!(matches!(e, GridError::MalformedFile { line: 1, .. }));
        let e = GridFunction::parse("GFN 1\ndomain square 1\nh 1\nn 8\n").unwrap_err();
        assert!(matches!(e, GridError::MalformedFile { line: 4, .. }));
    }
}
