//! The Dirichlet problem `det D²v = f` in the Alexandrov sense on lattice sites.
//!
//! Unknowns are the heights of interior sites; boundary sites (lattice nodes
//! missing a 4-neighbour) carry prescribed heights. A solution is a lower
//! convex envelope whose cell area at every interior site equals the integral
//! of `f` over the site's lattice cell.
//!
//! Two schemes are provided. [`Scheme::Newton`] is a damped Newton method on
//! the cell areas, with exact area derivatives and a conjugate-gradient inner
//! solve. [`Scheme::OlikerPrussner`] starts from the convex envelope of the
//! boundary data and only ever lowers heights, one site at a time, by
//! bisection; it is monotone but needs many sweeps and is meant for small
//! problems.

use crate::geometry::Point2;
use crate::grid::{lattice_nodes, Domain2D, GridError, GridFunction, RhsField};
use crate::measure::{lower_envelope, mass_jacobian, subgradient_cells, MeasureError, PLConvexFunction};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("no convergence: residual {residual:e} after {iterations} site updates")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("boundary data admit no convex extension (site {site})")]
    InfeasibleBoundary { site: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Lattice sites, boundary data and per-site target masses.
#[derive(Clone, Debug)]
pub struct DirichletProblem {
    domain: Domain2D,
    h: f64,
    rhs: RhsField,
    grid: GridFunction,
    boundary: Vec<bool>,
    targets: Vec<f64>,
}

impl DirichletProblem {
    /// Boundary heights are `g` evaluated at the boundary sites.
    pub fn new<G: Fn(Point2) -> f64>(domain: Domain2D, h: f64, rhs: RhsField, g: G) -> Result<Self, SolveError> {
        let ij = lattice_nodes(&domain, h)?;
        let values = ij.iter().map(|&[i, j]| g(Point2::new(i as f64 * h, j as f64 * h))).collect();
        Self::with_values(domain, h, rhs, values)
    }

    /// `values` lists a height for every lattice node; only boundary entries are used.
    pub fn with_values(domain: Domain2D, h: f64, rhs: RhsField, values: Vec<f64>) -> Result<Self, SolveError> {
        rhs.validate()?;
        let ij = lattice_nodes(&domain, h)?;
        if values.len() != ij.len() {
            return Err(GridError::LengthMismatch { expected: ij.len(), got: values.len() }.into());
        }
        // Interior entries are placeholders until solved.
        let mut vals = values;
        let probe = GridFunction::from_values(domain.clone(), h, vec![0.0; ij.len()])?;
        let boundary: Vec<bool> = (0..probe.len()).map(|k| probe.is_boundary_node(k)).collect();
        for k in 0..vals.len() {
            if !boundary[k] {
                vals[k] = 0.0;
            } else if !vals[k].is_finite() {
                return Err(SolveError::InvalidProblem(format!("non-finite boundary value at site {k}")));
            }
        }
        if boundary.iter().all(|&b| b) {
            return Err(SolveError::InvalidProblem("no interior sites".into()));
        }
        let grid = probe.with_values(vals)?;
        let targets = compute_targets(&grid, &boundary, &rhs);
        if let Some(k) = (0..targets.len()).find(|&k| !boundary[k] && !(targets[k] > 0.0 && targets[k].is_finite())) {
            return Err(SolveError::InvalidProblem(format!("target mass at site {k} is not positive")));
        }
        Ok(DirichletProblem { domain, h, rhs, grid, boundary, targets })
    }

    pub fn domain(&self) -> &Domain2D {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn rhs(&self) -> &RhsField {
        &self.rhs
    }

    pub fn sites(&self) -> &[Point2] {
        self.grid.nodes()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.boundary[k]
    }

    /// Prescribed boundary heights; interior entries are zero.
    pub fn boundary_values(&self) -> &[f64] {
        self.grid.values()
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.boundary.len()).filter(|&k| !self.boundary[k]).collect()
    }

    /// Target masses per site, zero on the boundary.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    fn alpha(&self) -> Option<f64> {
        match self.rhs {
            RhsField::DualTranslator { alpha, .. } | RhsField::Degenerate { alpha } => Some(alpha),
            _ => None,
        }
    }
}

/// Integral of `f` over the lattice cell of each interior site by the 2×2 composite midpoint rule.
fn compute_targets(grid: &GridFunction, boundary: &[bool], rhs: &RhsField) -> Vec<f64> {
    let q = grid.h() / 4.0;
    let w = grid.h() * grid.h() / 4.0;
    grid.nodes()
        .iter()
        .zip(boundary)
        .map(|(&x, &b)| {
            if b {
                0.0
            } else {
                w * [(-q, -q), (q, -q), (-q, q), (q, q)]
                    .iter()
                    .map(|&(dx, dy)| rhs.eval(x + Point2::new(dx, dy)))
                    .sum::<f64>()
            }
        })
        .collect()
}

/// Per-site target masses, zero on boundary sites.
pub fn target_masses(problem: &DirichletProblem) -> Vec<f64> {
    problem.targets.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Newton,
    OlikerPrussner,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Relative mass tolerance per interior site.
    pub tol: f64,
    /// Budget in single-site height updates; a Newton step counts one per interior site.
    pub max_iters: usize,
    pub scheme: Scheme,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iters: 1_000_000, scheme: Scheme::Newton }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub max_residual: f64,
    pub h: f64,
    pub alpha: Option<f64>,
    pub scheme: Scheme,
    pub function: PLConvexFunction,
}

/// The serialized part of a [`SolveReport`].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub max_residual: f64,
    pub h: f64,
    pub alpha: Option<f64>,
}

impl SolveReport {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary { iterations: self.iterations, max_residual: self.max_residual, h: self.h, alpha: self.alpha }
    }

    /// Solution heights on the problem lattice.
    pub fn solution(&self, problem: &DirichletProblem) -> Result<GridFunction, GridError> {
        problem.grid.with_values(self.function.envelope_heights())
    }
}

pub fn solve(problem: &DirichletProblem, tol: f64, max_iters: usize) -> Result<SolveReport, SolveError> {
    solve_with(problem, &SolveOptions { tol, max_iters, ..Default::default() })
}

pub fn solve_with(problem: &DirichletProblem, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    if !(opts.tol > 0.0) {
        return Err(SolveError::NoConvergence { residual: f64::INFINITY, iterations: 0 });
    }
    let env = boundary_envelope(problem)?;
    match opts.scheme {
        Scheme::Newton => newton(problem, opts, &env),
        Scheme::OlikerPrussner => oliker_prussner(problem, opts, &env),
    }
}

/// Largest relative mass mismatch over interior sites.
pub fn residual(f: &PLConvexFunction, problem: &DirichletProblem) -> f64 {
    let cells = subgradient_cells(f);
    problem
        .interior()
        .iter()
        .map(|&k| (cells[k].area - problem.targets[k]).abs() / problem.targets[k])
        .fold(0.0, f64::max)
}

/// Convex envelope of the boundary data evaluated at every site.
fn boundary_envelope(problem: &DirichletProblem) -> Result<Vec<f64>, SolveError> {
    let bidx: Vec<usize> = (0..problem.boundary.len()).filter(|&k| problem.boundary[k]).collect();
    let bsites: Vec<Point2> = bidx.iter().map(|&k| problem.sites()[k]).collect();
    let bvals: Vec<f64> = bidx.iter().map(|&k| problem.boundary_values()[k]).collect();
    let env = lower_envelope(&bsites, &bvals)?;
    if let Some(m) = (0..bidx.len()).find(|&m| !env.is_active(m)) {
        return Err(SolveError::InfeasibleBoundary { site: bidx[m] });
    }
    let planes = env.face_planes();
    Ok(problem
        .sites()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if problem.boundary[k] {
                problem.boundary_values()[k]
            } else {
                planes.iter().map(|(g, c)| g.dot(x) + c).fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect())
}

struct Eval {
    f: PLConvexFunction,
    masses: Vec<f64>,
}

fn evaluate(problem: &DirichletProblem, heights: &[f64]) -> Result<Eval, SolveError> {
    let f = lower_envelope(problem.sites(), heights)?;
    let masses = subgradient_cells(&f).into_iter().map(|c| c.area).collect();
    Ok(Eval { f, masses })
}

fn max_rel(problem: &DirichletProblem, interior: &[usize], masses: &[f64]) -> f64 {
    interior
        .iter()
        .map(|&k| (masses[k] - problem.targets[k]).abs() / problem.targets[k])
        .fold(0.0, f64::max)
}

fn newton(problem: &DirichletProblem, opts: &SolveOptions, env: &[f64]) -> Result<SolveReport, SolveError> {
    let interior = problem.interior();
    let n = interior.len();
    let sites = problem.sites();
    let r_max = problem
        .boundary
        .iter()
        .zip(sites)
        .filter(|(&b, _)| b)
        .map(|(_, p)| p.norm_sq())
        .fold(0.0, f64::max);
    let t_min = interior.iter().map(|&k| problem.targets[k]).fold(f64::INFINITY, f64::min);
    let t_mean = interior.iter().map(|&k| problem.targets[k]).sum::<f64>() / n as f64;
    let s = 0.5 * (t_mean / (problem.h * problem.h)).sqrt();
    let mut heights: Vec<f64> = (0..sites.len())
        .map(|k| if problem.boundary[k] { env[k] } else { env[k] + s * (sites[k].norm_sq() - r_max) })
        .collect();

    let mut cur = evaluate(problem, &heights)?;
    let m0 = interior.iter().map(|&k| cur.masses[k]).fold(f64::INFINITY, f64::min);
    let eps0 = 0.5 * m0.min(t_min);
    let gap_norm = |masses: &[f64]| -> f64 {
        interior.iter().map(|&k| (masses[k] - problem.targets[k]).powi(2)).sum::<f64>().sqrt()
    };
    let mut gap = gap_norm(&cur.masses);
    let mut iterations = 0usize;
    let mut slot = vec![usize::MAX; sites.len()];
    for (m, &k) in interior.iter().enumerate() {
        slot[k] = m;
    }

    loop {
        let res = max_rel(problem, &interior, &cur.masses);
        if res <= opts.tol {
            return Ok(SolveReport {
                iterations,
                max_residual: res,
                h: problem.h,
                alpha: problem.alpha(),
                scheme: Scheme::Newton,
                function: cur.f,
            });
        }
        if iterations + n > opts.max_iters {
            return Err(SolveError::NoConvergence { residual: res, iterations });
        }
        iterations += n;

        // L = −∂A/∂h on interior sites.
        let jac = mass_jacobian(&cur.f);
        let diag: Vec<f64> = interior.iter().map(|&k| -jac.diag[k]).collect();
        let mut off: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, c) in &jac.edges {
            if slot[a] != usize::MAX && slot[b] != usize::MAX {
                off[slot[a]].push((slot[b], -c));
                off[slot[b]].push((slot[a], -c));
            }
        }
        let rhs: Vec<f64> = interior.iter().map(|&k| cur.masses[k] - problem.targets[k]).collect();
        let delta = conjugate_gradient(&diag, &off, &rhs, 1e-12, 10 * n + 100);

        let mut theta = 1.0;
        loop {
            let trial: Vec<f64> = heights
                .iter()
                .enumerate()
                .map(|(k, &h)| if slot[k] == usize::MAX { h } else { h + theta * delta[slot[k]] })
                .collect();
            let next = evaluate(problem, &trial)?;
            let all_active = interior.iter().all(|&k| next.f.is_interior(k));
            let min_mass = interior.iter().map(|&k| next.masses[k]).fold(f64::INFINITY, f64::min);
            let next_gap = gap_norm(&next.masses);
            if all_active && min_mass >= eps0 && next_gap <= (1.0 - 0.5 * theta) * gap {
                heights = trial;
                cur = next;
                gap = next_gap;
                break;
            }
            theta *= 0.5;
            if theta < 1e-12 {
                return Err(SolveError::NoConvergence { residual: res, iterations });
            }
        }
    }
}

/// Preconditioned conjugate gradients for a symmetric positive definite matrix
/// given by its diagonal and off-diagonal rows.
fn conjugate_gradient(diag: &[f64], off: &[Vec<(usize, f64)>], b: &[f64], rtol: f64, max_it: usize) -> Vec<f64> {
    let n = b.len();
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut s = diag[i] * x[i];
            for &(j, v) in &off[i] {
                s += v * x[j];
            }
            out[i] = s;
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let bnorm = dot(b, b).sqrt();
    let mut ap = vec![0.0; n];
    for _ in 0..max_it {
        if dot(&r, &r).sqrt() <= rtol * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let a = rz / pap;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Subdifferential of site `i` as an intersection of half-planes
/// `⟨y, x_j − x_i⟩ ≤ h_j − h_i`, clipped from the box given by the lattice neighbours.
fn local_cell_area(sites: &[Point2], heights: &[f64], grid: &GridFunction, i: usize) -> f64 {
    let [a, b] = grid.lattice_index(i);
    let h = grid.h();
    let nb = |di: i64, dj: i64| grid.index_of(a + di, b + dj).expect("interior site has all neighbours");
    let slope = |j: usize| (heights[j] - heights[i]) / h;
    let (xr, xl, yu, yd) = (nb(1, 0), nb(-1, 0), nb(0, 1), nb(0, -1));
    // y₁ ∈ [−slope(left), slope(right)], y₂ likewise.
    let (x0, x1) = (-slope(xl), slope(xr));
    let (y0, y1) = (-slope(yd), slope(yu));
    if x1 < x0 || y1 < y0 {
        return 0.0;
    }
    let mut poly = vec![Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)];
    for j in 0..sites.len() {
        if j == i || j == xr || j == xl || j == yu || j == yd {
            continue;
        }
        let d = sites[j] - sites[i];
        let c = heights[j] - heights[i];
        poly = clip(&poly, d, c);
        if poly.is_empty() {
            return 0.0;
        }
    }
    crate::geometry::signed_area(&poly).max(0.0)
}

/// Clips a convex polygon to `⟨y, d⟩ ≤ c`.
fn clip(poly: &[Point2], d: Point2, c: f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let fp = p.dot(d) - c;
        let fq = q.dot(d) - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

fn oliker_prussner(problem: &DirichletProblem, opts: &SolveOptions, env: &[f64]) -> Result<SolveReport, SolveError> {
    let interior = problem.interior();
    let sites = problem.sites();
    let grid = &problem.grid;
    let mut heights = env.to_vec();
    let mut iterations = 0usize;

    for &k in &interior {
        let m = local_cell_area(sites, &heights, grid, k);
        if m > problem.targets[k] * (1.0 + opts.tol) {
            return Err(SolveError::InfeasibleBoundary { site: k });
        }
    }

    loop {
        let cur = evaluate(problem, &heights)?;
        let res = max_rel(problem, &interior, &cur.masses);
        if res <= opts.tol {
            return Ok(SolveReport {
                iterations,
                max_residual: res,
                h: problem.h,
                alpha: problem.alpha(),
                scheme: Scheme::OlikerPrussner,
                function: cur.f,
            });
        }
        // Sweep in order of decreasing relative deficit, ties by index.
        let mut order: Vec<(f64, usize)> = interior
            .iter()
            .map(|&k| ((problem.targets[k] - cur.masses[k]) / problem.targets[k], k))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(deficit, k) in &order {
            if deficit <= 0.5 * opts.tol {
                continue;
            }
            if iterations >= opts.max_iters {
                return Err(SolveError::NoConvergence { residual: res, iterations });
            }
            iterations += 1;
            let target = problem.targets[k];
            let mass_at = |hk: f64, hs: &mut Vec<f64>| {
                let old = hs[k];
                hs[k] = hk;
                let m = local_cell_area(sites, hs, grid, k);
                hs[k] = old;
                m
            };
            let hi = heights[k];
            if mass_at(hi, &mut heights) >= target {
                continue;
            }
            let mut step = (target / 4.0).sqrt() * problem.h;
            let mut lo = hi - step;
            while mass_at(lo, &mut heights) < target {
                step *= 2.0;
                lo = hi - step;
            }
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if mass_at(mid, &mut heights) >= target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            // The upper end keeps the mass at or below its target.
            heights[k] = b;
        }
    }
}
