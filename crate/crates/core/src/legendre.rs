//! Discrete Legendre–Fenchel conjugation over lattice node sets.
//!
//! `u*(y) = max_k ⟨y, x_k⟩ − u(x_k)` is evaluated with exact comparisons, so
//! the recorded maximizer is the true one (smallest node index on ties), and
//! the stored value is the exact maximum rounded toward +∞. Rounding upward
//! keeps Fenchel–Young valid in floating point, makes the biconjugate a
//! minorant of the input and makes the biconjugate idempotent on a fixed dual
//! lattice.
//!
//! The fast path is separable: a one-dimensional conjugate along every primal
//! row, then a one-dimensional maximization over rows for every dual column.
//! Both stages have monotone maximizers and use divide and conquer.

use rayon::prelude::*;

use crate::exact::{affine_gap, cmp_affine_gap};
use crate::geometry::Point2;
use crate::grid::{lattice_nodes, Domain2D, GridError, GridFunction};
use std::cmp::Ordering;

#[derive(Debug, thiserror::Error)]
pub enum LegendreError {
    #[error("all primal nodes are collinear")]
    DegenerateInput,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Debug)]
pub struct ConjugateResult {
    pub dual: GridFunction,
    /// For each dual node, the primal node index attaining the maximum.
    pub argmax: Vec<usize>,
}

/// Which algorithm evaluates the maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Separable,
    BruteForce,
}

/// Largest absolute difference quotient of `u` between lattice neighbours.
pub fn max_fd_slope(u: &GridFunction) -> f64 {
    let mut s: f64 = 0.0;
    for k in 0..u.len() {
        let [i, j] = u.lattice_index(k);
        for (di, dj) in [(1, 0), (0, 1)] {
            if let Some(m) = u.index_of(i + di, j + dj) {
                s = s.max((u.values()[m] - u.values()[k]).abs() / u.h());
            }
        }
    }
    s
}

/// Square dual domain of half-width `max_fd_slope(u) + h_dual`.
pub fn default_dual_domain(u: &GridFunction, h_dual: f64) -> Result<Domain2D, GridError> {
    if !(h_dual > 0.0 && h_dual.is_finite()) {
        return Err(GridError::InvalidSpacing(h_dual));
    }
    Domain2D::square(max_fd_slope(u) + h_dual)
}

pub fn legendre_transform(u: &GridFunction, dual_domain: &Domain2D, h_dual: f64) -> Result<ConjugateResult, LegendreError> {
    conjugate(u, dual_domain, h_dual, Method::Separable)
}

/// Quadratic-time reference evaluation.
pub fn legendre_transform_brute(u: &GridFunction, dual_domain: &Domain2D, h_dual: f64) -> Result<ConjugateResult, LegendreError> {
    conjugate(u, dual_domain, h_dual, Method::BruteForce)
}

/// `(u*)*` on the nodes of `u`, with `u*` taken on the default dual square.
pub fn biconjugate(u: &GridFunction, h_dual: f64) -> Result<GridFunction, LegendreError> {
    let d = default_dual_domain(u, h_dual)?;
    biconjugate_on(u, &d, h_dual)
}

/// `(u*)*` on the nodes of `u`, with `u*` taken on the given dual lattice.
pub fn biconjugate_on(u: &GridFunction, dual_domain: &Domain2D, h_dual: f64) -> Result<GridFunction, LegendreError> {
    let star = legendre_transform(u, dual_domain, h_dual)?;
    Ok(conjugate(&star.dual, u.domain(), u.h(), Method::Separable)?.dual)
}

/// Conjugate of `src` evaluated on the lattice of `(query_domain, hq)`.
pub fn conjugate(src: &GridFunction, query_domain: &Domain2D, hq: f64, method: Method) -> Result<ConjugateResult, LegendreError> {
    check_nondegenerate(src.nodes())?;
    let ij = lattice_nodes(query_domain, hq)?;
    let ys: Vec<Point2> = ij.iter().map(|&[i, j]| Point2::new(i as f64 * hq, j as f64 * hq)).collect();
    let argmax = match method {
        Method::BruteForce => brute(src, &ys),
        Method::Separable => separable(src, &ij, &ys),
    };
    let values: Vec<f64> = ys
        .par_iter()
        .zip(&argmax)
        .map(|(y, &k)| affine_gap(y.as_array(), src.nodes()[k].as_array(), src.values()[k]).round_up())
        .collect();
    let dual = GridFunction::from_values(query_domain.clone(), hq, values)?;
    Ok(ConjugateResult { dual, argmax })
}

fn check_nondegenerate(xs: &[Point2]) -> Result<(), LegendreError> {
    let a = xs.first().ok_or(LegendreError::DegenerateInput)?;
    let b = xs.iter().find(|p| *p != a).ok_or(LegendreError::DegenerateInput)?;
    if xs.iter().any(|p| robust::orient2d(a.coord(), b.coord(), p.coord()) != 0.0) {
        Ok(())
    } else {
        Err(LegendreError::DegenerateInput)
    }
}

fn cmp_nodes(src: &GridFunction, y: Point2, a: usize, b: usize) -> Ordering {
    let x = src.nodes();
    let u = src.values();
    cmp_affine_gap(y.as_array(), x[a].as_array(), u[a], x[b].as_array(), u[b])
}

fn brute(src: &GridFunction, ys: &[Point2]) -> Vec<usize> {
    ys.par_iter()
        .map(|&y| {
            let mut best = 0;
            for k in 1..src.len() {
                if cmp_nodes(src, y, k, best) == Ordering::Greater {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Fills `out[q]` for queries `qlo..qhi` with the smallest maximizing candidate in
/// `clo..=chi`, given that the smallest maximizer is nondecreasing in `q`.
fn monotone_argmax<F>(qlo: usize, qhi: usize, clo: usize, chi: usize, greater: &F, cand: &dyn Fn(usize) -> usize, out: &mut [usize])
where
    F: Fn(usize, usize, usize) -> bool,
{
    if qlo >= qhi {
        return;
    }
    let m = qlo + (qhi - qlo) / 2;
    let mut best = clo;
    for c in clo + 1..=chi {
        if greater(m, cand(c), cand(best)) {
            best = c;
        }
    }
    out[m] = best;
    monotone_argmax(qlo, m, clo, best, greater, cand, out);
    monotone_argmax(m + 1, qhi, best, chi, greater, cand, out);
}

fn separable(src: &GridFunction, qij: &[[i64; 2]], ys: &[Point2]) -> Vec<usize> {
    // Primal rows: contiguous runs of equal lattice j.
    let mut rows: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=src.len() {
        if k == src.len() || src.lattice_index(k)[1] != src.lattice_index(start)[1] {
            rows.push((start, k - start));
            start = k;
        }
    }
    // Dual columns: distinct i, each with its nodes in increasing j.
    let mut col_ids: Vec<i64> = qij.iter().map(|c| c[0]).collect();
    col_ids.sort_unstable();
    col_ids.dedup();
    let col_of = |i: i64| col_ids.binary_search(&i).unwrap();
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); col_ids.len()];
    for (q, c) in qij.iter().enumerate() {
        columns[col_of(c[0])].push(q);
    }
    let col_y1: Vec<f64> = columns.iter().map(|c| ys[c[0]].x).collect();

    // Stage 1: best node of each row for each column abscissa.
    let best_in_row: Vec<Vec<usize>> = rows
        .par_iter()
        .map(|&(s, len)| {
            let mut out = vec![0; col_y1.len()];
            let greater = |q: usize, a: usize, b: usize| cmp_nodes(src, Point2::new(col_y1[q], 0.0), a, b) == Ordering::Greater;
            let cand = |c: usize| s + c;
            monotone_argmax(0, col_y1.len(), 0, len - 1, &greater, &cand, &mut out);
            out.iter().map(|&c| s + c).collect()
        })
        .collect();

    // Stage 2: best row for each query in each column.
    let per_column: Vec<Vec<(usize, usize)>> = columns
        .par_iter()
        .enumerate()
        .map(|(ci, qs)| {
            let mut out = vec![0; qs.len()];
            let greater = |q: usize, a: usize, b: usize| cmp_nodes(src, ys[qs[q]], a, b) == Ordering::Greater;
            let cand = |r: usize| best_in_row[r][ci];
            monotone_argmax(0, qs.len(), 0, rows.len() - 1, &greater, &cand, &mut out);
            qs.iter().zip(out).map(|(&q, r)| (q, best_in_row[r][ci])).collect()
        })
        .collect();

    let mut argmax = vec![0; ys.len()];
    for col in per_column {
        for (q, k) in col {
            argmax[q] = k;
        }
    }
    argmax
}
