//! Incremental lower convex hull of lifted planar points.
//!
//! The hull is closed with a symbolic vertex at `z = +∞` so that every hull
//! edge of the planar convex hull carries a vertical "infinite" face. Faces are
//! triangles `[a, b, c]` with edge `k` running from `v[k]` to `v[k+1]` and
//! `n[k]` the face across it. Finite faces are counterclockwise in the plane;
//! infinite faces are stored as `[u, v, INF]` with the hull interior to the
//! right of `u → v`.
//!
//! Ties are broken symbolically. Heights are first raised by `ε|x|²`, which
//! makes coplanar data triangulate like Delaunay; cocircular ties left after
//! that go to the newly inserted point, taken infinitesimally lower than all
//! earlier ones. Every site of affine or quadratic lattice data stays a vertex.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust::{orient2d, orient3d, Coord, Coord3D};

use crate::geometry::Point2;

const INF: u32 = u32::MAX;
const SHUFFLE_SEED: u64 = 0x6c6f_7765_725f_6875;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum HullError {
    NonFinite(usize),
    Duplicate(usize, usize),
    Collinear,
}

#[derive(Clone, Debug)]
pub(crate) struct LowerHull {
    /// Counterclockwise triangles of the projected lower hull.
    pub triangles: Vec<[usize; 3]>,
    /// Neighbour across edge `(v[k], v[k+1])`; `None` on the planar hull boundary.
    pub neighbors: Vec<[Option<usize>; 3]>,
    /// Site is a vertex of the lower hull.
    pub active: Vec<bool>,
    /// Site lies on the boundary of the planar convex hull and is a vertex.
    pub on_hull: Vec<bool>,
}

#[derive(Clone)]
struct Face {
    v: [u32; 3],
    n: [u32; 3],
    alive: bool,
    conflicts: Vec<u32>,
}

struct Builder<'a> {
    xy: &'a [Point2],
    z: &'a [f64],
    faces: Vec<Face>,
    /// Face a pending point is known to see, or `INF` when it sees none.
    conflict_of: Vec<u32>,
}

impl Builder<'_> {
    fn c2(&self, i: u32) -> Coord<f64> {
        self.xy[i as usize].coord()
    }

    fn c3(&self, i: u32) -> Coord3D<f64> {
        let p = self.xy[i as usize];
        Coord3D { x: p.x, y: p.y, z: self.z[i as usize] }
    }

    fn lifted(&self, i: u32) -> Coord3D<f64> {
        let p = self.xy[i as usize];
        Coord3D { x: p.x, y: p.y, z: p.norm_sq() }
    }

    fn finite_visible(&self, f: &Face, p: u32) -> bool {
        let o = orient3d(self.c3(f.v[0]), self.c3(f.v[1]), self.c3(f.v[2]), self.c3(p));
        if o != 0.0 {
            return o > 0.0;
        }
        let o = orient3d(self.lifted(f.v[0]), self.lifted(f.v[1]), self.lifted(f.v[2]), self.lifted(p));
        o >= 0.0
    }

    fn visible(&self, fi: u32, p: u32) -> bool {
        let f = &self.faces[fi as usize];
        if f.v[2] != INF {
            return self.finite_visible(f, p);
        }
        let o = orient2d(self.c2(f.v[0]), self.c2(f.v[1]), self.c2(p));
        if o > 0.0 {
            true
        } else if o < 0.0 {
            false
        } else {
            // On the supporting line: the vertical face is seen exactly when the
            // finite face through the same edge is.
            self.finite_visible(&self.faces[f.n[0] as usize], p)
        }
    }

    fn add_face(&mut self, v: [u32; 3]) -> u32 {
        self.faces.push(Face { v, n: [INF; 3], alive: true, conflicts: Vec::new() });
        (self.faces.len() - 1) as u32
    }

    fn link(&mut self, ids: &[u32]) {
        let mut edges: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        for &f in ids {
            let v = self.faces[f as usize].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]), (f, k));
            }
        }
        for &f in ids {
            let v = self.faces[f as usize].v;
            for k in 0..3 {
                if let Some(&(g, _)) = edges.get(&(v[(k + 1) % 3], v[k])) {
                    self.faces[f as usize].n[k] = g;
                }
            }
        }
    }

    fn insert(&mut self, p: u32) {
        let start = self.conflict_of[p as usize];
        if start == INF {
            return;
        }
        // Visible region by flood fill.
        let mut visible = vec![start];
        let mut mark: HashMap<u32, bool> = HashMap::new();
        mark.insert(start, true);
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for j in 0..3 {
                let g = self.faces[f as usize].n[j];
                if mark.contains_key(&g) {
                    continue;
                }
                let vis = self.visible(g, p);
                mark.insert(g, vis);
                if vis {
                    visible.push(g);
                }
            }
        }

        // One new face per horizon edge.
        let mut created = Vec::new();
        let mut by_start: HashMap<u32, u32> = HashMap::new();
        for &f in &visible {
            for j in 0..3 {
                let g = self.faces[f as usize].n[j];
                if mark[&g] {
                    continue;
                }
                let x = self.faces[f as usize].v[j];
                let y = self.faces[f as usize].v[(j + 1) % 3];
                let (verts, slot) = if y == INF {
                    ([p, x, INF], 1)
                } else if x == INF {
                    ([y, p, INF], 2)
                } else {
                    ([x, y, p], 0)
                };
                let nf = self.add_face(verts);
                self.faces[nf as usize].n[slot] = g;
                let gk = (0..3)
                    .find(|&m| self.faces[g as usize].n[m] == f)
                    .expect("horizon neighbour must point back");
                self.faces[g as usize].n[gk] = nf;
                by_start.insert(x, nf);
                created.push((nf, x, y));
            }
        }
        // Stitch the cone: the edge (y, p) of one new face meets (p, y) of the next.
        for &(nf, _, y) in &created {
            let next = by_start[&y];
            let slot_yp = self.slot(nf, y, p);
            let slot_py = self.slot(next, p, y);
            self.faces[nf as usize].n[slot_yp] = next;
            self.faces[next as usize].n[slot_py] = nf;
        }

        // Retire the visible faces and hand their pending points to the cone.
        let mut orphans = Vec::new();
        for &f in &visible {
            let face = &mut self.faces[f as usize];
            face.alive = false;
            orphans.append(&mut face.conflicts);
        }
        for q in orphans {
            if q == p {
                continue;
            }
            let mut home = INF;
            for &(nf, _, _) in &created {
                if self.visible(nf, q) {
                    home = nf;
                    break;
                }
            }
            self.conflict_of[q as usize] = home;
            if home != INF {
                self.faces[home as usize].conflicts.push(q);
            }
        }
    }

    fn slot(&self, f: u32, a: u32, b: u32) -> usize {
        let v = self.faces[f as usize].v;
        (0..3)
            .find(|&k| v[k] == a && v[(k + 1) % 3] == b)
            .expect("edge must belong to face")
    }
}

/// Lower convex hull of the points `(xy[i], z[i])`.
pub(crate) fn lower_hull(xy: &[Point2], z: &[f64]) -> Result<LowerHull, HullError> {
    assert_eq!(xy.len(), z.len());
    let n = xy.len();
    if let Some(i) = (0..n).find(|&i| !xy[i].is_finite() || !z[i].is_finite()) {
        return Err(HullError::NonFinite(i));
    }
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by(|&a, &b| {
        xy[a].x.partial_cmp(&xy[b].x).unwrap().then(xy[a].y.partial_cmp(&xy[b].y).unwrap())
    });
    for w in sorted.windows(2) {
        if xy[w[0]] == xy[w[1]] {
            return Err(HullError::Duplicate(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    if n < 3 {
        return Err(HullError::Collinear);
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    // Bring a non-collinear triple to the front.
    let a = order[0];
    let b = order[1];
    let c_pos = (2..n)
        .find(|&k| orient2d(xy[a as usize].coord(), xy[b as usize].coord(), xy[order[k] as usize].coord()) != 0.0)
        .ok_or(HullError::Collinear)?;
    order.swap(2, c_pos);
    let c = order[2];

    let mut bld = Builder { xy, z, faces: Vec::new(), conflict_of: vec![INF; n] };
    let (a, b) = if orient2d(xy[a as usize].coord(), xy[b as usize].coord(), xy[c as usize].coord()) > 0.0 {
        (a, b)
    } else {
        (b, a)
    };
    let ids = [
        bld.add_face([a, b, c]),
        bld.add_face([b, a, INF]),
        bld.add_face([c, b, INF]),
        bld.add_face([a, c, INF]),
    ];
    bld.link(&ids);

    for &q in &order[3..] {
        if let Some(&f) = ids.iter().find(|&&f| bld.visible(f, q)) {
            bld.conflict_of[q as usize] = f;
            bld.faces[f as usize].conflicts.push(q);
        }
    }
    for &q in &order[3..] {
        bld.insert(q);
    }

    let mut index = vec![usize::MAX; bld.faces.len()];
    let mut triangles = Vec::new();
    let mut active = vec![false; n];
    let mut on_hull = vec![false; n];
    for (fi, f) in bld.faces.iter().enumerate() {
        if !f.alive {
            continue;
        }
        if f.v[2] == INF {
            on_hull[f.v[0] as usize] = true;
            on_hull[f.v[1] as usize] = true;
        } else {
            index[fi] = triangles.len();
            triangles.push([f.v[0] as usize, f.v[1] as usize, f.v[2] as usize]);
            for &v in &f.v {
                active[v as usize] = true;
            }
        }
    }
    let mut neighbors = Vec::with_capacity(triangles.len());
    for f in bld.faces.iter() {
        if f.alive && f.v[2] != INF {
            let mut nb = [None; 3];
            for k in 0..3 {
                let g = index[f.n[k] as usize];
                if g != usize::MAX {
                    nb[k] = Some(g);
                }
            }
            neighbors.push(nb);
        }
    }
    Ok(LowerHull { triangles, neighbors, active, on_hull })
}
