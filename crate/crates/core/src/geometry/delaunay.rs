//! Planar Delaunay triangulation by incremental cavity insertion.
//!
//! The unbounded side of the hull is represented by a single ghost vertex:
//! every hull edge `(p, q)` carries a ghost triangle `(p, q, GHOST)` whose
//! "circumcircle" is the open half-plane to the left of `p -> q` plus the
//! segment itself. This plays the role of a super-triangle placed at
//! infinity and avoids the missing-hull-triangle failure of a finite one.

use std::collections::{HashMap, VecDeque};

use super::config::{PointConfig, Window};
use crate::error::{Error, Result};

const GHOST: usize = usize::MAX;
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    /// Set when coincident input points were merged before triangulating.
    pub had_duplicates: bool,
}

impl Tessellation {
    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Largest triangle area.
    pub fn max_cell_area(&self) -> Result<f64> {
        if self.areas.is_empty() {
            return Err(Error::domain("empty tessellation"));
        }
        Ok(self.areas.iter().copied().fold(0.0, f64::max))
    }
}

/// Delaunay triangulation of `x`, optionally augmented with the four window corners.
pub fn delaunay(x: &PointConfig, window: &Window, add_corners: bool) -> Result<Tessellation> {
    if x.dim() != 2 {
        return Err(Error::domain("Delaunay tessellation is only available in the plane"));
    }
    let mut pts: Vec<[f64; 2]> = x.points().map(|p| [p[0], p[1]]).collect();
    if add_corners {
        pts.extend(window.corners_2d()?);
    }
    triangulate(&pts)
}

/// Largest Delaunay cell area of `x` with the window corners added.
pub fn max_cell_area(x: &PointConfig, window: &Window) -> Result<f64> {
    delaunay(x, window, true)?.max_cell_area()
}

pub fn triangulate(input: &[[f64; 2]]) -> Result<Tessellation> {
    let (vertices, had_duplicates) = dedup(input);
    if vertices.len() < 3 {
        return Err(Error::domain(format!(
            "triangulation needs at least 3 distinct vertices, got {}",
            vertices.len()
        )));
    }
    let mut mesh = Mesh::new(&vertices);
    let (a, b, c) = initial_triangle(&vertices)
        .ok_or_else(|| Error::domain("all vertices are collinear"))?;
    mesh.seed(a, b, c);
    for i in 0..vertices.len() {
        if i != a && i != b && i != c {
            mesh.insert(i);
        }
    }
    mesh.resolve_cocircular();

    let mut triangles: Vec<[usize; 3]> = mesh
        .tris
        .iter()
        .zip(&mesh.alive)
        .filter(|(t, alive)| **alive && !t.contains(&GHOST))
        .map(|(t, _)| canonical(*t))
        .collect();
    triangles.sort_unstable();
    let areas = triangles
        .iter()
        .map(|t| 0.5 * orient(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]).abs())
        .collect();
    Ok(Tessellation {
        vertices,
        triangles,
        areas,
        had_duplicates,
    })
}

fn canonical(t: [usize; 3]) -> [usize; 3] {
    let k = (0..3).min_by_key(|&k| t[k]).unwrap();
    [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
}

fn dedup(input: &[[f64; 2]]) -> (Vec<[f64; 2]>, bool) {
    let scale = input
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol2 = (EPS * scale).powi(2);
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(input.len());
    let mut dup = false;
    for p in input {
        let seen = out
            .iter()
            .any(|q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) <= tol2);
        if seen {
            dup = true;
        } else {
            out.push(*p);
        }
    }
    (out, dup)
}

#[inline]
fn orient(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Orientation sign with a relative tolerance band: `1` left turn, `-1` right turn, `0` collinear.
fn orient_sign(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> i8 {
    let o = orient(a, b, c);
    let scale = ((b[0] - a[0]).hypot(b[1] - a[1])) * ((c[0] - a[0]).hypot(c[1] - a[1]));
    if o > EPS * scale {
        1
    } else if o < -EPS * scale {
        -1
    } else {
        0
    }
}

/// In-circle determinant for counter-clockwise `(a, b, c)`, normalised by the
/// fourth power of the local length scale. Positive when `d` is inside.
pub(crate) fn incircle_normalized(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2], d: &[f64; 2]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
    let scale = ad.max(bd).max(cd);
    if scale == 0.0 {
        return 0.0;
    }
    det / (scale * scale)
}

fn initial_triangle(v: &[[f64; 2]]) -> Option<(usize, usize, usize)> {
    let (a, b) = (0, 1);
    let c = (2..v.len()).find(|&c| orient_sign(&v[a], &v[b], &v[c]) != 0)?;
    if orient(&v[a], &v[b], &v[c]) > 0.0 {
        Some((a, b, c))
    } else {
        Some((b, a, c))
    }
}

struct Mesh<'a> {
    v: &'a [[f64; 2]],
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edges: HashMap<(usize, usize), usize>,
}

impl<'a> Mesh<'a> {
    fn new(v: &'a [[f64; 2]]) -> Self {
        Self {
            v,
            tris: Vec::with_capacity(4 * v.len()),
            alive: Vec::with_capacity(4 * v.len()),
            edges: HashMap::with_capacity(12 * v.len()),
        }
    }

    fn add(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for k in 0..3 {
            self.edges.insert((t[k], t[(k + 1) % 3]), id);
        }
        id
    }

    fn kill(&mut self, id: usize) {
        let t = self.tris[id];
        self.alive[id] = false;
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if self.edges.get(&e) == Some(&id) {
                self.edges.remove(&e);
            }
        }
    }

    fn seed(&mut self, a: usize, b: usize, c: usize) {
        self.add([a, b, c]);
        self.add([b, a, GHOST]);
        self.add([c, b, GHOST]);
        self.add([a, c, GHOST]);
    }

    fn is_ghost(t: &[usize; 3]) -> bool {
        t[2] == GHOST
    }

    /// Whether point `p` conflicts with triangle `id`.
    fn conflicts(&self, id: usize, p: usize) -> bool {
        let t = self.tris[id];
        let v = self.v;
        if Self::is_ghost(&t) {
            let (a, b) = (&v[t[0]], &v[t[1]]);
            match orient_sign(a, b, &v[p]) {
                1 => true,
                0 => {
                    // On the hull line: conflict only strictly inside the segment.
                    let q = &v[p];
                    let dot = (q[0] - a[0]) * (b[0] - a[0]) + (q[1] - a[1]) * (b[1] - a[1]);
                    let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
                    dot > 0.0 && dot < len2
                }
                _ => false,
            }
        } else {
            incircle_normalized(&v[t[0]], &v[t[1]], &v[t[2]], &v[p]) > EPS
        }
    }

    fn locate(&self, p: usize) -> Option<usize> {
        let v = self.v;
        let q = &v[p];
        let mut ghost_hit = None;
        for (id, t) in self.tris.iter().enumerate() {
            if !self.alive[id] {
                continue;
            }
            if Self::is_ghost(t) {
                if ghost_hit.is_none() && self.conflicts(id, p) {
                    ghost_hit = Some(id);
                }
            } else if orient_sign(&v[t[0]], &v[t[1]], q) >= 0
                && orient_sign(&v[t[1]], &v[t[2]], q) >= 0
                && orient_sign(&v[t[2]], &v[t[0]], q) >= 0
            {
                return Some(id);
            }
        }
        ghost_hit
    }

    fn insert(&mut self, p: usize) {
        let Some(start) = self.locate(p) else {
            // Numerically coincident with the current mesh in a way that yields
            // no conflict; dropping the point is the only consistent option.
            log::warn!("delaunay: vertex {p} could not be located and was skipped");
            return;
        };
        let mut bad = vec![start];
        let mut in_bad: HashMap<usize, bool> = HashMap::new();
        in_bad.insert(start, true);
        let mut queue = VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            let t = self.tris[id];
            for k in 0..3 {
                let twin = (t[(k + 1) % 3], t[k]);
                if let Some(&nb) = self.edges.get(&twin) {
                    if in_bad.contains_key(&nb) {
                        continue;
                    }
                    let hit = self.conflicts(nb, p);
                    in_bad.insert(nb, hit);
                    if hit {
                        bad.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
        }
        let mut boundary = Vec::new();
        for &id in &bad {
            let t = self.tris[id];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let outside = match self.edges.get(&(b, a)) {
                    Some(nb) => !in_bad.get(nb).copied().unwrap_or(false),
                    None => true,
                };
                if outside {
                    boundary.push((a, b));
                }
            }
        }
        for id in bad {
            self.kill(id);
        }
        for (a, b) in boundary {
            let t = if a == GHOST {
                [b, p, GHOST]
            } else if b == GHOST {
                [p, a, GHOST]
            } else {
                [a, b, p]
            };
            self.add(t);
        }
    }

    /// Among cocircular quadruples, keep the diagonal incident to the lowest vertex index.
    fn resolve_cocircular(&mut self) {
        let v = self.v;
        let budget = 10 * v.len() + 10;
        for _ in 0..budget {
            let mut flipped = false;
            for id in 0..self.tris.len() {
                if !self.alive[id] || Self::is_ghost(&self.tris[id]) {
                    continue;
                }
                let t = self.tris[id];
                for k in 0..3 {
                    let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                    let Some(&nb) = self.edges.get(&(b, a)) else { continue };
                    let u = self.tris[nb];
                    if Self::is_ghost(&u) {
                        continue;
                    }
                    let d = *u.iter().find(|&&w| w != a && w != b).unwrap();
                    if c.min(d) >= a.min(b) {
                        continue;
                    }
                    if incircle_normalized(&v[a], &v[b], &v[c], &v[d]).abs() > EPS {
                        continue;
                    }
                    // The flipped pair must stay counter-clockwise.
                    if orient(&v[c], &v[a], &v[d]) <= 0.0 || orient(&v[d], &v[b], &v[c]) <= 0.0 {
                        continue;
                    }
                    self.kill(id);
                    self.kill(nb);
                    self.add([c, a, d]);
                    self.add([d, b, c]);
                    flipped = true;
                    break;
                }
            }
            if !flipped {
                return;
            }
        }
        log::warn!("delaunay: cocircular tie-break did not settle within its flip budget");
    }
}
