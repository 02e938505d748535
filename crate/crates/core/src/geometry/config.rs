use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identity attached to a point for as long as it is alive.
pub type PointId = u64;

/// A finite configuration of points in R^d.
///
/// Coordinates are stored flat (`dim` numbers per point). Every point carries
/// an identity; configurations built without explicit identities get
/// `0..n`. All distances and features treat the configuration as an
/// unordered multiset of locations, identities are only used to follow
/// points across frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    dim: usize,
    coords: Vec<f64>,
    ids: Vec<PointId>,
}

impl PointConfig {
    pub fn empty(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            dim,
            coords: Vec::new(),
            ids: Vec::new(),
        }
    }

    /// Planar configuration from `(x, y)` pairs with identities `0..n`.
    pub fn from_xy(points: &[(f64, f64)]) -> Self {
        let mut c = Self::empty(2);
        for (i, &(x, y)) in points.iter().enumerate() {
            c.push(&[x, y], i as PointId);
        }
        c
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut c = Self::empty(dim);
        for (i, p) in points.iter().enumerate() {
            c.try_push(p, i as PointId)?;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cardinality n(x).
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn id(&self, i: usize) -> PointId {
        self.ids[i]
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Appends a point. Panics on a dimension mismatch or non-finite coordinate.
    pub fn push(&mut self, p: &[f64], id: PointId) {
        self.try_push(p, id).expect("invalid point");
    }

    pub fn try_push(&mut self, p: &[f64], id: PointId) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::domain(format!(
                "point of dimension {} pushed into a {}-dimensional configuration",
                p.len(),
                self.dim
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("point coordinates must be finite"));
        }
        self.coords.extend_from_slice(p);
        self.ids.push(id);
        Ok(())
    }

    /// Removes the point at position `i`, returning its coordinates and id.
    /// Remaining points keep their relative order.
    pub fn remove(&mut self, i: usize) -> (Vec<f64>, PointId) {
        let start = i * self.dim;
        let p: Vec<f64> = self.coords.drain(start..start + self.dim).collect();
        let id = self.ids.remove(i);
        (p, id)
    }

    pub fn position_of(&self, id: PointId) -> Option<usize> {
        self.ids.iter().position(|&v| v == id)
    }

    /// Copy with points reordered by `perm` (position `k` takes old point `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len());
        let mut out = Self::empty(self.dim);
        for &k in perm {
            out.push(self.point(k), self.ids[k]);
        }
        out
    }
}

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::domain("window corners must share a positive dimension"));
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("window corners must be finite"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| u <= l) {
            return Err(Error::domain("window upper corner must exceed lower corner"));
        }
        Ok(Self { lower, upper })
    }

    /// The square `[0,1]^2`.
    pub fn unit_square() -> Self {
        Self {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Euclidean length of the diagonal.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) * (u - l))
            .sum::<f64>()
            .sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Corners of a planar window in counter-clockwise order starting at the lower corner.
    pub fn corners_2d(&self) -> Result<[[f64; 2]; 4]> {
        if self.dim() != 2 {
            return Err(Error::domain("window corners requested for a non-planar window"));
        }
        let (x0, y0, x1, y1) = (self.lower[0], self.lower[1], self.upper[0], self.upper[1]);
        Ok([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// Folds a coordinate back into the window by mirror reflection at the faces.
    pub fn reflect(&self, p: &mut [f64]) {
        for (v, (l, u)) in p.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            let width = u - l;
            let period = 2.0 * width;
            let mut r = (*v - l).rem_euclid(period);
            if r > width {
                r = period - r;
            }
            *v = l + r;
        }
    }

    /// Bounding box of a set of configurations, padded by `pad` (fraction of each side).
    pub fn bounding(configs: &[PointConfig], pad: f64) -> Result<Self> {
        let dim = configs
            .first()
            .map(|c| c.dim())
            .ok_or_else(|| Error::domain("no configurations to bound"))?;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for c in configs {
            for p in c.points() {
                for k in 0..dim {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        if lo[0] == f64::INFINITY {
            return Err(Error::domain("no points to bound"));
        }
        for k in 0..dim {
            let mut side = hi[k] - lo[k];
            if side <= 0.0 {
                side = 1.0;
            }
            lo[k] -= pad * side;
            hi[k] += pad * side;
        }
        Self::new(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_diameter() {
        assert!((Window::unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reflection_stays_inside() {
        let w = Window::unit_square();
        for v in [-0.3, 1.2, 2.7, -5.1, 0.5] {
            let mut p = [v, 0.5];
            w.reflect(&mut p);
            assert!(w.contains(&p), "{v} -> {p:?}");
        }
        let mut p = [1.25, -0.25];
        w.reflect(&mut p);
        assert!((p[0] - 0.75).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn remove_keeps_order() {
        let mut c = PointConfig::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]);
        let (p, id) = c.remove(1);
        assert_eq!(p, vec![1.0, 1.0]);
        assert_eq!(id, 1);
        assert_eq!(c.ids(), &[0, 2]);
        assert_eq!(c.point(1), &[2.0, 2.0]);
    }

    #[test]
    fn rejects_non_finite() {
        let mut c = PointConfig::empty(2);
        assert!(c.try_push(&[f64::NAN, 0.0], 0).is_err());
        assert!(c.try_push(&[0.0], 0).is_err());
    }
}
