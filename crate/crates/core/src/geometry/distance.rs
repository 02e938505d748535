//! Distances between point configurations.

use super::assignment;
use super::config::PointConfig;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

fn check_dims(x: &PointConfig, y: &PointConfig) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::domain(format!(
            "configurations of dimension {} and {} are not comparable",
            x.dim(),
            y.dim()
        )));
    }
    Ok(())
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Points of a configuration sorted by their first coordinate.
struct Sweep<'a> {
    cfg: &'a PointConfig,
    order: Vec<usize>,
    keys: Vec<f64>,
}

impl<'a> Sweep<'a> {
    fn new(cfg: &'a PointConfig) -> Self {
        let mut order: Vec<usize> = (0..cfg.len()).collect();
        order.sort_by(|&a, &b| cfg.point(a)[0].total_cmp(&cfg.point(b)[0]));
        let keys = order.iter().map(|&i| cfg.point(i)[0]).collect();
        Sweep { cfg, order, keys }
    }

    /// Squared distance from `u` to the nearest point, or any value not
    /// above `floor` once a point that close has been seen.
    fn nearest_sq(&self, u: &[f64], floor: f64) -> f64 {
        let n = self.keys.len();
        let start = self.keys.partition_point(|&k| k < u[0]);
        let mut best = f64::INFINITY;
        let (mut lo, mut hi) = (start, start);
        loop {
            let dl = if lo > 0 { u[0] - self.keys[lo - 1] } else { f64::INFINITY };
            let dh = if hi < n { self.keys[hi] - u[0] } else { f64::INFINITY };
            let k = if dl <= dh {
                if dl * dl >= best {
                    break;
                }
                lo -= 1;
                lo
            } else {
                if dh * dh >= best {
                    break;
                }
                hi += 1;
                hi - 1
            };
            let d = sq_dist(u, self.cfg.point(self.order[k]));
            if d < best {
                best = d;
                if best <= floor {
                    break;
                }
            }
        }
        best
    }
}

/// Squared directed distance, continuing from a running maximum `cmax`: a
/// point of `x` with a neighbour in `y` no farther than `cmax` cannot raise
/// the maximum, so its search stops there.
fn directed_hausdorff_sq(x: &PointConfig, y: &Sweep<'_>, mut cmax: f64) -> f64 {
    for u in x.points() {
        let d = y.nearest_sq(u, cmax);
        if d > cmax {
            cmax = d;
        }
    }
    cmax
}

/// Hausdorff distance between two nonempty configurations.
pub fn hausdorff(x: &PointConfig, y: &PointConfig) -> Result<f64> {
    check_dims(x, y)?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::domain(
            "Hausdorff distance is undefined for an empty configuration",
        ));
    }
    let h = directed_hausdorff_sq(x, &Sweep::new(y), 0.0);
    Ok(directed_hausdorff_sq(y, &Sweep::new(x), h).sqrt())
}

/// Optimal matching distance with cut-off `kappa`: the smaller configuration
/// is matched into the larger one at truncated Euclidean cost, each
/// unmatched point costs `kappa`, and the total is divided by the larger
/// cardinality. Duplicated points are matched as distinct elements.
pub fn optimal_matching(x: &PointConfig, y: &PointConfig, kappa: f64) -> Result<f64> {
    check_dims(x, y)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("kappa must be positive and finite"));
    }
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (n, m) = (small.len(), large.len());
    if m == 0 {
        return Ok(0.0);
    }
    // Each unmatched point of the larger configuration costs kappa.
    let mut cost = vec![0.0; n * m];
    for (i, u) in small.points().enumerate() {
        let row = &mut cost[i * m..(i + 1) * m];
        for (c, v) in row.iter_mut().zip(large.points()) {
            *c = euclid(u, v).min(kappa);
        }
    }
    let matched = assignment::solve_rect(n, m, &cost).cost;
    Ok((matched + kappa * (m - n) as f64) / m as f64)
}

/// `|n(x) - n(y)|`.
pub fn cardinality_distance(x: &PointConfig, y: &PointConfig) -> f64 {
    (x.len() as f64 - y.len() as f64).abs()
}

/// Largest nearest-neighbour distance within a configuration.
pub fn max_nn_distance(x: &PointConfig) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::domain(
            "nearest-neighbour distance needs at least two points",
        ));
    }
    let n = x.len();
    let mut nearest = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclid(x.point(i), x.point(j));
            nearest[i] = nearest[i].min(d);
            nearest[j] = nearest[j].min(d);
        }
    }
    Ok(nearest.into_iter().fold(0.0, f64::max))
}
