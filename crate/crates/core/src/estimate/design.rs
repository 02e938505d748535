use std::collections::HashSet;
use std::ops::Range;

use rayon::prelude::*;

use super::kernel::{DistanceStrategy, KernelSpec, Proximity};
use super::Target;
use crate::error::{Error, Result};
use crate::geometry::PointConfig;
use crate::model::JumpKind;
use crate::simulate::{FrameSequence, Trajectory};

/// Jump counts between two consecutive frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JumpCounts {
    pub total: usize,
    pub births: usize,
    pub deaths: usize,
}

/// Approximate jump counts between frames `j - 1` and `j`.
///
/// With tracks, births are identities new in frame `j` and deaths are
/// identities of frame `j - 1` missing from frame `j`. Without tracks only
/// a change of cardinality is seen, counted as a single jump.
pub fn jump_counts_between(fs: &FrameSequence, j: usize) -> Result<JumpCounts> {
    if j == 0 || j >= fs.len() {
        return Err(Error::domain(format!("frame index {j} outside 1..={}", fs.m())));
    }
    let (a, b) = (&fs.configs[j - 1], &fs.configs[j]);
    if fs.tracked {
        let before: HashSet<_> = a.ids().iter().collect();
        let after: HashSet<_> = b.ids().iter().collect();
        let births = after.difference(&before).count();
        let deaths = before.difference(&after).count();
        Ok(JumpCounts {
            total: births + deaths,
            births,
            deaths,
        })
    } else {
        let births = usize::from(b.len() > a.len());
        let deaths = usize::from(b.len() < a.len());
        Ok(JumpCounts {
            total: births + deaths,
            births,
            deaths,
        })
    }
}

/// Observation points of an estimator, with the quadrature weight of each
/// point in the occupation integral and the jumps it carries.
///
/// For a trajectory the points are the segment nodes (start, path samples,
/// pre-jump end) with trapezoid weights, and the end node of each segment
/// carries the jump closing it. For frames the points are `X_{t_j}`,
/// `j < m`, weighted by `t_{j+1} - t_j` and carrying the counts `D_{j+1}`.
/// Points are grouped by segment (or frame), the unit removed by
/// cross-validation.
#[derive(Debug, Clone)]
pub struct Design<'a> {
    pub configs: Vec<&'a PointConfig>,
    pub times: Vec<f64>,
    pub group: Vec<usize>,
    pub groups: Vec<Range<usize>>,
    pub weight: Vec<f64>,
    pub births: Vec<f64>,
    pub deaths: Vec<f64>,
}

impl<'a> Design<'a> {
    pub fn continuous(tr: &'a Trajectory) -> Self {
        let cap = 2 * tr.n_segments() + tr.path_sample_count();
        let mut d = Design::with_capacity(cap, tr.n_segments());
        for j in 0..tr.n_segments() {
            let nodes = tr.segment_nodes(j);
            let start = d.configs.len();
            let k = nodes.len();
            for (i, (t, x)) in nodes.iter().enumerate() {
                let left = if i > 0 { nodes[i - 1].0 } else { *t };
                let right = if i + 1 < k { nodes[i + 1].0 } else { *t };
                d.configs.push(x);
                d.times.push(*t);
                d.group.push(j);
                d.weight.push(0.5 * (right - left));
                let (b, dd) = match (i + 1 == k, tr.jumps.get(j)) {
                    (true, Some(e)) if e.kind == JumpKind::Birth => (1.0, 0.0),
                    (true, Some(_)) => (0.0, 1.0),
                    _ => (0.0, 0.0),
                };
                d.births.push(b);
                d.deaths.push(dd);
            }
            d.groups.push(start..d.configs.len());
        }
        d
    }

    pub fn discrete(fs: &'a FrameSequence) -> Result<Self> {
        if fs.m() < 1 {
            return Err(Error::domain("discrete estimation needs at least two frames"));
        }
        if !fs.tracked {
            log::warn!("frames carry no tracks: jump counts fall back to cardinality changes");
        }
        let mut d = Design::with_capacity(fs.m(), fs.m());
        for j in 0..fs.m() {
            let c = jump_counts_between(fs, j + 1)?;
            d.configs.push(&fs.configs[j]);
            d.times.push(fs.times[j]);
            d.group.push(j);
            d.groups.push(j..j + 1);
            d.weight.push(fs.dt(j));
            d.births.push(c.births as f64);
            d.deaths.push(c.deaths as f64);
        }
        Ok(d)
    }

    fn with_capacity(n: usize, g: usize) -> Self {
        Design {
            configs: Vec::with_capacity(n),
            times: Vec::with_capacity(n),
            group: Vec::with_capacity(n),
            groups: Vec::with_capacity(g),
            weight: Vec::with_capacity(n),
            births: Vec::with_capacity(n),
            deaths: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Jumps carried by point `i` that count towards `target`.
    #[inline]
    pub fn count(&self, i: usize, target: Target) -> f64 {
        match target {
            Target::Alpha => self.births[i] + self.deaths[i],
            Target::Beta => self.births[i],
            Target::Delta => self.deaths[i],
        }
    }

    /// Indices of the points carrying at least one jump.
    pub fn jump_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.births[i] + self.deaths[i] > 0.0).collect()
    }

    /// Per-point summaries of the strategy.
    pub fn prepare(&self, s: &dyn DistanceStrategy) -> Result<Vec<Vec<f64>>> {
        self.configs.par_iter().map(|x| s.prepare(x)).collect()
    }
}

/// `(numerator, denominator)` of the estimator at a query whose kernel
/// values against every design point are `kv`. The denominator is summed
/// group by group.
pub(crate) fn ratio_parts(d: &Design, kv: &[f64], target: Target) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for r in &d.groups {
        let mut g = 0.0;
        for i in r.clone() {
            g += d.weight[i] * kv[i];
            let c = d.count(i, target);
            if c != 0.0 {
                num += c * kv[i];
            }
        }
        den += g;
    }
    (num, den)
}

/// Kernel values of `q` against every design point.
pub(crate) fn kernel_row(
    d: &Design,
    feats: &[Vec<f64>],
    ks: &KernelSpec,
    q: &PointConfig,
    fq: &[f64],
) -> Result<Vec<f64>> {
    let row = ks.strategy.proximity_row(q, fq, &d.configs, feats)?;
    Ok(row.into_iter().map(|p| ks.value(p)).collect())
}

/// Encoded proximities between design points: either the full symmetric
/// matrix or a stored subset of its rows.
#[derive(Debug, Clone)]
pub struct ProximityMatrix {
    n: usize,
    slot: Vec<usize>,
    data: Vec<f64>,
}

const ABSENT: usize = usize::MAX;

impl ProximityMatrix {
    pub fn build(d: &Design, s: &dyn DistanceStrategy, feats: &[Vec<f64>]) -> Result<Self> {
        let n = d.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = s.proximity_row(d.configs[i], &feats[i], &d.configs[i..], &feats[i..])?;
                Ok(row.into_iter().map(Proximity::encode).collect::<Vec<f64>>())
            })
            .collect::<Result<_>>()?;
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                data[i * n + i + k] = v;
                data[(i + k) * n + i] = v;
            }
        }
        Ok(ProximityMatrix {
            n,
            slot: (0..n).collect(),
            data,
        })
    }

    /// Stores only the rows of `points`.
    pub fn build_rows(d: &Design, s: &dyn DistanceStrategy, feats: &[Vec<f64>], points: &[usize]) -> Result<Self> {
        let n = d.len();
        let mut pts = points.to_vec();
        pts.sort_unstable();
        pts.dedup();
        if let Some(&bad) = pts.iter().find(|&&i| i >= n) {
            return Err(Error::domain(format!("design point {bad} out of range (n = {n})")));
        }
        let rows: Vec<Vec<f64>> = pts
            .par_iter()
            .map(|&i| {
                let row = s.proximity_row(d.configs[i], &feats[i], &d.configs, feats)?;
                Ok(row.into_iter().map(Proximity::encode).collect::<Vec<f64>>())
            })
            .collect::<Result<_>>()?;
        let mut slot = vec![ABSENT; n];
        for (k, &i) in pts.iter().enumerate() {
            slot[i] = k;
        }
        Ok(ProximityMatrix {
            n,
            slot,
            data: rows.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn has_row(&self, i: usize) -> bool {
        self.slot.get(i).is_some_and(|&k| k != ABSENT)
    }

    /// Panics when row `i` is not stored.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.slot[i];
        assert!(k != ABSENT, "row {i} is not stored");
        &self.data[k * self.n..(k + 1) * self.n]
    }
}
