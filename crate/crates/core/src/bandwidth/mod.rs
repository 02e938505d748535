//! Bandwidth selection by partial-likelihood cross-validation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{
    estimate_at_design_points, Design, DistanceStrategy, IntensityEstimate, KernelSpec,
    Proximity, ProximityMatrix, Target,
};
use crate::simulate::{FrameSequence, Trajectory};
use crate::stats::median;

/// Above this many design points proximities are recomputed row by row instead of stored.
pub const DENSE_LIMIT: usize = 4096;

/// Most summary classes for which cross-validation runs class by class.
pub const CLASS_LIMIT: usize = 1024;

/// Jump configurations used to set the scale of the default grid.
pub const SCALE_SAMPLE: usize = 200;

/// Bandwidth candidates: a log grid around the data scale, or explicit values.
///
/// Parses from `auto`, `auto:N` (N points per decade) or a comma-separated
/// list of bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub enum GridSpec {
    Auto { points_per_decade: usize },
    Values(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto { points_per_decade: 25 }
    }
}

impl FromStr for GridSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("grid `{s}` is neither `auto`, `auto:N` nor a list of bandwidths"));
        if s == "auto" {
            return Ok(GridSpec::default());
        }
        if let Some(n) = s.strip_prefix("auto:") {
            let points_per_decade: usize = n.trim().parse().map_err(|_| bad())?;
            return GridSpec::Auto { points_per_decade }.checked();
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        GridSpec::Values(values).checked()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Auto { points_per_decade } => write!(f, "auto:{points_per_decade}"),
            GridSpec::Values(v) => {
                let parts: Vec<String> = v.iter().map(|h| h.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl GridSpec {
    fn checked(self) -> Result<Self> {
        match &self {
            GridSpec::Auto { points_per_decade: 0 } => Err(Error::config("an automatic grid needs at least one point per decade")),
            GridSpec::Values(v) if v.is_empty() || v.iter().any(|h| !(*h > 0.0 && h.is_finite())) => {
                Err(Error::config("grid bandwidths must be positive and finite"))
            }
            _ => Ok(self),
        }
    }

    /// Candidate bandwidths for the data held by `ws`.
    pub fn resolve(&self, ws: &CvWorkspace) -> Result<Vec<f64>> {
        match self {
            GridSpec::Auto { points_per_decade } => Ok(log_grid(ws.distance_scale()?, *points_per_decade)),
            GridSpec::Values(v) => Ok(v.clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GridRepr {
    Text(String),
    Values(Vec<f64>),
}

impl TryFrom<GridRepr> for GridSpec {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        match r {
            GridRepr::Text(s) => s.parse(),
            GridRepr::Values(v) => GridSpec::Values(v).checked(),
        }
    }
}

impl From<GridSpec> for GridRepr {
    fn from(g: GridSpec) -> Self {
        match g {
            GridSpec::Values(v) => GridRepr::Values(v),
            auto => GridRepr::Text(auto.to_string()),
        }
    }
}

/// Observations to cross-validate on.
#[derive(Debug, Clone, Copy)]
pub enum CvData<'a> {
    Continuous(&'a Trajectory),
    Discrete(&'a FrameSequence),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub target: Target,
    pub strategy: String,
    /// Candidates in increasing order.
    pub grid: Vec<f64>,
    /// Objective per candidate, `-inf` for excluded candidates.
    pub objective: Vec<f64>,
    pub best_index: usize,
    pub bandwidth: f64,
    /// More than one candidate attains the maximum.
    pub ties: bool,
    pub invalid: usize,
}

/// `points_per_decade` log-spaced candidates over `[1e-2, 1e2] * scale`.
pub fn log_grid(scale: f64, points_per_decade: usize) -> Vec<f64> {
    let k = 4 * points_per_decade as i64;
    (0..=k)
        .map(|i| scale * 10f64.powf(-2.0 + i as f64 / points_per_decade as f64))
        .collect()
}

/// `k` group indices evenly spaced over `0..n_groups`, both ends included.
pub fn evenly_spaced_groups(n_groups: usize, k: usize) -> Vec<usize> {
    if n_groups == 0 || k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![0];
    }
    let mut g: Vec<usize> = (0..k)
        .map(|i| (i as f64 * (n_groups - 1) as f64 / (k - 1) as f64).round() as usize)
        .collect();
    g.dedup();
    g
}

/// Design points, strategy summaries and, when affordable, the stored proximity matrix.
///
/// A workspace built with [`CvWorkspace::sampled`] evaluates the objective
/// only over the points of a subset of groups. Each term still uses every
/// design point, and the sum is rescaled by the inverse sampling fraction.
pub struct CvWorkspace<'a> {
    pub design: Design<'a>,
    strategy: crate::estimate::StrategyRef,
    feats: Vec<Vec<f64>>,
    matrix: Option<ProximityMatrix>,
    sampled: Option<Vec<usize>>,
    classes: Option<Classes>,
}

/// Design points grouped by identical strategy summaries. When the strategy
/// only looks at summaries, points of one class have identical kernel rows.
struct Classes {
    of: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// Encoded proximities between class representatives, row-major.
    prox: Vec<f64>,
}

impl Classes {
    fn build(d: &Design, s: &dyn DistanceStrategy, feats: &[Vec<f64>]) -> Result<Option<Self>> {
        if !s.summary_determined() {
            return Ok(None);
        }
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut of = Vec::with_capacity(d.len());
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, f) in feats.iter().enumerate() {
            let key: Vec<u64> = f.iter().map(|v| v.to_bits()).collect();
            let next = members.len();
            let c = *index.entry(key).or_insert(next);
            if c == next {
                members.push(Vec::new());
            }
            members[c].push(i);
            of.push(c);
        }
        let k = members.len();
        if k > CLASS_LIMIT || 2 * k > d.len() {
            return Ok(None);
        }
        let reps: Vec<usize> = members.iter().map(|m| m[0]).collect();
        let mut prox = Vec::with_capacity(k * k);
        for &a in &reps {
            for &b in &reps {
                prox.push(s.proximity(d.configs[a], &feats[a], d.configs[b], &feats[b])?.encode());
            }
        }
        Ok(Some(Classes { of, members, prox }))
    }
}

impl<'a> CvWorkspace<'a> {
    pub fn new(design: Design<'a>, strategy: crate::estimate::StrategyRef) -> Result<Self> {
        let feats = design.prepare(strategy.as_ref())?;
        let classes = Classes::build(&design, strategy.as_ref(), &feats)?;
        let matrix = if design.len() <= DENSE_LIMIT {
            Some(ProximityMatrix::build(&design, strategy.as_ref(), &feats)?)
        } else {
            None
        };
        Ok(CvWorkspace {
            design,
            strategy,
            feats,
            matrix,
            sampled: None,
            classes,
        })
    }

    /// Workspace whose objective sums over the points of `groups` only.
    pub fn sampled(design: Design<'a>, strategy: crate::estimate::StrategyRef, groups: &[usize]) -> Result<Self> {
        let mut groups = groups.to_vec();
        groups.sort_unstable();
        groups.dedup();
        if groups.is_empty() {
            return Err(Error::domain("sampled cross-validation needs at least one group"));
        }
        if let Some(&g) = groups.iter().find(|&&g| g >= design.groups.len()) {
            return Err(Error::domain(format!(
                "group {g} out of range ({} groups)",
                design.groups.len()
            )));
        }
        let points: Vec<usize> = groups.iter().flat_map(|&g| design.groups[g].clone()).collect();
        let feats = design.prepare(strategy.as_ref())?;
        let classes = Classes::build(&design, strategy.as_ref(), &feats)?;
        let matrix = ProximityMatrix::build_rows(&design, strategy.as_ref(), &feats, &points)?;
        Ok(CvWorkspace {
            design,
            strategy,
            feats,
            matrix: Some(matrix),
            sampled: Some(points),
            classes,
        })
    }

    /// Sampled workspace over `n_groups` evenly spaced groups, or the full
    /// workspace when the design has no more groups than that.
    pub fn for_data_sampled(
        data: CvData<'a>,
        strategy: crate::estimate::StrategyRef,
        n_groups: usize,
    ) -> Result<Self> {
        let full = Self::design_for(data)?;
        if full.groups.len() <= n_groups {
            return Self::new(full, strategy);
        }
        let groups = evenly_spaced_groups(full.groups.len(), n_groups);
        Self::sampled(full, strategy, &groups)
    }

    /// Whether the objective runs over a subset of groups.
    pub fn is_sampled(&self) -> bool {
        self.sampled.is_some()
    }

    fn eval_points(&self) -> Vec<usize> {
        match &self.sampled {
            Some(p) => p.clone(),
            None => (0..self.design.len()).collect(),
        }
    }

    fn sample_factor(&self) -> f64 {
        match &self.sampled {
            None => 1.0,
            Some(p) => {
                let d = &self.design;
                let mut seen: Vec<usize> = p.iter().map(|&i| d.group[i]).collect();
                seen.dedup();
                d.groups.len() as f64 / seen.len() as f64
            }
        }
    }

    pub fn for_data(data: CvData<'a>, strategy: crate::estimate::StrategyRef) -> Result<Self> {
        Self::new(Self::design_for(data)?, strategy)
    }

    fn design_for(data: CvData<'a>) -> Result<Design<'a>> {
        Ok(match data {
            CvData::Continuous(tr) => {
                if tr.n_jumps() < 2 {
                    return Err(Error::domain("cross-validation needs at least two jumps"));
                }
                Design::continuous(tr)
            }
            CvData::Discrete(fs) => {
                if fs.m() < 2 {
                    return Err(Error::domain("cross-validation needs at least three frames"));
                }
                Design::discrete(fs)?
            }
        })
    }

    pub fn strategy(&self) -> &dyn DistanceStrategy {
        self.strategy.as_ref()
    }

    fn row(&self, i: usize, buf: &mut Vec<f64>) -> Result<()> {
        if let Some(m) = self.matrix.as_ref().filter(|m| m.has_row(i)) {
            buf.clear();
            buf.extend_from_slice(m.row(i));
            return Ok(());
        }
        let d = &self.design;
        let s = self.strategy.as_ref();
        buf.clear();
        let row = s.proximity_row(d.configs[i], &self.feats[i], &d.configs, &self.feats)?;
        buf.extend(row.into_iter().map(Proximity::encode));
        Ok(())
    }

    /// Median pairwise distance among (at most [`SCALE_SAMPLE`] evenly spaced) jump configurations.
    ///
    /// A sampled workspace draws these configurations from its stored rows.
    pub fn distance_scale(&self) -> Result<f64> {
        let mut jumps = self.design.jump_points();
        if let Some(m) = &self.matrix {
            if self.sampled.is_some() {
                jumps.retain(|&i| m.has_row(i));
            }
        }
        let step = (jumps.len() as f64 / SCALE_SAMPLE as f64).max(1.0);
        let mut picked: Vec<usize> = (0..)
            .map(|k| (k as f64 * step) as usize)
            .take_while(|&k| k < jumps.len())
            .map(|k| jumps[k])
            .collect();
        picked.dedup();
        let d = &self.design;
        let s = self.strategy.as_ref();
        let mut dist = Vec::new();
        for (a, &i) in picked.iter().enumerate() {
            for &j in &picked[a + 1..] {
                let p = match self.matrix.as_ref().filter(|m| m.has_row(i)) {
                    Some(m) => Proximity::decode(m.row(i)[j]),
                    None => s.proximity(d.configs[i], &self.feats[i], d.configs[j], &self.feats[j])?,
                };
                if let Proximity::Distance(v) = p {
                    dist.push(v);
                }
            }
        }
        let med = median(&dist);
        if med > 0.0 {
            return Ok(med);
        }
        let positive: Vec<f64> = dist.into_iter().filter(|v| *v > 0.0).collect();
        Ok(if positive.is_empty() {
            1.0
        } else {
            positive.iter().sum::<f64>() / positive.len() as f64
        })
    }

    /// Default candidate grid: 25 points per decade around [`Self::distance_scale`].
    pub fn default_grid(&self) -> Result<Vec<f64>> {
        Ok(log_grid(self.distance_scale()?, 25))
    }

    /// Cross-validation objective at every bandwidth of `grid` (kernel `ks`, its bandwidth ignored).
    pub fn objectives(&self, ks: &KernelSpec, grid: &[f64], target: Target) -> Result<Vec<f64>> {
        let obj = match &self.classes {
            Some(c) => self.class_objectives(c, ks, grid, target),
            None => self.point_objectives(ks, grid, target)?,
        };
        let factor = self.sample_factor();
        Ok(obj
            .into_iter()
            .map(|v| if v.is_nan() { f64::NEG_INFINITY } else { v * factor })
            .collect())
    }

    fn point_objectives(&self, ks: &KernelSpec, grid: &[f64], target: Target) -> Result<Vec<f64>> {
        let d = &self.design;
        let specs: Vec<KernelSpec> = grid.iter().map(|&h| ks.clone().with_bandwidth(h)).collect();
        let per_row: Vec<Vec<(f64, f64)>> = self
            .eval_points()
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(prox, kv), i| {
                    self.row(i, prox)?;
                    let own = d.group[i];
                    let lam = d.count(i, target);
                    let mut out = Vec::with_capacity(specs.len());
                    for ks in &specs {
                        kv.clear();
                        kv.extend(prox.iter().map(|v| ks.value_encoded(*v)));
                        let a = leave_group_out(d, kv, own, target);
                        let log_term = if lam > 0.0 { lam * a.ln() } else { 0.0 };
                        out.push((log_term, d.weight[i] * a));
                    }
                    Ok(out)
                },
            )
            .collect::<Result<_>>()?;
        let mut obj = vec![0.0; grid.len()];
        for row in &per_row {
            for (o, (l, r)) in obj.iter_mut().zip(row) {
                *o += l - r;
            }
        }
        Ok(obj)
    }

    /// The objective computed class by class. Leave-out sums over a class
    /// are a prefix plus a suffix of its members, so removing a group never
    /// subtracts.
    fn class_objectives(&self, cl: &Classes, ks: &KernelSpec, grid: &[f64], target: Target) -> Vec<f64> {
        let d = &self.design;
        let k = cl.members.len();
        let cum = |v: &dyn Fn(usize) -> f64, m: &[usize]| {
            let mut pre = vec![0.0; m.len() + 1];
            let mut suf = vec![0.0; m.len() + 1];
            for (j, &i) in m.iter().enumerate() {
                pre[j + 1] = pre[j] + v(i);
            }
            for (j, &i) in m.iter().enumerate().rev() {
                suf[j] = suf[j + 1] + v(i);
            }
            (pre, suf)
        };
        let counts: Vec<_> = cl.members.iter().map(|m| cum(&|i| d.count(i, target), m)).collect();
        let weights: Vec<_> = cl.members.iter().map(|m| cum(&|i| d.weight[i], m)).collect();
        let tot_n: Vec<f64> = counts.iter().map(|(p, _)| p[p.len() - 1]).collect();
        let tot_w: Vec<f64> = weights.iter().map(|(p, _)| p[p.len() - 1]).collect();

        // Per evaluated group: its points aggregated by class, and the
        // leave-out totals of the classes it touches.
        let mut groups: Vec<usize> = self.eval_points().iter().map(|&i| d.group[i]).collect();
        groups.dedup();
        struct Term {
            class: usize,
            lam: f64,
            weight: f64,
        }
        // (class, leave-out count, leave-out weight) of each touched class.
        type Own = Vec<(usize, f64, f64)>;
        let plan: Vec<(Vec<Term>, Own)> = groups
            .iter()
            .map(|&g| {
                let r = d.groups[g].clone();
                let mut terms: Vec<Term> = Vec::new();
                for i in r.clone() {
                    let c = cl.of[i];
                    let t = match terms.iter_mut().find(|t| t.class == c) {
                        Some(t) => t,
                        None => {
                            terms.push(Term {
                                class: c,
                                lam: 0.0,
                                weight: 0.0,
                            });
                            terms.last_mut().unwrap()
                        }
                    };
                    t.lam += d.count(i, target);
                    t.weight += d.weight[i];
                }
                let own = terms
                    .iter()
                    .map(|t| {
                        let m = &cl.members[t.class];
                        let lo = m.partition_point(|&i| i < r.start);
                        let hi = m.partition_point(|&i| i < r.end);
                        let (cp, cs) = &counts[t.class];
                        let (wp, ws) = &weights[t.class];
                        (t.class, cp[lo] + cs[hi], wp[lo] + ws[hi])
                    })
                    .collect();
                (terms, own)
            })
            .collect();

        grid.par_iter()
            .map(|&h| {
                let ks = ks.clone().with_bandwidth(h);
                let kv: Vec<f64> = cl.prox.iter().map(|v| ks.value_encoded(*v)).collect();
                let (mut n_out, mut w_out) = (tot_n.clone(), tot_w.clone());
                let mut obj = 0.0;
                for (terms, own) in &plan {
                    for &(c, n, w) in own {
                        n_out[c] = n;
                        w_out[c] = w;
                    }
                    for t in terms {
                        let row = &kv[t.class * k..(t.class + 1) * k];
                        let (mut num, mut den) = (0.0, 0.0);
                        for c in 0..k {
                            num += row[c] * n_out[c];
                            den += row[c] * w_out[c];
                        }
                        let a = if den == 0.0 { 0.0 } else { num / den };
                        let log_term = if t.lam > 0.0 { t.lam * a.ln() } else { 0.0 };
                        obj += log_term - t.weight * a;
                    }
                    for &(c, _, _) in own {
                        n_out[c] = tot_n[c];
                        w_out[c] = tot_w[c];
                    }
                }
                obj
            })
            .collect()
    }

    /// Estimates at design points, reusing stored proximities when available.
    pub fn estimate_points(&self, ks: &KernelSpec, points: &[usize], target: Target) -> Result<IntensityEstimate> {
        if let Some(m) = &self.matrix {
            if points.iter().all(|&i| m.has_row(i)) {
                return Ok(estimate_at_design_points(&self.design, ks, m, points, target));
            }
        }
        let queries: Vec<_> = points.iter().map(|&i| self.design.configs[i].clone()).collect();
        crate::estimate::estimate_with_design(&self.design, ks, &queries, target)
    }

    /// Grid search; ties go to the smallest bandwidth.
    pub fn select(&self, ks: &KernelSpec, grid: Option<&[f64]>, target: Target) -> Result<CvResult> {
        let mut grid = match grid {
            Some(g) => g.to_vec(),
            None => self.default_grid()?,
        };
        if grid.is_empty() || grid.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Selection("the grid must be a nonempty set of positive bandwidths".into()));
        }
        grid.sort_by(|a, b| a.total_cmp(b));
        grid.dedup();
        let objective = self.objectives(ks, &grid, target)?;
        let invalid = objective.iter().filter(|v| **v == f64::NEG_INFINITY).count();
        let best = objective.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            return Err(Error::Selection(format!(
                "all {} candidates in [{:.4e}, {:.4e}] give a zero leave-out intensity at some jump",
                grid.len(),
                grid[0],
                grid[grid.len() - 1]
            )));
        }
        let best_index = objective.iter().position(|v| *v == best).unwrap_or(0);
        let ties = objective.iter().filter(|v| **v == best).count() > 1;
        Ok(CvResult {
            target,
            strategy: self.strategy.name().to_string(),
            bandwidth: grid[best_index],
            grid,
            objective,
            best_index,
            ties,
            invalid,
        })
    }
}

/// Estimator at a design point with every point of group `own` discarded.
fn leave_group_out(d: &Design, kv: &[f64], own: usize, target: Target) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, r) in d.groups.iter().enumerate() {
        if g == own {
            continue;
        }
        let mut s = 0.0;
        for i in r.clone() {
            s += d.weight[i] * kv[i];
            let c = d.count(i, target);
            if c != 0.0 {
                num += c * kv[i];
            }
        }
        den += s;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Continuous-time objective at the bandwidth of `ks`.
pub fn cv_objective_continuous(tr: &Trajectory, ks: &KernelSpec, target: Target) -> Result<f64> {
    let w = CvWorkspace::for_data(CvData::Continuous(tr), ks.strategy.clone())?;
    Ok(w.objectives(ks, &[ks.bandwidth], target)?[0])
}

/// Discrete-time objective at the bandwidth of `ks`.
pub fn cv_objective_discrete(fs: &FrameSequence, ks: &KernelSpec, target: Target) -> Result<f64> {
    let w = CvWorkspace::for_data(CvData::Discrete(fs), ks.strategy.clone())?;
    Ok(w.objectives(ks, &[ks.bandwidth], target)?[0])
}

/// Chooses the bandwidth of `ks` maximising the objective over `grid`
/// (the default grid when `None`).
pub fn select_bandwidth(data: CvData, ks: &KernelSpec, grid: Option<&[f64]>, target: Target) -> Result<CvResult> {
    CvWorkspace::for_data(data, ks.strategy.clone())?.select(ks, grid, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{CardinalitySmooth, Profile};
    use crate::geometry::PointConfig;
    use std::sync::Arc;

    fn frames(counts: &[usize]) -> FrameSequence {
        let mut next = 0u64;
        let mut configs = Vec::new();
        let mut cur: Vec<u64> = Vec::new();
        for &n in counts {
            while cur.len() < n {
                cur.push(next);
                next += 1;
            }
            cur.truncate(n);
            let mut x = PointConfig::empty(2);
            for &id in &cur {
                x.push(&[0.01 * id as f64, 0.5], id);
            }
            configs.push(x);
        }
        FrameSequence::new((0..counts.len()).map(|j| j as f64).collect(), configs, true).unwrap()
    }

    #[test]
    fn three_frames_by_hand() {
        // D = [1, 0], dt = [1, 1], constant kernel: leaving frame 0 out gives 0/1, frame 1 gives 1/1.
        let fs = frames(&[1, 2, 2]);
        let ks = KernelSpec::new(Arc::new(CardinalitySmooth), 1.0).unwrap().with_profile(Profile::Constant);
        let v = cv_objective_discrete(&fs, &ks, Target::Alpha).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        // Gaussian kernel with d = |n - n'| = 1 between the two frames.
        let h = 0.7;
        let ks = KernelSpec::new(Arc::new(CardinalitySmooth), h).unwrap();
        let v = cv_objective_discrete(&fs, &ks, Target::Alpha).unwrap();
        // frame 0: a = (0 * k) / (1 * k) = 0 with D = 1 -> -inf
        assert_eq!(v, f64::NEG_INFINITY);
        let fs = frames(&[1, 2, 3]);
        let v = cv_objective_discrete(&fs, &ks, Target::Alpha).unwrap();
        // frame 0 left out: a0 = 1; frame 1 left out: a1 = 1. Objective 2 log 1 - 2.
        assert!((v + 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn all_zero_counts_prefer_zero() {
        let fs = frames(&[2, 2, 2, 2]);
        let ks = KernelSpec::new(Arc::new(CardinalitySmooth), 1.0).unwrap();
        let v = cv_objective_discrete(&fs, &ks, Target::Alpha).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn single_candidate_and_grid_order() {
        let fs = frames(&[1, 2, 1, 2, 3, 2, 3, 3, 2, 1]);
        let ks = KernelSpec::new(Arc::new(CardinalitySmooth), 1.0).unwrap();
        let r = select_bandwidth(CvData::Discrete(&fs), &ks, Some(&[0.8]), Target::Alpha).unwrap();
        assert_eq!(r.bandwidth, 0.8);
        let g = [0.3, 3.0, 1.0, 10.0, 0.5];
        let mut rev = g;
        rev.reverse();
        let a = select_bandwidth(CvData::Discrete(&fs), &ks, Some(&g), Target::Alpha).unwrap();
        let b = select_bandwidth(CvData::Discrete(&fs), &ks, Some(&rev), Target::Alpha).unwrap();
        assert_eq!(a.bandwidth, b.bandwidth);
    }

    #[test]
    fn grid_shape() {
        let g = log_grid(2.0, 25);
        assert_eq!(g.len(), 101);
        assert!((g[0] - 0.02).abs() < 1e-15 && (g[100] - 200.0).abs() < 1e-10);
    }

    #[test]
    fn too_little_data() {
        let fs = frames(&[1, 2]);
        let ks = KernelSpec::new(Arc::new(CardinalitySmooth), 1.0).unwrap();
        assert!(cv_objective_discrete(&fs, &ks, Target::Alpha).is_err());
        assert!(select_bandwidth(CvData::Discrete(&fs), &ks, Some(&[]), Target::Alpha).is_err());
    }

    #[test]
    fn sampling_every_group_reproduces_the_full_objective() {
        let fs = frames(&[1, 2, 1, 2, 3, 2, 3, 3, 2, 1]);
        let st: crate::estimate::StrategyRef = Arc::new(CardinalitySmooth);
        let ks = KernelSpec::new(st.clone(), 1.0).unwrap();
        let grid = [0.3, 1.0, 3.0];
        let full = CvWorkspace::new(Design::discrete(&fs).unwrap(), st.clone()).unwrap();
        let all: Vec<usize> = (0..9).collect();
        let samp = CvWorkspace::sampled(Design::discrete(&fs).unwrap(), st.clone(), &all).unwrap();
        assert!(samp.is_sampled());
        let a = full.objectives(&ks, &grid, Target::Alpha).unwrap();
        let b = samp.objectives(&ks, &grid, Target::Alpha).unwrap();
        assert_eq!(a, b);
        // Two of nine groups, rescaled by 9/2.
        let two = CvWorkspace::sampled(Design::discrete(&fs).unwrap(), st.clone(), &[2, 5]).unwrap();
        let c = two.objectives(&ks, &grid, Target::Alpha).unwrap();
        let per_point = |i: usize, h: f64| {
            let w = CvWorkspace::sampled(Design::discrete(&fs).unwrap(), st.clone(), &[i]).unwrap();
            w.objectives(&ks, &[h], Target::Alpha).unwrap()[0] / 9.0
        };
        for (k, &h) in grid.iter().enumerate() {
            let want = 4.5 * (per_point(2, h) + per_point(5, h));
            assert!((c[k] - want).abs() < 1e-12 * want.abs().max(1.0));
        }
        let est = two.estimate_points(&ks.clone().with_bandwidth(1.0), &[2, 5], Target::Alpha).unwrap();
        let direct = full.estimate_points(&ks.with_bandwidth(1.0), &[2, 5], Target::Alpha).unwrap();
        assert_eq!(est.values, direct.values);
        assert!(CvWorkspace::sampled(Design::discrete(&fs).unwrap(), st, &[9]).is_err());
    }

    #[test]
    fn evenly_spaced_group_indices() {
        assert_eq!(evenly_spaced_groups(10, 4), vec![0, 3, 6, 9]);
        assert_eq!(evenly_spaced_groups(3, 5), vec![0, 1, 2]);
        assert_eq!(evenly_spaced_groups(7, 1), vec![0]);
        assert!(evenly_spaced_groups(0, 3).is_empty());
    }
}
