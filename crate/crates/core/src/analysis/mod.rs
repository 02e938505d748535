//! Replication harness (mean squared error of estimators against a preset's
//! true intensity), scatter tables and cross-correlation of intensity series.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{evenly_spaced_groups, CvData, CvWorkspace, GridSpec};
use crate::error::{Error, Result};
use crate::estimate::{
    estimate_discrete, strategy_by_name, Design, IntensityEstimate, KernelSpec, Target,
};
use crate::geometry::{max_cell_area, max_nn_distance, PointConfig, Window};
use crate::model::{ModelSpec, Preset};
use crate::simulate::{discretize, regular_times, simulate_preset, SimOptions, Trajectory};
use crate::stats::{mean_sd, median};

/// Columns of the continuous-data error table, in display order.
pub const TABLE_STRATEGIES: [&str; 4] = ["hausdorff", "matching", "card-indicator", "card-smooth"];

/// `n` jump indices rounded from an even spacing of `1..=n_jumps`, both ends included.
pub fn query_jump_indices(n_jumps: usize, n: usize) -> Vec<usize> {
    if n_jumps == 0 || n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![1];
    }
    let mut idx: Vec<usize> = (0..n)
        .map(|k| 1 + (k as f64 * (n_jumps - 1) as f64 / (n - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

/// True value of the targeted intensity at `x`.
pub fn true_intensity(m: &ModelSpec, x: &PointConfig, target: Target) -> Result<f64> {
    let (b, d) = m.rates(x)?;
    Ok(match target {
        Target::Alpha => b + d,
        Target::Beta => b,
        Target::Delta => d,
    })
}

/// Squared-error summary of one estimator on one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseEntry {
    pub strategy: String,
    /// Selected bandwidth; `None` for kernels without one.
    pub bandwidth: Option<f64>,
    /// Mean squared error over defined queries (`NaN` when none is defined).
    pub mse: f64,
    /// Standard deviation of the squared errors.
    pub sd: f64,
    /// Queries with zero occupation mass.
    pub na: usize,
    pub n_queries: usize,
}

/// Errors of every strategy for one replication and one observation scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub preset: String,
    pub seed: u64,
    pub horizon: f64,
    /// Number of observation intervals; `None` for the continuous record.
    pub m: Option<usize>,
    pub n_jumps: usize,
    pub target: Target,
    pub entries: Vec<MseEntry>,
}

impl MseReport {
    pub fn entry(&self, strategy: &str) -> Option<&MseEntry> {
        self.entries.iter().find(|e| e.strategy == strategy)
    }
}

/// Mean and standard deviation of squared errors, skipping flagged queries.
pub fn squared_error_summary(values: &[f64], truth: &[f64], undefined: &[bool]) -> (f64, f64, usize) {
    let sq: Vec<f64> = values
        .iter()
        .zip(truth)
        .zip(undefined)
        .filter(|(_, &u)| !u)
        .map(|((v, t), _)| (v - t) * (v - t))
        .collect();
    let na = undefined.iter().filter(|u| **u).count();
    if sq.is_empty() {
        return (f64::NAN, f64::NAN, na);
    }
    let (m, sd) = mean_sd(&sq);
    (m, sd, na)
}

fn entry_from(est: &IntensityEstimate, truth: &[f64], bandwidth: Option<f64>) -> MseEntry {
    let (mse, sd, na) = squared_error_summary(&est.values, truth, &est.undefined);
    MseEntry {
        strategy: est.strategy.clone(),
        bandwidth,
        mse,
        sd,
        na,
        n_queries: est.values.len(),
    }
}

/// Parameters of [`run_mse_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub horizon: f64,
    /// Observation schemes on top of the continuous record (`m` intervals each).
    pub m_values: Vec<usize>,
    /// Strategy registry names.
    pub strategies: Vec<String>,
    pub n_queries: usize,
    pub seeds: Vec<u64>,
    pub target: Target,
    pub sim: SimOptions,
    /// Groups entering the cross-validation sum; `None` uses all of them.
    /// Strategies reading only configuration summaries are cheap to
    /// cross-validate and always use every group.
    pub cv_groups: Option<usize>,
    /// Designs with at most this many groups are cross-validated in full
    /// whatever `cv_groups` says.
    pub cv_full_limit: usize,
    pub grid: GridSpec,
}

impl ExperimentOptions {
    pub fn new(horizon: f64, seeds: Vec<u64>) -> Self {
        ExperimentOptions {
            horizon,
            m_values: Vec::new(),
            strategies: TABLE_STRATEGIES.iter().map(|s| s.to_string()).collect(),
            n_queries: 100,
            seeds,
            target: Target::Alpha,
            sim: SimOptions::default().with_path_dt(None),
            cv_groups: None,
            cv_full_limit: 0,
            grid: GridSpec::default(),
        }
    }
}

/// Simulates the preset once per seed, selects bandwidths by cross-validation
/// and reports estimation errors at configurations `X_{T_j}` regularly
/// sequenced among the jump times. One report per seed for the continuous
/// record, then one per seed and entry of `m_values`.
pub fn run_mse_experiment(preset: &dyn Preset, opts: &ExperimentOptions) -> Result<Vec<MseReport>> {
    if opts.n_queries == 0 {
        return Err(Error::config("n_queries must be at least 1"));
    }
    let model = preset.model();
    for s in &opts.strategies {
        strategy_by_name(s, &model.window)?;
    }
    let per_seed: Vec<Vec<MseReport>> = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            let tr = simulate_preset(preset, opts.horizon, seed, &opts.sim)?;
            replicate(preset, &model, &tr, opts)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<MseReport> = Vec::new();
    let n_schemes = 1 + opts.m_values.len();
    for k in 0..n_schemes {
        out.extend(per_seed.iter().map(|r| r[k].clone()));
    }
    Ok(out)
}

/// All reports for one simulated trajectory.
pub fn replicate(preset: &dyn Preset, model: &ModelSpec, tr: &Trajectory, opts: &ExperimentOptions) -> Result<Vec<MseReport>> {
    let n = tr.n_jumps();
    if n < 2 {
        return Err(Error::domain(format!(
            "seed {} produced {n} jumps; at least two are needed",
            tr.seed
        )));
    }
    let idx = query_jump_indices(n, opts.n_queries);
    let queries: Vec<PointConfig> = idx.iter().map(|&j| tr.segment_start(j).1.clone()).collect();
    let truth = queries
        .iter()
        .map(|x| true_intensity(model, x, opts.target))
        .collect::<Result<Vec<_>>>()?;
    let base = |m: Option<usize>, entries: Vec<MseEntry>| MseReport {
        preset: preset.name().to_string(),
        seed: tr.seed,
        horizon: tr.horizon,
        m,
        n_jumps: n,
        target: opts.target,
        entries,
    };

    let mut reports = Vec::with_capacity(1 + opts.m_values.len());
    let mut entries = Vec::new();
    for name in &opts.strategies {
        let strategy = strategy_by_name(name, &model.window)?;
        let design = Design::continuous(tr);
        // Query X_{T_j} is the first node of segment j.
        let points: Vec<usize> = idx.iter().map(|&j| design.groups[j].start).collect();
        let ws = match opts.cv_groups {
            Some(k) if !strategy.summary_determined() && design.groups.len() > k.max(opts.cv_full_limit) => {
                // Sample the query segments so their rows serve both steps.
                let mut groups = idx.clone();
                if groups.len() > k {
                    groups = evenly_spaced_groups(groups.len(), k).into_iter().map(|g| idx[g]).collect();
                }
                CvWorkspace::sampled(design, strategy.clone(), &groups)?
            }
            _ => CvWorkspace::new(design, strategy.clone())?,
        };
        let (ks, h) = choose_kernel(&ws, strategy, opts)?;
        let est = ws.estimate_points(&ks, &points, opts.target)?;
        entries.push(entry_from(&est, &truth, h));
    }
    reports.push(base(None, entries));

    for &m in &opts.m_values {
        let fs = discretize(tr, &regular_times(tr.horizon, m))?;
        let mut entries = Vec::new();
        for name in &opts.strategies {
            let strategy = strategy_by_name(name, &model.window)?;
            let ws = match opts.cv_groups {
                Some(k) if !strategy.summary_determined() && m > k.max(opts.cv_full_limit) => CvWorkspace::for_data_sampled(CvData::Discrete(&fs), strategy.clone(), k)?,
                _ => CvWorkspace::for_data(CvData::Discrete(&fs), strategy.clone())?,
            };
            let (ks, h) = choose_kernel(&ws, strategy, opts)?;
            let est = estimate_discrete(&fs, &ks, &queries, opts.target)?;
            entries.push(entry_from(&est, &truth, h));
        }
        reports.push(base(Some(m), entries));
    }
    Ok(reports)
}

fn choose_kernel(
    ws: &CvWorkspace,
    strategy: crate::estimate::StrategyRef,
    opts: &ExperimentOptions,
) -> Result<(KernelSpec, Option<f64>)> {
    if !strategy.uses_bandwidth() {
        return Ok((KernelSpec::new(strategy, 1.0)?, None));
    }
    let ks = KernelSpec::new(strategy, 1.0)?;
    let grid = opts.grid.resolve(ws)?;
    let r = ws.select(&ks, Some(&grid), opts.target)?;
    log::debug!("{}: h = {:.4e} (candidate {} of {})", r.strategy, r.bandwidth, r.best_index, r.grid.len());
    Ok((ks.with_bandwidth(r.bandwidth), Some(r.bandwidth)))
}

/// Summary of one strategy across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseSummary {
    pub m: Option<usize>,
    pub strategy: String,
    pub median: f64,
    pub mean: f64,
    pub sd: f64,
    /// Replications with a defined MSE.
    pub replications: usize,
    pub na_total: usize,
}

/// Aggregates reports by observation scheme and strategy.
pub fn summarize(reports: &[MseReport]) -> Vec<MseSummary> {
    let mut keys: Vec<(Option<usize>, String)> = Vec::new();
    for r in reports {
        for e in &r.entries {
            let k = (r.m, e.strategy.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    keys.into_iter()
        .map(|(m, strategy)| {
            let es: Vec<&MseEntry> = reports
                .iter()
                .filter(|r| r.m == m)
                .filter_map(|r| r.entry(&strategy))
                .collect();
            let vals: Vec<f64> = es.iter().map(|e| e.mse).filter(|v| !v.is_nan()).collect();
            let (mean, sd) = if vals.is_empty() { (f64::NAN, f64::NAN) } else { mean_sd(&vals) };
            MseSummary {
                m,
                strategy,
                median: median(&vals),
                mean,
                sd,
                replications: vals.len(),
                na_total: es.iter().map(|e| e.na).sum(),
            }
        })
        .collect()
}

/// Abscissa of a scatter table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    Cardinality,
    Maxarea,
    MaxNn,
    Time,
}

impl fmt::Display for Abscissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Abscissa::Cardinality => "cardinality",
            Abscissa::Maxarea => "maxarea",
            Abscissa::MaxNn => "max_nn",
            Abscissa::Time => "time",
        })
    }
}

impl FromStr for Abscissa {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cardinality" => Ok(Abscissa::Cardinality),
            "maxarea" => Ok(Abscissa::Maxarea),
            "max_nn" => Ok(Abscissa::MaxNn),
            "time" => Ok(Abscissa::Time),
            _ => Err(Error::UnknownName {
                kind: "abscissa".into(),
                name: s.into(),
                available: "cardinality, maxarea, max_nn, time".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub query: usize,
    pub abscissa: f64,
    pub estimate: f64,
    pub truth: Option<f64>,
}

/// Inputs of [`scatter_export`] besides the estimate.
#[derive(Debug, Clone, Copy)]
pub struct ScatterInput<'a> {
    pub queries: &'a [PointConfig],
    /// Query times, required for the time abscissa.
    pub times: Option<&'a [f64]>,
    pub window: &'a Window,
    pub truth: Option<&'a [f64]>,
}

/// Per-query rows for plotting; flagged queries are left out.
pub fn scatter_export(est: &IntensityEstimate, input: ScatterInput<'_>, against: Abscissa) -> Result<Vec<ScatterRow>> {
    let n = est.values.len();
    if input.queries.len() != n {
        return Err(Error::domain(format!(
            "{} queries for an estimate of length {n}",
            input.queries.len()
        )));
    }
    if let Some(t) = input.truth {
        if t.len() != n {
            return Err(Error::domain("truth length differs from the estimate"));
        }
    }
    let times = match (against, input.times) {
        (Abscissa::Time, None) => return Err(Error::domain("the time abscissa needs query times")),
        (_, Some(t)) if t.len() != n => return Err(Error::domain("times length differs from the estimate")),
        (_, t) => t,
    };
    (0..n)
        .filter(|&i| !est.undefined[i])
        .map(|i| {
            let x = &input.queries[i];
            let abscissa = match against {
                Abscissa::Cardinality => x.len() as f64,
                Abscissa::Maxarea => max_cell_area(x, input.window)?,
                Abscissa::MaxNn => max_nn_distance(x)?,
                Abscissa::Time => times.map(|t| t[i]).unwrap_or(f64::NAN),
            };
            Ok(ScatterRow {
                query: i,
                abscissa,
                estimate: est.values[i],
                truth: input.truth.map(|t| t[i]),
            })
        })
        .collect()
}

/// Two series observed on the same frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub times: Vec<f64>,
}

impl SeriesPair {
    pub fn new(a: Vec<f64>, b: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.len() != times.len() {
            return Err(Error::domain(format!(
                "series lengths differ: {}, {}, {} times",
                a.len(),
                b.len(),
                times.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::domain("series need at least two frames"));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::domain("series values must be finite"));
        }
        Ok(SeriesPair { a, b, times })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Pearson correlation, `None` when either sample is constant.
fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (u, v) in x.iter().zip(y) {
        let (du, dv) = (u - mx, v - my);
        sxy += du * dv;
        sxx += du * du;
        syy += dv * dv;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Empirical cross-correlation for lags `-max_lag..=max_lag`: at lag `h`,
/// series `a` at frame `j` is paired with series `b` at frame `j + h`.
/// Lags whose overlap is constant in either series give `None`.
pub fn ccf(p: &SeriesPair, max_lag: usize) -> Result<Vec<(i64, Option<f64>)>> {
    let n = p.len();
    if max_lag + 1 >= n {
        return Err(Error::domain(format!(
            "max_lag {max_lag} must be below the series length minus one ({})",
            n - 1
        )));
    }
    let l = max_lag as i64;
    Ok((-l..=l)
        .map(|h| {
            let (a, b) = if h >= 0 {
                let h = h as usize;
                (&p.a[..n - h], &p.b[h..])
            } else {
                let h = (-h) as usize;
                (&p.a[h..], &p.b[..n - h])
            };
            (h, pearson(a, b))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_indices_cover_both_ends() {
        assert_eq!(query_jump_indices(1000, 100).first(), Some(&1));
        assert_eq!(query_jump_indices(1000, 100).last(), Some(&1000));
        assert_eq!(query_jump_indices(1000, 100).len(), 100);
        assert_eq!(query_jump_indices(5, 100), vec![1, 2, 3, 4, 5]);
        assert_eq!(query_jump_indices(7, 1), vec![1]);
        assert!(query_jump_indices(0, 10).is_empty());
    }

    #[test]
    fn truth_gives_zero_error() {
        let truth = [0.5, 2.0, 7.25];
        let (mse, sd, na) = squared_error_summary(&truth, &truth, &[false; 3]);
        assert_eq!((mse, sd, na), (0.0, 0.0, 0));
        let (mse, _, na) = squared_error_summary(&[1.5, 0.0, 7.25], &truth, &[false, true, false]);
        assert_eq!(na, 1);
        assert_eq!(mse, 0.5);
        assert!(squared_error_summary(&[0.0], &[1.0], &[true]).0.is_nan());
    }

    #[test]
    fn ccf_hand_cases() {
        let p = SeriesPair::new(vec![1.0, 2.0, 3.0, 4.0], vec![4.0, 3.0, 2.0, 1.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let c = ccf(&p, 1).unwrap();
        assert_eq!(c[1], (0, Some(-1.0)));
        let p = SeriesPair::new(vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0], vec![0.0; 3]).unwrap();
        assert_eq!(ccf(&p, 0).unwrap(), vec![(0, None)]);
        assert!(ccf(&p, 2).is_err());
        assert!(SeriesPair::new(vec![1.0], vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn abscissa_names_round_trip() {
        for a in [Abscissa::Cardinality, Abscissa::Maxarea, Abscissa::MaxNn, Abscissa::Time] {
            assert_eq!(a.to_string().parse::<Abscissa>().unwrap(), a);
        }
        assert!("area".parse::<Abscissa>().is_err());
    }
}
