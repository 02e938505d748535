//! Kernel estimators of the birth, death and total jump intensities.

mod design;
mod kernel;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointConfig;
use crate::simulate::{FrameSequence, Trajectory};

pub use design::{jump_counts_between, Design, JumpCounts, ProximityMatrix};
pub(crate) use design::{kernel_row, ratio_parts};
pub use kernel::{
    eval_kernel, feature_cardinality, feature_maxarea, feature_strategy, strategy_by_name,
    strategy_names, CardinalityFeature, CardinalityIndicator, CardinalitySmooth, DistanceStrategy,
    FeatureMap, FeatureMapRef, FeatureStrategy, HausdorffStrategy, KernelSpec, MatchingStrategy,
    MaxAreaFeature, Profile, Proximity, StrategyRef,
};

/// Which intensity is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Alpha,
    Beta,
    Delta,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Alpha => "alpha",
            Target::Beta => "beta",
            Target::Delta => "delta",
        })
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Target::Alpha),
            "beta" => Ok(Target::Beta),
            "delta" => Ok(Target::Delta),
            _ => Err(Error::UnknownName {
                kind: "target",
                name: s.into(),
                available: "alpha, beta, delta".into(),
            }),
        }
    }
}

/// Estimated intensity at a list of query configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityEstimate {
    pub target: Target,
    pub strategy: String,
    pub bandwidth: f64,
    pub values: Vec<f64>,
    /// Kernel-weighted occupation time of each query.
    pub occupation: Vec<f64>,
    /// Queries where the estimator is 0/0 (value set to 0).
    pub undefined: Vec<bool>,
}

impl IntensityEstimate {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates the estimator defined by `d` at every query.
pub fn estimate_with_design(d: &Design, ks: &KernelSpec, queries: &[PointConfig], target: Target) -> Result<IntensityEstimate> {
    let feats = d.prepare(ks.strategy.as_ref())?;
    let parts: Vec<(f64, f64)> = queries
        .par_iter()
        .map(|q| {
            let fq = ks.strategy.prepare(q)?;
            let kv = kernel_row(d, &feats, ks, q, &fq)?;
            Ok(ratio_parts(d, &kv, target))
        })
        .collect::<Result<_>>()?;
    Ok(finish(parts, ks, target))
}

/// Same as [`estimate_with_design`] for queries that are design points.
pub fn estimate_at_design_points(
    d: &Design,
    ks: &KernelSpec,
    m: &ProximityMatrix,
    points: &[usize],
    target: Target,
) -> IntensityEstimate {
    let parts = points
        .iter()
        .map(|&i| {
            let kv: Vec<f64> = m.row(i).iter().map(|v| ks.value_encoded(*v)).collect();
            ratio_parts(d, &kv, target)
        })
        .collect();
    finish(parts, ks, target)
}

fn finish(parts: Vec<(f64, f64)>, ks: &KernelSpec, target: Target) -> IntensityEstimate {
    let mut values = Vec::with_capacity(parts.len());
    let mut occupation = Vec::with_capacity(parts.len());
    let mut undefined = Vec::with_capacity(parts.len());
    for (num, den) in parts {
        let flag = den == 0.0;
        values.push(if flag { 0.0 } else { num / den });
        occupation.push(den);
        undefined.push(flag);
    }
    IntensityEstimate {
        target,
        strategy: ks.strategy.name().to_string(),
        bandwidth: ks.bandwidth,
        values,
        occupation,
        undefined,
    }
}

/// Continuous-time estimator: kernel-weighted jump count over kernel-weighted occupation time.
pub fn estimate_continuous(tr: &Trajectory, ks: &KernelSpec, queries: &[PointConfig], target: Target) -> Result<IntensityEstimate> {
    estimate_with_design(&Design::continuous(tr), ks, queries, target)
}

/// Discrete-time estimator from frames.
pub fn estimate_discrete(fs: &FrameSequence, ks: &KernelSpec, queries: &[PointConfig], target: Target) -> Result<IntensityEstimate> {
    estimate_with_design(&Design::discrete(fs)?, ks, queries, target)
}

/// `int_0^T k_T(x, X_s) ds` by the trapezoid rule over the stored nodes.
pub fn occupation_time(tr: &Trajectory, ks: &KernelSpec, x: &PointConfig) -> Result<f64> {
    let e = estimate_continuous(tr, ks, std::slice::from_ref(x), Target::Alpha)?;
    Ok(e.occupation[0])
}
