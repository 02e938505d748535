use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::PointConfig;
use crate::stats::linear_fit;

/// Observations of the process at increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSequence {
    pub times: Vec<f64>,
    pub configs: Vec<PointConfig>,
    /// Whether point ids identify the same individual across frames.
    pub tracked: bool,
}

impl FrameSequence {
    pub fn new(times: Vec<f64>, configs: Vec<PointConfig>, tracked: bool) -> Result<Self> {
        if times.is_empty() || times.len() != configs.len() {
            return Err(Error::domain("a frame sequence needs one configuration per time and at least one frame"));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!("frame times must increase strictly ({} then {})", w[0], w[1])));
        }
        if tracked {
            let mut last_seen: HashMap<u64, usize> = HashMap::new();
            let mut retired = std::collections::HashSet::new();
            for (j, x) in configs.iter().enumerate() {
                for &id in x.ids() {
                    if retired.contains(&id) {
                        return Err(Error::domain(format!("track {id} reappears at frame {j}")));
                    }
                    last_seen.insert(id, j);
                }
                last_seen.retain(|id, seen| {
                    if *seen < j {
                        retired.insert(*id);
                        false
                    } else {
                        true
                    }
                });
            }
        }
        Ok(FrameSequence { times, configs, tracked })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of intervals `m`.
    pub fn m(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// `t_{j+1} - t_j`.
    pub fn dt(&self, j: usize) -> f64 {
        self.times[j + 1] - self.times[j]
    }
}

/// `m + 1` regularly spaced times from 0 to `horizon`.
pub fn regular_times(horizon: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|j| horizon * j as f64 / m as f64).collect()
}

/// Configuration of the trajectory at time `t`: the latest stored state at or before `t`.
pub fn config_at(tr: &Trajectory, t: f64) -> Result<&PointConfig> {
    if !(0.0..=tr.horizon).contains(&t) {
        return Err(Error::domain(format!("time {t} outside [0, {}]", tr.horizon)));
    }
    let seg = tr.jumps.partition_point(|e| e.time <= t);
    if seg == tr.jumps.len() && t == tr.horizon {
        return Ok(&tr.final_config);
    }
    let samples = &tr.segments[seg];
    let k = samples.partition_point(|p| p.time <= t);
    if k > 0 {
        return Ok(&samples[k - 1].config);
    }
    Ok(tr.segment_start(seg).1)
}

/// Observes `tr` at the given times; point ids act as tracks.
pub fn discretize(tr: &Trajectory, times: &[f64]) -> Result<FrameSequence> {
    let configs = times
        .iter()
        .map(|&t| config_at(tr, t).cloned())
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(times.to_vec(), configs, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub delta: f64,
    pub intervals: usize,
    /// Fraction of intervals containing at least two jumps.
    pub multi_jump_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpScaling {
    pub rows: Vec<ScalingRow>,
    /// Slope of `log fraction` against `log delta` over rows with a positive fraction.
    pub exponent: f64,
}

/// Fraction of grid intervals with two jumps or more, for each spacing in `deltas`.
///
/// Each grid is laid `phases` times with evenly spread offsets in `[0, delta)`,
/// pooling the intervals that fit in `[0, T]`.
pub fn jump_count_scaling(tr: &Trajectory, deltas: &[f64], phases: usize) -> Result<JumpScaling> {
    if deltas.len() < 2 {
        return Err(Error::domain("at least two grid spacings are needed"));
    }
    if phases == 0 || deltas.iter().any(|d| !(*d > 0.0 && *d <= tr.horizon)) {
        return Err(Error::domain("spacings must lie in (0, T] and phases must be positive"));
    }
    let times = tr.jump_times();
    let count = |a: f64, b: f64| times.partition_point(|t| *t <= b) - times.partition_point(|t| *t <= a);
    let mut rows = Vec::new();
    for &delta in deltas {
        let (mut total, mut multi) = (0usize, 0usize);
        for p in 0..phases {
            let offset = delta * p as f64 / phases as f64;
            let n = ((tr.horizon - offset) / delta + 1e-9).floor() as usize;
            for k in 0..n {
                let a = offset + k as f64 * delta;
                total += 1;
                if count(a, a + delta) >= 2 {
                    multi += 1;
                }
            }
        }
        rows.push(ScalingRow {
            delta,
            intervals: total,
            multi_jump_fraction: if total > 0 { multi as f64 / total as f64 } else { 0.0 },
        });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.multi_jump_fraction > 0.0)
        .map(|r| (r.delta.ln(), r.multi_jump_fraction.ln()))
        .unzip();
    let exponent = if lx.len() >= 2 { linear_fit(&lx, &ly).0 } else { f64::NAN };
    Ok(JumpScaling { rows, exponent })
}

#[cfg(test)]
mod tests {
    use super::super::{simulate, simulate_preset, SimOptions};
    use super::*;
    use crate::model::{CardinalityPreset, JumpKind};

    fn small() -> Trajectory {
        let opts = SimOptions::default().with_path_dt(Some(0.1));
        simulate_preset(&CardinalityPreset::default(), 10.0, 1, &opts).unwrap()
    }

    #[test]
    fn frames_at_jump_times_are_post_jump() {
        let tr = small();
        let fs = discretize(&tr, &tr.jump_times()).unwrap();
        for (x, e) in fs.configs.iter().zip(&tr.jumps) {
            assert_eq!(x, &e.post_config);
        }
        assert!(fs.tracked);
    }

    #[test]
    fn identity_move_frames_are_segment_starts() {
        let m = super::super::tests::birth_death_model(2.0, 1.0, 20);
        let tr = simulate(&m, &PointConfig::empty(2), 20.0, 3, &SimOptions::default()).unwrap();
        for e in tr.jumps.windows(2) {
            let mid = 0.5 * (e[0].time + e[1].time);
            assert_eq!(config_at(&tr, mid).unwrap(), &e[0].post_config);
        }
    }

    #[test]
    fn time_outside_range() {
        let tr = small();
        assert!(discretize(&tr, &[0.0, 11.0]).is_err());
        assert!(discretize(&tr, &[1.0, 1.0]).is_err());
        assert_eq!(discretize(&tr, &[0.0, 10.0]).unwrap().configs[1], tr.final_config);
    }

    #[test]
    fn tracks_are_contiguous() {
        let a = PointConfig::from_xy(&[(0.1, 0.1)]);
        let e = PointConfig::empty(2);
        assert!(FrameSequence::new(vec![0.0, 1.0, 2.0], vec![a.clone(), e, a], true).is_err());
    }

    #[test]
    fn single_interval() {
        let tr = small();
        let s = jump_count_scaling(&tr, &[10.0, 5.0], 1).unwrap();
        assert_eq!(s.rows[0].intervals, 1);
        assert_eq!(s.rows[0].multi_jump_fraction, if tr.n_jumps() >= 2 { 1.0 } else { 0.0 });
        assert!(jump_count_scaling(&tr, &[1.0], 1).is_err());
        let _ = JumpKind::Birth;
    }
}
