//! Exact simulation of birth-death-move trajectories and their discretisation.

mod frames;
mod sampler;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, PointId};
use crate::model::{validate_model, JumpKind, ModelSpec, Preset, SimRng};

pub use frames::{
    config_at, discretize, jump_count_scaling, regular_times, FrameSequence, JumpScaling,
    ScalingRow,
};
pub use sampler::{
    sample_waiting_time, sampler_by_name, sampler_names, GridSampler, PathRecorder,
    ThinningSampler, WaitingTime, WaitingTimeSampler,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub time: f64,
    pub config: PointConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub kind: JumpKind,
    /// Configuration just before the jump.
    pub pre_config: PointConfig,
    pub post_config: PointConfig,
    /// Identity of the born or removed point.
    pub changed_point: PointId,
}

/// A simulated path on `[0, horizon]`.
///
/// Segment `j` runs from the `j`-th jump time (0 for the first) to the next
/// jump time (the horizon for the last). `segments[j]` holds the path samples
/// strictly inside it; there are always `jumps.len() + 1` segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: String,
    pub horizon: f64,
    pub seed: u64,
    pub initial_config: PointConfig,
    pub jumps: Vec<JumpEvent>,
    pub segments: Vec<Vec<PathSample>>,
    /// Configuration at the horizon.
    pub final_config: PointConfig,
}

impl Trajectory {
    /// `N_T`.
    pub fn n_jumps(&self) -> usize {
        self.jumps.len()
    }

    pub fn jump_times(&self) -> Vec<f64> {
        self.jumps.iter().map(|j| j.time).collect()
    }

    pub fn n_segments(&self) -> usize {
        self.jumps.len() + 1
    }

    /// Start time and configuration of segment `j`.
    pub fn segment_start(&self, j: usize) -> (f64, &PointConfig) {
        if j == 0 {
            (0.0, &self.initial_config)
        } else {
            let e = &self.jumps[j - 1];
            (e.time, &e.post_config)
        }
    }

    /// End time of segment `j` and the configuration reached there (before any jump).
    pub fn segment_end(&self, j: usize) -> (f64, &PointConfig) {
        if j < self.jumps.len() {
            let e = &self.jumps[j];
            (e.time, &e.pre_config)
        } else {
            (self.horizon, &self.final_config)
        }
    }

    /// Time and configuration of every point of segment `j`, from start to end.
    pub fn segment_nodes(&self, j: usize) -> Vec<(f64, &PointConfig)> {
        let mut out = Vec::with_capacity(self.segments[j].len() + 2);
        out.push(self.segment_start(j));
        out.extend(self.segments[j].iter().map(|s| (s.time, &s.config)));
        out.push(self.segment_end(j));
        out
    }

    pub fn path_sample_count(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    /// Checks the structural invariants of a trajectory.
    pub fn check(&self) -> Result<()> {
        if self.segments.len() != self.jumps.len() + 1 {
            return Err(Error::Format("segment count must be jump count + 1".into()));
        }
        let mut last = 0.0;
        for (j, e) in self.jumps.iter().enumerate() {
            if !(e.time > last) || e.time > self.horizon {
                return Err(Error::Format(format!("jump {j} at time {} is out of order", e.time)));
            }
            let expected = match e.kind {
                JumpKind::Birth => e.pre_config.len() + 1,
                JumpKind::Death => e.pre_config.len().wrapping_sub(1),
            };
            if e.post_config.len() != expected {
                return Err(Error::Format(format!("jump {j} changes cardinality inconsistently")));
            }
            last = e.time;
        }
        for j in 0..self.n_segments() {
            let (t0, x0) = self.segment_start(j);
            let (t1, x1) = self.segment_end(j);
            for s in &self.segments[j] {
                if !(s.time > t0 && s.time < t1) || s.config.len() != x0.len() {
                    return Err(Error::Format(format!("path sample at {} misplaced in segment {j}", s.time)));
                }
            }
            if x1.len() != x0.len() {
                return Err(Error::Format(format!("segment {j} changes cardinality")));
            }
        }
        Ok(())
    }
}

/// Simulation options.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Waiting-time sampler name, see [`sampler_names`].
    pub sampler: String,
    /// Spacing of stored path samples; `None` stores only the jump configurations.
    pub path_dt: Option<f64>,
    /// Step of the grid sampler.
    pub grid_dt: f64,
    /// Tail probability defining the grid sampler window `log(1/eps)/alpha_lower`.
    pub epsilon: f64,
    /// Thinning refuses to start when the expected number of proposals exceeds this.
    pub max_proposals: f64,
    pub max_jumps: usize,
    /// Number of random configurations probed by `validate_model` before running; 0 skips.
    pub validate_probes: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            sampler: "thinning".into(),
            path_dt: Some(1e-2),
            grid_dt: 1e-3,
            epsilon: 1e-6,
            max_proposals: 1e9,
            max_jumps: 10_000_000,
            validate_probes: 16,
        }
    }
}

impl SimOptions {
    pub fn with_sampler(mut self, name: &str) -> Self {
        self.sampler = name.into();
        self
    }

    pub fn with_path_dt(mut self, dt: Option<f64>) -> Self {
        self.path_dt = dt;
        self
    }
}

/// Simulates `m` on `[0, horizon]` from `x0`. Deterministic in `(seed, opts)`.
pub fn simulate(m: &ModelSpec, x0: &PointConfig, horizon: f64, seed: u64, opts: &SimOptions) -> Result<Trajectory> {
    let mut rng = SimRng::seed_from_u64(seed);
    run(m, x0.clone(), horizon, seed, opts, &mut rng)
}

/// Simulates a preset, drawing the initial configuration from the same seeded stream.
pub fn simulate_preset(p: &dyn Preset, horizon: f64, seed: u64, opts: &SimOptions) -> Result<Trajectory> {
    let mut rng = SimRng::seed_from_u64(seed);
    let x0 = p.initial_config(&mut rng)?;
    run(&p.model(), x0, horizon, seed, opts, &mut rng)
}

fn run(m: &ModelSpec, x0: PointConfig, horizon: f64, seed: u64, opts: &SimOptions, rng: &mut SimRng) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    if let Some(dt) = opts.path_dt {
        if !(dt > 0.0) {
            return Err(Error::config(format!("path_dt must be positive, got {dt}")));
        }
    }
    if x0.dim() != m.window.dim() {
        return Err(Error::domain("initial configuration dimension does not match the window"));
    }
    if opts.validate_probes > 0 {
        let mut probe_rng = SimRng::seed_from_u64(seed ^ 0x5eed_0f_7e57);
        validate_model(m, opts.validate_probes, &mut probe_rng)?;
    }
    let sampler = sampler_by_name(&opts.sampler, opts)?;
    sampler.check(m)?;

    let mut next_id = x0.ids().iter().max().map_or(0, |v| v + 1);
    let mut jumps = Vec::new();
    let mut segments = Vec::new();
    let mut y = x0.clone();
    let mut t = 0.0;
    loop {
        let mut rec = PathRecorder::new(opts.path_dt, t);
        let next = sampler.next_jump(m, &mut y, t, horizon, &mut rec, rng)?;
        segments.push(rec.into_samples());
        let Some(tau) = next else { break };
        if jumps.len() >= opts.max_jumps {
            return Err(Error::config(format!("more than {} jumps before the horizon", opts.max_jumps)));
        }
        let (b, d) = m.rates(&y)?;
        let a = b + d;
        if !(a > 0.0) {
            return Err(Error::ModelBound { value: a, bound: m.alpha_lower });
        }
        let u: f64 = rng.random();
        let (kind, kernel) = if u * a < b {
            (JumpKind::Birth, &m.birth_kernel)
        } else {
            (JumpKind::Death, &m.death_kernel)
        };
        let draw = kernel.sample(&y, next_id, rng)?;
        debug_assert_eq!(
            draw.config.len(),
            if kind == JumpKind::Birth { y.len() + 1 } else { y.len() - 1 }
        );
        if kind == JumpKind::Birth {
            next_id += 1;
        }
        let post = draw.config;
        jumps.push(JumpEvent {
            time: tau,
            kind,
            pre_config: std::mem::replace(&mut y, post.clone()),
            post_config: post,
            changed_point: draw.changed,
        });
        t = tau;
    }
    Ok(Trajectory {
        model: m.name.clone(),
        horizon,
        seed,
        initial_config: x0,
        jumps,
        segments,
        final_config: y,
    })
}
