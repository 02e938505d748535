//! Birth-death-move model specification.

mod intensity;
mod kernels;
mod movement;
mod presets;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};

pub use intensity::{
    capped, exp_cardinality_intensity, linear_death_intensity, maxarea_intensity,
    symmetric_split, BirthCap, BirthShare, CardinalityFn, DeathShare, ExpCardinality, Intensity,
    IntensityRef, LinearDeath, MaxAreaIntensity,
};
pub use kernels::{
    delaunay_area_birth_kernel, uniform_birth_kernel, uniform_death_kernel, DelaunayAreaBirth,
    JumpKind, KernelDraw, TransitionKernel, TransitionKernelRef, UniformBirth, UniformDeath,
};
pub use movement::{
    brownian_move, identity_move, Boundary, Brownian, MoveProcess, MoveProcessRef, PathMode,
    StaticMove,
};
pub use presets::{preset_by_name, preset_names, presets, CardinalityPreset, MaxAreaPreset, Preset};

/// Random stream used by every sampler.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Complete description of a birth-death-move process.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub birth: IntensityRef,
    pub death: IntensityRef,
    pub birth_kernel: TransitionKernelRef,
    pub death_kernel: TransitionKernelRef,
    pub motion: MoveProcessRef,
    pub window: Window,
    /// Births vanish from this cardinality on.
    pub n_star: usize,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("birth", &self.birth.describe())
            .field("death", &self.death.describe())
            .field("motion", &self.motion)
            .field("n_star", &self.n_star)
            .field("alpha_lower", &self.alpha_lower)
            .field("alpha_upper", &self.alpha_upper)
            .finish()
    }
}

impl ModelSpec {
    /// `(beta(x), delta(x))`.
    pub fn rates(&self, x: &PointConfig) -> Result<(f64, f64)> {
        Ok((self.birth.evaluate(x)?, self.death.evaluate(x)?))
    }

    /// Total jump intensity `beta(x) + delta(x)`.
    pub fn alpha(&self, x: &PointConfig) -> Result<f64> {
        let (b, d) = self.rates(x)?;
        Ok(b + d)
    }

    /// True when the total intensity cannot change between two jumps.
    pub fn alpha_constant_between_jumps(&self) -> bool {
        self.motion.is_static() || (self.birth.cardinality_only() && self.death.cardinality_only())
    }

    /// An upper bound of the total intensity along the motion started at `x`
    /// until the next jump.
    pub fn segment_bound(&self, x: &PointConfig) -> Result<f64> {
        if self.alpha_constant_between_jumps() {
            let a = self.alpha(x)?;
            if a > self.alpha_upper * (1.0 + 1e-12) {
                return Err(Error::ModelBound {
                    value: a,
                    bound: self.alpha_upper,
                });
            }
            Ok(a)
        } else {
            Ok(self.alpha_upper)
        }
    }

    /// Homogeneous Poisson configuration with the given mean count in the window.
    pub fn poisson_configuration(&self, mean: f64, rng: &mut SimRng) -> Result<PointConfig> {
        poisson_configuration(&self.window, mean, rng)
    }
}

pub fn poisson_configuration(window: &Window, mean: f64, rng: &mut SimRng) -> Result<PointConfig> {
    let n = if mean > 0.0 {
        let law = Poisson::new(mean).map_err(|e| Error::domain(e.to_string()))?;
        law.sample(rng) as usize
    } else {
        0
    };
    Ok(uniform_configuration(window, n, rng))
}

pub fn uniform_configuration(window: &Window, n: usize, rng: &mut SimRng) -> PointConfig {
    let mut x = PointConfig::empty(window.dim());
    let mut p = vec![0.0; window.dim()];
    for id in 0..n {
        for (k, v) in p.iter_mut().enumerate() {
            *v = rng.random_range(window.lower()[k]..window.upper()[k]);
        }
        x.push(&p, id as u64);
    }
    x
}

/// Model hypothesis checked by [`validate_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    NoDeathFromEmpty,
    BirthCap,
    IntensityBounds,
    BirthKernel,
    DeathKernel,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::NoDeathFromEmpty => "δ(∅)=0",
            Hypothesis::BirthCap => "birth cap: β(x)=0 when n(x) >= n_star",
            Hypothesis::IntensityBounds => "α_* <= α(x) <= α^*",
            Hypothesis::BirthKernel => "birth kernel adds exactly one point",
            Hypothesis::DeathKernel => "death kernel removes exactly one point",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub probes: usize,
    pub min_alpha: f64,
    pub max_alpha: f64,
}

fn violation(h: Hypothesis, detail: String) -> Error {
    Error::Validation {
        hypothesis: h.to_string(),
        detail,
    }
}

/// Returns the hypothesis a validation error refers to, if any.
pub fn violated_hypothesis(err: &Error) -> Option<Hypothesis> {
    let Error::Validation { hypothesis, .. } = err else {
        return None;
    };
    [
        Hypothesis::NoDeathFromEmpty,
        Hypothesis::BirthCap,
        Hypothesis::IntensityBounds,
        Hypothesis::BirthKernel,
        Hypothesis::DeathKernel,
    ]
    .into_iter()
    .find(|h| h.to_string() == *hypothesis)
}

fn keeps_points(small: &PointConfig, large: &PointConfig) -> bool {
    small
        .ids()
        .iter()
        .enumerate()
        .all(|(i, id)| match large.position_of(*id) {
            Some(j) => large.point(j) == small.point(i),
            None => false,
        })
}

/// Spot-checks the model on `probe_budget` random configurations whose
/// cardinalities span `0..=n_star` (both ends always included).
pub fn validate_model(m: &ModelSpec, probe_budget: usize, rng: &mut SimRng) -> Result<ValidationReport> {
    if probe_budget == 0 {
        return Err(Error::config("probe budget must be at least 1"));
    }
    let empty = PointConfig::empty(m.window.dim());
    let d0 = m.death.evaluate(&empty)?;
    if d0 != 0.0 {
        return Err(violation(
            Hypothesis::NoDeathFromEmpty,
            format!("death intensity on the empty configuration is {d0}"),
        ));
    }
    let mut min_alpha = f64::INFINITY;
    let mut max_alpha = 0.0f64;
    for k in 0..probe_budget {
        let n = match k {
            0 => 0,
            1 => m.n_star,
            _ => rng.random_range(0..=m.n_star),
        };
        let x = uniform_configuration(&m.window, n, rng);
        let (b, d) = m.rates(&x)?;
        if n >= m.n_star && b != 0.0 {
            return Err(violation(
                Hypothesis::BirthCap,
                format!("birth intensity {b} at cardinality {n} (n_star = {})", m.n_star),
            ));
        }
        let a = b + d;
        if !(b >= 0.0 && d >= 0.0 && a.is_finite()) {
            return Err(violation(
                Hypothesis::IntensityBounds,
                format!("invalid rates beta = {b}, delta = {d} at cardinality {n}"),
            ));
        }
        if a < m.alpha_lower * (1.0 - 1e-12) || a > m.alpha_upper * (1.0 + 1e-12) {
            return Err(violation(
                Hypothesis::IntensityBounds,
                format!(
                    "alpha = {a} at cardinality {n} outside [{}, {}]",
                    m.alpha_lower, m.alpha_upper
                ),
            ));
        }
        min_alpha = min_alpha.min(a);
        max_alpha = max_alpha.max(a);

        let next_id = n as u64 + 1;
        let born = m.birth_kernel.sample(&x, next_id, rng)?;
        if born.config.len() != n + 1 || !keeps_points(&x, &born.config) || !m.window.contains(
            born.config
                .position_of(born.changed)
                .map(|j| born.config.point(j))
                .unwrap_or(&[]),
        ) {
            return Err(violation(
                Hypothesis::BirthKernel,
                format!("birth from cardinality {n} produced cardinality {}", born.config.len()),
            ));
        }
        if n > 0 {
            let died = m.death_kernel.sample(&x, next_id, rng)?;
            if died.config.len() + 1 != n || !keeps_points(&died.config, &x) || x.position_of(died.changed).is_none() {
                return Err(violation(
                    Hypothesis::DeathKernel,
                    format!("death from cardinality {n} produced cardinality {}", died.config.len()),
                ));
            }
        }
    }
    Ok(ValidationReport {
        probes: probe_budget,
        min_alpha,
        max_alpha,
    })
}
