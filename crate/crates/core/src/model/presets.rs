use std::sync::Arc;

use super::{
    brownian_move, capped, delaunay_area_birth_kernel, exp_cardinality_intensity,
    linear_death_intensity, maxarea_intensity, poisson_configuration, symmetric_split,
    uniform_birth_kernel, uniform_death_kernel, Boundary, ModelSpec, SimRng,
};
use crate::error::{Error, Result};
use crate::geometry::{PointConfig, Window};

/// Per-point Brownian standard deviation per unit time used by both presets.
pub const PRESET_SIGMA: f64 = 2e-3;

/// A named, fully specified model with its simulation defaults.
pub trait Preset: Send + Sync {
    fn name(&self) -> &str;
    fn summary(&self) -> &str;
    fn model(&self) -> ModelSpec;
    fn initial_config(&self, rng: &mut SimRng) -> Result<PointConfig>;
    fn default_horizon(&self) -> f64;
    /// Name of the waiting-time sampler suited to the model.
    fn default_sampler(&self) -> &str;
}

/// Cardinality-driven dynamics: `alpha(x) = exp(5 (n(x)/100 - 1))`, uniform kernels.
#[derive(Debug, Clone)]
pub struct CardinalityPreset {
    pub a: f64,
    pub n0: f64,
    pub n_star: usize,
    pub initial_mean: f64,
    pub sigma: f64,
}

impl Default for CardinalityPreset {
    fn default() -> Self {
        CardinalityPreset {
            a: 5.0,
            n0: 100.0,
            n_star: 1000,
            initial_mean: 100.0,
            sigma: PRESET_SIGMA,
        }
    }
}

impl Preset for CardinalityPreset {
    fn name(&self) -> &'static str {
        "sim41"
    }
    fn summary(&self) -> &'static str {
        "exponential cardinality-driven jump rate, uniform birth and death kernels"
    }
    fn model(&self) -> ModelSpec {
        let window = Window::unit_square();
        let total = exp_cardinality_intensity(self.a, 1.0, self.n0);
        let (birth, death) = symmetric_split(total, self.n_star);
        ModelSpec {
            name: self.name().into(),
            birth,
            death,
            birth_kernel: uniform_birth_kernel(window.clone()),
            death_kernel: uniform_death_kernel(),
            motion: brownian_move(self.sigma, Boundary::Reflect(window.clone())),
            window,
            n_star: self.n_star,
            alpha_lower: (-self.a).exp(),
            alpha_upper: (self.a * (self.n_star as f64 / self.n0 - 1.0)).exp(),
        }
    }
    fn initial_config(&self, rng: &mut SimRng) -> Result<PointConfig> {
        poisson_configuration(&Window::unit_square(), self.initial_mean, rng)
    }
    fn default_horizon(&self) -> f64 {
        1000.0
    }
    fn default_sampler(&self) -> &'static str {
        "thinning"
    }
}

/// Geometry-driven dynamics: birth rate `exp(c1 maxarea(x))/c2` with a
/// Delaunay-area birth kernel, death rate `n(x)/100`.
#[derive(Debug, Clone)]
pub struct MaxAreaPreset {
    pub c1: f64,
    pub c2: f64,
    pub death_rate: f64,
    pub n_star: usize,
    pub initial_mean: f64,
    pub sigma: f64,
}

impl Default for MaxAreaPreset {
    fn default() -> Self {
        MaxAreaPreset {
            c1: 50.0,
            c2: 25.0,
            death_rate: 0.01,
            n_star: 1000,
            initial_mean: 100.0,
            sigma: PRESET_SIGMA,
        }
    }
}

impl Preset for MaxAreaPreset {
    fn name(&self) -> &'static str {
        "sim42"
    }
    fn summary(&self) -> &'static str {
        "birth rate and kernel driven by Delaunay cell areas, linear death rate"
    }
    fn model(&self) -> ModelSpec {
        let window = Window::unit_square();
        // maxarea of the corners-augmented tessellation never exceeds half the window.
        let max_area = 0.5 * window.volume();
        ModelSpec {
            name: self.name().into(),
            birth: capped(maxarea_intensity(self.c1, self.c2, window.clone()), self.n_star),
            death: linear_death_intensity(self.death_rate, self.n_star),
            birth_kernel: delaunay_area_birth_kernel(window.clone()),
            death_kernel: uniform_death_kernel(),
            motion: brownian_move(self.sigma, Boundary::Reflect(window.clone())),
            window,
            n_star: self.n_star,
            alpha_lower: (1.0 / self.c2).min(self.death_rate * self.n_star as f64),
            alpha_upper: (self.c1 * max_area).exp() / self.c2 + self.death_rate * self.n_star as f64,
        }
    }
    fn initial_config(&self, rng: &mut SimRng) -> Result<PointConfig> {
        poisson_configuration(&Window::unit_square(), self.initial_mean, rng)
    }
    fn default_horizon(&self) -> f64 {
        1000.0
    }
    fn default_sampler(&self) -> &'static str {
        "grid"
    }
}

/// All built-in presets.
pub fn presets() -> Vec<Arc<dyn Preset>> {
    vec![
        Arc::new(CardinalityPreset::default()),
        Arc::new(MaxAreaPreset::default()),
    ]
}

pub fn preset_names() -> Vec<String> {
    presets().iter().map(|p| p.name().to_string()).collect()
}

pub fn preset_by_name(name: &str) -> Result<Arc<dyn Preset>> {
    presets()
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "preset",
            name: name.to_string(),
            available: preset_names().join(", "),
        })
}
