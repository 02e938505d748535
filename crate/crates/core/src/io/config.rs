use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{ExperimentOptions, TABLE_STRATEGIES};
use crate::bandwidth::GridSpec;
use crate::error::{Error, Result};
use crate::estimate::{strategy_by_name, KernelSpec, Profile, Target};
use crate::geometry::{PointConfig, Window};
use crate::model::{
    brownian_move, capped, delaunay_area_birth_kernel, exp_cardinality_intensity, identity_move,
    linear_death_intensity, maxarea_intensity, poisson_configuration, preset_by_name,
    symmetric_split, uniform_birth_kernel, uniform_death_kernel, Boundary, CardinalityFn,
    IntensityRef, ModelSpec, Preset, SimRng,
};
use crate::simulate::{sampler_by_name, SimOptions};

/// Every key a run configuration accepts, with its default where there is one.
pub const EXAMPLE_CONFIG: &str = r#"# Exactly one of `preset` and `[model.custom]`.
[model]
preset = "sim41"            # sim41 | sim42

# [model.custom]
# name = "my-model"
# window = { lower = [0.0, 0.0], upper = [1.0, 1.0] }
# n_star = 1000
# initial_mean = 100.0
# sigma = 0.002             # Brownian sd per unit time, 0 = no motion
# birth_kernel = "uniform"  # uniform | delaunay-area
# total = { kind = "exp-cardinality", a = 5.0, b = 1.0, n0 = 100.0 }
# # or separate rates: kinds exp-cardinality, maxarea {c1, c2}, linear {rate}, constant {rate}
# # birth = { kind = "maxarea", c1 = 50.0, c2 = 25.0 }
# # death = { kind = "linear", rate = 0.01 }
# alpha_lower = 0.0067
# alpha_upper = 1e18
# sampler = "thinning"      # thinning | grid
# horizon = 1000.0

[simulation]
# horizon = 200.0           # default: the model's horizon
seed = 0
# sampler = "thinning"      # default: the model's sampler
path_dt = 0.01              # 0 stores jump configurations only
grid_dt = 0.001
epsilon = 1e-6

[estimation]
strategy = "card-smooth"    # hausdorff | matching | card-indicator | card-smooth | feature-maxarea | feature-cardinality
target = "alpha"            # alpha | beta | delta
profile = "gaussian"        # gaussian | uniform | constant
# bandwidth = 0.5           # default: cross-validation over `grid`
grid = "auto:25"            # auto, auto:N or a list such as [0.1, 1.0]
# frames = 1000             # estimate from frames at m + 1 regular times
n_queries = 100
# cv_groups = 50            # cross-validate on a subset of segments or frames

[experiment]
seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]
m_values = []
strategies = ["hausdorff", "matching", "card-indicator", "card-smooth"]

[output]
dir = "."
"#;

/// A run description read from TOML. Unknown keys are rejected.
///
/// ```toml
/// [model]
/// preset = "sim41"
///
/// [simulation]
/// horizon = 200.0
/// seed = 7
///
/// [estimation]
/// strategy = "card-smooth"
/// grid = "auto:25"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub estimation: EstimationConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either a named preset or a custom model, not both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: Option<String>,
    pub custom: Option<CustomModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Defaults to the model's horizon.
    pub horizon: Option<f64>,
    pub seed: u64,
    /// Defaults to the model's sampler.
    pub sampler: Option<String>,
    /// Spacing of stored path samples; 0 stores only jump configurations.
    pub path_dt: f64,
    pub grid_dt: f64,
    pub epsilon: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let d = SimOptions::default();
        SimulationConfig {
            horizon: None,
            seed: 0,
            sampler: None,
            path_dt: d.path_dt.unwrap_or(0.0),
            grid_dt: d.grid_dt,
            epsilon: d.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub strategy: String,
    pub target: Target,
    pub profile: String,
    /// Fixed bandwidth; cross-validation over `grid` when absent.
    pub bandwidth: Option<f64>,
    pub grid: GridSpec,
    /// Observe the trajectory at `frames + 1` regular times and use the discrete estimator.
    pub frames: Option<usize>,
    pub n_queries: usize,
    /// Groups entering the cross-validation sum; all when absent.
    pub cv_groups: Option<usize>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            strategy: "card-smooth".into(),
            target: Target::Alpha,
            profile: "gaussian".into(),
            bandwidth: None,
            grid: GridSpec::default(),
            frames: None,
            n_queries: 100,
            cv_groups: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    /// Frame counts of the discrete schemes reported next to the continuous one.
    pub m_values: Vec<usize>,
    pub strategies: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seeds: (0..10).collect(),
            m_values: Vec::new(),
            strategies: TABLE_STRATEGIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from(".") }
    }
}

/// A rate function of a custom model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateConfig {
    /// `exp(a (n/n0 - b))`.
    ExpCardinality { a: f64, b: f64, n0: f64 },
    /// `exp(c1 maxarea(x)) / c2`.
    Maxarea { c1: f64, c2: f64 },
    /// `rate * n`.
    Linear { rate: f64 },
    /// `rate`, or `rate * 1{n > 0}` as a death rate.
    Constant { rate: f64 },
}

impl RateConfig {
    fn build(&self, window: &Window, death: bool) -> IntensityRef {
        match *self {
            RateConfig::ExpCardinality { a, b, n0 } => exp_cardinality_intensity(a, b, n0),
            RateConfig::Maxarea { c1, c2 } => maxarea_intensity(c1, c2, window.clone()),
            RateConfig::Linear { rate } => linear_death_intensity(rate, usize::MAX),
            RateConfig::Constant { rate } if death => {
                CardinalityFn::new(format!("{rate} * 1{{n > 0}}"), move |n| if n > 0 { rate } else { 0.0 })
            }
            RateConfig::Constant { rate } => CardinalityFn::new(format!("{rate}"), move |_| rate),
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            RateConfig::ExpCardinality { a, b, n0 } => a.is_finite() && b.is_finite() && n0 > 0.0,
            RateConfig::Maxarea { c1, c2 } => c1.is_finite() && c2 > 0.0,
            RateConfig::Linear { rate } | RateConfig::Constant { rate } => rate >= 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid rate parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BirthKernelConfig {
    Uniform,
    DelaunayArea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// A model assembled from the building blocks of the presets.
///
/// Rates are given either as a `total` split evenly between births and
/// deaths (births forced on the empty configuration, deaths forced at
/// `n_star`), or as separate `birth` and `death` rates; births are always
/// switched off from `n_star` points on. The bounds `alpha_lower` and
/// `alpha_upper` of the total rate must be declared; they are probed before
/// simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub name: String,
    pub window: WindowConfig,
    pub n_star: usize,
    pub initial_mean: f64,
    /// Brownian standard deviation per unit time; 0 keeps points still.
    pub sigma: f64,
    #[serde(default = "default_birth_kernel")]
    pub birth_kernel: BirthKernelConfig,
    pub total: Option<RateConfig>,
    pub birth: Option<RateConfig>,
    pub death: Option<RateConfig>,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    #[serde(default = "default_sampler")]
    pub sampler: String,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_birth_kernel() -> BirthKernelConfig {
    BirthKernelConfig::Uniform
}

fn default_sampler() -> String {
    "thinning".into()
}

fn default_horizon() -> f64 {
    1000.0
}

impl CustomModel {
    fn window(&self) -> Result<Window> {
        Window::new(self.window.lower.clone(), self.window.upper.clone())
    }

    pub fn check(&self) -> Result<()> {
        let w = self.window()?;
        if self.birth_kernel == BirthKernelConfig::DelaunayArea && w.dim() != 2 {
            return Err(Error::config("the delaunay-area birth kernel needs a planar window"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!("sigma must be finite and nonnegative, got {}", self.sigma)));
        }
        if !(self.initial_mean >= 0.0 && self.initial_mean.is_finite()) {
            return Err(Error::config("initial_mean must be finite and nonnegative"));
        }
        if !(self.alpha_lower > 0.0 && self.alpha_lower <= self.alpha_upper && self.alpha_upper.is_finite()) {
            return Err(Error::config("need 0 < alpha_lower <= alpha_upper < inf"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon must be positive"));
        }
        match (&self.total, &self.birth, &self.death) {
            (Some(t), None, None) => t.check()?,
            (None, Some(b), Some(d)) => {
                b.check()?;
                d.check()?;
            }
            _ => return Err(Error::config("give either `total` or both `birth` and `death` rates")),
        }
        sampler_by_name(&self.sampler, &SimOptions::default())?;
        Ok(())
    }
}

impl Preset for CustomModel {
    fn name(&self) -> &str {
        &self.name
    }
    fn summary(&self) -> &str {
        "model defined in a configuration file"
    }
    fn model(&self) -> ModelSpec {
        let window = self.window().expect("window checked when the config was loaded");
        let (birth, death) = match (&self.total, &self.birth, &self.death) {
            (Some(t), _, _) => symmetric_split(t.build(&window, false), self.n_star),
            (None, Some(b), Some(d)) => (
                capped(b.build(&window, false), self.n_star),
                d.build(&window, true),
            ),
            _ => panic!("rates checked when the config was loaded"),
        };
        let birth_kernel = match self.birth_kernel {
            BirthKernelConfig::Uniform => uniform_birth_kernel(window.clone()),
            BirthKernelConfig::DelaunayArea => delaunay_area_birth_kernel(window.clone()),
        };
        let motion = if self.sigma == 0.0 {
            identity_move()
        } else {
            brownian_move(self.sigma, Boundary::Reflect(window.clone()))
        };
        ModelSpec {
            name: self.name.clone(),
            birth,
            death,
            birth_kernel,
            death_kernel: uniform_death_kernel(),
            motion,
            window,
            n_star: self.n_star,
            alpha_lower: self.alpha_lower,
            alpha_upper: self.alpha_upper,
        }
    }
    fn initial_config(&self, rng: &mut SimRng) -> Result<PointConfig> {
        poisson_configuration(&self.window()?, self.initial_mean, rng)
    }
    fn default_horizon(&self) -> f64 {
        self.horizon
    }
    fn default_sampler(&self) -> &str {
        &self.sampler
    }
}

impl RunConfig {
    /// A config selecting `preset` with every other setting at its default.
    pub fn for_preset(preset: &str) -> Self {
        RunConfig {
            model: ModelConfig {
                preset: Some(preset.into()),
                custom: None,
            },
            simulation: SimulationConfig::default(),
            estimation: EstimationConfig::default(),
            experiment: ExperimentConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Single-line form, suitable for provenance headers.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let preset = self.preset()?;
        let window = preset.model().window;
        let s = &self.simulation;
        if let Some(h) = s.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::config(format!("horizon must be positive, got {h}")));
            }
        }
        if !(s.path_dt >= 0.0 && s.path_dt.is_finite()) {
            return Err(Error::config("path_dt must be finite and nonnegative"));
        }
        let opts = self.sim_options()?;
        sampler_by_name(&opts.sampler, &opts)?;
        let e = &self.estimation;
        strategy_by_name(&e.strategy, &window)?;
        Profile::from_name(&e.profile)?;
        if let Some(h) = e.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::config(format!("bandwidth must be positive, got {h}")));
            }
        }
        if e.frames == Some(0) || e.n_queries == 0 || e.cv_groups == Some(0) {
            return Err(Error::config("frames, n_queries and cv_groups must be positive"));
        }
        let x = &self.experiment;
        if x.seeds.is_empty() || x.strategies.is_empty() || x.m_values.contains(&0) {
            return Err(Error::config("experiment needs seeds, strategies and positive m_values"));
        }
        for name in &x.strategies {
            strategy_by_name(name, &window)?;
        }
        Ok(())
    }

    pub fn preset(&self) -> Result<Arc<dyn Preset>> {
        match (&self.model.preset, &self.model.custom) {
            (Some(name), None) => preset_by_name(name),
            (None, Some(c)) => {
                c.check()?;
                Ok(Arc::new(c.clone()))
            }
            _ => Err(Error::config("[model] needs exactly one of `preset` and `custom`")),
        }
    }

    pub fn horizon(&self) -> Result<f64> {
        Ok(match self.simulation.horizon {
            Some(h) => h,
            None => self.preset()?.default_horizon(),
        })
    }

    pub fn sim_options(&self) -> Result<SimOptions> {
        let s = &self.simulation;
        let sampler = match &s.sampler {
            Some(n) => n.clone(),
            None => self.preset()?.default_sampler().to_string(),
        };
        let mut o = SimOptions::default().with_sampler(&sampler);
        o.path_dt = (s.path_dt > 0.0).then_some(s.path_dt);
        o.grid_dt = s.grid_dt;
        o.epsilon = s.epsilon;
        Ok(o)
    }

    /// Kernel of the estimation section; the bandwidth is 1 when it is to be cross-validated.
    pub fn kernel(&self) -> Result<KernelSpec> {
        let e = &self.estimation;
        let window = self.preset()?.model().window;
        let s = strategy_by_name(&e.strategy, &window)?;
        Ok(KernelSpec::new(s, e.bandwidth.unwrap_or(1.0))?.with_profile(Profile::from_name(&e.profile)?))
    }

    pub fn experiment_options(&self) -> Result<ExperimentOptions> {
        let mut o = ExperimentOptions::new(self.horizon()?, self.experiment.seeds.clone());
        o.m_values = self.experiment.m_values.clone();
        o.strategies = self.experiment.strategies.clone();
        o.n_queries = self.estimation.n_queries;
        o.target = self.estimation.target;
        o.cv_groups = self.estimation.cv_groups;
        o.grid = self.estimation.grid.clone();
        o.sim = self.sim_options()?.with_path_dt(None);
        Ok(o)
    }
}
