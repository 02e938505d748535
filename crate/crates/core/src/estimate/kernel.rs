use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{
    cardinality_distance, hausdorff, max_cell_area, optimal_matching, PointConfig, Window,
};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Kernel profile `k`, applied to `d / h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Standard normal density.
    Gaussian,
    /// `1{|u| <= 1}`.
    Uniform,
    /// Constant 1, mostly useful in checks.
    Constant,
}

impl Profile {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Profile::Gaussian => INV_SQRT_2PI * (-0.5 * u * u).exp(),
            Profile::Uniform => {
                if u.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Constant => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Gaussian => "gaussian",
            Profile::Uniform => "uniform",
            Profile::Constant => "constant",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Profile::Gaussian),
            "uniform" => Ok(Profile::Uniform),
            "constant" => Ok(Profile::Constant),
            _ => Err(Error::UnknownName {
                kind: "kernel profile",
                name: name.into(),
                available: "gaussian, uniform, constant".into(),
            }),
        }
    }
}

/// How close two configurations are, before the bandwidth is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proximity {
    /// A distance, turned into `k(d/h)`.
    Distance(f64),
    /// A direct 0/1 kernel value (equal cardinalities, or the empty-set convention).
    Convention(bool),
}

impl Proximity {
    /// Compact encoding: distances are kept, conventions map to -1 (true) and -2 (false).
    #[inline]
    pub(crate) fn encode(self) -> f64 {
        match self {
            Proximity::Distance(d) => d,
            Proximity::Convention(true) => -1.0,
            Proximity::Convention(false) => -2.0,
        }
    }

    #[inline]
    pub(crate) fn decode(v: f64) -> Self {
        if v >= 0.0 {
            Proximity::Distance(v)
        } else {
            Proximity::Convention(v == -1.0)
        }
    }
}

/// Real-valued summary of a configuration.
pub trait FeatureMap: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn eval(&self, x: &PointConfig) -> Result<Vec<f64>>;
}

pub type FeatureMapRef = Arc<dyn FeatureMap>;

/// Largest cell area of the corners-augmented Delaunay tessellation.
#[derive(Debug, Clone)]
pub struct MaxAreaFeature {
    pub window: Window,
}

pub fn feature_maxarea(window: Window) -> FeatureMapRef {
    Arc::new(MaxAreaFeature { window })
}

impl FeatureMap for MaxAreaFeature {
    fn name(&self) -> &'static str {
        "maxarea"
    }
    fn eval(&self, x: &PointConfig) -> Result<Vec<f64>> {
        Ok(vec![max_cell_area(x, &self.window)?])
    }
}

/// Number of points.
#[derive(Debug, Clone, Copy)]
pub struct CardinalityFeature;

pub fn feature_cardinality() -> FeatureMapRef {
    Arc::new(CardinalityFeature)
}

impl FeatureMap for CardinalityFeature {
    fn name(&self) -> &'static str {
        "cardinality"
    }
    fn eval(&self, x: &PointConfig) -> Result<Vec<f64>> {
        Ok(vec![x.len() as f64])
    }
}

/// A way of comparing configurations. `prepare` computes the per-configuration
/// summary that `proximity` receives, so that it is evaluated once per configuration.
pub trait DistanceStrategy: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// False for strategies returning only [`Proximity::Convention`] values.
    fn uses_bandwidth(&self) -> bool {
        true
    }

    fn prepare(&self, _x: &PointConfig) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    /// True when the proximity depends on the configurations only through
    /// their [`Self::prepare`] summaries.
    fn summary_determined(&self) -> bool {
        false
    }

    fn proximity(&self, x: &PointConfig, fx: &[f64], y: &PointConfig, fy: &[f64]) -> Result<Proximity>;

    /// Proximities from `x` to each of `ys` in order; `fys` are their summaries.
    fn proximity_row(&self, x: &PointConfig, fx: &[f64], ys: &[&PointConfig], fys: &[Vec<f64>]) -> Result<Vec<Proximity>> {
        ys.iter().zip(fys).map(|(y, fy)| self.proximity(x, fx, y, fy)).collect()
    }
}

pub type StrategyRef = Arc<dyn DistanceStrategy>;

/// Hausdorff distance, with `1{x = y}` when either configuration is empty.
#[derive(Debug, Clone, Copy)]
pub struct HausdorffStrategy;

impl DistanceStrategy for HausdorffStrategy {
    fn name(&self) -> &str {
        "hausdorff"
    }
    fn proximity(&self, x: &PointConfig, _: &[f64], y: &PointConfig, _: &[f64]) -> Result<Proximity> {
        if x.is_empty() || y.is_empty() {
            return Ok(Proximity::Convention(x.is_empty() && y.is_empty()));
        }
        Ok(Proximity::Distance(hausdorff(x, y)?))
    }
}

/// Optimal matching distance `d_kappa`.
#[derive(Debug, Clone, Copy)]
pub struct MatchingStrategy {
    pub kappa: f64,
}

impl DistanceStrategy for MatchingStrategy {
    fn name(&self) -> &str {
        "matching"
    }
    fn proximity(&self, x: &PointConfig, _: &[f64], y: &PointConfig, _: &[f64]) -> Result<Proximity> {
        Ok(Proximity::Distance(optimal_matching(x, y, self.kappa)?))
    }
}

/// `1{n(x) = n(y)}`, no bandwidth.
#[derive(Debug, Clone, Copy)]
pub struct CardinalityIndicator;

impl DistanceStrategy for CardinalityIndicator {
    fn name(&self) -> &str {
        "card-indicator"
    }
    fn uses_bandwidth(&self) -> bool {
        false
    }
    fn summary_determined(&self) -> bool {
        true
    }
    fn prepare(&self, x: &PointConfig) -> Result<Vec<f64>> {
        Ok(vec![x.len() as f64])
    }
    fn proximity(&self, _: &PointConfig, fx: &[f64], _: &PointConfig, fy: &[f64]) -> Result<Proximity> {
        Ok(Proximity::Convention(fx[0] == fy[0]))
    }
}

/// `|n(x) - n(y)|`.
#[derive(Debug, Clone, Copy)]
pub struct CardinalitySmooth;

impl DistanceStrategy for CardinalitySmooth {
    fn name(&self) -> &str {
        "card-smooth"
    }
    fn summary_determined(&self) -> bool {
        true
    }
    fn prepare(&self, x: &PointConfig) -> Result<Vec<f64>> {
        Ok(vec![x.len() as f64])
    }
    fn proximity(&self, x: &PointConfig, fx: &[f64], y: &PointConfig, fy: &[f64]) -> Result<Proximity> {
        debug_assert_eq!((fx[0] - fy[0]).abs(), cardinality_distance(x, y));
        Ok(Proximity::Distance((fx[0] - fy[0]).abs()))
    }
}

/// Euclidean distance between feature vectors.
#[derive(Debug, Clone)]
pub struct FeatureStrategy {
    pub label: String,
    pub map: FeatureMapRef,
}

impl DistanceStrategy for FeatureStrategy {
    fn name(&self) -> &str {
        &self.label
    }
    fn summary_determined(&self) -> bool {
        true
    }
    fn prepare(&self, x: &PointConfig) -> Result<Vec<f64>> {
        self.map.eval(x)
    }
    fn proximity(&self, _: &PointConfig, fx: &[f64], _: &PointConfig, fy: &[f64]) -> Result<Proximity> {
        let d2: f64 = fx.iter().zip(fy).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(Proximity::Distance(d2.sqrt()))
    }
}

pub fn feature_strategy(map: FeatureMapRef) -> StrategyRef {
    Arc::new(FeatureStrategy {
        label: format!("feature-{}", map.name()),
        map,
    })
}

type Factory = fn(&Window) -> StrategyRef;

fn registry() -> [(&'static str, Factory); 6] {
    [
        ("hausdorff", |_| Arc::new(HausdorffStrategy)),
        ("matching", |w| Arc::new(MatchingStrategy { kappa: w.diameter() })),
        ("card-indicator", |_| Arc::new(CardinalityIndicator)),
        ("card-smooth", |_| Arc::new(CardinalitySmooth)),
        ("feature-maxarea", |w| feature_strategy(feature_maxarea(w.clone()))),
        ("feature-cardinality", |_| feature_strategy(feature_cardinality())),
    ]
}

pub fn strategy_names() -> Vec<&'static str> {
    registry().iter().map(|(n, _)| *n).collect()
}

/// Looks a strategy up by name; `window` supplies `kappa` (its diameter) and the maxarea window.
pub fn strategy_by_name(name: &str, window: &Window) -> Result<StrategyRef> {
    registry()
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| f(window))
        .ok_or_else(|| Error::UnknownName {
            kind: "kernel strategy",
            name: name.into(),
            available: strategy_names().join(", "),
        })
}

/// Proximity rule `k_T(x, y)`.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub strategy: StrategyRef,
    pub profile: Profile,
    pub bandwidth: f64,
    /// Constant factor applied to every kernel value.
    pub scale: f64,
}

impl KernelSpec {
    pub fn new(strategy: StrategyRef, bandwidth: f64) -> Result<Self> {
        if strategy.uses_bandwidth() && !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(KernelSpec {
            strategy,
            profile: Profile::Gaussian,
            bandwidth,
            scale: 1.0,
        })
    }

    /// Cardinality-indicator kernel.
    pub fn indicator() -> Self {
        KernelSpec {
            strategy: Arc::new(CardinalityIndicator),
            profile: Profile::Gaussian,
            bandwidth: 1.0,
            scale: 1.0,
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.bandwidth = h;
        self
    }

    #[inline]
    pub fn value(&self, p: Proximity) -> f64 {
        match p {
            Proximity::Distance(d) => self.scale * self.profile.eval(d / self.bandwidth),
            Proximity::Convention(b) => {
                if b {
                    self.scale
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub(crate) fn value_encoded(&self, v: f64) -> f64 {
        self.value(Proximity::decode(v))
    }
}

/// `k_T(x, y)`.
pub fn eval_kernel(ks: &KernelSpec, x: &PointConfig, y: &PointConfig) -> Result<f64> {
    let s = &ks.strategy;
    let p = s.proximity(x, &s.prepare(x)?, y, &s.prepare(y)?)?;
    Ok(ks.value(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> PointConfig {
        PointConfig::from_xy(&(0..n).map(|i| (0.1 * i as f64, 0.5)).collect::<Vec<_>>())
    }

    #[test]
    fn gaussian_values() {
        let w = Window::unit_square();
        let ks = KernelSpec::new(strategy_by_name("card-smooth", &w).unwrap(), 2.0).unwrap();
        assert!((eval_kernel(&ks, &cfg(3), &cfg(3)).unwrap() - 0.398_942_280_4).abs() < 1e-10);
        assert!((eval_kernel(&ks, &cfg(3), &cfg(5)).unwrap() - 0.241_970_724_5).abs() < 1e-10);
    }

    #[test]
    fn indicator_mode() {
        let ks = KernelSpec::indicator();
        assert_eq!(eval_kernel(&ks, &cfg(7), &cfg(7)).unwrap(), 1.0);
        assert_eq!(eval_kernel(&ks, &cfg(7), &cfg(6)).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_empty_convention() {
        let ks = KernelSpec::new(Arc::new(HausdorffStrategy), 0.1).unwrap();
        let e = PointConfig::empty(2);
        assert_eq!(eval_kernel(&ks, &e, &e).unwrap(), 1.0);
        assert_eq!(eval_kernel(&ks, &e, &cfg(2)).unwrap(), 0.0);
        assert_eq!(eval_kernel(&ks.clone().with_scale(3.0), &e, &e).unwrap(), 3.0);
    }

    #[test]
    fn feature_strategies() {
        let w = Window::unit_square();
        let f = strategy_by_name("feature-cardinality", &w).unwrap();
        let p = f.proximity(&cfg(5), &f.prepare(&cfg(5)).unwrap(), &cfg(3), &f.prepare(&cfg(3)).unwrap()).unwrap();
        assert_eq!(p, Proximity::Distance(2.0));
        let m = feature_maxarea(w.clone());
        assert_eq!(m.eval(&PointConfig::empty(2)).unwrap(), vec![0.5]);
        assert!(strategy_by_name("nope", &w).is_err());
        assert_eq!(strategy_names().len(), 6);
    }

    #[test]
    fn encoding_round_trip() {
        for p in [Proximity::Distance(0.0), Proximity::Distance(2.5), Proximity::Convention(true), Proximity::Convention(false)] {
            assert_eq!(Proximity::decode(p.encode()), p);
        }
    }

    #[test]
    fn bandwidth_must_be_positive() {
        assert!(KernelSpec::new(Arc::new(CardinalitySmooth), 0.0).is_err());
        assert!(KernelSpec::new(Arc::new(CardinalityIndicator), 0.0).is_ok());
    }
}
