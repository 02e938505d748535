use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::geometry::{max_cell_area, PointConfig, Window};

/// A configuration-dependent jump rate.
pub trait Intensity: Send + Sync + fmt::Debug {
    fn evaluate(&self, x: &PointConfig) -> Result<f64>;

    /// True when the value depends on `x` only through `n(x)`, hence is
    /// constant along any cardinality-preserving move.
    fn cardinality_only(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

pub type IntensityRef = Arc<dyn Intensity>;

/// `exp(a * (n(x)/n0 - b))`.
#[derive(Debug, Clone)]
pub struct ExpCardinality {
    pub a: f64,
    pub b: f64,
    pub n0: f64,
}

pub fn exp_cardinality_intensity(a: f64, b: f64, n0: f64) -> IntensityRef {
    Arc::new(ExpCardinality { a, b, n0 })
}

impl Intensity for ExpCardinality {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        Ok((self.a * (x.len() as f64 / self.n0 - self.b)).exp())
    }
    fn cardinality_only(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("exp({} * (n/{} - {}))", self.a, self.n0, self.b)
    }
}

/// `exp(c1 * maxarea(x)) / c2`, maxarea taken on the corners-augmented Delaunay tessellation.
#[derive(Debug, Clone)]
pub struct MaxAreaIntensity {
    pub c1: f64,
    pub c2: f64,
    pub window: Window,
}

pub fn maxarea_intensity(c1: f64, c2: f64, window: Window) -> IntensityRef {
    assert!(c1 > 0.0 && c2 > 0.0, "maxarea intensity needs positive constants");
    Arc::new(MaxAreaIntensity { c1, c2, window })
}

impl Intensity for MaxAreaIntensity {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        Ok((self.c1 * max_cell_area(x, &self.window)?).exp() / self.c2)
    }
    fn describe(&self) -> String {
        format!("exp({} * maxarea) / {}", self.c1, self.c2)
    }
}

/// `rate * n(x) * 1{n(x) <= cap}`.
#[derive(Debug, Clone)]
pub struct LinearDeath {
    pub rate: f64,
    pub cap: usize,
}

pub fn linear_death_intensity(rate_per_point: f64, cap: usize) -> IntensityRef {
    assert!(rate_per_point > 0.0, "death rate must be positive");
    Arc::new(LinearDeath {
        rate: rate_per_point,
        cap,
    })
}

impl Intensity for LinearDeath {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        let n = x.len();
        Ok(if n <= self.cap {
            self.rate * n as f64
        } else {
            0.0
        })
    }
    fn cardinality_only(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("{} * n * 1{{n <= {}}}", self.rate, self.cap)
    }
}

/// An arbitrary rate sequence indexed by cardinality.
#[derive(Clone)]
pub struct CardinalityFn {
    label: String,
    f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl CardinalityFn {
    pub fn new(label: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> IntensityRef {
        Arc::new(Self {
            label: label.into(),
            f: Arc::new(f),
        })
    }
}

impl fmt::Debug for CardinalityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CardinalityFn({})", self.label)
    }
}

impl Intensity for CardinalityFn {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        Ok((self.f)(x.len()))
    }
    fn cardinality_only(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Birth share of a total intensity: forced birth on the empty configuration,
/// forced death at `n_star`, fair coin in between.
#[derive(Debug, Clone)]
pub struct BirthShare {
    pub total: IntensityRef,
    pub n_star: usize,
}

impl BirthShare {
    fn fraction(&self, n: usize) -> f64 {
        if n >= self.n_star {
            0.0
        } else if n == 0 {
            1.0
        } else {
            0.5
        }
    }
}

impl Intensity for BirthShare {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        Ok(self.total.evaluate(x)? * self.fraction(x.len()))
    }
    fn cardinality_only(&self) -> bool {
        self.total.cardinality_only()
    }
    fn describe(&self) -> String {
        format!("birth share of [{}]", self.total.describe())
    }
}

/// Complement of [`BirthShare`].
#[derive(Debug, Clone)]
pub struct DeathShare(pub BirthShare);

impl Intensity for DeathShare {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        Ok(self.0.total.evaluate(x)? * (1.0 - self.0.fraction(x.len())))
    }
    fn cardinality_only(&self) -> bool {
        self.0.total.cardinality_only()
    }
    fn describe(&self) -> String {
        format!("death share of [{}]", self.0.total.describe())
    }
}

/// Splits a total intensity into birth and death parts as [`BirthShare`] describes.
pub fn symmetric_split(total: IntensityRef, n_star: usize) -> (IntensityRef, IntensityRef) {
    let birth = BirthShare { total, n_star };
    (Arc::new(birth.clone()), Arc::new(DeathShare(birth)))
}

/// `inner(x) * 1{n(x) < n_star}`.
#[derive(Debug, Clone)]
pub struct BirthCap {
    pub inner: IntensityRef,
    pub n_star: usize,
}

pub fn capped(inner: IntensityRef, n_star: usize) -> IntensityRef {
    Arc::new(BirthCap { inner, n_star })
}

impl Intensity for BirthCap {
    fn evaluate(&self, x: &PointConfig) -> Result<f64> {
        if x.len() >= self.n_star {
            Ok(0.0)
        } else {
            self.inner.evaluate(x)
        }
    }
    fn cardinality_only(&self) -> bool {
        self.inner.cardinality_only()
    }
    fn describe(&self) -> String {
        format!("[{}] * 1{{n < {}}}", self.inner.describe(), self.n_star)
    }
}
