use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::SimRng;
use crate::geometry::{PointConfig, Window};

/// How the move process can be sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Transition law available for any duration.
    ExactAnyTime,
    /// Only a fixed-step discretisation is available.
    FixedGridOnly,
}

/// Continuous Markov motion of all points between jumps. Must preserve cardinality and identities.
pub trait MoveProcess: Send + Sync + fmt::Debug {
    fn advance(&self, x: &mut PointConfig, dt: f64, rng: &mut SimRng);

    fn mode(&self) -> PathMode {
        PathMode::ExactAnyTime
    }

    /// True when `advance` never changes the configuration.
    fn is_static(&self) -> bool {
        false
    }
}

pub type MoveProcessRef = Arc<dyn MoveProcess>;

/// Points do not move: the process is a pure spatial birth-death process.
#[derive(Debug, Clone, Copy, Default)]
pub struct StaticMove;

pub fn identity_move() -> MoveProcessRef {
    Arc::new(StaticMove)
}

impl MoveProcess for StaticMove {
    fn advance(&self, _x: &mut PointConfig, _dt: f64, _rng: &mut SimRng) {}
    fn is_static(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    None,
    Reflect(Window),
}

/// Independent Brownian motions: each coordinate moves by `N(0, sigma^2 dt)` over `dt`.
#[derive(Debug, Clone)]
pub struct Brownian {
    pub sigma: f64,
    pub boundary: Boundary,
}

pub fn brownian_move(sigma: f64, boundary: Boundary) -> MoveProcessRef {
    assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be finite and nonnegative");
    Arc::new(Brownian { sigma, boundary })
}

impl MoveProcess for Brownian {
    fn advance(&self, x: &mut PointConfig, dt: f64, rng: &mut SimRng) {
        if self.sigma == 0.0 || dt <= 0.0 || x.is_empty() {
            return;
        }
        let sd = self.sigma * dt.sqrt();
        for v in x.coords_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += sd * z;
        }
        if let Boundary::Reflect(w) = &self.boundary {
            for i in 0..x.len() {
                w.reflect(x.point_mut(i));
            }
        }
    }

    fn is_static(&self) -> bool {
        self.sigma == 0.0
    }
}
