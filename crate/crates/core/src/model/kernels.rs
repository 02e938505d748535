use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimRng;
use crate::error::{Error, Result};
use crate::geometry::{delaunay, PointConfig, PointId, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpKind {
    Birth,
    Death,
}

/// Post-jump configuration and the identity of the born or removed point.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDraw {
    pub config: PointConfig,
    pub changed: PointId,
}

/// Law of the configuration right after a birth or a death.
pub trait TransitionKernel: Send + Sync + fmt::Debug {
    fn kind(&self) -> JumpKind;

    /// Draws the post-jump configuration from `x`. A birth gives its new
    /// point the identity `next_id`.
    fn sample(&self, x: &PointConfig, next_id: PointId, rng: &mut SimRng) -> Result<KernelDraw>;
}

pub type TransitionKernelRef = Arc<dyn TransitionKernel>;

/// New point uniform in the window.
#[derive(Debug, Clone)]
pub struct UniformBirth {
    pub window: Window,
}

pub fn uniform_birth_kernel(window: Window) -> TransitionKernelRef {
    Arc::new(UniformBirth { window })
}

impl TransitionKernel for UniformBirth {
    fn kind(&self) -> JumpKind {
        JumpKind::Birth
    }

    fn sample(&self, x: &PointConfig, next_id: PointId, rng: &mut SimRng) -> Result<KernelDraw> {
        let p: Vec<f64> = self
            .window
            .lower()
            .iter()
            .zip(self.window.upper())
            .map(|(l, u)| rng.random_range(*l..*u))
            .collect();
        let mut config = x.clone();
        config.try_push(&p, next_id)?;
        Ok(KernelDraw {
            config,
            changed: next_id,
        })
    }
}

/// Removes one existing point chosen uniformly.
#[derive(Debug, Clone, Default)]
pub struct UniformDeath;

pub fn uniform_death_kernel() -> TransitionKernelRef {
    Arc::new(UniformDeath)
}

impl TransitionKernel for UniformDeath {
    fn kind(&self) -> JumpKind {
        JumpKind::Death
    }

    fn sample(&self, x: &PointConfig, _next_id: PointId, rng: &mut SimRng) -> Result<KernelDraw> {
        if x.is_empty() {
            return Err(Error::domain("death requested from the empty configuration"));
        }
        let k = rng.random_range(0..x.len());
        let mut config = x.clone();
        let (_, changed) = config.remove(k);
        Ok(KernelDraw { config, changed })
    }
}

/// Chooses a cell of the corners-augmented Delaunay tessellation with
/// probability proportional to its area, then places the new point
/// uniformly inside it.
#[derive(Debug, Clone)]
pub struct DelaunayAreaBirth {
    pub window: Window,
}

pub fn delaunay_area_birth_kernel(window: Window) -> TransitionKernelRef {
    Arc::new(DelaunayAreaBirth { window })
}

impl DelaunayAreaBirth {
    /// Returns the selected triangle's vertices and the new point.
    pub fn sample_point(&self, x: &PointConfig, rng: &mut SimRng) -> Result<([[f64; 2]; 3], [f64; 2])> {
        let tess = delaunay(x, &self.window, true)?;
        let total = tess.total_area();
        let mut target = rng.random::<f64>() * total;
        let mut chosen = tess.triangles.len() - 1;
        for (i, a) in tess.areas.iter().enumerate() {
            if target < *a {
                chosen = i;
                break;
            }
            target -= a;
        }
        let t = tess.triangles[chosen];
        let (a, b, c) = (tess.vertices[t[0]], tess.vertices[t[1]], tess.vertices[t[2]]);
        // Uniform point in a triangle via the square-root parametrisation.
        let r1: f64 = rng.random::<f64>().sqrt();
        let r2: f64 = rng.random();
        let wa = 1.0 - r1;
        let wb = r1 * (1.0 - r2);
        let wc = r1 * r2;
        let p = [
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
        ];
        Ok(([a, b, c], p))
    }
}

impl TransitionKernel for DelaunayAreaBirth {
    fn kind(&self) -> JumpKind {
        JumpKind::Birth
    }

    fn sample(&self, x: &PointConfig, next_id: PointId, rng: &mut SimRng) -> Result<KernelDraw> {
        let (_, p) = self.sample_point(x, rng)?;
        let mut config = x.clone();
        config.try_push(&p, next_id)?;
        Ok(KernelDraw {
            config,
            changed: next_id,
        })
    }
}
