use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1};

use super::{PathSample, SimOptions};
use crate::error::{Error, Result};
use crate::geometry::PointConfig;
use crate::model::{ModelSpec, MoveProcess, PathMode, SimRng};

/// Advances the move process through a segment while storing path samples
/// on the absolute grid `k * path_dt`.
#[derive(Debug)]
pub struct PathRecorder {
    dt: Option<f64>,
    next_k: u64,
    samples: Vec<PathSample>,
    /// Candidate jump times proposed in this segment.
    pub proposals: u64,
}

impl PathRecorder {
    pub fn new(dt: Option<f64>, t0: f64) -> Self {
        let next_k = match dt {
            Some(dt) => {
                let mut k = (t0 / dt).floor().max(0.0) as u64;
                while k as f64 * dt <= t0 {
                    k += 1;
                }
                k
            }
            None => 0,
        };
        PathRecorder {
            dt,
            next_k,
            samples: Vec::new(),
            proposals: 0,
        }
    }

    /// Moves `y` from time `*t` to `s`, storing every grid sample strictly before `s`.
    pub fn advance_to(&mut self, motion: &dyn MoveProcess, y: &mut PointConfig, t: &mut f64, s: f64, rng: &mut SimRng) {
        if motion.is_static() {
            *t = s;
            return;
        }
        if let Some(dt) = self.dt {
            loop {
                let ts = self.next_k as f64 * dt;
                if ts >= s {
                    break;
                }
                if ts > *t {
                    motion.advance(y, ts - *t, rng);
                    *t = ts;
                }
                self.samples.push(PathSample {
                    time: ts,
                    config: y.clone(),
                });
                self.next_k += 1;
            }
        }
        if s > *t {
            motion.advance(y, s - *t, rng);
        }
        *t = t.max(s);
    }

    /// Drops samples at or after `tau` and returns the last remaining one after `after`.
    fn truncate_from(&mut self, tau: f64, after: f64) -> Option<&PathSample> {
        let keep = self.samples.partition_point(|p| p.time < tau);
        self.samples.truncate(keep);
        self.samples.last().filter(|p| p.time > after)
    }

    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<PathSample> {
        self.samples
    }
}

/// Draws the time of the next jump given the configuration at the start of a segment.
pub trait WaitingTimeSampler: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Rejects models the sampler cannot handle.
    fn check(&self, _m: &ModelSpec) -> Result<()> {
        Ok(())
    }

    /// Moves `y` from `t0` until the next jump, returning its time with `y`
    /// holding the pre-jump configuration, or `None` with `y` at the horizon.
    fn next_jump(
        &self,
        m: &ModelSpec,
        y: &mut PointConfig,
        t0: f64,
        horizon: f64,
        rec: &mut PathRecorder,
        rng: &mut SimRng,
    ) -> Result<Option<f64>>;
}

/// Exact sampler: proposals at a dominating rate, accepted with probability `alpha/bound`.
#[derive(Debug, Clone)]
pub struct ThinningSampler {
    pub max_proposals: f64,
}

impl WaitingTimeSampler for ThinningSampler {
    fn name(&self) -> &'static str {
        "thinning"
    }

    fn check(&self, m: &ModelSpec) -> Result<()> {
        if m.motion.mode() == PathMode::FixedGridOnly && !m.motion.is_static() {
            return Err(Error::config(
                "the move process can only be sampled on a fixed grid; use the grid sampler",
            ));
        }
        Ok(())
    }

    fn next_jump(
        &self,
        m: &ModelSpec,
        y: &mut PointConfig,
        t0: f64,
        horizon: f64,
        rec: &mut PathRecorder,
        rng: &mut SimRng,
    ) -> Result<Option<f64>> {
        let bound = m.segment_bound(y)?;
        let mut t = t0;
        if !(bound > 0.0) {
            rec.advance_to(m.motion.as_ref(), y, &mut t, horizon, rng);
            return Ok(None);
        }
        if !m.alpha_constant_between_jumps() && bound * (horizon - t0) > self.max_proposals {
            return Err(Error::config(format!(
                "thinning against bound {bound:.3e} needs about {:.3e} proposals; use the grid sampler",
                bound * (horizon - t0)
            )));
        }
        let exp = Exp::new(bound).map_err(|e| Error::domain(e.to_string()))?;
        loop {
            let s = t + exp.sample(rng);
            if s >= horizon {
                rec.advance_to(m.motion.as_ref(), y, &mut t, horizon, rng);
                return Ok(None);
            }
            rec.advance_to(m.motion.as_ref(), y, &mut t, s, rng);
            rec.proposals += 1;
            let a = m.alpha(y)?;
            if a > bound * (1.0 + 1e-12) {
                return Err(Error::ModelBound { value: a, bound });
            }
            let u: f64 = rng.random();
            if u * bound < a {
                return Ok(Some(s));
            }
        }
    }
}

/// Fallback sampler: trapezoid hazard on a time grid, inverted against an `Exp(1)` draw.
#[derive(Debug, Clone)]
pub struct GridSampler {
    pub grid_dt: f64,
    pub epsilon: f64,
}

impl GridSampler {
    /// Length of the simulation windows, beyond which no jump happens with probability `< eps`.
    pub fn tau_max(&self, m: &ModelSpec) -> f64 {
        (1.0 / self.epsilon).ln() / m.alpha_lower
    }
}

impl WaitingTimeSampler for GridSampler {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn check(&self, m: &ModelSpec) -> Result<()> {
        if !(self.grid_dt > 0.0) || !(self.epsilon > 0.0 && self.epsilon < 1.0) || !(m.alpha_lower > 0.0) {
            return Err(Error::config("grid sampler needs grid_dt > 0, 0 < epsilon < 1 and alpha_lower > 0"));
        }
        Ok(())
    }

    fn next_jump(
        &self,
        m: &ModelSpec,
        y: &mut PointConfig,
        t0: f64,
        horizon: f64,
        rec: &mut PathRecorder,
        rng: &mut SimRng,
    ) -> Result<Option<f64>> {
        let motion = m.motion.as_ref();
        let exact = motion.mode() == PathMode::ExactAnyTime;
        let target: f64 = Exp1.sample(rng);
        let tau_max = self.tau_max(m);
        let mut hazard = 0.0;
        let mut t = t0;
        let mut a_prev = m.alpha(y)?;
        while t < horizon {
            let window_end = (t + tau_max).min(horizon);
            let steps = ((window_end - t) / self.grid_dt).ceil().max(1.0) as u64;
            let w0 = t;
            for k in 1..=steps {
                let s = if k == steps { window_end } else { w0 + k as f64 * self.grid_dt };
                let (t_prev, y_prev) = (t, y.clone());
                rec.advance_to(motion, y, &mut t, s, rng);
                let a_new = m.alpha(y)?;
                let inc = 0.5 * (a_prev + a_new) * (s - t_prev);
                if hazard + inc >= target && inc > 0.0 {
                    let tau = t_prev + (target - hazard) / inc * (s - t_prev);
                    // Restart from the last state known before tau.
                    let (t_base, base) = match rec.truncate_from(tau, t_prev) {
                        Some(p) => (p.time, p.config.clone()),
                        None => (t_prev, y_prev),
                    };
                    *y = base;
                    if exact && tau > t_base {
                        motion.advance(y, tau - t_base, rng);
                    }
                    return Ok(Some(tau));
                }
                hazard += inc;
                a_prev = a_new;
            }
        }
        Ok(None)
    }
}

type Factory = fn(&SimOptions) -> Arc<dyn WaitingTimeSampler>;

fn registry() -> [(&'static str, Factory); 2] {
    [
        ("thinning", |o| {
            Arc::new(ThinningSampler {
                max_proposals: o.max_proposals,
            })
        }),
        ("grid", |o| {
            Arc::new(GridSampler {
                grid_dt: o.grid_dt,
                epsilon: o.epsilon,
            })
        }),
    ]
}

pub fn sampler_names() -> Vec<&'static str> {
    registry().iter().map(|(n, _)| *n).collect()
}

pub fn sampler_by_name(name: &str, opts: &SimOptions) -> Result<Arc<dyn WaitingTimeSampler>> {
    registry()
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| f(opts))
        .ok_or_else(|| Error::UnknownName {
            kind: "sampler",
            name: name.into(),
            available: sampler_names().join(", "),
        })
}

/// One waiting time drawn from `y0`.
#[derive(Debug, Clone)]
pub struct WaitingTime {
    /// Jump time, `f64::INFINITY` when no jump occurs before the horizon.
    pub tau: f64,
    /// Configuration at `min(tau, horizon)`.
    pub config: PointConfig,
    pub samples: Vec<PathSample>,
    pub proposals: u64,
}

pub fn sample_waiting_time(
    m: &ModelSpec,
    y0: &PointConfig,
    horizon: f64,
    opts: &SimOptions,
    rng: &mut SimRng,
) -> Result<WaitingTime> {
    let sampler = sampler_by_name(&opts.sampler, opts)?;
    sampler.check(m)?;
    let mut y = y0.clone();
    let mut rec = PathRecorder::new(opts.path_dt, 0.0);
    let tau = sampler.next_jump(m, &mut y, 0.0, horizon, &mut rec, rng)?;
    let proposals = rec.proposals;
    Ok(WaitingTime {
        tau: tau.unwrap_or(f64::INFINITY),
        config: y,
        samples: rec.into_samples(),
        proposals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::model::{brownian_move, identity_move, uniform_birth_kernel, uniform_death_kernel, Boundary, CardinalityFn};
    use crate::stats::ks_one_sample;
    use rand::SeedableRng;

    fn constant_model(rate: f64, upper: f64) -> ModelSpec {
        let w = Window::unit_square();
        ModelSpec {
            name: "constant".into(),
            birth: CardinalityFn::new("half", move |n| if n < 10 { rate / 2.0 } else { 0.0 }),
            death: CardinalityFn::new("half", move |n| if n == 0 { 0.0 } else if n < 10 { rate / 2.0 } else { rate }),
            birth_kernel: uniform_birth_kernel(w.clone()),
            death_kernel: uniform_death_kernel(),
            motion: identity_move(),
            window: w,
            n_star: 10,
            alpha_lower: rate / 2.0,
            alpha_upper: upper,
        }
    }

    #[test]
    fn thinning_acceptance_rate() {
        // Force the dominating rate to the global bound by giving the model a moving part.
        let mut m = constant_model(2.0, 4.0);
        m.motion = brownian_move(1e-3, Boundary::Reflect(m.window.clone()));
        m.birth = crate::model::maxarea_intensity(1e-12, 1.0, m.window.clone());
        m.death = CardinalityFn::new("one", |n| if n == 0 { 0.0 } else { 1.0 });
        let y0 = PointConfig::from_xy(&[(0.2, 0.2), (0.7, 0.4), (0.5, 0.9)]);
        let opts = SimOptions::default().with_path_dt(None);
        let mut rng = SimRng::seed_from_u64(8);
        let (mut props, mut jumps) = (0u64, 0u64);
        while props < 10_000 {
            let w = sample_waiting_time(&m, &y0, 1e4, &opts, &mut rng).unwrap();
            props += w.proposals;
            jumps += 1;
        }
        let rate = jumps as f64 / props as f64;
        assert!((rate - 0.5).abs() < 0.02, "{rate}");
    }

    #[test]
    fn constant_rate_is_exponential() {
        let m = constant_model(2.0, 2.0);
        let y0 = PointConfig::from_xy(&[(0.5, 0.5)]);
        let mut rng = SimRng::seed_from_u64(3);
        for sampler in ["thinning", "grid"] {
            let opts = SimOptions::default().with_sampler(sampler);
            let taus: Vec<f64> = (0..3000)
                .map(|_| sample_waiting_time(&m, &y0, 1e9, &opts, &mut rng).unwrap().tau)
                .collect();
            let ks = ks_one_sample(&taus, |t| 1.0 - (-2.0 * t).exp());
            assert!(ks.p_value > 0.01, "{sampler}: {ks:?}");
        }
    }

    #[test]
    fn censoring_beyond_horizon() {
        let m = constant_model(1e-3, 1e-3);
        let y0 = PointConfig::from_xy(&[(0.5, 0.5)]);
        let mut rng = SimRng::seed_from_u64(1);
        let w = sample_waiting_time(&m, &y0, 1e-3, &SimOptions::default(), &mut rng).unwrap();
        assert!(w.tau > 1e-3);
    }

    #[test]
    fn recorder_grid() {
        let motion = brownian_move(0.1, Boundary::None);
        let mut rng = SimRng::seed_from_u64(1);
        let mut y = PointConfig::from_xy(&[(0.0, 0.0)]);
        let mut rec = PathRecorder::new(Some(0.25), 0.1);
        let mut t = 0.1;
        rec.advance_to(motion.as_ref(), &mut y, &mut t, 1.0, &mut rng);
        let times: Vec<f64> = rec.samples().iter().map(|p| p.time).collect();
        assert_eq!(times, vec![0.25, 0.5, 0.75]);
        assert_eq!(t, 1.0);
    }

    #[test]
    fn unknown_sampler() {
        let err = sampler_by_name("euler", &SimOptions::default()).unwrap_err();
        assert!(err.to_string().contains("thinning"));
    }
}
