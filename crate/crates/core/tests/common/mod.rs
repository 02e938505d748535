//! Naive reimplementations used as oracles by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use bdmove::geometry::{PointConfig, Window};
use bdmove::model::{
    identity_move, uniform_birth_kernel, uniform_death_kernel, CardinalityFn, ModelSpec, SimRng,
};
use bdmove::simulate::{FrameSequence, Trajectory};
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn random_config(rng: &mut SimRng, n: usize) -> PointConfig {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    PointConfig::from_xy(&pts)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

/// max over both directions of the distance to the nearest point.
pub fn naive_hausdorff(x: &PointConfig, y: &PointConfig) -> f64 {
    let directed = |a: &PointConfig, b: &PointConfig| {
        a.points()
            .map(|u| b.points().map(|v| dist(u, v)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(x, y).max(directed(y, x))
}

/// Optimal matching distance by enumerating every injection of the smaller
/// configuration into the larger one.
pub fn naive_matching(x: &PointConfig, y: &PointConfig, kappa: f64) -> f64 {
    let (s, l) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    if l.is_empty() {
        return 0.0;
    }
    fn best(s: &PointConfig, l: &PointConfig, i: usize, used: &mut Vec<bool>, kappa: f64) -> f64 {
        if i == s.len() {
            return 0.0;
        }
        let mut b = f64::INFINITY;
        for j in 0..l.len() {
            if !used[j] {
                used[j] = true;
                let c = dist(s.point(i), l.point(j)).min(kappa) + best(s, l, i + 1, used, kappa);
                used[j] = false;
                b = b.min(c);
            }
        }
        b
    }
    let matched = best(s, l, 0, &mut vec![false; l.len()], kappa);
    (matched + kappa * (l.len() - s.len()) as f64) / l.len() as f64
}

/// Birth rate `lambda` below `n_star`, death rate `mu` per point, points frozen.
pub fn birth_death_model(lambda: f64, mu: f64, n_star: usize) -> ModelSpec {
    let w = Window::unit_square();
    ModelSpec {
        name: "birth-death".into(),
        birth: CardinalityFn::new("lambda", move |n| if n < n_star { lambda } else { 0.0 }),
        death: CardinalityFn::new("n mu", move |n| n as f64 * mu),
        birth_kernel: uniform_birth_kernel(w.clone()),
        death_kernel: uniform_death_kernel(),
        motion: identity_move(),
        window: w,
        n_star,
        alpha_lower: lambda.min(mu * n_star as f64),
        alpha_upper: lambda + mu * n_star as f64,
    }
}

pub fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Which jumps a naive objective counts.
#[derive(Clone, Copy, PartialEq)]
pub enum Kind {
    All,
    Births,
    Deaths,
}

/// Leave-one-segment-out partial likelihood of a continuous trajectory:
/// for each segment `j`, the estimator built from the other segments is
/// evaluated at the pre-jump state (log term) and integrated along the
/// segment by the trapezoid rule over its stored states.
pub fn naive_cv_continuous(tr: &Trajectory, kernel: &dyn Fn(&PointConfig, &PointConfig) -> f64, kind: Kind) -> f64 {
    let segs: Vec<Vec<(f64, PointConfig)>> = (0..tr.n_segments())
        .map(|j| tr.segment_nodes(j).into_iter().map(|(t, x)| (t, x.clone())).collect())
        .collect();
    let counts = |j: usize| -> f64 {
        match tr.jumps.get(j) {
            None => 0.0,
            Some(e) => {
                let birth = e.post_config.len() > e.pre_config.len();
                match kind {
                    Kind::All => 1.0,
                    Kind::Births => f64::from(u8::from(birth)),
                    Kind::Deaths => f64::from(u8::from(!birth)),
                }
            }
        }
    };
    let leave_out = |j: usize, x: &PointConfig| -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (k, nodes) in segs.iter().enumerate() {
            if k == j {
                continue;
            }
            num += counts(k) * kernel(x, &nodes.last().unwrap().1);
            for w in nodes.windows(2) {
                den += 0.5 * (w[1].0 - w[0].0) * (kernel(x, &w[0].1) + kernel(x, &w[1].1));
            }
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    let mut obj = 0.0;
    for (j, nodes) in segs.iter().enumerate() {
        let c = counts(j);
        if c > 0.0 {
            obj += c * leave_out(j, &nodes.last().unwrap().1).ln();
        }
        let vals: Vec<f64> = nodes.iter().map(|(_, x)| leave_out(j, x)).collect();
        for (w, v) in nodes.windows(2).zip(vals.windows(2)) {
            obj -= 0.5 * (w[1].0 - w[0].0) * (v[0] + v[1]);
        }
    }
    obj
}

/// Jump counts between consecutive frames from track identities.
pub fn naive_counts(fs: &FrameSequence, j: usize) -> (f64, f64) {
    let a: HashSet<u64> = fs.configs[j - 1].ids().iter().copied().collect();
    let b: HashSet<u64> = fs.configs[j].ids().iter().copied().collect();
    (b.difference(&a).count() as f64, a.difference(&b).count() as f64)
}

/// Leave-one-interval-out partial likelihood of a frame sequence.
pub fn naive_cv_discrete(fs: &FrameSequence, kernel: &dyn Fn(&PointConfig, &PointConfig) -> f64, kind: Kind) -> f64 {
    let m = fs.len() - 1;
    let d: Vec<f64> = (1..=m)
        .map(|j| {
            let (b, dd) = naive_counts(fs, j);
            match kind {
                Kind::All => b + dd,
                Kind::Births => b,
                Kind::Deaths => dd,
            }
        })
        .collect();
    let mut obj = 0.0;
    for j in 0..m {
        let x = &fs.configs[j];
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..m {
            if k != j {
                let kv = kernel(x, &fs.configs[k]);
                num += d[k] * kv;
                den += (fs.times[k + 1] - fs.times[k]) * kv;
            }
        }
        let a = if den == 0.0 { 0.0 } else { num / den };
        if d[j] > 0.0 {
            obj += d[j] * a.ln();
        }
        obj -= (fs.times[j + 1] - fs.times[j]) * a;
    }
    obj
}
