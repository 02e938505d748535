mod common;

use bdmove::analysis::{ccf, query_jump_indices, SeriesPair};
use bdmove::bandwidth::{evenly_spaced_groups, CvWorkspace};
use bdmove::estimate::{
    estimate_continuous, estimate_discrete, strategy_by_name, strategy_names, Design, DistanceStrategy, KernelSpec,
    Proximity, StrategyRef, Target,
};
use bdmove::geometry::{delaunay, hausdorff, max_cell_area, optimal_matching, PointConfig, Window};
use bdmove::io::{read_frames_from, read_trajectory_from, write_frames_to, write_trajectory_to, FramesOptions};
use bdmove::model::{CardinalityPreset, JumpKind, MaxAreaPreset, Preset};
use bdmove::simulate::{discretize, regular_times, simulate, simulate_preset, SimOptions};
use common::*;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

fn config(lo: usize, hi: usize) -> impl Strategy<Value = PointConfig> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), lo..=hi).prop_map(|v| PointConfig::from_xy(&v))
}

fn shuffled(x: &PointConfig, seed: u64) -> PointConfig {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    let mut s = seed;
    for i in (1..perm.len()).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        perm.swap(i, (s >> 33) as usize % (i + 1));
    }
    x.permuted(&perm)
}

/// Delegates to a strategy but hides that it only reads summaries, which
/// forces cross-validation through the point-by-point path.
#[derive(Debug)]
struct Pointwise(StrategyRef);

impl DistanceStrategy for Pointwise {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn prepare(&self, x: &PointConfig) -> bdmove::Result<Vec<f64>> {
        self.0.prepare(x)
    }
    fn proximity(&self, x: &PointConfig, fx: &[f64], y: &PointConfig, fy: &[f64]) -> bdmove::Result<Proximity> {
        self.0.proximity(x, fx, y, fy)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hausdorff_is_a_metric(x in config(1, 6), y in config(1, 6), z in config(1, 6)) {
        let h = |a: &PointConfig, b: &PointConfig| hausdorff(a, b).unwrap();
        prop_assert_eq!(h(&x, &x), 0.0);
        prop_assert!((h(&x, &y) - h(&y, &x)).abs() <= 1e-12);
        prop_assert!(h(&x, &z) <= h(&x, &y) + h(&y, &z) + 1e-9);
        prop_assert!(h(&x, &y) > 0.0);
        prop_assert!((h(&x, &y) - naive_hausdorff(&x, &y)).abs() <= 1e-12);
    }

    #[test]
    fn matching_bounds_symmetry_and_enumeration(x in config(0, 4), y in config(0, 4), kappa in 0.05..2.0f64) {
        let d = optimal_matching(&x, &y, kappa).unwrap();
        prop_assert!((0.0..=kappa + 1e-12).contains(&d));
        prop_assert!((d - optimal_matching(&y, &x, kappa).unwrap()).abs() <= 1e-12);
        prop_assert!((d - naive_matching(&x, &y, kappa)).abs() <= 1e-12);
    }

    #[test]
    fn matching_triangle_inequality(x in config(0, 7), y in config(0, 7), z in config(0, 7)) {
        let k = std::f64::consts::SQRT_2;
        let d = |a: &PointConfig, b: &PointConfig| optimal_matching(a, b, k).unwrap();
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
    }

    #[test]
    fn distances_and_features_ignore_point_order(x in config(1, 12), y in config(1, 12), seed in any::<u64>()) {
        let (xs, ys) = (shuffled(&x, seed), shuffled(&y, seed ^ 0x9e37));
        prop_assert_eq!(hausdorff(&x, &y).unwrap(), hausdorff(&xs, &ys).unwrap());
        prop_assert!((optimal_matching(&x, &y, 1.0).unwrap() - optimal_matching(&xs, &ys, 1.0).unwrap()).abs() <= 1e-12);
        let w = Window::unit_square();
        prop_assert!((max_cell_area(&x, &w).unwrap() - max_cell_area(&xs, &w).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn delaunay_cells_are_empty_and_cover_the_square(x in config(0, 40)) {
        let t = delaunay(&x, &Window::unit_square(), true).unwrap();
        prop_assert!((t.total_area() - 1.0).abs() <= 1e-9);
        prop_assert!(t.areas.iter().all(|a| *a >= 0.0));
        for tri in &t.triangles {
            let [a, b, c] = tri.map(|i| t.vertices[i]);
            for (i, p) in t.vertices.iter().enumerate() {
                if tri.contains(&i) {
                    continue;
                }
                let m = [[a[0] - p[0], a[1] - p[1]], [b[0] - p[0], b[1] - p[1]], [c[0] - p[0], c[1] - p[1]]];
                let l = m.map(|r| r[0] * r[0] + r[1] * r[1]);
                let det = l[0] * (m[1][0] * m[2][1] - m[2][0] * m[1][1]) - l[1] * (m[0][0] * m[2][1] - m[2][0] * m[0][1])
                    + l[2] * (m[0][0] * m[1][1] - m[1][0] * m[0][1]);
                prop_assert!(det <= 1e-12, "vertex {} inside a circumcircle ({})", i, det);
            }
        }
    }

    #[test]
    fn ccf_is_bounded_and_antisymmetric(a in prop::collection::vec(-5.0..5.0f64, 12..40), shift in 0usize..5) {
        let n = a.len();
        let b: Vec<f64> = (0..n).map(|j| a[(j + shift) % n] * 0.5 + (j as f64).sin()).collect();
        let times: Vec<f64> = (0..n).map(|j| j as f64).collect();
        let ab = ccf(&SeriesPair::new(a.clone(), b.clone(), times.clone()).unwrap(), 5).unwrap();
        let ba = ccf(&SeriesPair::new(b, a.clone(), times.clone()).unwrap(), 5).unwrap();
        for (lag, v) in &ab {
            let w = ba.iter().find(|(l, _)| l == &-lag).unwrap().1;
            prop_assert_eq!(v.is_some(), w.is_some());
            if let (Some(v), Some(w)) = (v, w) {
                prop_assert!((-1.0..=1.0).contains(v));
                prop_assert!((v - w).abs() <= 1e-12);
            }
        }
        let aa = ccf(&SeriesPair::new(a.clone(), a, times).unwrap(), 0).unwrap();
        if let Some(v) = aa[0].1 {
            prop_assert!((v - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn query_indices_are_sorted_and_in_range(n_jumps in 1usize..5000, n in 1usize..200) {
        let idx = query_jump_indices(n_jumps, n);
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(idx.iter().all(|&j| (1..=n_jumps).contains(&j)));
        prop_assert_eq!(idx.len(), n.min(n_jumps));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jumps_change_cardinality_by_one(seed in any::<u64>(), lambda in 0.5..4.0f64, mu in 0.1..1.0f64) {
        let m = birth_death_model(lambda, mu, 12);
        let tr = simulate(&m, &PointConfig::empty(2), 30.0, seed, &SimOptions::default()).unwrap();
        tr.check().unwrap();
        let mut prev = tr.initial_config.clone();
        let mut t = 0.0;
        for e in &tr.jumps {
            prop_assert!(e.time > t && e.time < tr.horizon);
            t = e.time;
            prop_assert_eq!(&e.pre_config, &prev);
            let step = e.post_config.len() as i64 - e.pre_config.len() as i64;
            prop_assert_eq!(step, if e.kind == JumpKind::Birth { 1 } else { -1 });
            prop_assert!(e.post_config.len() <= 12);
            if e.kind == JumpKind::Birth {
                prop_assert!(e.pre_config.points().all(|p| e.post_config.points().any(|q| q == p)));
            } else {
                prop_assert!(!e.pre_config.is_empty());
                prop_assert!(e.post_config.points().all(|p| e.pre_config.points().any(|q| q == p)));
            }
            prev = e.post_config.clone();
        }
    }

    #[test]
    fn moving_segments_keep_cardinality_and_window(seed in 0u64..1000) {
        let p = CardinalityPreset::default();
        let tr = simulate_preset(&p, 3.0, seed, &SimOptions::default().with_path_dt(Some(0.1))).unwrap();
        let w = p.model().window;
        for j in 0..tr.n_segments() {
            let nodes = tr.segment_nodes(j);
            let n = nodes[0].1.len();
            prop_assert!(nodes.iter().all(|(_, x)| x.len() == n && x.points().all(|q| w.contains(q))));
            let (t0, t1) = (nodes[0].0, nodes[nodes.len() - 1].0);
            for s in &tr.segments[j] {
                prop_assert!(s.time > t0 && s.time < t1 || (s.time == t0 && j == 0));
            }
        }
    }

    #[test]
    fn decomposition_and_scaling_on_random_trajectories(seed in any::<u64>(), h in 0.05..3.0f64, c in 0.01..100.0f64) {
        let tr = simulate(&birth_death_model(3.0, 0.5, 15), &PointConfig::empty(2), 15.0, seed, &SimOptions::default()).unwrap();
        let queries: Vec<PointConfig> = tr.jumps.iter().take(8).map(|e| e.pre_config.clone()).collect();
        let fs = discretize(&tr, &regular_times(tr.horizon, 30)).unwrap();
        for name in strategy_names() {
            let ks = KernelSpec::new(strategy_by_name(name, &Window::unit_square()).unwrap(), h).unwrap();
            for cont in [true, false] {
                let e = |ks: &KernelSpec, t| {
                    if cont { estimate_continuous(&tr, ks, &queries, t).unwrap() } else { estimate_discrete(&fs, ks, &queries, t).unwrap() }
                };
                let (a, b, d) = (e(&ks, Target::Alpha), e(&ks, Target::Beta), e(&ks, Target::Delta));
                let scaled = e(&ks.clone().with_scale(c), Target::Alpha);
                for i in 0..queries.len() {
                    prop_assert!(a.values[i].is_finite() && a.values[i] >= 0.0);
                    prop_assert_eq!(a.undefined[i], a.occupation[i] == 0.0);
                    prop_assert!((a.values[i] - b.values[i] - d.values[i]).abs() <= 1e-12 * a.values[i].max(1.0));
                    prop_assert!((a.values[i] - scaled.values[i]).abs() <= 1e-12 * a.values[i].max(1.0));
                }
            }
        }
    }

    #[test]
    fn class_and_point_cross_validation_agree(seed in any::<u64>(), k in 1usize..8) {
        let tr = simulate(&birth_death_model(3.0, 0.5, 15), &PointConfig::empty(2), 15.0, seed, &SimOptions::default()).unwrap();
        prop_assume!(tr.n_jumps() >= 2);
        let fs = discretize(&tr, &regular_times(tr.horizon, 40)).unwrap();
        let grid = [0.2, 0.7, 2.0, 9.0];
        for name in ["card-smooth", "feature-cardinality"] {
            let fast = strategy_by_name(name, &Window::unit_square()).unwrap();
            let slow: StrategyRef = std::sync::Arc::new(Pointwise(fast.clone()));
            let ks = KernelSpec::new(fast.clone(), 1.0).unwrap();
            for cont in [true, false] {
                let design = || if cont { Design::continuous(&tr) } else { Design::discrete(&fs).unwrap() };
                let groups = evenly_spaced_groups(design().groups.len(), k);
                for t in [Target::Alpha, Target::Beta, Target::Delta] {
                    let pairs = [
                        (CvWorkspace::new(design(), fast.clone()).unwrap(), CvWorkspace::new(design(), slow.clone()).unwrap()),
                        (
                            CvWorkspace::sampled(design(), fast.clone(), &groups).unwrap(),
                            CvWorkspace::sampled(design(), slow.clone(), &groups).unwrap(),
                        ),
                    ];
                    for (a, b) in &pairs {
                        let (u, v) = (a.objectives(&ks, &grid, t).unwrap(), b.objectives(&ks, &grid, t).unwrap());
                        for (x, y) in u.iter().zip(&v) {
                            prop_assert!(x == y || (x - y).abs() <= 1e-12 * x.abs().max(1.0), "{name} {cont} {t:?}: {u:?} vs {v:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn estimates_ignore_point_order(seed in 0u64..500) {
        let p = CardinalityPreset::default();
        let tr = simulate_preset(&p, 2.0, seed, &SimOptions::default().with_path_dt(None)).unwrap();
        let queries: Vec<PointConfig> = tr.jumps.iter().take(3).map(|e| e.pre_config.clone()).collect();
        let shuffled_q: Vec<PointConfig> = queries.iter().map(|q| shuffled(q, seed)).collect();
        for name in ["hausdorff", "matching", "card-smooth", "feature-maxarea"] {
            let ks = KernelSpec::new(strategy_by_name(name, &p.model().window).unwrap(), 0.3).unwrap();
            let a = estimate_continuous(&tr, &ks, &queries, Target::Alpha).unwrap();
            let b = estimate_continuous(&tr, &ks, &shuffled_q, Target::Alpha).unwrap();
            for (u, v) in a.values.iter().zip(&b.values) {
                prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn trajectory_and_frame_files_round_trip(seed in 0u64..10_000) {
        let tr = simulate_preset(&CardinalityPreset::default(), 1.0, seed, &SimOptions::default().with_path_dt(Some(0.25))).unwrap();
        let mut buf = Vec::new();
        write_trajectory_to(&tr, &BTreeMap::new(), &mut buf).unwrap();
        prop_assert_eq!(&read_trajectory_from(buf.as_slice(), Path::new("t")).unwrap().0, &tr);
        let fs = discretize(&tr, &regular_times(tr.horizon, 4)).unwrap();
        let mut buf = Vec::new();
        write_frames_to(&fs, &mut buf).unwrap();
        prop_assert_eq!(read_frames_from(buf.as_slice(), Path::new("f"), &FramesOptions::default()).unwrap(), fs);
    }
}

#[test]
fn rates_respect_declared_bounds() {
    let mut r = rng(9);
    for p in [&CardinalityPreset::default() as &dyn Preset, &MaxAreaPreset::default()] {
        let m = p.model();
        assert_eq!(m.death.evaluate(&PointConfig::empty(2)).unwrap(), 0.0);
        for n in [0usize, 1, 5, 50, 200, 999, 1000] {
            let x = random_config(&mut r, n);
            let (b, d) = m.rates(&x).unwrap();
            assert!(b >= 0.0 && d >= 0.0);
            assert!(b + d <= m.alpha_upper * (1.0 + 1e-12), "{} at n = {n}", p.name());
            if n >= m.n_star {
                assert_eq!(b, 0.0);
            }
        }
    }
}

#[test]
fn kernels_add_or_remove_exactly_one_point() {
    let mut r = rng(10);
    for p in [&CardinalityPreset::default() as &dyn Preset, &MaxAreaPreset::default()] {
        let m = p.model();
        for n in [0usize, 1, 3, 30] {
            let x = random_config(&mut r, n);
            let born = m.birth_kernel.sample(&x, 1_000_000, &mut r).unwrap();
            assert_eq!(born.config.len(), n + 1);
            assert_eq!(born.changed, 1_000_000);
            assert!(x.points().all(|p| born.config.points().any(|q| q == p)));
            assert!(born.config.points().all(|q| m.window.contains(q)));
            if n > 0 {
                let died = m.death_kernel.sample(&x, 0, &mut r).unwrap();
                assert_eq!(died.config.len(), n - 1);
                assert!(x.position_of(died.changed).is_some());
                assert!(died.config.position_of(died.changed).is_none());
            }
        }
    }
}
