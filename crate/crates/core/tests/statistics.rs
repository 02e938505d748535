//! Seeded distributional checks of the simulator and limits of the estimators.

mod common;

use bdmove::estimate::{estimate_continuous, strategy_by_name, KernelSpec, Target};
use bdmove::geometry::{PointConfig, Window};
use bdmove::model::{
    brownian_move, linear_death_intensity, maxarea_intensity, uniform_birth_kernel, uniform_death_kernel, Boundary,
    CardinalityPreset, JumpKind, ModelSpec, Preset,
};
use bdmove::simulate::{sample_waiting_time, simulate, simulate_preset, SimOptions};
use bdmove::stats::ks_two_sample;
use common::*;

#[test]
fn symmetric_preset_births_half_of_the_jumps() {
    let p = CardinalityPreset::default();
    let tr = simulate_preset(&p, 1000.0, 0, &SimOptions::default().with_path_dt(None)).unwrap();
    assert!(tr.n_jumps() >= 1000, "{} jumps", tr.n_jumps());
    let births = tr.jumps.iter().filter(|e| e.kind == JumpKind::Birth).count();
    let frac = births as f64 / tr.n_jumps() as f64;
    assert!((0.47..=0.53).contains(&frac), "birth fraction {frac}");
}

#[test]
fn thinning_and_grid_samplers_agree() {
    let w = Window::unit_square();
    let m = ModelSpec {
        name: "moving maxarea".into(),
        birth: maxarea_intensity(4.0, 1.0, w.clone()),
        death: linear_death_intensity(0.05, 100),
        birth_kernel: uniform_birth_kernel(w.clone()),
        death_kernel: uniform_death_kernel(),
        motion: brownian_move(0.3, Boundary::Reflect(w.clone())),
        window: w,
        n_star: 100,
        alpha_lower: 1.0,
        alpha_upper: 2f64.exp() + 5.0,
    };
    let y0 = random_config(&mut rng(5), 8);
    let draw = |sampler: &str, offset: u64| -> Vec<f64> {
        let mut opts = SimOptions::default().with_sampler(sampler).with_path_dt(None);
        opts.grid_dt = 1e-3;
        (0..400)
            .map(|s| sample_waiting_time(&m, &y0, 50.0, &opts, &mut rng(offset + s)).unwrap().tau)
            .collect()
    };
    let (a, b) = (draw("thinning", 0), draw("grid", 10_000));
    let ks = ks_two_sample(&a, &b);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn wide_kernels_give_the_mean_jump_rate() {
    let tr = simulate(&birth_death_model(3.0, 0.4, 30), &PointConfig::empty(2), 60.0, 3, &SimOptions::default()).unwrap();
    let rate = tr.n_jumps() as f64 / tr.horizon;
    let queries: Vec<PointConfig> = tr.jumps.iter().step_by(17).map(|e| e.pre_config.clone()).collect();
    for name in ["matching", "card-smooth", "feature-cardinality"] {
        let ks = KernelSpec::new(strategy_by_name(name, &Window::unit_square()).unwrap(), 1e7).unwrap();
        let est = estimate_continuous(&tr, &ks, &queries, Target::Alpha).unwrap();
        for v in est.values {
            assert!((v - rate).abs() <= 1e-9 * rate, "{name}: {v} vs {rate}");
        }
    }
}

#[test]
fn narrow_smooth_kernel_tends_to_the_indicator() {
    let tr = simulate(&birth_death_model(3.0, 0.4, 30), &PointConfig::empty(2), 60.0, 4, &SimOptions::default()).unwrap();
    let queries: Vec<PointConfig> = tr.jumps.iter().step_by(11).map(|e| e.pre_config.clone()).collect();
    let w = Window::unit_square();
    let smooth = KernelSpec::new(strategy_by_name("card-smooth", &w).unwrap(), 0.02).unwrap();
    let a = estimate_continuous(&tr, &smooth, &queries, Target::Alpha).unwrap();
    let b = estimate_continuous(&tr, &KernelSpec::indicator(), &queries, Target::Alpha).unwrap();
    for (u, v) in a.values.iter().zip(&b.values) {
        assert!((u - v).abs() <= 1e-9 * v.max(1.0), "{u} vs {v}");
    }
}

#[test]
fn replications_are_deterministic() {
    use bdmove::analysis::{run_mse_experiment, ExperimentOptions};
    let mut o = ExperimentOptions::new(30.0, vec![1, 2]);
    o.m_values = vec![20];
    o.n_queries = 10;
    let p = CardinalityPreset::default();
    let a = run_mse_experiment(&p, &o).unwrap();
    let b = run_mse_experiment(&p, &o).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    for r in &a {
        assert_eq!(r.preset, p.name());
        for e in &r.entries {
            assert!(e.na <= e.n_queries);
            assert!(e.mse.is_nan() || e.mse >= 0.0);
        }
    }
}
