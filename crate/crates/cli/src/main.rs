use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bdmove::analysis::{ccf, query_jump_indices, run_mse_experiment, summarize, SeriesPair};
use bdmove::bandwidth::{CvData, CvResult, CvWorkspace, GridSpec};
use bdmove::estimate::{
    estimate_continuous, estimate_discrete, strategy_by_name, IntensityEstimate, KernelSpec, Profile, Target,
};
use bdmove::geometry::{PointConfig, Window};
use bdmove::io::{
    cv_rows, estimate_rows, mse_rows, read_frames, read_table, read_trajectory, write_frames, write_json,
    write_mse_summary, write_table, write_table_to, write_trajectory_with_meta, CcfRow, EstimateRow,
    ExperimentSummary, FramesOptions, Meta, RunConfig, EXAMPLE_CONFIG,
};
use bdmove::model::{preset_by_name, validate_model, SimRng};
use bdmove::simulate::{discretize, regular_times, simulate_preset, FrameSequence, Trajectory};

/// Simulation and intensity estimation for spatial birth-death-move processes.
#[derive(Debug, Parser)]
#[command(name = "bdmove", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a trajectory and write it as line-delimited records.
    Simulate(SimulateArgs),
    /// Observe a trajectory at regular times and write a frames file.
    Discretize(DiscretizeArgs),
    /// Estimate an intensity from a trajectory or a frames file.
    Estimate(EstimateArgs),
    /// Cross-validation objective over a bandwidth grid.
    Cv(EstimateArgs),
    /// Mean square errors of several strategies over replicated simulations.
    Bench(BenchArgs),
    /// Cross-correlation of two estimate tables.
    Ccf(CcfArgs),
    /// Probe a model for the hypotheses the simulator relies on.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Built-in model (sim41, sim42).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ModelArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path).inspect_err(|_| {
                eprintln!("accepted configuration keys:\n\n{EXAMPLE_CONFIG}");
            })?,
            (None, Some(p)) => RunConfig::for_preset(p),
            (None, None) => RunConfig::for_preset("sim41"),
        };
        if let Some(s) = self.seed {
            cfg.simulation.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Horizon T.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Spacing of stored path samples, 0 for jump configurations only.
    #[arg(long)]
    path_dt: Option<f64>,
    #[arg(long)]
    sampler: Option<String>,
    /// Output trajectory file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DiscretizeArgs {
    /// Trajectory file.
    #[arg(long)]
    input: PathBuf,
    /// Number of frame intervals.
    #[arg(long)]
    m: usize,
    /// Output frames file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Trajectory (.jsonl) or frames (.csv) file.
    #[arg(long)]
    input: PathBuf,
    /// Run configuration supplying the estimation settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    target: Option<Target>,
    /// Fixed bandwidth, skipping cross-validation.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Bandwidth grid: auto, auto:N or a comma-separated list.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Observe a trajectory input at m + 1 regular times and use the discrete estimator.
    #[arg(long)]
    m: Option<usize>,
    /// Cross-validate on this many evenly spaced segments or frames.
    #[arg(long)]
    cv_groups: Option<usize>,
    /// Time step of frames files without a time column.
    #[arg(long, default_value_t = 1.0)]
    frame_dt: f64,
    /// Output table (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Number of replications, seeded from --seed upwards.
    #[arg(long)]
    seeds: Option<u64>,
    /// Frame counts of the discrete schemes, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Strategies, comma separated.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<String>,
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long)]
    cv_groups: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CcfArgs {
    /// Reference estimate table.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Random configurations probed.
    #[arg(long, default_value_t = 1000)]
    probes: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Discretize(a) => discretize_cmd(a),
        Command::Estimate(a) => estimate(a, false),
        Command::Cv(a) => estimate(a, true),
        Command::Bench(a) => bench(a),
        Command::Ccf(a) => ccf_cmd(a),
        Command::Validate(a) => validate(a),
    }
}

fn command_line() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn provenance(cfg: Option<&RunConfig>) -> Meta {
    let mut meta = vec![
        ("generator".to_string(), format!("bdmove {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), command_line()),
    ];
    if let Some(c) = cfg {
        meta.push(("seed".to_string(), c.simulation.seed.to_string()));
        meta.push(("config".to_string(), c.to_json_string()));
    }
    meta
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = a.model.load()?;
    if let Some(t) = a.horizon {
        cfg.simulation.horizon = Some(t);
    }
    if let Some(dt) = a.path_dt {
        cfg.simulation.path_dt = dt;
    }
    if let Some(s) = a.sampler {
        cfg.simulation.sampler = Some(s);
    }
    cfg.validate()?;
    let preset = cfg.preset()?;
    let horizon = cfg.horizon()?;
    let tr = simulate_preset(preset.as_ref(), horizon, cfg.simulation.seed, &cfg.sim_options()?)?;
    let meta = provenance(Some(&cfg)).into_iter().collect();
    write_trajectory_with_meta(&tr, &meta, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!(
        "{}: {} jumps on [0, {horizon}], {} path samples -> {}",
        tr.model,
        tr.n_jumps(),
        tr.path_sample_count(),
        a.out.display()
    );
    Ok(())
}

fn discretize_cmd(a: DiscretizeArgs) -> Result<()> {
    if a.m == 0 {
        bail!("--m must be positive");
    }
    let tr = read_trajectory(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let fs = discretize(&tr, &regular_times(tr.horizon, a.m))?;
    write_frames(&fs, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("{} frames -> {}", fs.len(), a.out.display());
    Ok(())
}

enum Data {
    Trajectory(Trajectory),
    Frames(FrameSequence),
}

fn load_data(path: &Path, frame_dt: f64) -> Result<Data> {
    let is_traj = path.extension().is_some_and(|e| e == "jsonl" || e == "json");
    Ok(if is_traj {
        Data::Trajectory(read_trajectory(path).with_context(|| format!("reading {}", path.display()))?)
    } else {
        let opts = FramesOptions { frame_dt };
        Data::Frames(read_frames(path, &opts).with_context(|| format!("reading {}", path.display()))?)
    })
}

/// Window of the data: the preset's window for simulated trajectories,
/// otherwise the bounding box of all points padded by 1%.
fn data_window(data: &Data) -> Result<Window> {
    match data {
        Data::Trajectory(tr) => match preset_by_name(&tr.model) {
            Ok(p) => Ok(p.model().window),
            Err(_) => {
                let mut all = vec![tr.initial_config.clone()];
                all.extend(tr.jumps.iter().map(|e| e.post_config.clone()));
                Ok(Window::bounding(&all, 0.01)?)
            }
        },
        Data::Frames(fs) => Ok(Window::bounding(&fs.configs, 0.01)?),
    }
}

fn estimate(a: EstimateArgs, cv_only: bool) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::for_preset("sim41"),
    };
    let e = &mut cfg.estimation;
    if let Some(s) = &a.strategy {
        e.strategy = s.clone();
    }
    if let Some(t) = a.target {
        e.target = t;
    }
    if let Some(h) = a.bandwidth {
        e.bandwidth = Some(h);
    }
    if let Some(g) = &a.grid {
        e.grid = g.clone();
    }
    if a.m.is_some() {
        e.frames = a.m;
    }
    if a.cv_groups.is_some() {
        e.cv_groups = a.cv_groups;
    }
    cfg.validate()?;
    let e = &cfg.estimation;

    let data = load_data(&a.input, a.frame_dt)?;
    let window = data_window(&data)?;
    let strategy = strategy_by_name(&e.strategy, &window)?;
    let ks = KernelSpec::new(strategy.clone(), e.bandwidth.unwrap_or(1.0))?.with_profile(Profile::from_name(&e.profile)?);

    // Queries: X_{T_j} at evenly spaced jumps of a trajectory, every frame of a frames file.
    let observed;
    let (queries, times): (Vec<PointConfig>, Vec<f64>) = match &data {
        Data::Trajectory(tr) => {
            if tr.n_jumps() == 0 {
                bail!("the trajectory has no jumps");
            }
            let idx = query_jump_indices(tr.n_jumps(), e.n_queries);
            idx.iter()
                .map(|&j| {
                    let (t, x) = tr.segment_start(j);
                    (x.clone(), t)
                })
                .unzip()
        }
        Data::Frames(fs) => (fs.configs.clone(), fs.times.clone()),
    };
    let cv_data = match (&data, e.frames) {
        (Data::Trajectory(tr), Some(m)) => {
            observed = discretize(tr, &regular_times(tr.horizon, m))?;
            CvData::Discrete(&observed)
        }
        (Data::Trajectory(tr), None) => CvData::Continuous(tr),
        (Data::Frames(fs), _) => CvData::Discrete(fs),
    };

    let mut selection: Option<CvResult> = None;
    let ks = if strategy.uses_bandwidth() && (e.bandwidth.is_none() || cv_only) {
        let ws = match e.cv_groups {
            Some(k) => CvWorkspace::for_data_sampled(cv_data, strategy.clone(), k)?,
            None => CvWorkspace::for_data(cv_data, strategy.clone())?,
        };
        let grid = match (&e.bandwidth, &a.grid) {
            (Some(h), None) => vec![*h],
            _ => e.grid.resolve(&ws)?,
        };
        let r = ws.select(&ks, Some(&grid), e.target)?;
        let ks = ks.with_bandwidth(r.bandwidth);
        selection = Some(r);
        ks
    } else {
        ks
    };

    let mut meta = provenance(Some(&cfg));
    meta.push(("input".into(), a.input.display().to_string()));
    meta.push(("strategy".into(), e.strategy.clone()));
    meta.push(("target".into(), e.target.to_string()));
    if let Some(r) = &selection {
        meta.push(("selected_bandwidth".into(), r.bandwidth.to_string()));
        if r.ties {
            meta.push(("note".into(), "several bandwidths attain the maximum, the smallest is kept".into()));
        }
    }

    if cv_only {
        let Some(r) = selection else {
            bail!("strategy `{}` has no bandwidth to select", e.strategy);
        };
        emit(a.out.as_deref(), &meta, &cv_rows(&r))?;
        println!("selected bandwidth: {}", r.bandwidth);
        return Ok(());
    }

    let est: IntensityEstimate = match cv_data {
        CvData::Continuous(tr) => estimate_continuous(tr, &ks, &queries, e.target)?,
        CvData::Discrete(fs) => estimate_discrete(fs, &ks, &queries, e.target)?,
    };
    meta.push(("bandwidth".into(), ks.bandwidth.to_string()));
    let n_points: Vec<usize> = queries.iter().map(PointConfig::len).collect();
    emit(a.out.as_deref(), &meta, &estimate_rows(&est, &times, &n_points)?)
}

fn emit<T: serde::Serialize>(out: Option<&Path>, meta: &Meta, rows: &[T]) -> Result<()> {
    match out {
        Some(p) => write_table(p, meta, rows).with_context(|| format!("writing {}", p.display()))?,
        None => write_table_to(std::io::stdout().lock(), meta, rows)?,
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = a.model.load()?;
    if let Some(t) = a.horizon {
        cfg.simulation.horizon = Some(t);
    }
    if let Some(n) = a.seeds {
        let base = cfg.simulation.seed;
        cfg.experiment.seeds = (base..base + n).collect();
    }
    if !a.m.is_empty() {
        cfg.experiment.m_values = a.m.clone();
    }
    if !a.strategy.is_empty() {
        cfg.experiment.strategies = a.strategy.clone();
    }
    if let Some(g) = a.grid {
        cfg.estimation.grid = g;
    }
    if a.cv_groups.is_some() {
        cfg.estimation.cv_groups = a.cv_groups;
    }
    if let Some(o) = a.out {
        cfg.output.dir = o;
    }
    cfg.validate()?;
    let preset = cfg.preset()?;
    let opts = cfg.experiment_options()?;
    let reports = run_mse_experiment(preset.as_ref(), &opts)?;
    let summary = summarize(&reports);
    let meta = provenance(Some(&cfg));

    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_table(dir.join("mse_reports.csv"), &meta, &mse_rows(&reports))?;
    let mut table = Vec::new();
    write_mse_summary(&mut table, &meta, &summary, &opts.strategies)?;
    std::fs::write(dir.join("mse_summary.csv"), &table)?;
    write_json(
        dir.join("summary.json"),
        &ExperimentSummary {
            meta: meta.clone(),
            reports,
            summary,
        },
    )?;
    let text = String::from_utf8(table)?;
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    println!("median MSE over {} replications (T = {})", opts.seeds.len(), opts.horizon);
    println!("{}", body.join("\n"));
    Ok(())
}

fn ccf_cmd(a: CcfArgs) -> Result<()> {
    let ra: Vec<EstimateRow> = read_table(&a.a)?;
    let rb: Vec<EstimateRow> = read_table(&a.b)?;
    if ra.len() != rb.len() || ra.iter().zip(&rb).any(|(x, y)| x.time != y.time) {
        bail!("the two tables must hold estimates at the same times");
    }
    let times = ra.iter().map(|r| r.time).collect();
    let pair = SeriesPair::new(
        ra.iter().map(|r| r.estimate).collect(),
        rb.iter().map(|r| r.estimate).collect(),
        times,
    )?;
    let rows: Vec<CcfRow> = ccf(&pair, a.max_lag)?
        .into_iter()
        .map(|(lag, correlation)| CcfRow { lag, correlation })
        .collect();
    let mut meta = provenance(None);
    meta.push(("series_a".into(), a.a.display().to_string()));
    meta.push(("series_b".into(), a.b.display().to_string()));
    meta.push(("lag_convention".into(), "positive lag h correlates a at frame j with b at frame j+h".into()));
    emit(a.out.as_deref(), &meta, &rows)
}

fn validate(a: ValidateArgs) -> Result<()> {
    let cfg = a.model.load()?;
    cfg.validate()?;
    let m = cfg.preset()?.model();
    let mut rng = <SimRng as rand::SeedableRng>::seed_from_u64(cfg.simulation.seed);
    let r = validate_model(&m, a.probes, &mut rng)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "model {}: {} probes passed", m.name, r.probes)?;
    writeln!(out, "observed alpha in [{:.6e}, {:.6e}]", r.min_alpha, r.max_alpha)?;
    writeln!(out, "declared bounds [{:.6e}, {:.6e}]", m.alpha_lower, m.alpha_upper)?;
    Ok(())
}
