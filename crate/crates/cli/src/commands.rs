use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use launcher_client::Client;
use launcher_core::dataset::{write_dataset, DatasetConfig};
use launcher_core::lab::stats::write_stats_csv;
use launcher_core::lab::{load_dir, run_accuracy_experiment, ExperimentConfig, LaunchHarness, PipelineConfig};
use launcher_core::sim::{LauncherState, RampUp, SimLauncher};
use launcher_server::ServerConfig;
use launcher_shoot::grid::write_grid_csv;
use launcher_shoot::train::write_report;
use launcher_shoot::{build_training_set, evaluate_grid, target_grid, train, MlpModel, TrainConfig};

use crate::cli::{ConfigArgs, DatasetArgs, EvalArgs, ServeArgs, SweepArgs, SweepParam, TrainArgs};
use crate::error::{CliError, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::file(path, e))?))
}

/// A file when given, stdout otherwise.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn serve(cfg: ServerConfig, args: ServeArgs) -> Result<()> {
    let mut cfg = cfg;
    if let Some(h) = args.host {
        cfg.host = h;
    }
    if let Some(p) = args.port {
        cfg.tcp_port = p;
    }
    if let Some(p) = args.gateway_port {
        cfg.gateway_port = p;
    }
    if let Some(s) = args.sim_seed {
        cfg.sim.rng_seed = s;
    }
    if let Some(d) = args.static_dir {
        cfg.static_dir = Some(d);
    }
    let _ = tracing_subscriber::fmt().with_writer(io::stderr).try_init();

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let handle = launcher_server::serve(cfg).await?;
        println!(
            "launcher listening: tcp {} | console http://{}/",
            handle.tcp_addr, handle.gateway_addr
        );
        io::stdout().flush()?;
        let mut stopped = handle.controller().stopped();
        tokio::select! {
            _ = tokio::signal::ctrl_c() => handle.shutdown().await,
            _ = stopped.wait_for(|s| *s) => {}
        }
        handle.wait().await;
        println!("launcher stopped");
        Ok(())
    })
}

fn sweep_state(param: SweepParam, value: &str) -> Result<LauncherState> {
    let base = LauncherState::default();
    let number = || {
        value
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("`{value}` is not a number")))
    };
    let state = match param {
        SweepParam::RampUp => {
            let ramp: RampUp = value.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
            base.with_ramp_up_time(ramp)
        }
        SweepParam::StrokeGain => base.with_stroke_gain(number()?),
        SweepParam::Pinch => base.with_pinch_diameter_mm(number()?),
    };
    state.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn sweep(cfg: ServerConfig, args: SweepArgs) -> Result<()> {
    let values: Vec<&str> = args
        .values
        .iter()
        .map(|v| v.trim())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(CliError::Usage("--values needs at least one setting".into()));
    }
    if args.launches < 2 {
        return Err(CliError::Usage("--launches must be at least 2".into()));
    }
    let states = values
        .iter()
        .map(|v| sweep_state(args.param, v))
        .collect::<Result<Vec<_>>>()?;
    let name = match args.param {
        SweepParam::RampUp => "ramp_up",
        SweepParam::StrokeGain => "stroke_gain",
        SweepParam::Pinch => "pinch",
    };
    let exp = ExperimentConfig {
        orientation_jump: args.orientation_jump,
        ..ExperimentConfig::new(args.launches)
    };
    let mut rows = Vec::with_capacity(states.len());
    for (k, (value, state)) in values.iter().zip(&states).enumerate() {
        // each setting gets its own launcher instance and stream
        let mut sim = SimLauncher::with_seed(cfg.sim.clone(), args.seed.wrapping_add(k as u64))?;
        let result = run_accuracy_experiment(&mut sim, state, &exp)?;
        eprintln!(
            "{name}={value}: n={} sigma_x={:.4} m sigma_y={:.4} m",
            result.stats.n, result.stats.sigma_x, result.stats.sigma_y
        );
        rows.push((format!("{name}={value}"), result.stats));
    }
    let mut out = output(args.out.as_deref())?;
    write_stats_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

pub fn dataset(cfg: ServerConfig, args: DatasetArgs) -> Result<()> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let ds = DatasetConfig {
        n: args.n,
        seed: args.seed,
        ..DatasetConfig::default()
    };
    let summary = write_dataset(&ds, &cfg.sim, &args.out)?;
    for g in &summary.groups {
        println!("{:<16} {:>5} trajectories, {:>5} on table", g.name, g.count, g.on_table);
    }
    println!(
        "total {} trajectories, {} on table ({:.1}%) in {}",
        summary.total,
        summary.on_table,
        100.0 * summary.on_table_fraction(),
        args.out.display()
    );
    Ok(())
}

pub fn train_model(args: TrainArgs) -> Result<()> {
    let trajectories = load_dir(&args.data)?;
    let rows = build_training_set(&trajectories, !args.all_groups)?;
    let mut tc = if args.full {
        TrainConfig::full()
    } else {
        TrainConfig::default()
    };
    tc.seed = args.seed;
    if let Some(e) = args.epochs {
        tc.epochs = e;
    }
    tc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    eprintln!(
        "training {:?} on {} rows from {} trajectories",
        tc.layers,
        rows.len(),
        trajectories.len()
    );
    let outcome = train(&rows, &tc)?;
    outcome.model.save(&args.out)?;
    if let Some(path) = &args.report {
        let mut w = create(path)?;
        write_report(&mut w, &outcome.history)?;
        w.flush()?;
    }
    let last = outcome.history.last().expect("at least one epoch");
    println!("final loss {:.6} after {} epochs, model {}", last.loss, tc.epochs, args.out.display());
    Ok(())
}

pub fn eval(cfg: ServerConfig, args: EvalArgs) -> Result<()> {
    if args.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let model = MlpModel::load(&args.model)?;
    let targets = target_grid(args.grid)?;
    let mut harness: Box<dyn LaunchHarness> = match &args.endpoint {
        Some(ep) => Box::new(Client::connect(ep.as_str())?),
        None => Box::new(SimLauncher::with_seed(cfg.sim.clone(), args.seed)?),
    };
    let report = evaluate_grid(
        &model,
        harness.as_mut(),
        &targets,
        &LauncherState::default(),
        &PipelineConfig::default(),
    )?;
    let mut out = output(args.out.as_deref())?;
    write_grid_csv(&mut out, &report)?;
    out.flush()?;
    eprintln!(
        "mean error {:.4} m over {} targets, {} without landing",
        report.mean_error,
        report.targets.len() - report.missed,
        report.missed
    );
    Ok(())
}

pub fn print_config(cfg: &ServerConfig, args: ConfigArgs) -> Result<()> {
    let text = if args.json {
        serde_json::to_string_pretty(cfg).map_err(|e| CliError::Render(e.to_string()))?
    } else {
        toml::to_string_pretty(cfg).map_err(|e| CliError::Render(e.to_string()))?
    };
    println!("{text}");
    Ok(())
}
