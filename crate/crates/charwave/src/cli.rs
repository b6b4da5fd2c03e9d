//! Subcommand dispatch: every command takes a parsed experiment config and
//! writes its artifacts under the output directory.
//!
//! Exit status convention: 0 success, 1 config/runtime errors, 2 when a run
//! configured with `expect = "blowup"` ends without one.

use std::path::{Path, PathBuf};

use crate::characteristics::{trace_with_riccati, Family, LiveTracer};
use crate::config::{Expect, ExperimentConfig};
use crate::error::{Error, Result};
use crate::lifespan::{self, FitModel, FitSource, LifespanRecord};
use crate::report;
use crate::solver::{RiemannField, Simulation, SpeedTable, StopReason};
use crate::wavespeed::SpeedClaim;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_EXPECTED_BLOWUP_MISSING: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Fit,
    ValidateSpeed,
    Trace,
    Classify,
}

/// Effective output directory: CLI flag > CHARWAVE_OUT > config.
pub fn resolve_out_dir(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("CHARWAVE_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    cfg.output_dir.clone()
}

/// Runs one subcommand; returns the process exit status.
pub fn dispatch(
    cfg: &ExperimentConfig,
    command: Command,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<i32> {
    std::fs::create_dir_all(out_dir)?;
    match command {
        Command::Run => cmd_run(cfg, out_dir),
        Command::Sweep => cmd_sweep(cfg, out_dir, workers),
        Command::Fit => cmd_fit(cfg, out_dir),
        Command::ValidateSpeed => cmd_validate_speed(cfg, out_dir),
        Command::Trace => cmd_trace(cfg, out_dir),
        Command::Classify => cmd_classify(cfg, out_dir),
    }
}

fn single_epsilon(cfg: &ExperimentConfig) -> Result<f64> {
    if cfg.epsilons.len() != 1 {
        return Err(Error::Config(
            "this subcommand needs a scalar epsilon (one value)".into(),
        ));
    }
    Ok(cfg.epsilons[0])
}

fn cmd_run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let data = cfg.data(single_epsilon(cfg)?);
    let solver_cfg = cfg.solver_config(&data);
    let mut sim = Simulation::new(&data, &cfg.ws, &solver_cfg)?;
    let cadence = cfg.solver.snapshot_cadence;
    let mut next_snapshot = 0.0f64;
    let mut snapshot_idx = 0usize;
    let mut pending: Vec<(usize, RiemannField)> = Vec::new();
    // snapshot of the initial state
    pending.push((snapshot_idx, sim.field().clone()));
    snapshot_idx += 1;
    next_snapshot += cadence;
    let info = loop {
        match sim.step() {
            crate::solver::StepOutcome::Running => {
                if sim.time() >= next_snapshot - 1e-12 {
                    pending.push((snapshot_idx, sim.field().clone()));
                    snapshot_idx += 1;
                    next_snapshot += cadence;
                }
            }
            crate::solver::StepOutcome::Stopped(info) => {
                pending.push((snapshot_idx, sim.field().clone()));
                break info;
            }
        }
    };
    let table = sim.table();
    for (idx, field) in &pending {
        let (ux, c): (Vec<f64>, Vec<f64>) = field
            .r
            .iter()
            .zip(&field.s)
            .map(|(&r, &s)| {
                let y = 0.5 * (r - s);
                let (lo, hi) = table.g_range();
                let theta = table.invert_g(y.clamp(lo, hi)).unwrap_or(0.0);
                (theta, table.c(theta))
            })
            .unzip();
        report::write_file(
            &out_dir.join(format!("snapshot_{idx:04}.csv")),
            &report::snapshot_to_csv(field, &ux, &c),
        )?;
    }
    report::write_file(
        &out_dir.join("stop_info.txt"),
        &report::stop_info_report(&info, sim.log()),
    )?;
    report::write_file(&out_dir.join("series.csv"), &report::series_to_csv(sim.log()))?;
    println!(
        "run: {} at t = {:.6} (max|F| = {:.3e}, {} snapshots)",
        info.reason.as_str(),
        info.t_stop,
        info.max_abs_f,
        pending.len()
    );
    if cfg.expect == Expect::Blowup && info.reason != StopReason::Blowup {
        return Ok(EXIT_EXPECTED_BLOWUP_MISSING);
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(cfg: &ExperimentConfig, out_dir: &Path, workers: Option<usize>) -> Result<i32> {
    let template = cfg.data(cfg.epsilons[0]);
    let workers = workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let plan = cfg.sweep_plan(workers);
    let records = lifespan::sweep(&template, &cfg.ws, &plan)?;
    report::write_file(&out_dir.join("records.csv"), &report::records_to_csv(&records))?;
    for r in &records {
        println!(
            "eps = {:<8} reason = {:<18} t*_grid = {:<12} t*_riccati = {:<12} ({:.1} s)",
            r.epsilon,
            r.stop_reason.as_str(),
            r.t_star_grid.map_or("-".into(), |t| format!("{t:.4}")),
            r.t_star_riccati.map_or("-".into(), |t| format!("{t:.4}")),
            r.runtime_seconds
        );
    }
    if let Some(fit_block) = &cfg.fit {
        match run_fit(fit_block.model, fit_block.s, fit_block.source, &records) {
            Ok(fit) => {
                report::write_file(&out_dir.join("fit_report.txt"), &report::fit_report_text(&fit))?;
                report::write_file(&out_dir.join("fit.kv"), &report::fit_kv(&fit))?;
                println!(
                    "fit[{}]: slope = {:.6}, r^2 = {:.6} ({} points)",
                    fit.model.as_str(),
                    fit.exponent_or_slope,
                    fit.r_squared,
                    fit.n_points
                );
            }
            Err(e) => eprintln!("fit skipped: {e}"),
        }
    }
    if cfg.expect == Expect::Blowup
        && records
            .iter()
            .all(|r| r.t_star_grid.is_none() && r.t_star_riccati.is_none())
    {
        return Ok(EXIT_EXPECTED_BLOWUP_MISSING);
    }
    Ok(EXIT_OK)
}

fn run_fit(
    model: FitModel,
    s: Option<f64>,
    source: FitSource,
    records: &[LifespanRecord],
) -> Result<crate::lifespan::FitResult> {
    match model {
        FitModel::Power => lifespan::fit_power(records, source),
        FitModel::Exponential => {
            let s = s.ok_or_else(|| Error::Config("fit.s required for exponential".into()))?;
            lifespan::fit_exponential(records, s, source)
        }
    }
}

fn cmd_fit(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let fit_block = cfg
        .fit
        .as_ref()
        .ok_or_else(|| Error::Config("fit subcommand needs a [fit] section".into()))?;
    let records_path = fit_block
        .records
        .clone()
        .unwrap_or_else(|| out_dir.join("records.csv"));
    let text = std::fs::read_to_string(&records_path).map_err(|e| {
        Error::Config(format!("cannot read records CSV {}: {e}", records_path.display()))
    })?;
    let records = report::records_from_csv(&text)?;
    let fit = run_fit(fit_block.model, fit_block.s, fit_block.source, &records)?;
    report::write_file(&out_dir.join("fit_report.txt"), &report::fit_report_text(&fit))?;
    report::write_file(&out_dir.join("fit.kv"), &report::fit_kv(&fit))?;
    println!(
        "fit[{}]: slope = {:.9}, intercept = {:.9}, r^2 = {:.9} ({} points)",
        fit.model.as_str(),
        fit.exponent_or_slope,
        fit.intercept,
        fit.r_squared,
        fit.n_points
    );
    Ok(EXIT_OK)
}

fn cmd_validate_speed(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let fit_block = cfg.fit.as_ref().ok_or_else(|| {
        Error::Config("validate-speed reads its claim from [fit]: model + p (power) or s (flat)".into())
    })?;
    let claim = match fit_block.model {
        FitModel::Power => SpeedClaim::Power {
            p: fit_block
                .p
                .ok_or_else(|| Error::Config("validate-speed power claim needs fit.p".into()))?,
        },
        FitModel::Exponential => SpeedClaim::Flat {
            s: fit_block
                .s
                .ok_or_else(|| Error::Config("validate-speed flat claim needs fit.s".into()))?,
        },
    };
    let report = cfg.ws.validate(claim);
    let text = format!("{report}\n");
    report::write_file(&out_dir.join("validation.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

fn cmd_trace(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let data = cfg.data(single_epsilon(cfg)?);
    let solver_cfg = cfg.solver_config(&data);
    let mut sim = Simulation::new(&data, &cfg.ws, &solver_cfg)?;
    let table: SpeedTable = sim.table().clone();

    let report_cls = data.classify(&cfg.ws);
    let (default_family, default_seed) = match report_cls.trace_seed() {
        Some((f, x)) => (f, Some(x)),
        None => (Family::Minus, None),
    };
    let family = cfg.trace.family.unwrap_or(default_family);
    let seeds: Vec<f64> = if cfg.trace.seeds.is_empty() {
        default_seed.into_iter().collect()
    } else {
        cfg.trace.seeds.clone()
    };
    if seeds.is_empty() {
        return Err(Error::Config(
            "trace needs trace.seeds (no blowup witness found to use as default)".into(),
        ));
    }

    let sample_dt = cfg
        .trace
        .sample_dt
        .unwrap_or((solver_cfg.max_time / 2000.0).max(cfg.solver.dx));
    let mut tracers: Vec<LiveTracer> = seeds
        .iter()
        .map(|&x0| LiveTracer::seed(sim.field(), &table, family, x0, sample_dt))
        .collect::<Result<_>>()?;
    let info = sim.run_with(|prev, curr| {
        for tr in tracers.iter_mut() {
            tr.advance(prev, curr, &table);
        }
    });
    for (i, tr) in tracers.into_iter().enumerate() {
        let trace = tr.into_trace();
        report::write_file(
            &out_dir.join(format!("trace_{i:02}.csv")),
            &report::trace_to_csv(&trace),
        )?;
        let pole = crate::characteristics::predict_pole(
            &trace,
            crate::characteristics::DEFAULT_TAIL_FRACTION,
        );
        match pole.and_then(|p| p.t_pole) {
            Some(t) => println!(
                "trace {i}: seed x0 = {}, {} samples, pole t* = {t:.6}",
                trace.seed_x,
                trace.samples.len()
            ),
            None => println!(
                "trace {i}: seed x0 = {}, {} samples, no pole",
                trace.seed_x,
                trace.samples.len()
            ),
        }
    }
    println!("run: {} at t = {:.6}", info.reason.as_str(), info.t_stop);
    Ok(EXIT_OK)
}

fn cmd_classify(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let data = cfg.data(single_epsilon(cfg)?);
    let report_cls = data.classify(&cfg.ws);
    let text = format!("{report_cls}\n");
    report::write_file(&out_dir.join("classify.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

/// Stored-snapshot trace helper used by tests and external callers; mirrors
/// cmd_trace but works on an explicit snapshot series.
pub fn trace_from_snapshots(
    snapshots: &[RiemannField],
    table: &SpeedTable,
    family: Family,
    seed: (f64, f64),
) -> Result<crate::characteristics::CharTrace> {
    trace_with_riccati(snapshots, table, family, seed, None)
}
