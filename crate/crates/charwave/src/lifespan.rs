//! ε sweeps and lifespan scaling-law fits.
//!
//! Each sweep entry runs the grid solver with a live characteristic tracer
//! seeded at the classified blowup witness, producing two lifespan
//! surrogates per ε: the grid threshold-crossing time and the Riccati pole
//! of the traced slope. Fits are straight lines in the linearizing
//! coordinates: (log ε, log T*) for the power law and (ε^(-1/(s-1)), log T*)
//! for the exponential law.

use std::time::Instant;

use rayon::prelude::*;

use crate::characteristics::{predict_pole, Family, LiveTracer, DEFAULT_TAIL_FRACTION};
use crate::error::{Error, Result};
use crate::initialdata::InitialData;
use crate::numeric::fit_line;
use crate::solver::{Simulation, SolverConfig, StopReason};
use crate::wavespeed::WaveSpeed;

/// Per-ε lifespan measurement.
#[derive(Debug, Clone)]
pub struct LifespanRecord {
    pub epsilon: f64,
    /// Grid threshold-crossing time (present iff the run stopped at blowup).
    pub t_star_grid: Option<f64>,
    /// Riccati pole extrapolated from the witness trace.
    pub t_star_riccati: Option<f64>,
    pub stop_reason: StopReason,
    pub x_blowup: Option<f64>,
    pub dx_used: f64,
    pub runtime_seconds: f64,
}

/// How the per-ε slope threshold is chosen.
#[derive(Debug, Clone, Copy)]
pub enum ThresholdRule {
    /// 10³ · max(1, initial max|F|) — the solver default.
    Default,
    /// A fixed absolute threshold.
    Absolute(f64),
    /// `factor` × the initial max|F| of each run.
    TimesInitial(f64),
}

/// How the per-ε horizon is chosen.
#[derive(Debug, Clone, Copy)]
pub enum HorizonRule {
    /// Same max_time for every ε.
    Fixed(f64),
    /// safety × the closed-form Riccati estimate 1/(γ̂·F̂₀), clamped to
    /// [floor, cap]. Falls back to `floor` when the estimate is unusable.
    AutoRiccati { safety: f64, floor: f64, cap: f64 },
}

/// Sweep plan: the data template is reused with each ε substituted.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub epsilons: Vec<f64>,
    pub dx: f64,
    pub cfl: f64,
    pub speed_spline_resolution: usize,
    pub threshold: ThresholdRule,
    pub horizon: HorizonRule,
    /// Below this ε the grid does not chase the blowup: the run uses
    /// `riccati_sim_time` as its horizon and only the pole surrogate is
    /// expected. (Direct simulation to T* grows intractable for small ε.)
    pub riccati_only_below: Option<f64>,
    /// Horizon used in riccati-only mode: long enough for γ to stabilize
    /// along the witness trace, far shorter than T*.
    pub riccati_sim_time: f64,
    pub workers: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            epsilons: Vec::new(),
            dx: 1.0 / 256.0,
            cfl: 0.8,
            speed_spline_resolution: 4096,
            threshold: ThresholdRule::Default,
            horizon: HorizonRule::AutoRiccati {
                safety: 4.0,
                floor: 20.0,
                cap: 2000.0,
            },
            riccati_only_below: None,
            riccati_sim_time: 40.0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Closed-form a-priori estimates used for horizon sizing: the initial
/// max|F| and the Riccati coefficient at the settled state of the witness
/// characteristic.
pub fn blowup_estimates(data: &InitialData, ws: &WaveSpeed) -> (f64, f64) {
    let r = data.extent();
    let n = 4000;
    let mut f0 = 0.0f64;
    for i in 0..=n {
        let x = -r + 2.0 * r * i as f64 / n as f64;
        let (rx, sx) = data.riemann_slopes(ws, x);
        let theta = (data.epsilon * data.phi_at(x).dx).clamp(-ws.theta_max(), ws.theta_max());
        let sq = ws.c(theta).sqrt();
        f0 = f0.max(sq * rx.abs()).max(sq * sx.abs());
    }
    let report = data.classify(ws);
    let gamma_hat = report
        .trace_seed()
        .and_then(|(family, x0)| {
            let (r0, s0) = data.riemann_initial(ws, x0).ok()?;
            // after the opposite family has passed, u_x settles near
            // G⁻¹(inv/2) with inv the transported invariant
            let inv = match family {
                Family::Minus => r0,
                Family::Plus => -s0,
            };
            let theta = ws.invert_g(0.5 * inv).ok()?;
            Some(ws.gamma(theta).abs())
        })
        .unwrap_or(0.0);
    (f0, gamma_hat)
}

/// Runs one sweep entry; failures are folded into the record, not returned.
fn run_entry(
    template: &InitialData,
    ws: &WaveSpeed,
    plan: &SweepPlan,
    epsilon: f64,
) -> LifespanRecord {
    let start = Instant::now();
    let failed = |reason: StopReason, start: Instant| LifespanRecord {
        epsilon,
        t_star_grid: None,
        t_star_riccati: None,
        stop_reason: reason,
        x_blowup: None,
        dx_used: plan.dx,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };

    let data = InitialData {
        phi: template.phi.clone(),
        psi: template.psi.clone(),
        epsilon,
    };
    if data.check_admissible(ws).is_err() {
        return failed(StopReason::AdmissibilityLost, start);
    }

    let (f0, gamma_hat) = blowup_estimates(&data, ws);
    let t_hat = if gamma_hat * f0 > 0.0 {
        1.0 / (gamma_hat * f0)
    } else {
        f64::INFINITY
    };
    let riccati_only = plan.riccati_only_below.is_some_and(|lim| epsilon < lim);
    let max_time = if riccati_only {
        plan.riccati_sim_time
    } else {
        match plan.horizon {
            HorizonRule::Fixed(t) => t,
            HorizonRule::AutoRiccati { safety, floor, cap } => {
                if t_hat.is_finite() {
                    (safety * t_hat).clamp(floor, cap)
                } else {
                    floor
                }
            }
        }
    };
    let threshold = match plan.threshold {
        ThresholdRule::Default => None,
        ThresholdRule::Absolute(v) => Some(v),
        ThresholdRule::TimesInitial(k) => Some(k * f0.max(1e-300)),
    };
    let cfg = SolverConfig {
        dx: plan.dx,
        cfl: plan.cfl,
        domain_half_width: data.extent() + ws.c_max() * max_time + 5.0 * plan.dx + 2.0,
        slope_blow_threshold: threshold,
        max_time,
        speed_spline_resolution: plan.speed_spline_resolution,
    };

    let seed = data.classify(ws).trace_seed();
    let mut sim = match Simulation::new(&data, ws, &cfg) {
        Ok(sim) => sim,
        Err(_) => return failed(StopReason::AdmissibilityLost, start),
    };
    // run_with borrows sim mutably, so the tracer works off its own copy of
    // the (immutable, few-hundred-KB) speed table.
    let table = sim.table().clone();
    let mut tracer = seed.and_then(|(family, x0)| {
        let sample_dt = (max_time / 4000.0).max(plan.dx);
        LiveTracer::seed(sim.field(), &table, family, x0, sample_dt).ok()
    });
    let info = sim.run_with(|prev, curr| {
        if let Some(tr) = tracer.as_mut() {
            tr.advance(prev, curr, &table);
        }
    });

    let t_star_grid = (info.reason == StopReason::Blowup).then_some(info.t_stop);
    let t_star_riccati = tracer
        .map(LiveTracer::into_trace)
        .as_ref()
        .and_then(|trace| predict_pole(trace, DEFAULT_TAIL_FRACTION))
        .and_then(|p| p.t_pole);
    LifespanRecord {
        epsilon,
        t_star_grid,
        t_star_riccati,
        stop_reason: info.reason,
        x_blowup: (info.reason == StopReason::Blowup).then_some(info.x_at_max_slope),
        dx_used: plan.dx,
        runtime_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the sweep over a bounded worker pool; records come back sorted by ε
/// descending regardless of completion order.
pub fn sweep(template: &InitialData, ws: &WaveSpeed, plan: &SweepPlan) -> Result<Vec<LifespanRecord>> {
    if plan.epsilons.is_empty() {
        return Err(Error::Precondition("sweep needs at least one epsilon".into()));
    }
    for &e in &plan.epsilons {
        if !(e > 0.0) {
            return Err(Error::Precondition(format!(
                "sweep epsilons must be positive, got {e}"
            )));
        }
    }
    let mut epsilons = plan.epsilons.clone();
    epsilons.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
    let records: Vec<LifespanRecord> = pool.install(|| {
        epsilons
            .par_iter()
            .map(|&eps| run_entry(template, ws, plan, eps))
            .collect()
    });
    Ok(records)
}

/// Which lifespan surrogate feeds a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitSource {
    Grid,
    Riccati,
    /// Grid when present, else the Riccati pole.
    Auto,
}

impl FitSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitSource::Grid => "grid",
            FitSource::Riccati => "riccati",
            FitSource::Auto => "auto",
        }
    }

    fn pick(&self, rec: &LifespanRecord) -> Option<f64> {
        match self {
            FitSource::Grid => rec.t_star_grid,
            FitSource::Riccati => rec.t_star_riccati,
            FitSource::Auto => rec.t_star_grid.or(rec.t_star_riccati),
        }
    }
}

impl std::str::FromStr for FitSource {
    type Err = Error;
    fn from_str(v: &str) -> Result<Self> {
        match v {
            "grid" => Ok(FitSource::Grid),
            "riccati" => Ok(FitSource::Riccati),
            "auto" => Ok(FitSource::Auto),
            other => Err(Error::Config(format!("unknown fit source '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Power,
    Exponential,
}

impl FitModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitModel::Power => "power",
            FitModel::Exponential => "exponential",
        }
    }
}

/// A fitted scaling law.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    /// Power: slope of log T* vs log ε (≈ -(p-1)).
    /// Exponential: slope of log T* vs ε^(-1/(s-1)) (the C₂ surrogate).
    pub exponent_or_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub n_points: usize,
}

fn usable(records: &[LifespanRecord], source: FitSource) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter_map(|r| source.pick(r).map(|t| (r.epsilon, t)))
        .filter(|&(e, t)| e > 0.0 && t > 0.0 && t.is_finite())
        .collect()
}

/// Least-squares line through (log ε, log T*); the slope is the measured
/// lifespan exponent.
pub fn fit_power(records: &[LifespanRecord], source: FitSource) -> Result<FitResult> {
    let pts = usable(records, source);
    if pts.len() < 4 {
        return Err(Error::Precondition("fewer than 4 usable records".into()));
    }
    let xs: Vec<f64> = pts.iter().map(|&(e, _)| e.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, t)| t.ln()).collect();
    let fit = fit_line(&xs, &ys)
        .ok_or_else(|| Error::Precondition("degenerate abscissae in power fit".into()))?;
    Ok(FitResult {
        model: FitModel::Power,
        exponent_or_slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
        n_points: pts.len(),
    })
}

/// Least-squares line through (ε^(-1/(s-1)), log T*); a positive slope is
/// the exponential-law signature.
pub fn fit_exponential(records: &[LifespanRecord], s: f64, source: FitSource) -> Result<FitResult> {
    if !(s > 1.0) {
        return Err(Error::Precondition(format!("exponential fit needs s > 1, got {s}")));
    }
    let pts = usable(records, source);
    if pts.len() < 4 {
        return Err(Error::Precondition("fewer than 4 usable records".into()));
    }
    let xs: Vec<f64> = pts.iter().map(|&(e, _)| e.powf(-1.0 / (s - 1.0))).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, t)| t.ln()).collect();
    let fit = fit_line(&xs, &ys)
        .ok_or_else(|| Error::Precondition("degenerate abscissae in exponential fit".into()))?;
    Ok(FitResult {
        model: FitModel::Exponential,
        exponent_or_slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
        n_points: pts.len(),
    })
}

/// Checks that lifespans are non-increasing in ε (records sorted by ε
/// descending ⇒ non-decreasing down the list), with a relative tolerance
/// for discretization noise. Returns the worst violation.
pub fn monotonicity_violation(records: &[LifespanRecord], source: FitSource) -> f64 {
    let pts = usable(records, source);
    let mut worst = 0.0f64;
    for pair in pts.windows(2) {
        let (e0, t0) = pair[0];
        let (e1, t1) = pair[1];
        if e0 > e1 && t0 > t1 {
            worst = worst.max((t0 - t1) / t1);
        }
    }
    worst
}
