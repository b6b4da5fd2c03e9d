//! Grid evolution of the Riemann invariants r, s and their slopes.
//!
//! The scheme is semi-Lagrangian: each step traces the characteristic foot
//! point of every node and interpolates with a monotone (Fritsch–Carlson)
//! cubic, so the invariants obey a discrete maximum principle and numerical
//! dissipation cannot masquerade as blowup. The slopes r_x, s_x ride the same
//! characteristics and are evolved as independent fields with their quadratic
//! source terms integrated by an explicit midpoint rule (sub-stepped where
//! the Riccati growth is fast).

mod psystem;
mod table;

pub use psystem::{reference_step_psystem, ux_linf_distance, ReferenceSolver};
pub use table::SpeedTable;

use crate::error::{Error, Result};
use crate::initialdata::InitialData;
use crate::wavespeed::WaveSpeed;

/// Grid snapshot of the Riemann invariants and slopes at one time.
#[derive(Debug, Clone)]
pub struct RiemannField {
    pub t: f64,
    pub x_lo: f64,
    pub dx: f64,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub rx: Vec<f64>,
    pub sx: Vec<f64>,
}

impl RiemannField {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    pub fn x_hi(&self) -> f64 {
        self.x(self.n() - 1)
    }
}

/// Solver configuration; `slope_blow_threshold = None` resolves to
/// 10³ · max(1, initial max|F|) at initialization.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dx: f64,
    /// Courant number in (0, 1); dt = cfl·dx / max c each step.
    pub cfl: f64,
    /// Domain half-width L; the grid covers [-L, L].
    pub domain_half_width: f64,
    pub slope_blow_threshold: Option<f64>,
    pub max_time: f64,
    pub speed_spline_resolution: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dx: 1.0 / 256.0,
            cfl: 0.8,
            domain_half_width: 20.0,
            slope_blow_threshold: None,
            max_time: 10.0,
            speed_spline_resolution: 4096,
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Blowup,
    Horizon,
    AdmissibilityLost,
    BoundaryContact,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Blowup => "blowup",
            StopReason::Horizon => "horizon",
            StopReason::AdmissibilityLost => "admissibility_lost",
            StopReason::BoundaryContact => "boundary_contact",
        }
    }
}

impl std::str::FromStr for StopReason {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "blowup" => StopReason::Blowup,
            "horizon" => StopReason::Horizon,
            "admissibility_lost" => StopReason::AdmissibilityLost,
            "boundary_contact" => StopReason::BoundaryContact,
            other => return Err(Error::Config(format!("unknown stop reason '{other}'"))),
        })
    }
}

/// Terminal state of a run. `reason == Blowup` iff `max_abs_f` reached the
/// configured slope threshold at `t_stop`.
#[derive(Debug, Clone, Copy)]
pub struct StopInfo {
    pub reason: StopReason,
    pub t_stop: f64,
    pub x_at_max_slope: f64,
    pub max_abs_f: f64,
}

/// One diagnostic sample: (t, max|F₁|, max|F₂|, ‖u_x‖_∞).
#[derive(Debug, Clone, Copy)]
pub struct SeriesPoint {
    pub t: f64,
    pub max_f1: f64,
    pub max_f2: f64,
    pub ux_inf: f64,
}

/// Per-run diagnostics: the sampled series plus sup-norm tracking for the
/// conservation-law check.
#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub series: Vec<SeriesPoint>,
    pub r0_inf: f64,
    pub s0_inf: f64,
    pub max_r_inf: f64,
    pub max_s_inf: f64,
    pub min_r_inf: f64,
    pub min_s_inf: f64,
}

impl RunLog {
    /// Largest relative deviation of ‖r‖_∞, ‖s‖_∞ from their initial values.
    pub fn conservation_drift(&self) -> f64 {
        let rel = |v: f64, v0: f64| {
            if v0 == 0.0 {
                v.abs()
            } else {
                (v - v0).abs() / v0
            }
        };
        rel(self.max_r_inf, self.r0_inf)
            .max(rel(self.min_r_inf, self.r0_inf))
            .max(rel(self.max_s_inf, self.s0_inf))
            .max(rel(self.min_s_inf, self.s0_inf))
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy)]
pub enum StepOutcome {
    Running,
    Stopped(StopInfo),
}

/// A single simulation owning its state; deterministic for a fixed config.
pub struct Simulation {
    table: SpeedTable,
    cfg: SolverConfig,
    threshold: f64,
    initial_max_f: f64,
    field: RiemannField,
    prev: RiemannField,
    /// Constant-speed fast path: κ ≡ 0 makes the slope sources exactly zero
    /// and G the identity.
    linear: bool,
    // nodewise u_x, c, κ for the *current* field
    ux: Vec<f64>,
    c: Vec<f64>,
    kappa: Vec<f64>,
    c_now_max: f64,
    ux_inf: f64,
    max_f1: f64,
    max_f2: f64,
    argmax_x: f64,
    boundary_ref: [f64; 4],
    log: RunLog,
    stopped: Option<StopInfo>,
    scratch: Scratch,
}

#[derive(Default)]
struct Scratch {
    kappa_foot_m: Vec<f64>,
    kappa_foot_p: Vec<f64>,
}

/// Hard cap on slope magnitudes; far beyond any sane threshold, it only
/// keeps the arithmetic finite once a node has already blown past it.
const SLOPE_CAP: f64 = 1e15;

impl Simulation {
    /// Builds the t = 0 field from analytic data: r, s from the initial
    /// Riemann invariants and r_x, s_x from closed-form derivatives.
    pub fn new(data: &InitialData, ws: &WaveSpeed, cfg: &SolverConfig) -> Result<Self> {
        validate_cfg(cfg)?;
        data.check_admissible(ws)?;
        let needed = data.extent() + ws.c_max() * cfg.max_time + 5.0 * cfg.dx;
        if cfg.domain_half_width < needed {
            return Err(Error::Geometry(format!(
                "domain half-width L = {} too small: need >= {:.3} \
                 (extent {:.3} + c_max {:.4} x max_time {} + 5 dx)",
                cfg.domain_half_width,
                needed,
                data.extent(),
                ws.c_max(),
                cfg.max_time
            )));
        }
        let cells = (2.0 * cfg.domain_half_width / cfg.dx).ceil() as usize;
        let half = 0.5 * cells as f64 * cfg.dx;
        let n = cells + 1;
        let mut field = RiemannField {
            t: 0.0,
            x_lo: -half,
            dx: cfg.dx,
            r: vec![0.0; n],
            s: vec![0.0; n],
            rx: vec![0.0; n],
            sx: vec![0.0; n],
        };
        for i in 0..n {
            let x = field.x(i);
            let (r0, s0) = data.riemann_initial(ws, x)?;
            let (rx0, sx0) = data.riemann_slopes(ws, x);
            field.r[i] = r0;
            field.s[i] = s0;
            field.rx[i] = rx0;
            field.sx[i] = sx0;
        }
        Self::from_field(field, ws, cfg)
    }

    /// Wraps an explicitly constructed field (synthetic tests, restart-style
    /// use). The field must already be admissible for the wave speed.
    pub fn from_field(field: RiemannField, ws: &WaveSpeed, cfg: &SolverConfig) -> Result<Self> {
        validate_cfg(cfg)?;
        let table = SpeedTable::new(ws, cfg.speed_spline_resolution)?;
        let n = field.n();
        if n < 8 {
            return Err(Error::Geometry(format!("grid too small: {n} nodes")));
        }
        let linear = table.is_linear();
        let mut sim = Simulation {
            table,
            cfg: cfg.clone(),
            threshold: 0.0,
            initial_max_f: 0.0,
            prev: field.clone(),
            field,
            linear,
            ux: vec![0.0; n],
            c: vec![0.0; n],
            kappa: vec![0.0; n],
            c_now_max: 0.0,
            ux_inf: 0.0,
            max_f1: 0.0,
            max_f2: 0.0,
            argmax_x: 0.0,
            boundary_ref: [0.0; 4],
            log: RunLog::default(),
            stopped: None,
            scratch: Scratch::default(),
        };
        sim.refresh_speed_fields()
            .map_err(|_| Error::Inadmissible("initial field outside the admissible set".into()))?;
        sim.initial_max_f = sim.max_f1.max(sim.max_f2);
        sim.threshold = cfg
            .slope_blow_threshold
            .unwrap_or(1e3 * sim.initial_max_f.max(1.0));
        if sim.threshold <= 0.0 {
            return Err(Error::InvalidParam(
                "slope_blow_threshold must be positive".into(),
            ));
        }
        let f = &sim.field;
        sim.boundary_ref = [f.r[0], f.r[n - 1], f.s[0], f.s[n - 1]];
        sim.log.r0_inf = sup_abs(&f.r);
        sim.log.s0_inf = sup_abs(&f.s);
        sim.log.max_r_inf = sim.log.r0_inf;
        sim.log.min_r_inf = sim.log.r0_inf;
        sim.log.max_s_inf = sim.log.s0_inf;
        sim.log.min_s_inf = sim.log.s0_inf;
        sim.push_series_point();
        Ok(sim)
    }

    pub fn field(&self) -> &RiemannField {
        &self.field
    }

    pub fn prev_field(&self) -> &RiemannField {
        &self.prev
    }

    pub fn time(&self) -> f64 {
        self.field.t
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn initial_max_f(&self) -> f64 {
        self.initial_max_f
    }

    pub fn table(&self) -> &SpeedTable {
        &self.table
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    /// u_x at the current field's nodes (spline-recovered).
    pub fn ux(&self) -> &[f64] {
        &self.ux
    }

    /// c(u_x) at the current field's nodes.
    pub fn c_nodes(&self) -> &[f64] {
        &self.c
    }

    /// Recomputes u_x, c, κ and the F maxima for the current field.
    /// Fails when some node has left the admissible set.
    fn refresh_speed_fields(&mut self) -> std::result::Result<(), usize> {
        let n = self.field.n();
        let linear = self.linear;
        let mut c_max = f64::NEG_INFINITY;
        let mut ux_inf = 0.0f64;
        let mut f1 = 0.0f64;
        let mut f2 = 0.0f64;
        let mut arg = 0usize;
        for i in 0..n {
            let y = 0.5 * (self.field.r[i] - self.field.s[i]);
            let (theta, c, kappa) = if linear {
                if y.abs() > self.table.theta_max() {
                    return Err(i);
                }
                (y, 1.0, 0.0)
            } else {
                self.table.recover(y).ok_or(i)?
            };
            self.ux[i] = theta;
            self.c[i] = c;
            self.kappa[i] = kappa;
            c_max = c_max.max(c);
            ux_inf = ux_inf.max(theta.abs());
            let sq = c.sqrt();
            let a = sq * self.field.rx[i].abs();
            let b = sq * self.field.sx[i].abs();
            if a.max(b) > f1.max(f2) {
                arg = i;
            }
            f1 = f1.max(a);
            f2 = f2.max(b);
        }
        self.c_now_max = c_max;
        self.ux_inf = ux_inf;
        self.max_f1 = f1;
        self.max_f2 = f2;
        self.argmax_x = self.field.x(arg);
        Ok(())
    }

    fn push_series_point(&mut self) {
        self.log.series.push(SeriesPoint {
            t: self.field.t,
            max_f1: self.max_f1,
            max_f2: self.max_f2,
            ux_inf: self.ux_inf,
        });
    }

    /// Advances one step of size dt = cfl·dx / max c (clamped to land on
    /// max_time exactly).
    pub fn step(&mut self) -> StepOutcome {
        if let Some(info) = self.stopped {
            return StepOutcome::Stopped(info);
        }
        let n = self.field.n();
        let dx = self.field.dx;
        let x_lo = self.field.x_lo;
        let remaining = self.cfg.max_time - self.field.t;
        if remaining <= 1e-14 {
            return self.stop(StopReason::Horizon, self.field.t);
        }
        let dt = (self.cfg.cfl * dx / self.c_now_max).min(remaining);
        let t_new = self.field.t + dt;

        let sc = &mut self.scratch;
        let nonlinear = !self.linear;
        if nonlinear {
            sc.kappa_foot_m.resize(n, 0.0);
            sc.kappa_foot_p.resize(n, 0.0);
        }

        // Advect into `prev`, which becomes the new field after the swap.
        // Feet are in cell units; the CFL bound pins the foot of node i to
        // cell i (minus family) or cell i-1 (plus family), so the interior
        // loop needs no cell search.
        {
            let old = &self.field;
            let new = &mut self.prev;
            let dt_cells = dt / dx;
            let lo = 2usize;
            let hi = n.saturating_sub(3);
            for i in lo..hi {
                // r rides dx/dt = -c: its foot at the old time lies to the right.
                let c_star_m = lin_interp_cells(&self.c, i as f64 + 0.5 * dt_cells * self.c[i]);
                let s_m = dt_cells * c_star_m;
                // s rides dx/dt = +c: foot to the left.
                let c_star_p = lin_interp_cells(&self.c, i as f64 - 0.5 * dt_cells * self.c[i]);
                let s_p = dt_cells * c_star_p;
                new.r[i] = advect_cell(&old.r, i, s_m);
                new.rx[i] = advect_cell(&old.rx, i, s_m);
                new.s[i] = advect_cell(&old.s, i - 1, 1.0 - s_p);
                new.sx[i] = advect_cell(&old.sx, i - 1, 1.0 - s_p);
                if nonlinear {
                    sc.kappa_foot_m[i] = lin_interp_cells(&self.kappa, i as f64 + s_m);
                    sc.kappa_foot_p[i] = lin_interp_cells(&self.kappa, i as f64 - s_p);
                }
            }
            for i in (0..lo.min(n)).chain(hi..n) {
                let c_star_m = lin_interp_cells(&self.c, i as f64 + 0.5 * dt_cells * self.c[i]);
                let foot_m = i as f64 + dt_cells * c_star_m;
                let c_star_p = lin_interp_cells(&self.c, i as f64 - 0.5 * dt_cells * self.c[i]);
                let foot_p = i as f64 - dt_cells * c_star_p;
                new.r[i] = advect_monotone(&old.r, foot_m);
                new.rx[i] = advect_monotone(&old.rx, foot_m);
                new.s[i] = advect_monotone(&old.s, foot_p);
                new.sx[i] = advect_monotone(&old.sx, foot_p);
                if nonlinear {
                    sc.kappa_foot_m[i] = lin_interp_cells(&self.kappa, foot_m);
                    sc.kappa_foot_p[i] = lin_interp_cells(&self.kappa, foot_p);
                }
            }
            new.t = t_new;
        }

        // Recover u_x, c, κ on the advected invariants and fold the norm
        // reductions into the same pass.
        let mut c_max = f64::NEG_INFINITY;
        let mut ux_inf = 0.0f64;
        let mut r_inf = 0.0f64;
        let mut s_inf = 0.0f64;
        let theta_cap = self.table.theta_max();
        let mut admissibility_hit: Option<usize> = None;
        for i in 0..n {
            let r = self.prev.r[i];
            let s = self.prev.s[i];
            r_inf = r_inf.max(r.abs());
            s_inf = s_inf.max(s.abs());
            let y = 0.5 * (r - s);
            if nonlinear {
                match self.table.recover(y) {
                    Some((theta, c, kappa)) => {
                        self.ux[i] = theta;
                        self.c[i] = c;
                        self.kappa[i] = kappa;
                        c_max = c_max.max(c);
                        ux_inf = ux_inf.max(theta.abs());
                    }
                    None => {
                        admissibility_hit = Some(i);
                        break;
                    }
                }
            } else {
                if y.abs() > theta_cap {
                    admissibility_hit = Some(i);
                    break;
                }
                self.ux[i] = y;
                ux_inf = ux_inf.max(y.abs());
            }
        }
        if !nonlinear {
            c_max = 1.0;
        }
        if let Some(i) = admissibility_hit {
            let x = x_lo + i as f64 * dx;
            self.argmax_x = x;
            return self.stop(StopReason::AdmissibilityLost, t_new);
        }
        self.c_now_max = c_max;
        self.ux_inf = ux_inf;

        // Midpoint source update, sub-stepped where the Riccati term is
        // stiff; κ ≡ 0 on the linear path, where the sources vanish exactly.
        let mut f1 = 0.0f64;
        let mut f2 = 0.0f64;
        let mut arg = 0usize;
        for i in 0..n {
            let (a, b) = if nonlinear {
                integrate_sources(
                    self.prev.rx[i],
                    self.prev.sx[i],
                    sc.kappa_foot_m[i],
                    sc.kappa_foot_p[i],
                    self.kappa[i],
                    dt,
                )
            } else {
                (self.prev.rx[i], self.prev.sx[i])
            };
            self.prev.rx[i] = a;
            self.prev.sx[i] = b;
            let sq = self.c[i].sqrt();
            let fa = sq * a.abs();
            let fb = sq * b.abs();
            if fa.max(fb) > f1.max(f2) {
                arg = i;
            }
            f1 = f1.max(fa);
            f2 = f2.max(fb);
        }
        self.max_f1 = f1;
        self.max_f2 = f2;
        self.argmax_x = x_lo + arg as f64 * dx;

        std::mem::swap(&mut self.field, &mut self.prev);

        // Norm tracking for the conservation check.
        self.log.max_r_inf = self.log.max_r_inf.max(r_inf);
        self.log.min_r_inf = self.log.min_r_inf.min(r_inf);
        self.log.max_s_inf = self.log.max_s_inf.max(s_inf);
        self.log.min_s_inf = self.log.min_s_inf.min(s_inf);
        self.push_series_point();

        if f1.max(f2) >= self.threshold {
            return self.stop(StopReason::Blowup, t_new);
        }
        // Constant far-field values must stay put; any deviation means a wave
        // reached the boundary and the domain was undersized.
        let f = &self.field;
        let tol = 1e-9 * self.log.r0_inf.max(self.log.s0_inf).max(1.0);
        if (f.r[0] - self.boundary_ref[0]).abs() > tol
            || (f.r[n - 1] - self.boundary_ref[1]).abs() > tol
            || (f.s[0] - self.boundary_ref[2]).abs() > tol
            || (f.s[n - 1] - self.boundary_ref[3]).abs() > tol
        {
            return self.stop(StopReason::BoundaryContact, t_new);
        }
        if t_new >= self.cfg.max_time - 1e-14 {
            return self.stop(StopReason::Horizon, t_new);
        }
        StepOutcome::Running
    }

    fn stop(&mut self, reason: StopReason, t: f64) -> StepOutcome {
        let info = StopInfo {
            reason,
            t_stop: t,
            x_at_max_slope: self.argmax_x,
            max_abs_f: self.max_f1.max(self.max_f2),
        };
        self.stopped = Some(info);
        StepOutcome::Stopped(info)
    }

    /// Runs to a stop, invoking `observer(prev, curr)` after every step
    /// (e.g. to advance live characteristic tracers or dump snapshots).
    pub fn run_with<F: FnMut(&RiemannField, &RiemannField)>(
        &mut self,
        mut observer: F,
    ) -> StopInfo {
        loop {
            match self.step() {
                StepOutcome::Running => observer(&self.prev, &self.field),
                StepOutcome::Stopped(info) => {
                    if self.field.t > self.prev.t {
                        observer(&self.prev, &self.field);
                    }
                    return info;
                }
            }
        }
    }

    pub fn run(&mut self) -> StopInfo {
        self.run_with(|_, _| {})
    }
}

/// Integrates the coupled slope sources
///   a' = κ_r(τ)·a·(a-b),  b' = κ_s(τ)·b·(b-a)
/// over [0, dt] with midpoint steps, restarting with more substeps when the
/// local growth is too fast for the current resolution.
fn integrate_sources(a0: f64, b0: f64, kr0: f64, kp0: f64, k1: f64, dt: f64) -> (f64, f64) {
    let mut m = 1usize;
    let scale = (a0.abs() + b0.abs()) * kr0.abs().max(kp0.abs()).max(k1.abs()) * dt;
    if scale > 0.05 {
        m = ((scale / 0.05).ceil() as usize).min(1024);
    }
    'retry: loop {
        let h = dt / m as f64;
        let mut a = a0;
        let mut b = b0;
        for k in 0..m {
            let tau0 = k as f64 / m as f64;
            let tau_mid = (k as f64 + 0.5) / m as f64;
            let kr_0 = kr0 + (k1 - kr0) * tau0;
            let kp_0 = kp0 + (k1 - kp0) * tau0;
            let kr_m = kr0 + (k1 - kr0) * tau_mid;
            let kp_m = kp0 + (k1 - kp0) * tau_mid;
            let growth = h * (a.abs() + b.abs()) * kr_m.abs().max(kp_m.abs());
            if growth > 0.25 {
                if m < 1024 {
                    m = (m * 2).min(1024);
                    continue 'retry;
                }
                // saturated: clamp and bail, the threshold check takes over
                a = a.clamp(-SLOPE_CAP, SLOPE_CAP);
                b = b.clamp(-SLOPE_CAP, SLOPE_CAP);
            }
            let k1a = kr_0 * a * (a - b);
            let k1b = kp_0 * b * (b - a);
            let am = a + 0.5 * h * k1a;
            let bm = b + 0.5 * h * k1b;
            a += h * kr_m * am * (am - bm);
            b += h * kp_m * bm * (bm - am);
            if !a.is_finite() || a.abs() > SLOPE_CAP {
                a = SLOPE_CAP * if a.is_sign_negative() { -1.0 } else { 1.0 };
            }
            if !b.is_finite() || b.abs() > SLOPE_CAP {
                b = SLOPE_CAP * if b.is_sign_negative() { -1.0 } else { 1.0 };
            }
        }
        return (a, b);
    }
}

fn validate_cfg(cfg: &SolverConfig) -> Result<()> {
    if !(cfg.dx > 0.0) || !cfg.dx.is_finite() {
        return Err(Error::Config(format!("solver.dx must be positive, got {}", cfg.dx)));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl < 1.0) {
        return Err(Error::Config(format!(
            "solver.cfl must lie in (0,1), got {}",
            cfg.cfl
        )));
    }
    if !(cfg.max_time > 0.0) {
        return Err(Error::Config(format!(
            "solver.max_time must be positive, got {}",
            cfg.max_time
        )));
    }
    if let Some(th) = cfg.slope_blow_threshold {
        if !(th > 0.0) {
            return Err(Error::Config(format!(
                "solver.slope_blow_threshold must be positive, got {th}"
            )));
        }
    }
    Ok(())
}

/// Monotone (Fritsch–Carlson) cubic sampled at a foot position given in
/// cell units; constant extension outside the grid. The limiter keeps the
/// value inside the range of the bracketing nodes, which is the discrete
/// maximum principle the invariants rely on.
#[inline]
fn advect_monotone(values: &[f64], pos_cells: f64) -> f64 {
    let n = values.len();
    if pos_cells <= 0.0 {
        return values[0];
    }
    if pos_cells >= (n - 1) as f64 {
        return values[n - 1];
    }
    let j = pos_cells as usize;
    let s = pos_cells - j as f64;
    let vj = values[j];
    let vj1 = values[j + 1];
    let del = vj1 - vj;
    let del_l = if j == 0 { del } else { vj - values[j - 1] };
    let del_r = if j + 2 >= n { del } else { values[j + 2] - vj1 };
    let d0 = fc_limit(del_l, del);
    let d1 = fc_limit(del, del_r);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * vj
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * vj1
        + (s3 - s2) * d1
}

/// Interior fast path of `advect_monotone`: the containing cell j is known
/// (CFL < 1 pins it) and the full stencil j-1..j+2 is in bounds.
#[inline]
fn advect_cell(values: &[f64], j: usize, s: f64) -> f64 {
    debug_assert!(j >= 1 && j + 2 < values.len());
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
    let vm = values[j - 1];
    let vj = values[j];
    let vj1 = values[j + 1];
    let vp = values[j + 2];
    let del = vj1 - vj;
    let d0 = fc_limit(vj - vm, del);
    let d1 = fc_limit(del, vp - vj1);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * vj
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * vj1
        + (s3 - s2) * d1
}

/// Fritsch–Carlson slope limiter on two neighboring cell increments.
#[inline]
fn fc_limit(dl: f64, dr: f64) -> f64 {
    if dl * dr <= 0.0 {
        0.0
    } else {
        let m = 0.5 * (dl + dr);
        let cap = 3.0 * dl.abs().min(dr.abs());
        m.clamp(-cap, cap)
    }
}

#[inline]
fn lin_interp_cells(values: &[f64], pos_cells: f64) -> f64 {
    let n = values.len();
    if pos_cells <= 0.0 {
        return values[0];
    }
    if pos_cells >= (n - 1) as f64 {
        return values[n - 1];
    }
    let j = pos_cells as usize;
    let s = pos_cells - j as f64;
    values[j] * (1.0 - s) + values[j + 1] * s
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Convenience driver: init, run to a stop, return the final field with the
/// stop info and diagnostic series.
pub fn run_until_stop(
    data: &InitialData,
    ws: &WaveSpeed,
    cfg: &SolverConfig,
) -> Result<(RiemannField, StopInfo, RunLog)> {
    let mut sim = Simulation::new(data, ws, cfg)?;
    let info = sim.run();
    let log = sim.log().clone();
    Ok((sim.field, info, log))
}

/// Recovers u_t = (r+s)/2 and u_x = G⁻¹((r-s)/2) nodewise, using the exact
/// (Newton-backed) inversion rather than the solver's spline.
pub fn extract_u(field: &RiemannField, ws: &WaveSpeed) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = field.n();
    let mut ut = vec![0.0; n];
    let mut ux = vec![0.0; n];
    for i in 0..n {
        ut[i] = 0.5 * (field.r[i] + field.s[i]);
        ux[i] = ws.invert_g(0.5 * (field.r[i] - field.s[i]))?;
    }
    Ok((ut, ux))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initialdata::{Profile, ProfileKind};
    use crate::wavespeed::SpeedKind;

    fn gaussian(center: f64, width: f64, amplitude: f64) -> Profile {
        Profile::new(ProfileKind::Gaussian, center, width, amplitude).unwrap()
    }

    fn small_cfg() -> SolverConfig {
        SolverConfig {
            dx: 1.0 / 128.0,
            cfl: 0.8,
            domain_half_width: 16.0,
            slope_blow_threshold: None,
            max_time: 2.0,
            speed_spline_resolution: 2048,
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.0).unwrap();
        let (field, info, _) = run_until_stop(&data, &ws, &small_cfg()).unwrap();
        assert_eq!(info.reason, StopReason::Horizon);
        assert!(field.r.iter().all(|&v| v == 0.0));
        assert!(field.rx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_round_trips_initial_data() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let data = InitialData::new(
            vec![gaussian(0.0, 1.0, 0.5)],
            vec![gaussian(0.3, 1.1, 1.0)],
            0.1,
        )
        .unwrap();
        let sim = Simulation::new(&data, &ws, &small_cfg()).unwrap();
        let (ut, ux) = extract_u(sim.field(), &ws).unwrap();
        for i in (0..sim.field().n()).step_by(37) {
            let x = sim.field().x(i);
            assert!((ut[i] - data.epsilon * data.psi_at(x).value).abs() < 1e-10);
            assert!((ux[i] - data.epsilon * data.phi_at(x).dx).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_speed_slopes_advect_exactly_like_invariants() {
        // c ≡ 1: sources vanish, r(t,x) = r0(x+t).
        let ws = WaveSpeed::new(SpeedKind::Constant, 1.0).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.5).unwrap();
        let cfg = SolverConfig {
            max_time: 1.0,
            ..small_cfg()
        };
        let mut sim = Simulation::new(&data, &ws, &cfg).unwrap();
        let info = sim.run();
        assert_eq!(info.reason, StopReason::Horizon);
        let t = sim.field().t;
        for i in (0..sim.field().n()).step_by(13) {
            let x = sim.field().x(i);
            let expect_r = data.epsilon * data.psi_at(x + t).value;
            let expect_rx = data.epsilon * data.psi_at(x + t).dx;
            assert!((sim.field().r[i] - expect_r).abs() < 2e-5, "r at {x}");
            assert!((sim.field().rx[i] - expect_rx).abs() < 2e-4, "rx at {x}");
        }
    }

    #[test]
    fn sine_advection_third_order() {
        // r0 = sin(x) on a wide grid; compare against exact transport.
        let ws = WaveSpeed::new(SpeedKind::Constant, 1.0).unwrap();
        let mut errs = Vec::new();
        for k in [6, 7] {
            let dx = 1.0 / (1 << k) as f64;
            let cells = (40.0 / dx) as usize;
            let n = cells + 1;
            let x_lo = -20.0;
            let mut field = RiemannField {
                t: 0.0,
                x_lo,
                dx,
                r: (0..n).map(|i| (x_lo + i as f64 * dx).sin()).collect(),
                s: vec![0.0; n],
                rx: vec![0.0; n],
                sx: vec![0.0; n],
            };
            field.sx = vec![0.0; n];
            let cfg = SolverConfig {
                dx,
                cfl: 0.8,
                domain_half_width: 20.0,
                slope_blow_threshold: Some(1e6),
                max_time: 1.0,
                speed_spline_resolution: 1024,
            };
            let mut sim = Simulation::from_field(field, &ws, &cfg).unwrap();
            sim.run();
            let t = sim.field().t;
            let mut err = 0.0f64;
            // interior only: the boundary cells feel the constant extension
            let lo = (5.0 / dx) as usize;
            let hi = sim.field().n() - lo;
            for i in lo..hi {
                let x = sim.field().x(i);
                err = err.max((sim.field().r[i] - (x + t).sin()).abs());
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(errs[1] < 1e-4, "errors {errs:?}");
        assert!(order > 2.0, "observed order {order}, errors {errs:?}");
    }

    #[test]
    fn maximum_principle_and_conservation() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.2).unwrap();
        let cfg = SolverConfig {
            max_time: 4.0,
            ..small_cfg()
        };
        let (_, info, log) = run_until_stop(&data, &ws, &cfg).unwrap();
        assert_eq!(info.reason, StopReason::Horizon);
        // sup norms never grow and barely decay
        assert!(log.max_r_inf <= log.r0_inf * (1.0 + 1e-12));
        assert!(log.conservation_drift() < 1e-3 * cfg.max_time, "drift {}", log.conservation_drift());
    }

    #[test]
    fn small_data_confinement_and_speed_pinching() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let data = InitialData::new(
            vec![gaussian(0.0, 1.0, 0.3)],
            vec![gaussian(0.0, 1.0, 1.0)],
            0.05,
        )
        .unwrap();
        let cfg = SolverConfig {
            max_time: 3.0,
            ..small_cfg()
        };
        let mut sim = Simulation::new(&data, &ws, &cfg).unwrap();
        let bound = 4.0 * (sim.log().r0_inf + sim.log().s0_inf);
        loop {
            let outcome = sim.step();
            for (i, &c) in sim.c_nodes().iter().enumerate() {
                assert!((0.5..=1.5).contains(&c), "c out of pinch at node {i}: {c}");
            }
            assert!(sup_abs(sim.ux()) <= bound);
            if let StepOutcome::Stopped(info) = outcome {
                assert_eq!(info.reason, StopReason::Horizon);
                break;
            }
        }
    }

    #[test]
    fn richardson_self_convergence() {
        // p = 2, ε = 0.2, t = 1: coarse run within 1e-4 of a 4x-refined run.
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.2).unwrap();
        let run = |dx: f64| {
            let cfg = SolverConfig {
                dx,
                cfl: 0.8,
                domain_half_width: 14.0,
                slope_blow_threshold: Some(1e6),
                max_time: 1.0,
                speed_spline_resolution: 4096,
            };
            let (field, info, _) = run_until_stop(&data, &ws, &cfg).unwrap();
            assert_eq!(info.reason, StopReason::Horizon);
            field
        };
        let coarse = run(1.0 / 256.0);
        let fine = run(1.0 / 1024.0);
        let ratio = (coarse.dx / fine.dx).round() as usize;
        let mut err = 0.0f64;
        for i in 0..coarse.n() {
            let j = i * ratio;
            err = err.max((coarse.r[i] - fine.r[j]).abs());
        }
        assert!(err < 1e-4, "L_inf(r) self-convergence error {err}");
    }

    #[test]
    fn geometry_and_admissibility_rejections() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.1).unwrap();
        let cfg = SolverConfig {
            domain_half_width: 5.0,
            max_time: 10.0,
            ..small_cfg()
        };
        assert!(matches!(
            Simulation::new(&data, &ws, &cfg),
            Err(Error::Geometry(_))
        ));

        let fat = InitialData::new(vec![gaussian(0.0, 1.0, 1.0)], vec![], 0.9).unwrap();
        assert!(matches!(
            Simulation::new(&fat, &ws, &small_cfg()),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn extract_u_degenerate_identities() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let n = 16;
        let mk = |r: Vec<f64>, s: Vec<f64>| RiemannField {
            t: 0.0,
            x_lo: 0.0,
            dx: 0.1,
            rx: vec![0.0; n],
            sx: vec![0.0; n],
            r,
            s,
        };
        // r = s pointwise -> ux ≡ 0
        let f = mk(vec![0.07; n], vec![0.07; n]);
        let (_, ux) = extract_u(&f, &ws).unwrap();
        assert!(ux.iter().all(|&v| v == 0.0));
        // r = -s pointwise -> ut ≡ 0
        let f = mk(vec![0.07; n], vec![-0.07; n]);
        let (ut, _) = extract_u(&f, &ws).unwrap();
        assert!(ut.iter().all(|&v| v == 0.0));
    }
}
