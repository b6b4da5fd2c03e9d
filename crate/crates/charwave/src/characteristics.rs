//! Characteristic tracing through evolving fields.
//!
//! A trace integrates dx/dt = ±c(u_x) together with the Riccati slope
//! equation dF/dt = γ(u_x)·F² using classical RK4, sampling the fields by
//! cubic interpolation in space and linear interpolation in time between
//! consecutive grid snapshots. Poles of F are extrapolated from the exact
//! affinity of 1/F in t when γ has stabilized.

use crate::error::{Error, Result};
use crate::numeric::fit_line;
use crate::solver::{RiemannField, SpeedTable};

/// Characteristic family: plus moves right (dx/dt = +c) and carries s;
/// minus moves left and carries r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Plus,
    Minus,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Plus => "plus",
            Family::Minus => "minus",
        }
    }

    /// The invariant constant along this trace (the opposite family's).
    fn invariant(&self, r: f64, s: f64) -> f64 {
        match self {
            Family::Minus => r,
            Family::Plus => s,
        }
    }

    fn sign(&self) -> f64 {
        match self {
            Family::Plus => 1.0,
            Family::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(v: &str) -> Result<Self> {
        match v {
            "plus" => Ok(Family::Plus),
            "minus" => Ok(Family::Minus),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

/// One recorded point along a trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceSample {
    pub t: f64,
    pub x: f64,
    /// r along a minus trace, s along a plus trace.
    pub invariant: f64,
    pub ux: f64,
    pub c_prime: f64,
    pub gamma: f64,
    pub f: f64,
}

/// A completed characteristic path with its Riccati variable.
#[derive(Debug, Clone)]
pub struct CharTrace {
    pub family: Family,
    pub seed_t: f64,
    pub seed_x: f64,
    pub samples: Vec<TraceSample>,
    /// Time at which the integrated F left the representable range (the
    /// trace passed its pole), if it did.
    pub diverged_at: Option<f64>,
    /// Time at which the trace left the grid interior, if it did.
    pub exited_at: Option<f64>,
}

impl CharTrace {
    /// Largest relative drift of the transported invariant along the trace.
    pub fn invariant_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let scale = first.invariant.abs().max(1e-12);
        self.samples
            .iter()
            .map(|s| (s.invariant - first.invariant).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// F cap past which a trace is declared to have blown through its pole.
const F_DIVERGED: f64 = 1e12;
/// Relative Riccati growth allowed per RK4 substep.
const MAX_GROWTH_PER_STEP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TraceState {
    Active,
    Diverged,
    Exited,
}

/// Incremental tracer fed one solver step (or snapshot pair) at a time.
pub struct LiveTracer {
    family: Family,
    t: f64,
    x: f64,
    f: f64,
    state: TraceState,
    sample_dt: f64,
    last_sample_t: f64,
    trace: CharTrace,
}

impl LiveTracer {
    /// Seeds a tracer on `field` at position `x0`; F is read off the grid
    /// slope of the trace's own family (√c·r_x for minus, √c·s_x for plus).
    pub fn seed(
        field: &RiemannField,
        table: &SpeedTable,
        family: Family,
        x0: f64,
        sample_dt: f64,
    ) -> Result<Self> {
        if x0 < field.x_lo || x0 > field.x_hi() {
            return Err(Error::Precondition(format!(
                "trace seed x0 = {x0} outside the domain [{}, {}]",
                field.x_lo,
                field.x_hi()
            )));
        }
        let point = PointState::at(field, field, field.t, x0, table);
        let mut tracer = LiveTracer {
            family,
            t: field.t,
            x: x0,
            f: point.f_of(family),
            state: TraceState::Active,
            sample_dt: sample_dt.max(0.0),
            last_sample_t: f64::NEG_INFINITY,
            trace: CharTrace {
                family,
                seed_t: field.t,
                seed_x: x0,
                samples: Vec::new(),
                diverged_at: None,
                exited_at: None,
            },
        };
        tracer.record(&point);
        Ok(tracer)
    }

    pub fn is_active(&self) -> bool {
        self.state == TraceState::Active
    }

    /// Advances through the time slab [prev.t, curr.t].
    pub fn advance(&mut self, prev: &RiemannField, curr: &RiemannField, table: &SpeedTable) {
        if self.state != TraceState::Active {
            return;
        }
        let t1 = curr.t;
        let slab_dt = t1 - prev.t;
        if slab_dt <= 0.0 {
            return;
        }
        let sign = self.family.sign();
        let interior = 2.0 * prev.dx;
        let (x_min, x_max) = (prev.x_lo + interior, prev.x_hi() - interior);
        let min_h = slab_dt * 1e-7;
        while self.t < t1 - 1e-14 {
            let here = PointState::at(prev, curr, self.t, self.x, table);
            let rate = (here.gamma * self.f).abs();
            let mut h = (t1 - self.t).min(slab_dt);
            if rate > 0.0 {
                h = h.min(MAX_GROWTH_PER_STEP / rate);
            }
            if h < min_h || self.f.abs() > F_DIVERGED {
                self.state = TraceState::Diverged;
                self.trace.diverged_at = Some(self.t);
                return;
            }
            // classical RK4 on (x, F)
            let deriv = |t: f64, x: f64, f: f64| -> (f64, f64) {
                let p = PointState::at(prev, curr, t, x, table);
                (sign * p.c, p.gamma * f * f)
            };
            let (k1x, k1f) = deriv(self.t, self.x, self.f);
            let (k2x, k2f) = deriv(self.t + 0.5 * h, self.x + 0.5 * h * k1x, self.f + 0.5 * h * k1f);
            let (k3x, k3f) = deriv(self.t + 0.5 * h, self.x + 0.5 * h * k2x, self.f + 0.5 * h * k2f);
            let (k4x, k4f) = deriv(self.t + h, self.x + h * k3x, self.f + h * k3f);
            self.x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            self.f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
            self.t += h;
            if !self.f.is_finite() || self.f.abs() > F_DIVERGED {
                self.state = TraceState::Diverged;
                self.trace.diverged_at = Some(self.t);
                return;
            }
            if self.x < x_min || self.x > x_max {
                self.state = TraceState::Exited;
                self.trace.exited_at = Some(self.t);
                return;
            }
        }
        if self.t - self.last_sample_t >= self.sample_dt - 1e-14 {
            let point = PointState::at(prev, curr, self.t, self.x, table);
            self.record(&point);
        }
    }

    fn record(&mut self, point: &PointState) {
        self.last_sample_t = self.t;
        self.trace.samples.push(TraceSample {
            t: self.t,
            x: self.x,
            invariant: self.family.invariant(point.r, point.s),
            ux: point.ux,
            c_prime: point.c_prime,
            gamma: point.gamma,
            f: self.f,
        });
    }

    pub fn into_trace(self) -> CharTrace {
        self.trace
    }

    pub fn trace(&self) -> &CharTrace {
        &self.trace
    }
}

/// Interpolated field state at one space-time point.
struct PointState {
    r: f64,
    s: f64,
    rx: f64,
    sx: f64,
    ux: f64,
    c: f64,
    c_prime: f64,
    gamma: f64,
}

impl PointState {
    fn at(prev: &RiemannField, curr: &RiemannField, t: f64, x: f64, table: &SpeedTable) -> Self {
        let w = if curr.t > prev.t {
            ((t - prev.t) / (curr.t - prev.t)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let lerp = |a: f64, b: f64| a + (b - a) * w;
        let r = lerp(local_cubic(&prev.r, prev.x_lo, prev.dx, x), local_cubic(&curr.r, curr.x_lo, curr.dx, x));
        let s = lerp(local_cubic(&prev.s, prev.x_lo, prev.dx, x), local_cubic(&curr.s, curr.x_lo, curr.dx, x));
        let rx = lerp(local_cubic(&prev.rx, prev.x_lo, prev.dx, x), local_cubic(&curr.rx, curr.x_lo, curr.dx, x));
        let sx = lerp(local_cubic(&prev.sx, prev.x_lo, prev.dx, x), local_cubic(&curr.sx, curr.x_lo, curr.dx, x));
        let (g_lo, g_hi) = table.g_range();
        let y = (0.5 * (r - s)).clamp(g_lo, g_hi);
        let ux = table.invert_g(y).unwrap_or(0.0);
        let c = table.c(ux);
        let c_prime = table.c_prime(ux);
        PointState {
            r,
            s,
            rx,
            sx,
            ux,
            c,
            c_prime,
            gamma: c_prime / (2.0 * c * c.sqrt()),
        }
    }

    fn f_of(&self, family: Family) -> f64 {
        match family {
            Family::Minus => self.c.sqrt() * self.rx,
            Family::Plus => self.c.sqrt() * self.sx,
        }
    }
}

/// Catmull-Rom style local cubic on a uniform grid, one-sided at the ends,
/// constant extension outside.
fn local_cubic(values: &[f64], x_lo: f64, dx: f64, x: f64) -> f64 {
    let n = values.len();
    let pos = (x - x_lo) / dx;
    if pos <= 0.0 {
        return values[0];
    }
    if pos >= (n - 1) as f64 {
        return values[n - 1];
    }
    let j = (pos.floor() as usize).min(n - 2);
    let s = pos - j as f64;
    let d0 = if j == 0 {
        values[1] - values[0]
    } else {
        0.5 * (values[j + 1] - values[j - 1])
    };
    let d1 = if j + 2 >= n {
        values[j + 1] - values[j]
    } else {
        0.5 * (values[j + 2] - values[j])
    };
    let (y0, y1) = (values[j], values[j + 1]);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * d1
}

/// Traces a characteristic through a stored snapshot series. Snapshots must
/// be time-ordered with gaps no coarser than 10·dx, and the seed must lie in
/// the covered range; a trace that leaves the grid interior is an error here
/// (live tracers merely stop).
pub fn trace_with_riccati(
    snapshots: &[RiemannField],
    table: &SpeedTable,
    family: Family,
    seed: (f64, f64),
    sample_dt: Option<f64>,
) -> Result<CharTrace> {
    if snapshots.len() < 2 {
        return Err(Error::Precondition(
            "need at least two snapshots to trace".into(),
        ));
    }
    let (seed_t, seed_x) = seed;
    let dx = snapshots[0].dx;
    for pair in snapshots.windows(2) {
        let gap = pair[1].t - pair[0].t;
        if gap <= 0.0 {
            return Err(Error::Precondition("snapshots not time-ordered".into()));
        }
        if gap > 10.0 * dx {
            return Err(Error::Precondition(format!(
                "snapshot gap {gap:.6} too coarse: exceeds 10 dx = {:.6}",
                10.0 * dx
            )));
        }
    }
    let t_end = snapshots.last().unwrap().t;
    if seed_t < snapshots[0].t - 1e-12 || seed_t >= t_end {
        return Err(Error::Precondition(format!(
            "seed time {seed_t} outside snapshot range [{}, {})",
            snapshots[0].t, t_end
        )));
    }
    let start = snapshots
        .windows(2)
        .position(|p| seed_t < p[1].t)
        .unwrap_or(snapshots.len() - 2);
    // Seed on the interpolated state of the containing slab.
    let default_dt = ((t_end - seed_t) / 2000.0).max(snapshots[1].t - snapshots[0].t);
    let mut tracer = LiveTracer::seed(
        &snapshots[start],
        table,
        family,
        seed_x,
        sample_dt.unwrap_or(default_dt),
    )?;
    tracer.t = seed_t;
    for k in start..snapshots.len() - 1 {
        tracer.advance(&snapshots[k], &snapshots[k + 1], table);
        if !tracer.is_active() {
            break;
        }
    }
    let trace = tracer.into_trace();
    if let Some(t) = trace.exited_at {
        return Err(Error::Precondition(format!(
            "trace exited the domain at t = {t:.6}"
        )));
    }
    Ok(trace)
}

/// Closed-form Riccati solution F(t) = F₀ / (1 - γF₀t) and its pole
/// 1/(γF₀) (present iff γF₀ > 0). Evaluation at the pole is an error.
pub fn riccati_closed_form(f0: f64, gamma: f64, t: f64) -> Result<(f64, Option<f64>)> {
    let denom = 1.0 - gamma * f0 * t;
    if denom == 0.0 {
        return Err(Error::Precondition(format!(
            "riccati closed form evaluated at its pole t = {t}"
        )));
    }
    let t_pole = if gamma * f0 > 0.0 {
        Some(1.0 / (gamma * f0))
    } else {
        None
    };
    Ok((f0 / denom, t_pole))
}

/// Pole extrapolation of a trace.
#[derive(Debug, Clone)]
pub struct RiccatiPrediction {
    /// Extrapolated blowup time; present only when F was positive and
    /// increasing over the fit window.
    pub t_pole: Option<f64>,
    /// Negated slope of the 1/F fit, the effective γ over the tail.
    pub gamma_eff: f64,
    /// Max fit residual relative to the 1/F range over the window.
    pub confidence: f64,
}

/// Fraction of the samples used as the tail fit window.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// Fits 1/F against t over the trace tail; 1/F is exactly affine when γ is
/// constant, so the root of the fitted line is the pole and the residual
/// measures γ's drift. Returns None when the trace has fewer than 10
/// samples or the tail F is non-positive or non-monotone.
pub fn predict_pole(trace: &CharTrace, tail_fraction: f64) -> Option<RiccatiPrediction> {
    let n = trace.samples.len();
    if n < 10 {
        return None;
    }
    let start = ((n as f64) * (1.0 - tail_fraction)).floor() as usize;
    let window = &trace.samples[start.min(n - 2)..];
    if window.iter().any(|s| s.f <= 0.0) {
        return None;
    }
    let mut increasing = true;
    for pair in window.windows(2) {
        if pair[1].f < pair[0].f * (1.0 - 1e-9) {
            increasing = false;
        }
    }
    let first = window.first().unwrap().f;
    let last = window.last().unwrap().f;
    if !increasing || last <= first * (1.0 + 1e-9) {
        return None;
    }
    let ts: Vec<f64> = window.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = window.iter().map(|s| 1.0 / s.f).collect();
    let fit = fit_line(&ts, &ys)?;
    let y_range = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let confidence = fit
        .residuals
        .iter()
        .map(|r| r.abs())
        .fold(0.0, f64::max)
        / y_range.max(1e-300);
    let t_pole = if fit.slope < 0.0 {
        Some(-fit.intercept / fit.slope)
    } else {
        None
    };
    Some(RiccatiPrediction {
        t_pole,
        gamma_eff: -fit.slope,
        confidence,
    })
}

/// Lemma-5 style diagnostic along a condition-witness trace.
#[derive(Debug, Clone, Copy)]
pub struct Lemma5Outcome {
    /// Earliest sampled time after which c'(u_x) ≥ κ·ε^(p-2) holds for all
    /// later samples.
    pub t_onset: f64,
    /// The realized κ at that onset.
    pub kappa_witness: f64,
}

/// Scans the suffix minima of c'(u_x)/ε^(p-2) along the trace. The onset is
/// the earliest time whose suffix minimum reaches half the tail plateau
/// (mirroring the lemma's "for sufficiently large time"); None when the
/// plateau is not positive (e.g. constant speeds).
pub fn lemma5_diagnostic(trace: &CharTrace, p: f64, epsilon: f64) -> Option<Lemma5Outcome> {
    let n = trace.samples.len();
    if n < 4 {
        return None;
    }
    let scale = epsilon.powf(p - 2.0);
    let ratios: Vec<f64> = trace.samples.iter().map(|s| s.c_prime / scale).collect();
    let mut suffix_min = vec![0.0; n];
    let mut running = f64::INFINITY;
    for i in (0..n).rev() {
        running = running.min(ratios[i]);
        suffix_min[i] = running;
    }
    let tail_start = ((n as f64) * 0.75).floor() as usize;
    let target = suffix_min[tail_start.min(n - 1)];
    if !(target > 0.0) {
        return None;
    }
    let onset_idx = suffix_min.iter().position(|&m| m >= 0.5 * target)?;
    Some(Lemma5Outcome {
        t_onset: trace.samples[onset_idx].t,
        kappa_witness: suffix_min[onset_idx],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavespeed::{SpeedKind, WaveSpeed};

    /// A synthetic snapshot series with uniform u_x = θ*: straight
    /// characteristics and constant γ.
    fn synthetic_series(
        ws: &WaveSpeed,
        theta_star: f64,
        f0: f64,
        t_end: f64,
        slab_dt: f64,
        dx: f64,
        half: f64,
    ) -> (Vec<RiemannField>, SpeedTable) {
        let table = SpeedTable::new(ws, 2048).unwrap();
        let g = ws.big_g(theta_star);
        let c = ws.c(theta_star);
        let n = (2.0 * half / dx) as usize + 1;
        let mut snaps = Vec::new();
        let mut t = 0.0;
        while t <= t_end + 1e-12 {
            snaps.push(RiemannField {
                t,
                x_lo: -half,
                dx,
                r: vec![g; n],
                s: vec![-g; n],
                rx: vec![f0 / c.sqrt(); n],
                sx: vec![0.0; n],
            });
            t += slab_dt;
        }
        (snaps, table)
    }

    #[test]
    fn constant_speed_trace_is_straight_with_flat_f() {
        let ws = WaveSpeed::new(SpeedKind::Constant, 1.0).unwrap();
        let (snaps, table) = synthetic_series(&ws, 0.0, 1.0, 2.0, 0.05, 0.01, 8.0);
        let trace =
            trace_with_riccati(&snaps, &table, Family::Minus, (0.0, 1.5), Some(0.05)).unwrap();
        for s in &trace.samples {
            // x(t) = x0 - t, F constant
            assert!((s.x - (1.5 - s.t)).abs() < 1e-10, "x at t={}", s.t);
            assert!((s.f - 1.0).abs() < 1e-12);
            assert_eq!(s.gamma, 0.0);
        }
        assert!(predict_pole(&trace, DEFAULT_TAIL_FRACTION).is_none());
        assert!(lemma5_diagnostic(&trace, 2.0, 0.1).is_none());
    }

    #[test]
    fn constant_gamma_trace_matches_closed_form() {
        // γ(θ*) constant in a frozen field: F must follow F0/(1-γF0 t).
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let theta_star = 0.2;
        let f0 = 1.0;
        let gamma = ws.gamma(theta_star);
        let t_pole = 1.0 / (gamma * f0);
        let (snaps, table) =
            synthetic_series(&ws, theta_star, f0, 0.5 * t_pole, 0.05, 0.01, 2.0 + t_pole);
        let trace =
            trace_with_riccati(&snaps, &table, Family::Minus, (0.0, 0.0), Some(0.02)).unwrap();
        for s in &trace.samples {
            let (expect, _) = riccati_closed_form(f0, gamma, s.t).unwrap();
            assert!(
                (s.f - expect).abs() / expect <= 1e-8,
                "t={}: {} vs {}",
                s.t,
                s.f,
                expect
            );
        }
        let pred = predict_pole(&trace, DEFAULT_TAIL_FRACTION).unwrap();
        let pole = pred.t_pole.unwrap();
        assert!(
            (pole - t_pole).abs() / t_pole < 1e-5,
            "pole {pole} vs {t_pole}"
        );
        assert!((pred.gamma_eff - gamma).abs() / gamma < 1e-5);
    }

    #[test]
    fn closed_form_cases() {
        // γ = 0: constant solution, no pole.
        let (f, pole) = riccati_closed_form(3.0, 0.0, 10.0).unwrap();
        assert_eq!(f, 3.0);
        assert!(pole.is_none());
        // decay branch
        let (f, pole) = riccati_closed_form(1.0, -1.0, 1.0).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
        assert!(pole.is_none());
        // F0 = 2Cε, γ = γ₁ε^(p-2) -> pole (2Cγ₁)⁻¹ ε^-(p-1)
        let (c_amp, gamma1, eps, p): (f64, f64, f64, f64) = (0.7, 0.3, 0.05, 3.0);
        let f0 = 2.0 * c_amp * eps;
        let g = gamma1 * eps.powf(p - 2.0);
        let (_, pole) = riccati_closed_form(f0, g, 0.0).unwrap();
        let expect = eps.powf(-(p - 1.0)) / (2.0 * c_amp * gamma1);
        assert!((pole.unwrap() - expect).abs() / expect < 1e-12);
        // pole evaluation is an error
        assert!(riccati_closed_form(1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn predict_pole_on_exact_samples() {
        // samples straight from the closed form: pole and γ to 1e-6
        let (f0, gamma) = (1.0, 0.5);
        let t_pole = 1.0 / (gamma * f0);
        let mut trace = CharTrace {
            family: Family::Minus,
            seed_t: 0.0,
            seed_x: 0.0,
            samples: Vec::new(),
            diverged_at: None,
            exited_at: None,
        };
        for k in 0..100 {
            let t = 0.018 * k as f64; // up to 1.782 < 2
            let (f, _) = riccati_closed_form(f0, gamma, t).unwrap();
            trace.samples.push(TraceSample {
                t,
                x: 0.0,
                invariant: 0.0,
                ux: 0.0,
                c_prime: 0.0,
                gamma,
                f,
            });
        }
        let pred = predict_pole(&trace, DEFAULT_TAIL_FRACTION).unwrap();
        let pole = pred.t_pole.unwrap();
        assert!((pole - t_pole).abs() / t_pole < 1e-6, "pole {pole}");
        assert!((pred.gamma_eff - gamma).abs() < 1e-6);
        assert!(pred.confidence < 1e-9);
    }

    #[test]
    fn predict_pole_rejects_sign_changing_f() {
        let mut trace = CharTrace {
            family: Family::Minus,
            seed_t: 0.0,
            seed_x: 0.0,
            samples: Vec::new(),
            diverged_at: None,
            exited_at: None,
        };
        for k in 0..40 {
            trace.samples.push(TraceSample {
                t: k as f64 * 0.1,
                x: 0.0,
                invariant: 0.0,
                ux: 0.0,
                c_prime: 0.0,
                gamma: 0.0,
                f: if k % 2 == 0 { 1.0 } else { -1.0 },
            });
        }
        assert!(predict_pole(&trace, DEFAULT_TAIL_FRACTION).is_none());
    }

    #[test]
    fn coarse_snapshot_gap_is_rejected() {
        let ws = WaveSpeed::new(SpeedKind::Constant, 1.0).unwrap();
        let (snaps, table) = synthetic_series(&ws, 0.0, 1.0, 2.0, 0.5, 0.01, 4.0);
        // gap 0.5 > 10 dx = 0.1
        assert!(trace_with_riccati(&snaps, &table, Family::Minus, (0.0, 0.0), None).is_err());
    }
}
