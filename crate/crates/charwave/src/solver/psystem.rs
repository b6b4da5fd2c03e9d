//! Independent finite-volume oracle on the first-order reduction
//! v_t - w_x = 0, w_t - c(v)² v_x = 0 with v = u_x, w = u_t.
//!
//! Written in conservation form with fluxes (-w, -H(v)), H = ∫ c², and
//! advanced by a local Lax–Friedrichs (Rusanov) step. Deliberately a
//! different discretization from the main solver; used only as a test
//! oracle for cross-scheme comparisons and blowup-time checks.

use super::table::SpeedTable;
use super::RiemannField;
use crate::error::{Error, Result};
use crate::initialdata::InitialData;
use crate::wavespeed::WaveSpeed;

/// One local Lax–Friedrichs step on (v, w). Returns the updated pair.
pub fn reference_step_psystem(
    v: &[f64],
    w: &[f64],
    table: &SpeedTable,
    dt: f64,
    dx: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = v.len();
    assert_eq!(n, w.len());
    let c_of = |vi: f64| table.c(vi);
    let mut cmax = 0.0f64;
    for &vi in v {
        cmax = cmax.max(c_of(vi));
    }
    if dt * cmax > dx * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "p-system CFL violation: dt*max c = {:.3e} > dx = {:.3e}",
            dt * cmax,
            dx
        )));
    }
    let get = |arr: &[f64], i: isize| -> f64 {
        // constant extension
        let i = i.clamp(0, n as isize - 1) as usize;
        arr[i]
    };
    // interface flux F_{i+1/2} with F(U) = (-w, -H(v))
    let flux = |vl: f64, wl: f64, vr: f64, wr: f64| -> (f64, f64) {
        let a = c_of(vl).max(c_of(vr));
        let f1 = 0.5 * (-wl - wr) - 0.5 * a * (vr - vl);
        let f2 = 0.5 * (-table.h(vl) - table.h(vr)) - 0.5 * a * (wr - wl);
        (f1, f2)
    };
    let lam = dt / dx;
    let mut v_new = vec![0.0; n];
    let mut w_new = vec![0.0; n];
    for i in 0..n {
        let ii = i as isize;
        let (fl1, fl2) = flux(get(v, ii - 1), get(w, ii - 1), v[i], w[i]);
        let (fr1, fr2) = flux(v[i], w[i], get(v, ii + 1), get(w, ii + 1));
        v_new[i] = v[i] - lam * (fr1 - fl1);
        w_new[i] = w[i] - lam * (fr2 - fl2);
    }
    Ok((v_new, w_new))
}

/// Driver around the reference step with the same grid conventions as the
/// main solver.
pub struct ReferenceSolver {
    pub table: SpeedTable,
    pub x_lo: f64,
    pub dx: f64,
    pub t: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    cfl: f64,
}

impl ReferenceSolver {
    pub fn new(
        data: &InitialData,
        ws: &WaveSpeed,
        dx: f64,
        domain_half_width: f64,
        cfl: f64,
    ) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Config(format!("reference cfl must be in (0,1], got {cfl}")));
        }
        let table = SpeedTable::new(ws, 4096)?;
        let cells = (2.0 * domain_half_width / dx).ceil() as usize;
        let half = 0.5 * cells as f64 * dx;
        let n = cells + 1;
        let mut v = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let x = -half + i as f64 * dx;
            v[i] = data.epsilon * data.phi_at(x).dx;
            w[i] = data.epsilon * data.psi_at(x).value;
        }
        Ok(ReferenceSolver {
            table,
            x_lo: -half,
            dx,
            t: 0.0,
            v,
            w,
            cfl,
        })
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    pub fn step(&mut self) -> Result<f64> {
        let mut cmax = 0.0f64;
        for &vi in &self.v {
            cmax = cmax.max(self.table.c(vi));
        }
        let dt = self.cfl * self.dx / cmax;
        let (v, w) = reference_step_psystem(&self.v, &self.w, &self.table, dt, self.dx)?;
        self.v = v;
        self.w = w;
        self.t += dt;
        Ok(dt)
    }

    pub fn run_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end - 1e-12 {
            let mut cmax = 0.0f64;
            for &vi in &self.v {
                cmax = cmax.max(self.table.c(vi));
            }
            let dt = (self.cfl * self.dx / cmax).min(t_end - self.t);
            let (v, w) = reference_step_psystem(&self.v, &self.w, &self.table, dt, self.dx)?;
            self.v = v;
            self.w = w;
            self.t += dt;
        }
        Ok(())
    }

    /// Slope proxy max|F| = max √c·|w_x + c v_x| by central differences;
    /// the reference has no evolved slope fields.
    pub fn max_f(&self) -> f64 {
        let n = self.n();
        let mut best = 0.0f64;
        for i in 1..n - 1 {
            let c = self.table.c(self.v[i]);
            let wx = (self.w[i + 1] - self.w[i - 1]) / (2.0 * self.dx);
            let vx = (self.v[i + 1] - self.v[i - 1]) / (2.0 * self.dx);
            let f1 = c.sqrt() * (wx + c * vx).abs();
            let f2 = c.sqrt() * (wx - c * vx).abs();
            best = best.max(f1).max(f2);
        }
        best
    }

    /// Runs until max|F| crosses `threshold`, returning the crossing time,
    /// or None if the horizon arrives first.
    pub fn time_to_threshold(&mut self, threshold: f64, max_time: f64) -> Result<Option<f64>> {
        while self.t < max_time {
            self.step()?;
            if self.max_f() >= threshold {
                return Ok(Some(self.t));
            }
        }
        Ok(None)
    }
}

/// L∞ distance between the main solver's u_x and the reference v on the
/// common (matched) grid.
pub fn ux_linf_distance(field: &RiemannField, ux: &[f64], reference: &ReferenceSolver) -> f64 {
    let mut err = 0.0f64;
    let n = field.n().min(reference.n());
    for i in 0..n {
        debug_assert!((field.x(i) - reference.x(i)).abs() < 1e-9);
        err = err.max((ux[i] - reference.v[i]).abs());
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initialdata::{Profile, ProfileKind};
    use crate::solver::{extract_u, run_until_stop, SolverConfig, StopReason};
    use crate::wavespeed::SpeedKind;

    fn gaussian(center: f64, width: f64, amplitude: f64) -> Profile {
        Profile::new(ProfileKind::Gaussian, center, width, amplitude).unwrap()
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let table = SpeedTable::new(&ws, 1024).unwrap();
        let v = vec![0.1; 32];
        let w = vec![-0.2; 32];
        let (v2, w2) = reference_step_psystem(&v, &w, &table, 0.001, 0.01).unwrap();
        for i in 0..32 {
            assert!((v2[i] - 0.1).abs() < 1e-15);
            assert!((w2[i] + 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let ws = WaveSpeed::new(SpeedKind::Constant, 1.0).unwrap();
        let table = SpeedTable::new(&ws, 512).unwrap();
        let v = vec![0.0; 16];
        let w = vec![0.0; 16];
        assert!(reference_step_psystem(&v, &w, &table, 0.02, 0.01).is_err());
    }

    #[test]
    fn linear_case_converges_to_dalembert_first_order() {
        let ws = WaveSpeed::new(SpeedKind::Constant, 2.0).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 1.0).unwrap();
        let mut errs = Vec::new();
        for k in [7, 8] {
            let dx = 1.0 / (1 << k) as f64;
            let mut solver = ReferenceSolver::new(&data, &ws, dx, 14.0, 0.9).unwrap();
            solver.run_to(1.0).unwrap();
            // d'Alembert: v = u_x = (ψ(x+t) - ψ(x-t))/2 for φ ≡ 0
            let mut err = 0.0f64;
            for i in 0..solver.n() {
                let x = solver.x(i);
                let exact =
                    0.5 * (data.psi_at(x + solver.t).value - data.psi_at(x - solver.t).value);
                err = err.max((solver.v[i] - exact).abs());
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 0.7, "observed order {order}; errors {errs:?}");
        assert!(errs[1] < 0.02);
    }

    #[test]
    fn cross_scheme_agreement_p3() {
        // power_sqrt(A=1, p=3), ε = 0.3 pulse: reference v agrees with the
        // main solver's u_x within 1e-3 at t = 1 on matched grids.
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.6).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.3).unwrap();
        let dx = 1.0 / 512.0;
        let half = 13.0;
        let cfg = SolverConfig {
            dx,
            cfl: 0.8,
            domain_half_width: half,
            slope_blow_threshold: Some(1e9),
            max_time: 1.0,
            speed_spline_resolution: 4096,
        };
        let (field, info, _) = run_until_stop(&data, &ws, &cfg).unwrap();
        assert_eq!(info.reason, StopReason::Horizon);
        let (_, ux) = extract_u(&field, &ws).unwrap();

        let mut reference = ReferenceSolver::new(&data, &ws, dx, half, 0.9).unwrap();
        reference.run_to(field.t).unwrap();
        let err = ux_linf_distance(&field, &ux, &reference);
        assert!(err < 1e-3, "cross-scheme L_inf(u_x) = {err}");
    }
}
