//! Pre-tabulated wave-speed quantities for the solver's hot loop.
//!
//! c, c', G, H = ∫c² and G⁻¹ are sampled on a uniform θ grid (default 4096
//! cells) and interpolated with cubic Hermite splines whose nodal slopes are
//! exact (G' = c, H' = c², (G⁻¹)' = 1/c), which keeps the interpolation error
//! at the h⁴ scale. The G spline is validated against direct quadrature at
//! construction; per-node Newton inversion inside the step loop would
//! otherwise dominate runtime.

use crate::error::{Error, Result};
use crate::numeric::{centered_slopes, hermite_eval};
use crate::wavespeed::WaveSpeed;

/// Accuracy demanded of the tabulated G against direct quadrature.
pub const TABLE_VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpeedTable {
    theta_lo: f64,
    d_theta: f64,
    c_vals: Vec<f64>,
    c_slopes: Vec<f64>, // = c' exactly
    cp_vals: Vec<f64>,
    cp_slopes: Vec<f64>, // centered differences of c'
    g_vals: Vec<f64>,    // slopes are c_vals
    h_vals: Vec<f64>,    // slopes are c_vals²
    y_lo: f64,
    d_y: f64,
    inv_vals: Vec<f64>,
    inv_slopes: Vec<f64>, // = 1/c exactly
    // c and κ = c'/(2c) re-tabulated against y = G(θ), so the solver's
    // recovery needs a single cell locate per node
    c_of_y: Vec<f64>,
    c_of_y_slopes: Vec<f64>, // = c'/c exactly
    kappa_of_y: Vec<f64>,
    kappa_of_y_slopes: Vec<f64>,
    g_lo: f64,
    g_hi: f64,
    c_max: f64,
}

impl SpeedTable {
    pub fn new(ws: &WaveSpeed, resolution: usize) -> Result<Self> {
        let cells = resolution.max(64) & !1; // even, so θ = 0 is a grid node
        let n = cells + 1;
        let theta_max = ws.theta_max();
        let theta_lo = -theta_max;
        let d_theta = 2.0 * theta_max / cells as f64;

        let mut c_vals = vec![0.0; n];
        let mut cp_vals = vec![0.0; n];
        let mid = cells / 2;
        // Sample c cumulatively outward from θ = 0 so that c(0) = 1 holds
        // exactly on the grid even for quadrature-defined (gevrey) speeds.
        c_vals[mid] = 1.0;
        cp_vals[mid] = ws.c_prime(0.0);
        let analytic_c = !matches!(ws.kind(), crate::wavespeed::SpeedKind::GevreyFlat { .. });
        for step in 1..=mid {
            for (i, prev) in [(mid + step, mid + step - 1), (mid - step, mid - step + 1)] {
                let theta = theta_lo + i as f64 * d_theta;
                cp_vals[i] = ws.c_prime(theta);
                if analytic_c {
                    c_vals[i] = ws.c(theta);
                } else {
                    // c' = g is exact at the nodes; a Hermite-consistent panel
                    // integral of g accumulates c without nested quadrature.
                    let a = theta_lo + prev as f64 * d_theta;
                    let panel = panel_integral_simpson(
                        |t| ws.c_prime(t),
                        a,
                        theta,
                        cp_vals[prev],
                        cp_vals[i],
                    );
                    c_vals[i] = c_vals[prev] + panel;
                }
            }
        }

        let c_max = c_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        // Cumulative panel integrals of the c-Hermite give G; the cubic's
        // integral over a cell is closed-form.
        let mut g_vals = vec![0.0; n];
        for i in mid..cells {
            g_vals[i + 1] =
                g_vals[i] + hermite_cell_integral(c_vals[i], c_vals[i + 1], cp_vals[i], cp_vals[i + 1], d_theta);
        }
        for i in (0..mid).rev() {
            g_vals[i] =
                g_vals[i + 1] - hermite_cell_integral(c_vals[i], c_vals[i + 1], cp_vals[i], cp_vals[i + 1], d_theta);
        }

        // H = ∫ c² by per-cell Simpson on the c-Hermite.
        let mut h_vals = vec![0.0; n];
        let half = 0.5 * d_theta;
        for i in mid..cells {
            let cm = hermite_mid(c_vals[i], c_vals[i + 1], cp_vals[i], cp_vals[i + 1], d_theta);
            h_vals[i + 1] = h_vals[i]
                + d_theta / 6.0
                    * (c_vals[i] * c_vals[i] + 4.0 * cm * cm + c_vals[i + 1] * c_vals[i + 1]);
            let _ = half;
        }
        for i in (0..mid).rev() {
            let cm = hermite_mid(c_vals[i], c_vals[i + 1], cp_vals[i], cp_vals[i + 1], d_theta);
            h_vals[i] = h_vals[i + 1]
                - d_theta / 6.0
                    * (c_vals[i] * c_vals[i] + 4.0 * cm * cm + c_vals[i + 1] * c_vals[i + 1]);
        }

        let g_lo = g_vals[0];
        let g_hi = g_vals[n - 1];

        let mut cp_slopes = Vec::new();
        centered_slopes(&cp_vals, d_theta, &mut cp_slopes);

        // Inverse table on a uniform y grid, via Newton on the G spline.
        let d_y = (g_hi - g_lo) / cells as f64;
        let mut inv_vals = vec![0.0; n];
        let mut inv_slopes = vec![0.0; n];
        let mut guess = theta_lo;
        for j in 0..n {
            let y = g_lo + j as f64 * d_y;
            let mut x = guess.clamp(theta_lo, theta_max);
            for _ in 0..60 {
                let g = hermite_eval(theta_lo, d_theta, &g_vals, &c_vals, x);
                let err = g - y;
                if err.abs() <= 1e-15 * y.abs().max(1.0) {
                    break;
                }
                let c = hermite_eval(theta_lo, d_theta, &c_vals, &cp_vals, x);
                x = (x - err / c).clamp(theta_lo, theta_max);
            }
            inv_vals[j] = x;
            inv_slopes[j] = 1.0 / hermite_eval(theta_lo, d_theta, &c_vals, &cp_vals, x);
            guess = x;
        }
        // Pin the exact endpoints and center.
        inv_vals[0] = theta_lo;
        inv_vals[n - 1] = theta_max;

        let mut c_of_y = vec![0.0; n];
        let mut c_of_y_slopes = vec![0.0; n];
        let mut kappa_of_y = vec![0.0; n];
        for j in 0..n {
            let theta = inv_vals[j];
            let c = hermite_eval(theta_lo, d_theta, &c_vals, &cp_vals, theta);
            let cp = hermite_eval(theta_lo, d_theta, &cp_vals, &cp_slopes, theta);
            c_of_y[j] = c;
            c_of_y_slopes[j] = cp / c; // dc/dy = c'(θ)·dθ/dy
            kappa_of_y[j] = cp / (2.0 * c);
        }
        let mut kappa_of_y_slopes = Vec::new();
        centered_slopes(&kappa_of_y, d_y, &mut kappa_of_y_slopes);

        let table = SpeedTable {
            theta_lo,
            d_theta,
            c_vals,
            c_slopes: cp_vals.clone(),
            cp_vals,
            cp_slopes,
            g_vals,
            h_vals,
            y_lo: g_lo,
            d_y,
            inv_vals,
            inv_slopes,
            c_of_y,
            c_of_y_slopes,
            kappa_of_y,
            kappa_of_y_slopes,
            g_lo,
            g_hi,
            c_max,
        };
        table.validate_against(ws)?;
        Ok(table)
    }

    /// Spot-checks the tabulated G (and c) against the wave speed's own
    /// quadrature-backed evaluation.
    fn validate_against(&self, ws: &WaveSpeed) -> Result<()> {
        let theta_max = ws.theta_max();
        for k in 0..=32 {
            let theta = -theta_max + 2.0 * theta_max * k as f64 / 32.0;
            let g_direct = ws.big_g(theta);
            let g_table = self.big_g(theta);
            if (g_direct - g_table).abs() > TABLE_VALIDATION_TOL * g_direct.abs().max(1.0) {
                return Err(Error::InvalidParam(format!(
                    "speed table failed validation: G({theta}) spline {g_table:.12e} vs quadrature {g_direct:.12e}"
                )));
            }
            let c_direct = ws.c(theta);
            let c_table = self.c(theta);
            if (c_direct - c_table).abs() > TABLE_VALIDATION_TOL * c_direct.abs() {
                return Err(Error::InvalidParam(format!(
                    "speed table failed validation: c({theta}) spline {c_table:.12e} vs direct {c_direct:.12e}"
                )));
            }
            let theta_rt = self.invert_g(g_table).expect("in range");
            if (theta_rt - theta).abs() > 1e-8 * theta.abs().max(1.0) {
                return Err(Error::InvalidParam(format!(
                    "speed table failed validation: invert_g(G({theta})) = {theta_rt}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn c(&self, theta: f64) -> f64 {
        hermite_eval(self.theta_lo, self.d_theta, &self.c_vals, &self.c_slopes, theta)
    }

    #[inline]
    pub fn c_prime(&self, theta: f64) -> f64 {
        hermite_eval(self.theta_lo, self.d_theta, &self.cp_vals, &self.cp_slopes, theta)
    }

    #[inline]
    pub fn big_g(&self, theta: f64) -> f64 {
        hermite_eval(self.theta_lo, self.d_theta, &self.g_vals, &self.c_vals, theta)
    }

    /// H(θ) = ∫₀^θ c², the flux primitive of the p-system form.
    /// Slopes of H are c², computed on the fly to avoid another array.
    #[inline]
    pub fn h(&self, theta: f64) -> f64 {
        let n = self.c_vals.len();
        let pos = ((theta - self.theta_lo) / self.d_theta).clamp(0.0, (n - 1) as f64);
        let j = (pos.floor() as usize).min(n - 2);
        let s = pos - j as f64;
        let (y0, y1) = (self.h_vals[j], self.h_vals[j + 1]);
        let (d0, d1) = (
            self.c_vals[j] * self.c_vals[j] * self.d_theta,
            self.c_vals[j + 1] * self.c_vals[j + 1] * self.d_theta,
        );
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }

    /// γ(θ) = c'/(2 c^{3/2}).
    #[inline]
    pub fn gamma(&self, theta: f64) -> f64 {
        let c = self.c(theta);
        self.c_prime(theta) / (2.0 * c * c.sqrt())
    }

    /// κ(θ) = c'/(2c), the slope-equation coefficient.
    #[inline]
    pub fn kappa(&self, theta: f64) -> f64 {
        self.c_prime(theta) / (2.0 * self.c(theta))
    }

    /// θ with G(θ) = y, or None when y is outside the admissible range.
    #[inline]
    pub fn invert_g(&self, y: f64) -> Option<f64> {
        if y < self.g_lo || y > self.g_hi {
            return None;
        }
        Some(hermite_eval(self.y_lo, self.d_y, &self.inv_vals, &self.inv_slopes, y))
    }

    /// One-locate recovery of (θ, c, κ) from y = (r - s)/2; the solver's
    /// per-node hot path. None when y has left the admissible range.
    #[inline]
    pub fn recover(&self, y: f64) -> Option<(f64, f64, f64)> {
        if y < self.g_lo || y > self.g_hi {
            return None;
        }
        let n = self.inv_vals.len();
        let pos = ((y - self.y_lo) / self.d_y).clamp(0.0, (n - 1) as f64);
        let j = (pos as usize).min(n - 2);
        let s = pos - j as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = (s3 - 2.0 * s2 + s) * self.d_y;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = (s3 - s2) * self.d_y;
        let eval = |vals: &[f64], slopes: &[f64]| {
            h00 * vals[j] + h10 * slopes[j] + h01 * vals[j + 1] + h11 * slopes[j + 1]
        };
        Some((
            eval(&self.inv_vals, &self.inv_slopes),
            eval(&self.c_of_y, &self.c_of_y_slopes),
            eval(&self.kappa_of_y, &self.kappa_of_y_slopes),
        ))
    }

    pub fn g_range(&self) -> (f64, f64) {
        (self.g_lo, self.g_hi)
    }

    pub fn theta_max(&self) -> f64 {
        -self.theta_lo
    }

    /// True for the constant (linear wave) speed: c ≡ 1, c' ≡ 0, G = id.
    pub fn is_linear(&self) -> bool {
        self.c_vals.iter().all(|&c| c == 1.0) && self.cp_vals.iter().all(|&cp| cp == 0.0)
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }
}

/// Exact integral of the cubic Hermite over one cell.
fn hermite_cell_integral(y0: f64, y1: f64, d0: f64, d1: f64, h: f64) -> f64 {
    h * (0.5 * (y0 + y1) + h * (d0 - d1) / 12.0)
}

/// Hermite value at the cell midpoint.
fn hermite_mid(y0: f64, y1: f64, d0: f64, d1: f64, h: f64) -> f64 {
    0.5 * (y0 + y1) + 0.125 * h * (d0 - d1)
}

/// Simpson panel with exact endpoint data and a midpoint function call.
fn panel_integral_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (fa + 4.0 * f(m) + fb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavespeed::SpeedKind;

    #[test]
    fn table_matches_direct_evaluation() {
        for kind in [
            SpeedKind::Constant,
            SpeedKind::PowerSqrt { a: 1.0, p: 2.0 },
            SpeedKind::PowerSqrt { a: 1.0, p: 3.0 },
            SpeedKind::ExpPower { c: 1.0, p: 3.0 },
            SpeedKind::GevreyFlat {
                c1: 1.0,
                c2: 1.0,
                s: 2.0,
                alpha: 0.0,
                second: None,
            },
        ] {
            let ws = WaveSpeed::new(kind, 0.5).unwrap();
            let table = SpeedTable::new(&ws, 4096).unwrap();
            for k in 0..=50 {
                let theta = -0.5 + k as f64 / 50.0;
                assert!((table.c(theta) - ws.c(theta)).abs() < 1e-9);
                assert!(
                    (table.big_g(theta) - ws.big_g(theta)).abs() < 1e-9,
                    "{}: G({theta})",
                    ws.kind().name()
                );
                let y = table.big_g(theta);
                let rt = table.invert_g(y).unwrap();
                assert!((rt - theta).abs() < 1e-8, "roundtrip at {theta}: {rt}");
            }
            assert!(table.invert_g(table.g_range().1 * 1.5).is_none());
        }
    }

    #[test]
    fn h_matches_trapezoid_of_c_squared() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let table = SpeedTable::new(&ws, 4096).unwrap();
        for theta in [-0.5, -0.2, 0.17, 0.5] {
            let n = 200_000;
            let h = theta / n as f64;
            let mut s = 0.5 * (1.0 + ws.c(theta) * ws.c(theta));
            for i in 1..n {
                let c = ws.c(i as f64 * h);
                s += c * c;
            }
            let oracle = s * h;
            assert!(
                (table.h(theta) - oracle).abs() < 1e-8,
                "H({theta}) = {} vs {oracle}",
                table.h(theta)
            );
        }
    }
}
