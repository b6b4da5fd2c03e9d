//! Small numerical kernels shared by the other modules: adaptive quadrature,
//! piecewise-cubic interpolation (monotone and slope-exact variants), and a
//! plain linear least-squares fit.

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Recursion stops when the local Richardson estimate drops below the
/// per-interval share of `tol`, scaled relative to `max(1, |integral|)`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol.max(1e-15), 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    let scale = 1.0_f64.max(whole.abs());
    if depth == 0 || err.abs() <= 15.0 * tol * scale {
        return left + right + err / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
}

/// Fritsch–Carlson limited slopes for a uniform grid.
///
/// The resulting cubic Hermite interpolant is monotone on monotone data and
/// never leaves the range of the two bracketing node values, which is what
/// the advection step relies on for its discrete maximum principle.
pub fn monotone_slopes(values: &[f64], dx: f64, out: &mut Vec<f64>) {
    let n = values.len();
    out.clear();
    out.resize(n, 0.0);
    if n < 2 {
        return;
    }
    let inv = 1.0 / dx;
    let delta = |i: usize| (values[i + 1] - values[i]) * inv;
    out[0] = delta(0);
    out[n - 1] = delta(n - 2);
    for i in 1..n - 1 {
        let dl = delta(i - 1);
        let dr = delta(i);
        if dl * dr <= 0.0 {
            out[i] = 0.0;
        } else {
            let m = 0.5 * (dl + dr);
            let cap = 3.0 * dl.abs().min(dr.abs());
            out[i] = m.clamp(-cap, cap);
        }
    }
    // One-sided ends, limited so the end interval stays monotone.
    out[0] = clamp_end(out[0], delta(0));
    out[n - 1] = clamp_end(out[n - 1], delta(n - 2));
}

fn clamp_end(d: f64, delta: f64) -> f64 {
    if d * delta <= 0.0 {
        0.0
    } else {
        d.clamp(-3.0 * delta.abs(), 3.0 * delta.abs())
    }
}

/// Cubic Hermite evaluation on a uniform grid with precomputed slopes.
///
/// `x` is clamped to the grid (constant extension beyond either end).
pub fn hermite_eval(x_lo: f64, dx: f64, values: &[f64], slopes: &[f64], x: f64) -> f64 {
    let n = values.len();
    debug_assert_eq!(n, slopes.len());
    if n == 1 {
        return values[0];
    }
    let pos = (x - x_lo) / dx;
    if pos <= 0.0 {
        return values[0];
    }
    let last = (n - 1) as f64;
    if pos >= last {
        return values[n - 1];
    }
    let j = pos.floor() as usize;
    let s = pos - j as f64;
    let (y0, y1) = (values[j], values[j + 1]);
    let (d0, d1) = (slopes[j] * dx, slopes[j + 1] * dx);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
}

/// Centered-difference slopes (no limiter); used where smoothness matters
/// more than shape preservation, e.g. trace-time interpolation of `u_x`.
pub fn centered_slopes(values: &[f64], dx: f64, out: &mut Vec<f64>) {
    let n = values.len();
    out.clear();
    out.resize(n, 0.0);
    if n < 2 {
        return;
    }
    let inv = 1.0 / dx;
    out[0] = (values[1] - values[0]) * inv;
    out[n - 1] = (values[n - 1] - values[n - 2]) * inv;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * 0.5 * inv;
    }
}

/// Result of a straight-line least-squares fit `y ≈ intercept + slope·x`.
#[derive(Debug, Clone)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares through `(x_i, y_i)`. Needs at least two points
/// with distinct abscissae; returns `None` otherwise.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = (0..n)
        .map(|i| ys[i] - (intercept + slope * xs[i]))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_closed_forms() {
        let val = adaptive_simpson(&|x: f64| x.cos(), 0.0, 1.0, 1e-12);
        assert!((val - 1.0_f64.sin()).abs() < 1e-12);
        let val = adaptive_simpson(&|x: f64| (-x * x).exp(), -3.0, 3.0, 1e-12);
        // erf(3)·sqrt(pi)
        assert!((val - 1.772_453_850_905_516 * 0.999_977_909_503_001).abs() < 1e-10);
        assert_eq!(adaptive_simpson(&|_| 7.0, 2.0, 2.0, 1e-12), 0.0);
    }

    #[test]
    fn simpson_handles_flat_exponential() {
        // Integrand that is C-infinity flat at 0; the adaptive rule should
        // still converge since the function is tiny where it is wild.
        let g = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                (-1.0 / t.abs()).exp()
            }
        };
        let val = adaptive_simpson(&g, 0.0, 0.5, 1e-12);
        let fine: f64 = {
            // trapezoid refinement oracle
            let mut prev = 0.0;
            let mut est = 0.0;
            for k in 10..=22 {
                let n = 1usize << k;
                let h = 0.5 / n as f64;
                let mut s = 0.5 * (g(0.0) + g(0.5));
                for i in 1..n {
                    s += g(i as f64 * h);
                }
                est = s * h;
                if (est - prev).abs() < 1e-13 {
                    break;
                }
                prev = est;
            }
            est
        };
        assert!((val - fine).abs() < 1e-11, "{val} vs {fine}");
    }

    #[test]
    fn monotone_interpolation_stays_in_range() {
        let values = vec![0.0, 0.0, 1.0, 1.0, 0.2, 0.2];
        let dx = 0.5;
        let mut slopes = Vec::new();
        monotone_slopes(&values, dx, &mut slopes);
        for k in 0..=600 {
            let x = -0.2 + k as f64 * 0.005;
            let y = hermite_eval(0.0, dx, &values, &slopes, x);
            assert!(
                (-1e-14..=1.0 + 1e-14).contains(&y),
                "overshoot at {x}: {y}"
            );
        }
        // monotone on the rising segment
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=100 {
            let x = 0.5 + k as f64 * 0.005;
            let y = hermite_eval(0.0, dx, &values, &slopes, x);
            assert!(y >= prev - 1e-12);
            prev = y;
        }
    }

    #[test]
    fn hermite_reproduces_cubics_with_exact_slopes() {
        let f = |x: f64| 0.3 * x * x * x - x * x + 2.0 * x - 0.5;
        let fp = |x: f64| 0.9 * x * x - 2.0 * x + 2.0;
        let x_lo = -1.0;
        let dx = 0.25;
        let n = 17;
        let values: Vec<f64> = (0..n).map(|i| f(x_lo + i as f64 * dx)).collect();
        let slopes: Vec<f64> = (0..n).map(|i| fp(x_lo + i as f64 * dx)).collect();
        for k in 0..=160 {
            let x = -1.0 + k as f64 * 0.025;
            let y = hermite_eval(x_lo, dx, &values, &slopes, x);
            assert!((y - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn line_fit_exact_and_degenerate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 5.0]).is_none());
        assert!(fit_line(&[1.0], &[0.0]).is_none());
    }
}
