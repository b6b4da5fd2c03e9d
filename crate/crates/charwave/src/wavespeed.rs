//! Wave-speed families c(θ) for the quasilinear wave equation, together with
//! the derived quantities used throughout: the primitive G(θ) = ∫₀^θ c, its
//! inverse, and the Riccati coefficient γ = c'/(2c^{3/2}).
//!
//! All families are normalized to c(0) = 1 and kept strictly hyperbolic
//! (c ≥ 1/4) on the admissible interval [-theta_max, theta_max]; both facts
//! are enforced at construction.

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

/// Default relative tolerance for quadrature-backed evaluations of G.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-12;

/// Lower bound kept on c over the admissible interval.
pub const HYPERBOLICITY_FLOOR: f64 = 0.25;

/// sign(θ)·|θ|^e — the continuous odd power used by all power-law speeds.
fn odd_pow(theta: f64, e: f64) -> f64 {
    theta.signum() * theta.abs().powf(e)
}

/// Wave-speed family and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeedKind {
    /// c ≡ 1 (the linear wave equation).
    Constant,
    /// c(θ) = (1 + A·sign(θ)|θ|^(p-1))^(1/2), A > 0, p > 1.
    PowerSqrt { a: f64, p: f64 },
    /// c(θ) = exp(C·sign(θ)|θ|^(p-1)), C > 0, p > 1.
    ExpPower { c: f64, p: f64 },
    /// c(θ) = 1 + A·sign(θ)|θ|^(p-1) + B·sign(θ)|θ|^(q-1), A,B > 0, q > p > 1.
    DoublePower { a: f64, b: f64, p: f64, q: f64 },
    /// c(θ) = 1 + ∫₀^θ g with g(θ) = C₁|θ|^(-α)·exp(-C₂|θ|^(-1/(s-1)) - C₃|θ|^(-1/(s'-1)))
    /// off the origin and g(0) = 0; flat at the origin to all orders.
    GevreyFlat {
        c1: f64,
        c2: f64,
        s: f64,
        alpha: f64,
        /// Optional second exponential layer (C₃, s') with s' > s.
        second: Option<(f64, f64)>,
    },
}

impl SpeedKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpeedKind::Constant => "constant",
            SpeedKind::PowerSqrt { .. } => "power_sqrt",
            SpeedKind::ExpPower { .. } => "exp_power",
            SpeedKind::DoublePower { .. } => "double_power",
            SpeedKind::GevreyFlat { .. } => "gevrey_flat",
        }
    }
}

/// Point evaluation of a wave speed: c, c', G and γ at one θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPoint {
    pub c: f64,
    pub c_prime: f64,
    pub big_g: f64,
    pub gamma: f64,
}

/// A validated wave speed on [-theta_max, theta_max].
#[derive(Debug, Clone)]
pub struct WaveSpeed {
    kind: SpeedKind,
    theta_max: f64,
    quadrature_tol: f64,
    // cached at construction
    g_lo: f64,
    g_hi: f64,
    c_max: f64,
    c_min: f64,
}

impl WaveSpeed {
    /// Builds a wave speed, checking per-kind parameter positivity and that
    /// the sampled c stays above the hyperbolicity floor on the interval.
    pub fn new(kind: SpeedKind, theta_max: f64) -> Result<Self> {
        Self::with_tol(kind, theta_max, DEFAULT_QUADRATURE_TOL)
    }

    pub fn with_tol(kind: SpeedKind, theta_max: f64, quadrature_tol: f64) -> Result<Self> {
        if !(theta_max > 0.0) || !theta_max.is_finite() {
            return Err(Error::InvalidParam(format!(
                "theta_max must be positive, got {theta_max}"
            )));
        }
        if !(quadrature_tol > 0.0) {
            return Err(Error::InvalidParam(format!(
                "quadrature_tol must be positive, got {quadrature_tol}"
            )));
        }
        match &kind {
            SpeedKind::Constant => {}
            SpeedKind::PowerSqrt { a, p } => {
                require_positive("A", *a)?;
                require_gt("p", *p, 1.0)?;
            }
            SpeedKind::ExpPower { c, p } => {
                require_positive("C", *c)?;
                require_gt("p", *p, 1.0)?;
            }
            SpeedKind::DoublePower { a, b, p, q } => {
                require_positive("A", *a)?;
                require_positive("B", *b)?;
                require_gt("p", *p, 1.0)?;
                require_gt("q", *q, *p)?;
            }
            SpeedKind::GevreyFlat {
                c1,
                c2,
                s,
                alpha,
                second,
            } => {
                require_positive("C1", *c1)?;
                require_positive("C2", *c2)?;
                require_gt("s", *s, 1.0)?;
                if !alpha.is_finite() {
                    return Err(Error::InvalidParam("alpha must be finite".into()));
                }
                if let Some((c3, s_prime)) = second {
                    require_positive("C3", *c3)?;
                    require_gt("s_prime", *s_prime, *s)?;
                }
            }
        }

        let mut ws = WaveSpeed {
            kind,
            theta_max,
            quadrature_tol,
            g_lo: 0.0,
            g_hi: 0.0,
            c_max: 1.0,
            c_min: 1.0,
        };

        // Dense hyperbolicity sampling; also caches the speed range.
        let samples = 4096;
        let mut c_min = f64::INFINITY;
        let mut c_max = f64::NEG_INFINITY;
        for i in 0..=samples {
            let theta = -theta_max + 2.0 * theta_max * i as f64 / samples as f64;
            let c = ws.c(theta);
            if !c.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "c({theta}) is not finite for kind {}",
                    ws.kind.name()
                )));
            }
            c_min = c_min.min(c);
            c_max = c_max.max(c);
        }
        if c_min < HYPERBOLICITY_FLOOR {
            return Err(Error::InvalidParam(format!(
                "sampled c drops to {c_min:.6} < {HYPERBOLICITY_FLOOR} on |theta| <= {theta_max}; \
                 shrink theta_max",
            )));
        }
        ws.c_min = c_min;
        ws.c_max = c_max;
        ws.g_lo = ws.big_g(-theta_max);
        ws.g_hi = ws.big_g(theta_max);
        Ok(ws)
    }

    pub fn kind(&self) -> &SpeedKind {
        &self.kind
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.quadrature_tol
    }

    /// Largest sampled c on the admissible interval (used for domain sizing).
    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    /// Range of G on the admissible interval.
    pub fn g_range(&self) -> (f64, f64) {
        (self.g_lo, self.g_hi)
    }

    /// Wave speed c(θ). No domain check; θ=0 gives exactly 1 for every kind.
    pub fn c(&self, theta: f64) -> f64 {
        match &self.kind {
            SpeedKind::Constant => 1.0,
            SpeedKind::PowerSqrt { a, p } => (1.0 + a * odd_pow(theta, p - 1.0)).sqrt(),
            SpeedKind::ExpPower { c, p } => (c * odd_pow(theta, p - 1.0)).exp(),
            SpeedKind::DoublePower { a, b, p, q } => {
                1.0 + a * odd_pow(theta, p - 1.0) + b * odd_pow(theta, q - 1.0)
            }
            SpeedKind::GevreyFlat { .. } => {
                if theta == 0.0 {
                    1.0
                } else {
                    1.0 + adaptive_simpson(&|t| self.gevrey_g(t), 0.0, theta, self.quadrature_tol)
                }
            }
        }
    }

    /// c'(θ) by closed-form differentiation of the kind's formula.
    pub fn c_prime(&self, theta: f64) -> f64 {
        match &self.kind {
            SpeedKind::Constant => 0.0,
            SpeedKind::PowerSqrt { a, p } => {
                let m = odd_pow(theta, p - 1.0);
                a * (p - 1.0) * theta.abs().powf(p - 2.0) / (2.0 * (1.0 + a * m).sqrt())
            }
            SpeedKind::ExpPower { c, p } => {
                c * (p - 1.0) * theta.abs().powf(p - 2.0) * (c * odd_pow(theta, p - 1.0)).exp()
            }
            SpeedKind::DoublePower { a, b, p, q } => {
                a * (p - 1.0) * theta.abs().powf(p - 2.0)
                    + b * (q - 1.0) * theta.abs().powf(q - 2.0)
            }
            SpeedKind::GevreyFlat { .. } => self.gevrey_g(theta),
        }
    }

    /// The flat integrand g for gevrey_flat kinds, computed in log space so
    /// the |θ|^(-α) prefactor cannot overflow before the exponential kills it.
    fn gevrey_g(&self, theta: f64) -> f64 {
        let SpeedKind::GevreyFlat {
            c1,
            c2,
            s,
            alpha,
            second,
        } = &self.kind
        else {
            return 0.0;
        };
        if theta == 0.0 {
            return 0.0;
        }
        let at = theta.abs();
        let mut log_g = c1.ln() - alpha * at.ln() - c2 * at.powf(-1.0 / (s - 1.0));
        if let Some((c3, s_prime)) = second {
            log_g -= c3 * at.powf(-1.0 / (s_prime - 1.0));
        }
        log_g.exp()
    }

    /// G(θ) = ∫₀^θ c; closed form for constant and power_sqrt with p = 2,
    /// adaptive quadrature elsewhere. G(0) = 0 exactly.
    pub fn big_g(&self, theta: f64) -> f64 {
        if theta == 0.0 {
            return 0.0;
        }
        match &self.kind {
            SpeedKind::Constant => theta,
            SpeedKind::PowerSqrt { a, p } if *p == 2.0 => {
                2.0 * ((1.0 + a * theta).powf(1.5) - 1.0) / (3.0 * a)
            }
            SpeedKind::GevreyFlat { .. } => {
                // G = θ + ∫₀^θ (θ-τ) g(τ) dτ, collapsing the double integral.
                theta
                    + adaptive_simpson(
                        &|t| (theta - t) * self.gevrey_g(t),
                        0.0,
                        theta,
                        self.quadrature_tol,
                    )
            }
            _ => adaptive_simpson(&|t| self.c(t), 0.0, theta, self.quadrature_tol),
        }
    }

    /// Riccati coefficient γ(θ) = c'(θ) / (2 c(θ)^(3/2)).
    pub fn gamma(&self, theta: f64) -> f64 {
        let c = self.c(theta);
        self.c_prime(theta) / (2.0 * c * c.sqrt())
    }

    /// Full point evaluation with the domain check |θ| ≤ theta_max.
    pub fn evaluate(&self, theta: f64) -> Result<SpeedPoint> {
        if theta.abs() > self.theta_max {
            return Err(Error::Domain {
                theta,
                theta_max: self.theta_max,
            });
        }
        let c = self.c(theta);
        let c_prime = self.c_prime(theta);
        Ok(SpeedPoint {
            c,
            c_prime,
            big_g: self.big_g(theta),
            gamma: c_prime / (2.0 * c * c.sqrt()),
        })
    }

    /// Solves G(θ) = y on the admissible interval by safeguarded Newton
    /// iteration (G' = c ≥ 1/4 makes this globally well behaved). Exact 0
    /// for y = 0; errors if y is outside the range of G.
    pub fn invert_g(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        if y < self.g_lo || y > self.g_hi {
            return Err(Error::GRange {
                y,
                lo: self.g_lo,
                hi: self.g_hi,
            });
        }
        let tol = 1e-12 * 1.0_f64.max(y.abs());
        let (mut lo, mut hi) = (-self.theta_max, self.theta_max);
        // G is close to the identity for small data, so y is a good start.
        let mut x = y.clamp(lo, hi);
        for _ in 0..80 {
            let gx = self.big_g(x);
            let err = gx - y;
            if err.abs() <= tol {
                return Ok(x);
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = err / self.c(x);
            let mut next = x - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            x = next;
        }
        Ok(x)
    }

    /// Checks assumption structure on the geometric grid θ_k = theta_max·2^(-k)
    /// (both signs, k = 0..40). Power claims test c'(θ)/|θ|^(p-2); flat claims
    /// test -log|c'(θ)|·|θ|^(1/(s-1)). Samples where c' underflows to zero are
    /// unusable for the flat logarithm and are skipped.
    pub fn validate(&self, claim: SpeedClaim) -> ValidationReport {
        let mut ratios = Vec::new();
        let mut skipped = 0usize;
        for k in 0..=40 {
            let t = self.theta_max * 0.5f64.powi(k);
            for theta in [t, -t] {
                let cp = self.c_prime(theta);
                match claim {
                    SpeedClaim::Power { p } => {
                        ratios.push(cp / theta.abs().powf(p - 2.0));
                    }
                    SpeedClaim::Flat { s } => {
                        if cp.abs() < f64::MIN_POSITIVE {
                            skipped += 1;
                            continue;
                        }
                        ratios.push(-cp.abs().ln() * theta.abs().powf(1.0 / (s - 1.0)));
                    }
                }
            }
        }
        let (min, max) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        let enough = match claim {
            SpeedClaim::Power { .. } => !ratios.is_empty(),
            // A flat verdict needs a handful of representable samples.
            SpeedClaim::Flat { .. } => ratios.len() >= 5,
        };
        let pass = enough && min >= RATIO_FLOOR && max <= RATIO_CEIL;
        ValidationReport {
            claim,
            pass,
            ratio_min: min,
            ratio_max: max,
            usable_samples: ratios.len(),
            skipped_samples: skipped,
            // min ratio witnesses the one-sided constants of the assumptions.
            witness_constant: min,
        }
    }
}

/// Verdict bounds: only order-of-magnitude structure matters.
pub const RATIO_FLOOR: f64 = 1e-6;
pub const RATIO_CEIL: f64 = 1e6;

/// A structural claim to validate against the sampled derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedClaim {
    /// Degeneracy of order p: C|θ|^(p-2) ≤ c'(θ) near 0.
    Power { p: f64 },
    /// Gevrey flatness of order s: |c'(θ)| ≤ C·exp(-C'|θ|^(-1/(s-1))).
    Flat { s: f64 },
}

/// Grid-sampled validation outcome with the empirical constant witnesses.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub claim: SpeedClaim,
    pub pass: bool,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub usable_samples: usize,
    pub skipped_samples: usize,
    pub witness_constant: f64,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let claim = match self.claim {
            SpeedClaim::Power { p } => format!("power p = {p}"),
            SpeedClaim::Flat { s } => format!("flat s = {s}"),
        };
        writeln!(
            f,
            "claim: {claim}\nverdict: {}",
            if self.pass { "pass" } else { "fail" }
        )?;
        writeln!(
            f,
            "ratio_min: {:.6e}\nratio_max: {:.6e}\nwitness_constant: {:.6e}",
            self.ratio_min, self.ratio_max, self.witness_constant
        )?;
        write!(
            f,
            "usable_samples: {}\nskipped_samples: {}",
            self.usable_samples, self.skipped_samples
        )
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn require_gt(name: &str, v: f64, floor: f64) -> Result<()> {
    if v > floor && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "{name} must exceed {floor}, got {v}"
        )))
    }
}
