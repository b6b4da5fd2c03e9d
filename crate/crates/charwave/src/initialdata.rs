//! Initial profile pairs (φ, ψ) with closed-form derivatives, the initial
//! Riemann invariants they induce, and classification of the data against
//! the blowup conditions (i)/(ii) and the global-existence sign condition.

use crate::error::{Error, Result};
use crate::wavespeed::WaveSpeed;

/// Profile shape; all kinds are C² with bounded derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Zero,
    Gaussian,
    CompactBump,
    SinePacket,
    Tanh,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Zero => "zero",
            ProfileKind::Gaussian => "gaussian",
            ProfileKind::CompactBump => "compact_bump",
            ProfileKind::SinePacket => "sine_packet",
            ProfileKind::Tanh => "tanh",
        }
    }

    /// Whether value and first derivative vanish at infinity (the Theorem 2
    /// decay hypothesis). tanh is the one admitted non-decaying kind.
    pub fn decays(&self) -> bool {
        !matches!(self, ProfileKind::Tanh)
    }
}

/// One bump: `amplitude · shape((x - center)/width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
}

impl Profile {
    pub fn new(kind: ProfileKind, center: f64, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParam(format!(
                "profile width must be positive, got {width}"
            )));
        }
        if !center.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidParam(
                "profile center/amplitude must be finite".into(),
            ));
        }
        Ok(Profile {
            kind,
            center,
            width,
            amplitude,
        })
    }

    /// Closed-form value, first and second derivative.
    pub fn eval(&self, x: f64) -> ProfileValue {
        let w = self.width;
        let a = self.amplitude;
        let xi = (x - self.center) / w;
        let (v, d1, d2) = match self.kind {
            ProfileKind::Zero => (0.0, 0.0, 0.0),
            ProfileKind::Gaussian => {
                let e = (-xi * xi).exp();
                (e, -2.0 * xi * e, (4.0 * xi * xi - 2.0) * e)
            }
            ProfileKind::CompactBump => {
                if xi.abs() >= 1.0 {
                    // one-sided limits at the support boundary are all 0
                    (0.0, 0.0, 0.0)
                } else {
                    let u = 1.0 - xi * xi;
                    let e = (-1.0 / u).exp();
                    let d1 = -2.0 * xi * e / (u * u);
                    let d2 = e * (-2.0 / (u * u) - 8.0 * xi * xi / (u * u * u)
                        + 4.0 * xi * xi / (u * u * u * u));
                    (e, d1, d2)
                }
            }
            ProfileKind::SinePacket => {
                let e = (-xi * xi).exp();
                let (sin, cos) = xi.sin_cos();
                (
                    sin * e,
                    (cos - 2.0 * xi * sin) * e,
                    (-3.0 * sin - 4.0 * xi * cos + 4.0 * xi * xi * sin) * e,
                )
            }
            ProfileKind::Tanh => {
                let t = xi.tanh();
                let sech2 = 1.0 - t * t;
                (t, sech2, -2.0 * sech2 * t)
            }
        };
        ProfileValue {
            value: a * v,
            dx: a * d1 / w,
            dxx: a * d2 / (w * w),
        }
    }

    /// Half-width beyond which the profile (or for tanh: its transition
    /// region) is numerically negligible.
    pub fn extent(&self) -> f64 {
        self.center.abs() + 10.0 * self.width
    }
}

/// Sum of profiles; a list is permitted anywhere one profile is.
pub fn eval_sum(profiles: &[Profile], x: f64) -> ProfileValue {
    let mut out = ProfileValue {
        value: 0.0,
        dx: 0.0,
        dxx: 0.0,
    };
    for p in profiles {
        let v = p.eval(x);
        out.value += v.value;
        out.dx += v.dx;
        out.dxx += v.dxx;
    }
    out
}

/// Amplitude-ε data pair u(0) = ε·φ, u_t(0) = ε·ψ.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub phi: Vec<Profile>,
    pub psi: Vec<Profile>,
    pub epsilon: f64,
}

/// Number of points in the classification / admissibility scan.
const SCAN_POINTS: usize = 10_000;

impl InitialData {
    /// ε = 0 is admitted (the trivial all-zero field); negative amplitudes
    /// belong in the profiles, not in ε.
    pub fn new(phi: Vec<Profile>, psi: Vec<Profile>, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParam(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        Ok(InitialData { phi, psi, epsilon })
    }

    pub fn phi_at(&self, x: f64) -> ProfileValue {
        eval_sum(&self.phi, x)
    }

    pub fn psi_at(&self, x: f64) -> ProfileValue {
        eval_sum(&self.psi, x)
    }

    /// Half-width of the region where the data is non-negligible.
    pub fn extent(&self) -> f64 {
        self.phi
            .iter()
            .chain(self.psi.iter())
            .map(Profile::extent)
            .fold(1.0, f64::max)
    }

    /// All profiles decay at infinity (Theorem 2 hypothesis).
    pub fn decays(&self) -> bool {
        self.phi
            .iter()
            .chain(self.psi.iter())
            .all(|p| p.kind.decays())
    }

    /// Largest |φ_x| over the scan grid.
    pub fn max_phi_x(&self) -> f64 {
        let r = self.extent();
        (0..=SCAN_POINTS)
            .map(|i| -r + 2.0 * r * i as f64 / SCAN_POINTS as f64)
            .map(|x| self.phi_at(x).dx.abs())
            .fold(0.0, f64::max)
    }

    /// Admissibility against a wave speed: ε·max|φ_x| ≤ theta_max / 2.
    pub fn check_admissible(&self, ws: &WaveSpeed) -> Result<()> {
        let m = self.epsilon * self.max_phi_x();
        if m > 0.5 * ws.theta_max() {
            return Err(Error::Inadmissible(format!(
                "epsilon*max|phi_x| = {m:.6e} exceeds theta_max/2 = {:.6e}",
                0.5 * ws.theta_max()
            )));
        }
        Ok(())
    }

    /// Initial Riemann invariants r(0,x) = εψ + G(εφ_x), s(0,x) = εψ - G(εφ_x).
    pub fn riemann_initial(&self, ws: &WaveSpeed, x: f64) -> Result<(f64, f64)> {
        let phi = self.phi_at(x);
        let psi = self.psi_at(x);
        let theta = self.epsilon * phi.dx;
        if theta.abs() > ws.theta_max() {
            return Err(Error::Domain {
                theta,
                theta_max: ws.theta_max(),
            });
        }
        let g = ws.big_g(theta);
        let et = self.epsilon * psi.value;
        Ok((et + g, et - g))
    }

    /// Initial slopes r_x(0,x) and s_x(0,x) by the chain rule:
    /// r_x = εψ_x + c(εφ_x)·εφ_xx (and with a minus sign for s_x).
    pub fn riemann_slopes(&self, ws: &WaveSpeed, x: f64) -> (f64, f64) {
        let phi = self.phi_at(x);
        let psi = self.psi_at(x);
        let c = ws.c(self.epsilon * phi.dx);
        let transported = c * self.epsilon * phi.dxx;
        let et = self.epsilon * psi.dx;
        (et + transported, et - transported)
    }

    /// Scans for Theorem 2 condition witnesses and the Remark 2 sign
    /// condition. Witnesses maximize the margin over a dense grid followed
    /// by local golden-section refinement; a witness must also satisfy the
    /// nondegeneracy ψ(x₀) ± φ_x(x₀) ≠ 0.
    pub fn classify(&self, ws: &WaveSpeed) -> ConditionReport {
        let r = self.extent();
        let margin_i = |x: f64| self.psi_at(x).dx + self.phi_at(x).dxx;
        let margin_ii = |x: f64| self.psi_at(x).dx - self.phi_at(x).dxx;
        let nondeg_i = |x: f64| (self.psi_at(x).value + self.phi_at(x).dx).abs() > 1e-12;
        let nondeg_ii = |x: f64| (self.psi_at(x).value - self.phi_at(x).dx).abs() > 1e-12;

        let blowup_i = scan_witness(-r, r, &margin_i, &nondeg_i);
        let blowup_ii = scan_witness(-r, r, &margin_ii, &nondeg_ii);

        // Remark 2: ψ_x(x) ± c(εφ_x(x))·φ_xx(x) ≤ 0 for all x.
        let mut global_sign = true;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=SCAN_POINTS {
            let x = -r + 2.0 * r * i as f64 / SCAN_POINTS as f64;
            let phi = self.phi_at(x);
            let psi = self.psi_at(x);
            let c = ws.c((self.epsilon * phi.dx).clamp(-ws.theta_max(), ws.theta_max()));
            let plus = psi.dx + c * phi.dxx;
            let minus = psi.dx - c * phi.dxx;
            worst = worst.max(plus).max(minus);
            if plus > 0.0 || minus > 0.0 {
                global_sign = false;
            }
        }

        ConditionReport {
            blowup_i,
            blowup_ii,
            global_sign,
            global_sign_margin: worst,
            decays: self.decays(),
        }
    }
}

/// A condition witness: location and (strictly positive) margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub x: f64,
    pub margin: f64,
}

/// Outcome of the blowup/global classification.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Witness of ψ_x + φ_xx > 0 (condition (i); seeds a minus-family trace).
    pub blowup_i: Option<Witness>,
    /// Witness of ψ_x - φ_xx > 0 (condition (ii); seeds a plus-family trace).
    pub blowup_ii: Option<Witness>,
    /// Remark 2 data-side sign condition holds everywhere.
    pub global_sign: bool,
    /// max over the grid of ψ_x ± c(εφ_x)φ_xx (≤ 0 iff global_sign).
    pub global_sign_margin: f64,
    /// All profiles decay at infinity; required by Theorem 2 experiments.
    pub decays: bool,
}

impl ConditionReport {
    /// Preferred trace seed: the (i)-witness (minus family) when present,
    /// otherwise the (ii)-witness (plus family).
    pub fn trace_seed(&self) -> Option<(crate::characteristics::Family, f64)> {
        use crate::characteristics::Family;
        if let Some(w) = self.blowup_i {
            Some((Family::Minus, w.x))
        } else {
            self.blowup_ii.map(|w| (Family::Plus, w.x))
        }
    }
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.blowup_i {
            Some(w) => writeln!(f, "blowup_i: x0 = {:.9}, margin = {:.6e}", w.x, w.margin)?,
            None => writeln!(f, "blowup_i: none")?,
        }
        match self.blowup_ii {
            Some(w) => writeln!(f, "blowup_ii: x0 = {:.9}, margin = {:.6e}", w.x, w.margin)?,
            None => writeln!(f, "blowup_ii: none")?,
        }
        writeln!(
            f,
            "global_sign: {} (max margin {:.6e})",
            self.global_sign, self.global_sign_margin
        )?;
        write!(f, "decays: {}", self.decays)
    }
}

/// Grid scan plus golden-section refinement of the margin maximizer,
/// restricted to points satisfying the nondegeneracy predicate.
fn scan_witness(
    lo: f64,
    hi: f64,
    margin: &dyn Fn(f64) -> f64,
    nondeg: &dyn Fn(f64) -> bool,
) -> Option<Witness> {
    let mut best_x = f64::NAN;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=SCAN_POINTS {
        let x = lo + (hi - lo) * i as f64 / SCAN_POINTS as f64;
        let m = margin(x);
        if m > best && nondeg(x) {
            best = m;
            best_x = x;
        }
    }
    if !(best > 0.0) {
        return None;
    }
    // golden-section refinement in the bracketing cell
    let h = (hi - lo) / SCAN_POINTS as f64;
    let (mut a, mut b) = (best_x - h, best_x + h);
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if margin(c) >= margin(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    if nondeg(x) && margin(x) > 0.0 {
        Some(Witness {
            x,
            margin: margin(x),
        })
    } else {
        Some(Witness {
            x: best_x,
            margin: best,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavespeed::SpeedKind;

    fn gaussian(center: f64, width: f64, amplitude: f64) -> Profile {
        Profile::new(ProfileKind::Gaussian, center, width, amplitude).unwrap()
    }

    #[test]
    fn profile_closed_forms() {
        let g = gaussian(0.0, 1.0, 1.0);
        let v = g.eval(0.0);
        assert_eq!((v.value, v.dx, v.dxx), (1.0, 0.0, -2.0));

        let z = Profile::new(ProfileKind::Zero, 0.0, 1.0, 1.0).unwrap();
        let v = z.eval(3.7);
        assert_eq!((v.value, v.dx, v.dxx), (0.0, 0.0, 0.0));

        let b = Profile::new(ProfileKind::CompactBump, 0.0, 1.0, 1.0).unwrap();
        let v = b.eval(1.0);
        assert_eq!((v.value, v.dx, v.dxx), (0.0, 0.0, 0.0));
        let v = b.eval(0.0);
        assert!((v.value - (-1.0f64).exp()).abs() < 1e-15);
    }

    /// Finite-difference oracle for the profile derivatives.
    #[test]
    fn profile_derivatives_match_finite_differences() {
        let profiles = [
            gaussian(0.3, 0.8, -1.2),
            Profile::new(ProfileKind::CompactBump, -0.2, 1.5, 2.0).unwrap(),
            Profile::new(ProfileKind::SinePacket, 0.1, 0.9, 0.7).unwrap(),
            Profile::new(ProfileKind::Tanh, 0.0, 1.3, -1.0).unwrap(),
        ];
        let h = 1e-5;
        for p in &profiles {
            for i in 0..60 {
                let x = -3.0 + i as f64 * 0.1;
                let v = p.eval(x);
                let fd1 = (p.eval(x + h).value - p.eval(x - h).value) / (2.0 * h);
                let fd2 =
                    (p.eval(x + h).value - 2.0 * v.value + p.eval(x - h).value) / (h * h);
                assert!((v.dx - fd1).abs() < 1e-8, "{:?} dx at {x}", p.kind);
                assert!((v.dxx - fd2).abs() < 1e-4, "{:?} dxx at {x}", p.kind);
            }
        }
    }

    #[test]
    fn riemann_initial_identities() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 3.0 }, 0.5).unwrap();
        let data = InitialData::new(
            vec![gaussian(0.0, 1.0, 0.8)],
            vec![gaussian(0.5, 1.2, 1.0)],
            0.1,
        )
        .unwrap();
        for i in 0..50 {
            let x = -5.0 + i as f64 * 0.2;
            let (r0, s0) = data.riemann_initial(&ws, x).unwrap();
            let psi = data.psi_at(x).value;
            let phix = data.phi_at(x).dx;
            // (r+s)/2 = εψ and invert_G((r-s)/2) = εφ_x
            assert!((0.5 * (r0 + s0) - data.epsilon * psi).abs() < 1e-14);
            let theta = ws.invert_g(0.5 * (r0 - s0)).unwrap();
            assert!((theta - data.epsilon * phix).abs() < 1e-10);
        }
    }

    #[test]
    fn riemann_initial_constant_speed_and_zero_eps() {
        let ws = WaveSpeed::new(SpeedKind::Constant, 1.0).unwrap();
        let data = InitialData::new(vec![gaussian(0.0, 1.0, 1.0)], vec![], 1e-9).unwrap();
        // G = identity when c ≡ 1: r0 = ε(ψ + φ_x)
        let (r0, _) = data.riemann_initial(&ws, 0.7).unwrap();
        let expect = data.epsilon * (data.psi_at(0.7).value + data.phi_at(0.7).dx);
        assert!((r0 - expect).abs() < 1e-22);
    }

    #[test]
    fn initial_sup_norm_bound() {
        // |r(0,x)| ≤ ε(‖ψ‖_∞ + 2‖φ_x‖_∞) for admissible ε
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let data = InitialData::new(
            vec![gaussian(0.0, 1.0, 1.0)],
            vec![gaussian(0.0, 1.0, 1.0)],
            0.2,
        )
        .unwrap();
        data.check_admissible(&ws).unwrap();
        let bound = data.epsilon * (1.0 + 2.0 * data.max_phi_x());
        for i in 0..=100 {
            let x = -10.0 + 0.2 * i as f64;
            let (r0, s0) = data.riemann_initial(&ws, x).unwrap();
            assert!(r0.abs() <= bound && s0.abs() <= bound);
        }
    }

    #[test]
    fn classify_gaussian_psi_witness() {
        // φ ≡ 0, ψ gaussian: ψ_x = -2x e^{-x²} peaks at x = -1/√2.
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let data = InitialData::new(vec![], vec![gaussian(0.0, 1.0, 1.0)], 0.1).unwrap();
        let report = data.classify(&ws);
        let w = report.blowup_i.expect("condition (i) witness");
        assert!((w.x + 1.0 / 2.0f64.sqrt()).abs() < 1e-6, "x0 = {}", w.x);
        assert!(w.margin > 0.0);
        // re-evaluating the margin at the witness reproduces it
        let again = data.psi_at(w.x).dx + data.phi_at(w.x).dxx;
        assert!((again - w.margin).abs() < 1e-12);
        assert!(report.decays);
        assert!(!report.global_sign);
    }

    #[test]
    fn classify_negative_tanh_is_global() {
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let data = InitialData::new(
            vec![],
            vec![Profile::new(ProfileKind::Tanh, 0.0, 1.0, -1.0).unwrap()],
            0.1,
        )
        .unwrap();
        let report = data.classify(&ws);
        assert!(report.global_sign, "{report}");
        assert!(report.blowup_i.is_none());
        assert!(report.blowup_ii.is_none());
        assert!(!report.decays);
    }

    #[test]
    fn classify_gaussian_phi_has_both_witnesses() {
        // φ gaussian, ψ ≡ 0: φ_xx changes sign, so both (i) and (ii) hold.
        let ws = WaveSpeed::new(SpeedKind::PowerSqrt { a: 1.0, p: 2.0 }, 0.6).unwrap();
        let data = InitialData::new(vec![gaussian(0.0, 1.0, 1.0)], vec![], 0.05).unwrap();
        let report = data.classify(&ws);
        assert!(report.blowup_i.is_some());
        assert!(report.blowup_ii.is_some());
    }
}
