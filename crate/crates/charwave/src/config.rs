//! Experiment configuration: one TOML file drives every subcommand.
//!
//! ```toml
//! [wavespeed]
//! kind = "power_sqrt"   # constant | power_sqrt | exp_power | double_power | gevrey_flat
//! A = 1.0
//! p = 2.0
//! theta_max = 0.6
//!
//! epsilon = 0.2         # top-level keys come before the sections
//!                       # (or: epsilons = [0.4, 0.283, 0.2])
//!
//! [[psi]]
//! kind = "gaussian"     # zero | gaussian | compact_bump | sine_packet | tanh
//! center = 0.0
//! width = 1.0
//! amplitude = 1.0
//!
//! [solver]
//! dx = 0.00390625
//! cfl = 0.8
//! max_time = 20.0
//! ```
//!
//! Cross-field consistency (domain vs horizon, ε admissibility) is checked
//! here, before any run; failures name the offending key.

use std::path::PathBuf;

use crate::characteristics::Family;
use crate::error::{Error, Result};
use crate::initialdata::{InitialData, Profile, ProfileKind};
use crate::lifespan::{FitModel, FitSource, HorizonRule, SweepPlan, ThresholdRule};
use crate::solver::SolverConfig;
use crate::wavespeed::{SpeedKind, WaveSpeed, DEFAULT_QUADRATURE_TOL};

#[derive(Debug, Clone)]
pub struct SolverBlock {
    pub dx: f64,
    pub cfl: f64,
    /// Domain half-width; sized automatically from data extent, c_max and
    /// max_time when absent.
    pub l: Option<f64>,
    pub slope_blow_threshold: Option<f64>,
    /// Per-run threshold as a multiple of the initial max|F| (used by
    /// sweeps, where an absolute threshold cannot fit every ε).
    pub slope_threshold_ratio: Option<f64>,
    pub max_time: f64,
    pub snapshot_cadence: f64,
    pub speed_spline_resolution: usize,
}

#[derive(Debug, Clone)]
pub struct SweepBlock {
    pub riccati_only_below: Option<f64>,
    pub riccati_sim_time: f64,
    pub horizon_fixed: Option<f64>,
    pub horizon_safety: f64,
    pub horizon_floor: f64,
    pub horizon_cap: f64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock {
            riccati_only_below: None,
            riccati_sim_time: 40.0,
            horizon_fixed: None,
            horizon_safety: 4.0,
            horizon_floor: 20.0,
            horizon_cap: 2000.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitBlock {
    pub model: FitModel,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub source: FitSource,
    /// Records CSV consumed by the `fit` subcommand; defaults to
    /// `<output>/records.csv`.
    pub records: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct TraceBlock {
    /// Seed positions at t = 0.
    pub seeds: Vec<f64>,
    /// None = pick per the condition classification.
    pub family: Option<Family>,
    pub sample_dt: Option<f64>,
}

/// What the run is expected to do; drives the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    None,
    Blowup,
    Global,
}

#[derive(Debug)]
pub struct ExperimentConfig {
    pub ws: WaveSpeed,
    pub phi: Vec<Profile>,
    pub psi: Vec<Profile>,
    pub epsilons: Vec<f64>,
    pub epsilon_is_list: bool,
    pub solver: SolverBlock,
    pub sweep: SweepBlock,
    pub fit: Option<FitBlock>,
    pub trace: TraceBlock,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub expect: Expect,
    /// Unknown-key notes collected outside strict mode.
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    pub fn data(&self, epsilon: f64) -> InitialData {
        InitialData {
            phi: self.phi.clone(),
            psi: self.psi.clone(),
            epsilon,
        }
    }

    /// Resolves the threshold for one run: ratio × initial max|F| wins over
    /// the absolute key.
    pub fn resolve_threshold(&self, data: &InitialData) -> Option<f64> {
        if let Some(ratio) = self.solver.slope_threshold_ratio {
            let (f0, _) = crate::lifespan::blowup_estimates(data, &self.ws);
            return Some(ratio * f0.max(1e-300));
        }
        self.solver.slope_blow_threshold
    }

    /// Solver config for a single run on `data`, auto-sizing L when absent.
    pub fn solver_config(&self, data: &InitialData) -> SolverConfig {
        let needed =
            data.extent() + self.ws.c_max() * self.solver.max_time + 5.0 * self.solver.dx + 2.0;
        SolverConfig {
            dx: self.solver.dx,
            cfl: self.solver.cfl,
            domain_half_width: self.solver.l.unwrap_or(needed),
            slope_blow_threshold: self.resolve_threshold(data),
            max_time: self.solver.max_time,
            speed_spline_resolution: self.solver.speed_spline_resolution,
        }
    }

    pub fn sweep_plan(&self, workers: usize) -> SweepPlan {
        let threshold = if let Some(ratio) = self.solver.slope_threshold_ratio {
            ThresholdRule::TimesInitial(ratio)
        } else if let Some(abs) = self.solver.slope_blow_threshold {
            ThresholdRule::Absolute(abs)
        } else {
            ThresholdRule::Default
        };
        let horizon = if let Some(t) = self.sweep.horizon_fixed {
            HorizonRule::Fixed(t)
        } else {
            HorizonRule::AutoRiccati {
                safety: self.sweep.horizon_safety,
                floor: self.sweep.horizon_floor,
                cap: self.sweep.horizon_cap,
            }
        };
        SweepPlan {
            epsilons: self.epsilons.clone(),
            dx: self.solver.dx,
            cfl: self.solver.cfl,
            speed_spline_resolution: self.solver.speed_spline_resolution,
            threshold,
            horizon,
            riccati_only_below: self.sweep.riccati_only_below,
            riccati_sim_time: self.sweep.riccati_sim_time,
            workers,
        }
    }
}

struct Walker<'a> {
    strict: bool,
    warnings: &'a mut Vec<String>,
}

impl Walker<'_> {
    fn check_keys(&mut self, table: &toml::Table, section: &str, allowed: &[&str]) -> Result<()> {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let msg = format!("unknown key '{section}{key}'");
                if self.strict {
                    return Err(Error::Config(msg));
                }
                self.warnings.push(msg);
            }
        }
        Ok(())
    }
}

fn get_f64(table: &toml::Table, section: &str, key: &str) -> Result<Option<f64>> {
    match table.get(key) {
        None => Ok(None),
        Some(v) => match v {
            toml::Value::Float(f) => Ok(Some(*f)),
            toml::Value::Integer(i) => Ok(Some(*i as f64)),
            other => Err(Error::Config(format!(
                "{section}{key} must be a number, got {other}"
            ))),
        },
    }
}

fn get_str<'t>(table: &'t toml::Table, section: &str, key: &str) -> Result<Option<&'t str>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s.as_str())),
        Some(other) => Err(Error::Config(format!(
            "{section}{key} must be a string, got {other}"
        ))),
    }
}

fn require_f64(table: &toml::Table, section: &str, key: &str) -> Result<f64> {
    get_f64(table, section, key)?
        .ok_or_else(|| Error::Config(format!("missing required key {section}{key}")))
}

fn parse_wavespeed(table: &toml::Table, walker: &mut Walker) -> Result<WaveSpeed> {
    const SECTION: &str = "wavespeed.";
    walker.check_keys(
        table,
        SECTION,
        &[
            "kind", "A", "B", "C", "C1", "C2", "C3", "p", "q", "s", "s_prime", "alpha",
            "theta_max", "quadrature_tol",
        ],
    )?;
    let kind_name = get_str(table, SECTION, "kind")?
        .ok_or_else(|| Error::Config("missing required key wavespeed.kind".into()))?;
    let kind = match kind_name {
        "constant" => SpeedKind::Constant,
        "power_sqrt" => SpeedKind::PowerSqrt {
            a: require_f64(table, SECTION, "A")?,
            p: require_f64(table, SECTION, "p")?,
        },
        "exp_power" => SpeedKind::ExpPower {
            // accept C (paper-style) or C1
            c: get_f64(table, SECTION, "C")?
                .or(get_f64(table, SECTION, "C1")?)
                .ok_or_else(|| Error::Config("exp_power needs wavespeed.C".into()))?,
            p: require_f64(table, SECTION, "p")?,
        },
        "double_power" => SpeedKind::DoublePower {
            a: require_f64(table, SECTION, "A")?,
            b: require_f64(table, SECTION, "B")?,
            p: require_f64(table, SECTION, "p")?,
            q: require_f64(table, SECTION, "q")?,
        },
        "gevrey_flat" => {
            let c3 = get_f64(table, SECTION, "C3")?;
            let s_prime = get_f64(table, SECTION, "s_prime")?;
            let second = match (c3, s_prime) {
                (Some(c3), Some(sp)) => Some((c3, sp)),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(
                        "gevrey_flat second layer needs both wavespeed.C3 and wavespeed.s_prime"
                            .into(),
                    ))
                }
            };
            SpeedKind::GevreyFlat {
                c1: require_f64(table, SECTION, "C1")?,
                c2: require_f64(table, SECTION, "C2")?,
                s: require_f64(table, SECTION, "s")?,
                alpha: get_f64(table, SECTION, "alpha")?.unwrap_or(0.0),
                second,
            }
        }
        other => {
            return Err(Error::Config(format!(
                "wavespeed.kind '{other}' is not one of constant|power_sqrt|exp_power|double_power|gevrey_flat"
            )))
        }
    };
    let theta_max = get_f64(table, SECTION, "theta_max")?.unwrap_or(0.5);
    let tol = get_f64(table, SECTION, "quadrature_tol")?.unwrap_or(DEFAULT_QUADRATURE_TOL);
    WaveSpeed::with_tol(kind, theta_max, tol)
        .map_err(|e| Error::Config(format!("wavespeed: {e}")))
}

fn parse_profiles(value: &toml::Value, section: &str, walker: &mut Walker) -> Result<Vec<Profile>> {
    let arr = value.as_array().ok_or_else(|| {
        Error::Config(format!("{section} must be an array of profile tables"))
    })?;
    let mut out = Vec::new();
    for (i, item) in arr.iter().enumerate() {
        let table = item.as_table().ok_or_else(|| {
            Error::Config(format!("{section}[{i}] must be a table"))
        })?;
        let sec = format!("{section}[{i}].");
        walker.check_keys(table, &sec, &["kind", "center", "width", "amplitude"])?;
        let kind = match get_str(table, &sec, "kind")?
            .ok_or_else(|| Error::Config(format!("missing required key {sec}kind")))?
        {
            "zero" => ProfileKind::Zero,
            "gaussian" => ProfileKind::Gaussian,
            "compact_bump" => ProfileKind::CompactBump,
            "sine_packet" => ProfileKind::SinePacket,
            "tanh" => ProfileKind::Tanh,
            other => {
                return Err(Error::Config(format!(
                    "{sec}kind '{other}' is not one of zero|gaussian|compact_bump|sine_packet|tanh"
                )))
            }
        };
        let profile = Profile::new(
            kind,
            get_f64(table, &sec, "center")?.unwrap_or(0.0),
            get_f64(table, &sec, "width")?.unwrap_or(1.0),
            get_f64(table, &sec, "amplitude")?.unwrap_or(1.0),
        )
        .map_err(|e| Error::Config(format!("{sec}: {e}")))?;
        out.push(profile);
    }
    Ok(out)
}

/// Parses and cross-validates an experiment config.
pub fn parse_config(text: &str, strict: bool) -> Result<ExperimentConfig> {
    let root: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
    let mut warnings = Vec::new();
    let mut walker = Walker {
        strict,
        warnings: &mut warnings,
    };
    walker.check_keys(
        &root,
        "",
        &[
            "wavespeed", "phi", "psi", "epsilon", "epsilons", "solver", "sweep", "fit", "trace",
            "output", "expect",
        ],
    )?;

    let ws_table = root
        .get("wavespeed")
        .and_then(|v| v.as_table())
        .ok_or_else(|| Error::Config("missing required section [wavespeed]".into()))?;
    let ws = parse_wavespeed(ws_table, &mut walker)?;

    let phi = match root.get("phi") {
        Some(v) => parse_profiles(v, "phi", &mut walker)?,
        None => Vec::new(),
    };
    let psi = match root.get("psi") {
        Some(v) => parse_profiles(v, "psi", &mut walker)?,
        None => Vec::new(),
    };

    let scalar_eps = get_f64(&root, "", "epsilon")?;
    let list_eps = match root.get("epsilons") {
        None => None,
        Some(toml::Value::Array(a)) => {
            let mut v = Vec::new();
            for (i, item) in a.iter().enumerate() {
                match item {
                    toml::Value::Float(f) => v.push(*f),
                    toml::Value::Integer(n) => v.push(*n as f64),
                    other => {
                        return Err(Error::Config(format!(
                            "epsilons[{i}] must be a number, got {other}"
                        )))
                    }
                }
            }
            Some(v)
        }
        Some(other) => {
            return Err(Error::Config(format!(
                "epsilons must be an array, got {other}"
            )))
        }
    };
    let (epsilons, epsilon_is_list) = match (scalar_eps, list_eps) {
        (Some(e), None) => (vec![e], false),
        (None, Some(v)) if !v.is_empty() => (v, true),
        (None, Some(_)) => return Err(Error::Config("epsilons must not be empty".into())),
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either epsilon or epsilons, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "missing required key epsilon (or epsilons)".into(),
            ))
        }
    };
    for &e in &epsilons {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(Error::Config(format!("epsilon must be >= 0, got {e}")));
        }
    }

    let empty = toml::Table::new();
    let solver_table = match root.get("solver") {
        Some(v) => v
            .as_table()
            .ok_or_else(|| Error::Config("[solver] must be a table".into()))?,
        None => &empty,
    };
    walker.check_keys(
        solver_table,
        "solver.",
        &[
            "dx", "cfl", "L", "slope_blow_threshold", "slope_threshold_ratio", "max_time",
            "snapshot_cadence", "speed_spline_resolution",
        ],
    )?;
    let max_time = get_f64(solver_table, "solver.", "max_time")?.unwrap_or(10.0);
    let solver = SolverBlock {
        dx: get_f64(solver_table, "solver.", "dx")?.unwrap_or(1.0 / 256.0),
        cfl: get_f64(solver_table, "solver.", "cfl")?.unwrap_or(0.8),
        l: get_f64(solver_table, "solver.", "L")?,
        slope_blow_threshold: get_f64(solver_table, "solver.", "slope_blow_threshold")?,
        slope_threshold_ratio: get_f64(solver_table, "solver.", "slope_threshold_ratio")?,
        max_time,
        snapshot_cadence: get_f64(solver_table, "solver.", "snapshot_cadence")?
            .unwrap_or(max_time / 10.0),
        speed_spline_resolution: get_f64(solver_table, "solver.", "speed_spline_resolution")?
            .map(|v| v as usize)
            .unwrap_or(4096),
    };

    let sweep_table = match root.get("sweep") {
        Some(v) => v
            .as_table()
            .ok_or_else(|| Error::Config("[sweep] must be a table".into()))?,
        None => &empty,
    };
    walker.check_keys(
        sweep_table,
        "sweep.",
        &[
            "riccati_only_below", "riccati_sim_time", "horizon", "horizon_safety",
            "horizon_floor", "horizon_cap",
        ],
    )?;
    let default_sweep = SweepBlock::default();
    let sweep = SweepBlock {
        riccati_only_below: get_f64(sweep_table, "sweep.", "riccati_only_below")?,
        riccati_sim_time: get_f64(sweep_table, "sweep.", "riccati_sim_time")?
            .unwrap_or(default_sweep.riccati_sim_time),
        horizon_fixed: get_f64(sweep_table, "sweep.", "horizon")?,
        horizon_safety: get_f64(sweep_table, "sweep.", "horizon_safety")?
            .unwrap_or(default_sweep.horizon_safety),
        horizon_floor: get_f64(sweep_table, "sweep.", "horizon_floor")?
            .unwrap_or(default_sweep.horizon_floor),
        horizon_cap: get_f64(sweep_table, "sweep.", "horizon_cap")?
            .unwrap_or(default_sweep.horizon_cap),
    };

    let fit = match root.get("fit") {
        None => None,
        Some(v) => {
            let table = v
                .as_table()
                .ok_or_else(|| Error::Config("[fit] must be a table".into()))?;
            walker.check_keys(table, "fit.", &["model", "p", "s", "source", "records"])?;
            let model = match get_str(table, "fit.", "model")?
                .ok_or_else(|| Error::Config("missing required key fit.model".into()))?
            {
                "power" => FitModel::Power,
                "exponential" => FitModel::Exponential,
                other => {
                    return Err(Error::Config(format!(
                        "fit.model '{other}' is not one of power|exponential"
                    )))
                }
            };
            let s = get_f64(table, "fit.", "s")?;
            if model == FitModel::Exponential && s.is_none() {
                return Err(Error::Config(
                    "fit.model = exponential requires fit.s".into(),
                ));
            }
            Some(FitBlock {
                model,
                p: get_f64(table, "fit.", "p")?,
                s,
                source: get_str(table, "fit.", "source")?
                    .map(str::parse)
                    .transpose()?
                    .unwrap_or(FitSource::Auto),
                records: get_str(table, "fit.", "records")?.map(PathBuf::from),
            })
        }
    };

    let trace = match root.get("trace") {
        None => TraceBlock::default(),
        Some(v) => {
            let table = v
                .as_table()
                .ok_or_else(|| Error::Config("[trace] must be a table".into()))?;
            walker.check_keys(table, "trace.", &["seeds", "family", "sample_dt"])?;
            let seeds = match table.get("seeds") {
                None => Vec::new(),
                Some(toml::Value::Array(a)) => {
                    let mut v = Vec::new();
                    for item in a {
                        match item {
                            toml::Value::Float(f) => v.push(*f),
                            toml::Value::Integer(n) => v.push(*n as f64),
                            other => {
                                return Err(Error::Config(format!(
                                    "trace.seeds entries must be numbers, got {other}"
                                )))
                            }
                        }
                    }
                    v
                }
                Some(other) => {
                    return Err(Error::Config(format!(
                        "trace.seeds must be an array, got {other}"
                    )))
                }
            };
            TraceBlock {
                seeds,
                family: get_str(table, "trace.", "family")?
                    .filter(|&f| f != "auto")
                    .map(str::parse)
                    .transpose()?,
                sample_dt: get_f64(table, "trace.", "sample_dt")?,
            }
        }
    };

    let output_table = match root.get("output") {
        Some(v) => v
            .as_table()
            .ok_or_else(|| Error::Config("[output] must be a table".into()))?,
        None => &empty,
    };
    walker.check_keys(output_table, "output.", &["dir", "workers"])?;
    let output_dir = get_str(output_table, "output.", "dir")?
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("charwave_out"));
    let workers = get_f64(output_table, "output.", "workers")?.map(|v| (v as usize).max(1));

    let expect = match get_str(&root, "", "expect")? {
        None | Some("none") => Expect::None,
        Some("blowup") => Expect::Blowup,
        Some("global") => Expect::Global,
        Some(other) => {
            return Err(Error::Config(format!(
                "expect '{other}' is not one of none|blowup|global"
            )))
        }
    };

    let cfg = ExperimentConfig {
        ws,
        phi,
        psi,
        epsilons,
        epsilon_is_list,
        solver,
        sweep,
        fit,
        trace,
        output_dir,
        workers,
        expect,
        warnings,
    };
    validate_consistency(&cfg)?;
    Ok(cfg)
}

/// Cross-field checks run before anything executes.
fn validate_consistency(cfg: &ExperimentConfig) -> Result<()> {
    if !(cfg.solver.cfl > 0.0 && cfg.solver.cfl < 1.0) {
        return Err(Error::Config(format!(
            "solver.cfl must lie in (0,1), got {}",
            cfg.solver.cfl
        )));
    }
    if !(cfg.solver.dx > 0.0) {
        return Err(Error::Config(format!(
            "solver.dx must be positive, got {}",
            cfg.solver.dx
        )));
    }
    if !(cfg.solver.max_time > 0.0) {
        return Err(Error::Config(format!(
            "solver.max_time must be positive, got {}",
            cfg.solver.max_time
        )));
    }
    for &eps in &cfg.epsilons {
        let data = cfg.data(eps);
        data.check_admissible(&cfg.ws).map_err(|e| {
            Error::Config(format!("epsilon = {eps} is inadmissible: {e}"))
        })?;
        if let Some(l) = cfg.solver.l {
            let needed =
                data.extent() + cfg.ws.c_max() * cfg.solver.max_time + 5.0 * cfg.solver.dx;
            if l < needed {
                return Err(Error::Config(format!(
                    "solver.L = {l} too small for solver.max_time = {}: need L >= {needed:.3} \
                     (extent {:.3} + c_max {:.4} x max_time + 5 dx)",
                    cfg.solver.max_time,
                    data.extent(),
                    cfg.ws.c_max()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        epsilon = 0.1

        [wavespeed]
        kind = "constant"

        [[psi]]
        kind = "gaussian"
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL, true).unwrap();
        assert_eq!(cfg.solver.cfl, 0.8);
        assert_eq!(cfg.solver.dx, 1.0 / 256.0);
        assert!(cfg.solver.slope_blow_threshold.is_none()); // -> 1e3 rule
        assert_eq!(cfg.epsilons, vec![0.1]);
        assert!(!cfg.epsilon_is_list);
        assert!(cfg.fit.is_none());
        // default threshold resolves to 10^3 * max(1, F0) = 1000 here
        let data = cfg.data(0.1);
        let solver_cfg = cfg.solver_config(&data);
        let sim = crate::solver::Simulation::new(&data, &cfg.ws, &solver_cfg).unwrap();
        assert_eq!(sim.threshold(), 1e3);
    }

    #[test]
    fn geometry_error_names_l() {
        let text = r#"
            epsilon = 0.1

            [wavespeed]
            kind = "constant"

            [[psi]]
            kind = "gaussian"

            [solver]
            L = 5.0
            max_time = 50.0
        "#;
        let err = parse_config(text, true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("solver.L"), "{msg}");
    }

    #[test]
    fn sweep_config_parses_jobs() {
        let text = r#"
            epsilons = [0.4, 0.2, 0.1]

            [wavespeed]
            kind = "power_sqrt"
            A = 1.0
            p = 3.0
            theta_max = 0.5

            [[psi]]
            kind = "gaussian"

            [fit]
            model = "power"
            p = 3.0
        "#;
        let cfg = parse_config(text, true).unwrap();
        assert!(cfg.epsilon_is_list);
        assert_eq!(cfg.epsilons.len(), 3);
        let plan = cfg.sweep_plan(2);
        assert_eq!(plan.epsilons.len(), 3);
        assert_eq!(cfg.fit.as_ref().unwrap().model, FitModel::Power);
    }

    #[test]
    fn unknown_keys_strict_vs_lenient() {
        let text = r#"
            epsilon = 0.1

            [wavespeed]
            kind = "constant"
            bogus = 1.0

            [[psi]]
            kind = "gaussian"
        "#;
        let err = parse_config(text, true).unwrap_err();
        assert!(err.to_string().contains("wavespeed.bogus"));
        let cfg = parse_config(text, false).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
    }

    #[test]
    fn inadmissible_epsilon_is_a_config_error() {
        let text = r#"
            epsilon = 0.9

            [wavespeed]
            kind = "power_sqrt"
            A = 1.0
            p = 3.0
            theta_max = 0.5

            [[phi]]
            kind = "gaussian"
        "#;
        let err = parse_config(text, true).unwrap_err();
        assert!(err.to_string().contains("inadmissible"), "{err}");
    }

    #[test]
    fn exponential_fit_requires_s() {
        let text = r#"
            epsilon = 0.1

            [wavespeed]
            kind = "constant"

            [[psi]]
            kind = "gaussian"

            [fit]
            model = "exponential"
        "#;
        assert!(parse_config(text, true).is_err());
    }
}
