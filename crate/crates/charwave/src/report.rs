//! CSV and report serialization. Floats are written with 17 significant
//! digits so identical configs reproduce byte-identical outputs.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lifespan::{FitResult, LifespanRecord};
use crate::solver::{RiemannField, RunLog, StopInfo};
use crate::characteristics::CharTrace;

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub const RECORDS_HEADER: &str =
    "epsilon,t_star_grid,t_star_riccati,stop_reason,x_blowup,dx_used,runtime_seconds";

pub fn records_to_csv(records: &[LifespanRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            fmt_opt(r.t_star_grid),
            fmt_opt(r.t_star_riccati),
            r.stop_reason.as_str(),
            fmt_opt(r.x_blowup),
            fmt_f64(r.dx_used),
            fmt_f64(r.runtime_seconds),
        ));
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<LifespanRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty records CSV".into()))?;
    if header.trim() != RECORDS_HEADER {
        return Err(Error::Config(format!(
            "unexpected records CSV header '{header}'"
        )));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Config(format!(
                "records CSV line {}: expected 7 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("records CSV line {}: {e}", lineno + 2)))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        records.push(LifespanRecord {
            epsilon: num(fields[0])?,
            t_star_grid: opt(fields[1])?,
            t_star_riccati: opt(fields[2])?,
            stop_reason: fields[3].trim().parse()?,
            x_blowup: opt(fields[4])?,
            dx_used: num(fields[5])?,
            runtime_seconds: num(fields[6])?,
        });
    }
    Ok(records)
}

pub const SNAPSHOT_HEADER: &str = "t,x,r,s,rx,sx,ux,ut,c";

/// One snapshot as CSV rows (one per node).
pub fn snapshot_to_csv(field: &RiemannField, ux: &[f64], c: &[f64]) -> String {
    let mut out = String::from(SNAPSHOT_HEADER);
    out.push('\n');
    let t = fmt_f64(field.t);
    for i in 0..field.n() {
        let ut = 0.5 * (field.r[i] + field.s[i]);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            t,
            fmt_f64(field.x(i)),
            fmt_f64(field.r[i]),
            fmt_f64(field.s[i]),
            fmt_f64(field.rx[i]),
            fmt_f64(field.sx[i]),
            fmt_f64(ux[i]),
            fmt_f64(ut),
            fmt_f64(c[i]),
        ));
    }
    out
}

pub const TRACE_HEADER: &str = "t,x,invariant,ux,c_prime,gamma,F";

pub fn trace_to_csv(trace: &CharTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(s.t),
            fmt_f64(s.x),
            fmt_f64(s.invariant),
            fmt_f64(s.ux),
            fmt_f64(s.c_prime),
            fmt_f64(s.gamma),
            fmt_f64(s.f),
        ));
    }
    out
}

pub const SERIES_HEADER: &str = "t,max_f1,max_f2,ux_inf";

pub fn series_to_csv(log: &RunLog) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for p in &log.series {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(p.t),
            fmt_f64(p.max_f1),
            fmt_f64(p.max_f2),
            fmt_f64(p.ux_inf),
        ));
    }
    out
}

/// Key-value stop report.
pub fn stop_info_report(info: &StopInfo, log: &RunLog) -> String {
    format!(
        "reason: {}\nt_stop: {}\nx_at_max_slope: {}\nmax_abs_F: {}\n\
         r0_inf: {}\ns0_inf: {}\nconservation_drift: {}\n",
        info.reason.as_str(),
        fmt_f64(info.t_stop),
        fmt_f64(info.x_at_max_slope),
        fmt_f64(info.max_abs_f),
        fmt_f64(log.r0_inf),
        fmt_f64(log.s0_inf),
        fmt_f64(log.conservation_drift()),
    )
}

/// Human-readable fit report.
pub fn fit_report_text(fit: &FitResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("model: {}\n", fit.model.as_str()));
    out.push_str(&format!("slope: {}\n", fmt_f64(fit.exponent_or_slope)));
    out.push_str(&format!("intercept: {}\n", fmt_f64(fit.intercept)));
    out.push_str(&format!("r_squared: {}\n", fmt_f64(fit.r_squared)));
    out.push_str(&format!("n_points: {}\n", fit.n_points));
    out.push_str("residuals:");
    for r in &fit.residuals {
        out.push_str(&format!(" {}", fmt_f64(*r)));
    }
    out.push('\n');
    out
}

/// Machine-readable key-value file for the fit.
pub fn fit_kv(fit: &FitResult) -> String {
    format!(
        "model={}\nslope={}\nintercept={}\nr_squared={}\nn_points={}\n",
        fit.model.as_str(),
        fmt_f64(fit.exponent_or_slope),
        fmt_f64(fit.intercept),
        fmt_f64(fit.r_squared),
        fit.n_points,
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::StopReason;

    #[test]
    fn records_round_trip() {
        let records = vec![
            LifespanRecord {
                epsilon: 0.4,
                t_star_grid: Some(11.25),
                t_star_riccati: Some(11.5),
                stop_reason: StopReason::Blowup,
                x_blowup: Some(-0.7071),
                dx_used: 1.0 / 256.0,
                runtime_seconds: 1.5,
            },
            LifespanRecord {
                epsilon: 0.2,
                t_star_grid: None,
                t_star_riccati: None,
                stop_reason: StopReason::Horizon,
                x_blowup: None,
                dx_used: 1.0 / 256.0,
                runtime_seconds: 0.2,
            },
        ];
        let csv = records_to_csv(&records);
        let back = records_from_csv(&csv).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].epsilon, 0.4);
        assert_eq!(back[0].t_star_grid, Some(11.25));
        assert_eq!(back[1].t_star_grid, None);
        assert_eq!(back[1].stop_reason, StopReason::Horizon);
        // byte-identical re-serialization
        assert_eq!(records_to_csv(&back), csv);
    }

    #[test]
    fn seventeen_significant_digits() {
        let v = std::f64::consts::PI;
        let s = fmt_f64(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }
}
