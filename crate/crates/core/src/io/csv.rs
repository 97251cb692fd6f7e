use crate::analytics::{profitability, stationary_moments};
use crate::experiments::{SweepMode, SweepPoint, SweepResult};
use crate::params::ModelParams;
use crate::simulator::{ErgodicEstimates, SimPath};
use serde::Serialize;
use std::io::{self, Write};

/// 17 significant digits in scientific notation; parses back to the same
/// `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_path_csv<W: Write>(mut w: W, path: &SimPath) -> io::Result<()> {
    writeln!(w, "t,f,u,m,s,log_v_f,log_v_c")?;
    for s in &path.states {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.f),
            fmt_f64(s.u),
            fmt_f64(s.m),
            fmt_f64(s.log_price()),
            fmt_f64(s.log_v_f),
            fmt_f64(s.log_v_c)
        )?;
    }
    w.flush()
}

/// One line of the estimates table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub statistic: &'static str,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub analytic_value: Option<f64>,
    pub z_score: Option<f64>,
}

/// Pairs each estimate with its closed form. Closed forms exist only for an
/// infinite look-back horizon and a stable market; otherwise the analytic
/// column is left empty.
pub fn estimates_rows(params: &ModelParams, est: &ErgodicEstimates) -> Vec<EstimateRow> {
    let moments = params
        .tau
        .is_infinite()
        .then(|| stationary_moments(params).ok())
        .flatten();
    let growth = params.tau.is_infinite().then(|| profitability(params).ok()).flatten();
    est.named()
        .into_iter()
        .map(|(name, e)| {
            let analytic = match name {
                "var_u" => moments.map(|m| m.var_u),
                "cov_um" => moments.map(|m| m.cov_um),
                "var_m" => moments.map(|m| m.var_m),
                "mean_u" | "mean_m" => moments.map(|_| 0.0),
                "pi_f" => growth.map(|g| g.pi_f),
                "pi_c" => growth.map(|g| g.pi_c),
                _ => None,
            };
            EstimateRow {
                statistic: name,
                estimate: e.value,
                std_error: e.std_error,
                analytic_value: analytic,
                z_score: analytic.and_then(|a| e.z_score(a)),
            }
        })
        .collect()
}

pub fn write_estimates_csv<W: Write>(mut w: W, rows: &[EstimateRow]) -> io::Result<()> {
    writeln!(w, "statistic,estimate,std_error,analytic_value,z_score")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.statistic,
            fmt_f64(r.estimate),
            opt(r.std_error),
            opt(r.analytic_value),
            opt(r.z_score)
        )?;
    }
    w.flush()
}

fn bool_value(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

/// `(statistic, value, std_error)` for every statistic a point reports.
/// Every point yields the same list of names for a given mode.
fn point_statistics(p: &SweepPoint, mode: SweepMode) -> Vec<(&'static str, Option<f64>, Option<f64>)> {
    let st = &p.stability;
    let mut out = vec![
        ("c1_margin", Some(st.c1_margin), None),
        ("c2_value", Some(st.c2_value), None),
        ("eig1_re", Some(st.eigenvalues[0].re), None),
        ("eig1_im", Some(st.eigenvalues[0].im), None),
        ("eig2_re", Some(st.eigenvalues[1].re), None),
        ("eig2_im", Some(st.eigenvalues[1].im), None),
        ("stable_by_conditions", bool_value(st.stable_by_conditions), None),
        ("stable_by_spectrum", bool_value(st.stable_by_spectrum), None),
    ];
    if matches!(mode, SweepMode::Analytic | SweepMode::Both) {
        let m = p.moments;
        let g = p.profitability;
        out.extend([
            ("var_u", m.map(|m| m.var_u), None),
            ("cov_um", m.map(|m| m.cov_um), None),
            ("var_m", m.map(|m| m.var_m), None),
            ("variance_ratio", p.variance_ratio, None),
            ("c_const", g.map(|g| g.c_const), None),
            ("pi_f", g.map(|g| g.pi_f), None),
            ("pi_c", g.map(|g| g.pi_c), None),
            ("gap", g.map(|g| g.gap), None),
        ]);
    }
    if matches!(mode, SweepMode::Simulated | SweepMode::Both) {
        let names = ["sim_var_u", "sim_cov_um", "sim_var_m", "sim_mean_u", "sim_mean_m", "sim_pi_f", "sim_pi_c"];
        match &p.estimates {
            Some(est) => {
                for (name, (_, e)) in names.into_iter().zip(est.named()) {
                    out.push((name, Some(e.value), e.std_error));
                }
            }
            None => out.extend(names.into_iter().map(|n| (n, None, None))),
        }
    }
    out
}

/// Long format: one row per grid point per statistic.
pub fn write_sweep_csv<W: Write>(mut w: W, result: &SweepResult) -> io::Result<()> {
    let axis_names: Vec<&str> = result.spec.axes.iter().map(|a| a.param.name()).collect();
    writeln!(w, "point,{},status,statistic,value,std_error", axis_names.join(","))?;
    for p in &result.points {
        let coords: Vec<String> = p.coords.iter().map(|c| fmt_f64(*c)).collect();
        let prefix = format!("{},{},{}", p.index, coords.join(","), p.status.name());
        for (name, value, se) in point_statistics(p, result.spec.mode) {
            writeln!(w, "{prefix},{name},{},{}", opt(value), opt(se))?;
        }
    }
    w.flush()
}

pub fn write_frontier_csv<W: Write>(mut w: W, result: &SweepResult) -> io::Result<()> {
    let f = result.frontier();
    writeln!(w, "axis,from_point,to_point,frontier_estimate")?;
    for c in &f.crossings {
        writeln!(w, "{},{},{},{}", c.axis, c.from_index, c.to_index, fmt_f64(c.estimate))?;
    }
    w.flush()
}
