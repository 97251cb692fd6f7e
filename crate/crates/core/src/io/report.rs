use crate::analytics::{
    benchmark_momentum_variance, check_stability, momentum_variance_ratio, profitability,
    stationary_moments, AnalyticsError, ProfitabilityReport, StabilityReport, StationaryMoments,
};
use crate::params::{ModelParams, ParamError};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write;

/// `x` with `digits` significant digits, fixed notation for moderate
/// magnitudes and scientific otherwise.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn keep<T>(notes: &mut Vec<String>, label: &str, r: Result<T, AnalyticsError>) -> Option<T> {
    r.map_err(|e| notes.push(format!("{label}: {e}"))).ok()
}

/// Every closed-form result for one parameter set. Sections that do not
/// apply (e.g. moments of an unstable market) are `None`, with the reason in
/// `notes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRecord {
    pub params: ModelParams,
    pub stability: StabilityReport,
    pub moments: Option<StationaryMoments>,
    pub benchmark_var_m: f64,
    pub variance_ratio: Option<f64>,
    pub profitability: Option<ProfitabilityReport>,
    pub notes: Vec<String>,
}

impl AnalysisRecord {
    pub fn build(params: &ModelParams) -> Result<Self, ParamError> {
        params.validate().into_result()?;
        let mut notes = Vec::new();
        let stability = check_stability(params).expect("validated");
        let moments = keep(&mut notes, "moments", stationary_moments(params));
        let variance_ratio = keep(&mut notes, "variance ratio", momentum_variance_ratio(params));
        let profitability = keep(&mut notes, "profitability", profitability(params));
        if !params.tau.is_infinite() {
            notes.push("closed forms describe the infinite look-back limit".into());
        }
        Ok(AnalysisRecord {
            params: *params,
            stability,
            moments,
            benchmark_var_m: benchmark_momentum_variance(params).expect("validated"),
            variance_ratio,
            profitability,
            notes,
        })
    }

    pub fn render_text(&self) -> String {
        let mut rows: Vec<(&str, String)> = Vec::new();
        let st = &self.stability;
        let eig = |c: Complex64| format!("{} {} {}i", fmt_sig(c.re, 6), if c.im < 0.0 { '-' } else { '+' }, fmt_sig(c.im.abs(), 6));
        rows.push(("c1_margin", fmt_sig(st.c1_margin, 6)));
        rows.push(("c2_value", fmt_sig(st.c2_value, 6)));
        rows.push(("eigenvalue_1", eig(st.eigenvalues[0])));
        rows.push(("eigenvalue_2", eig(st.eigenvalues[1])));
        rows.push(("stable_by_conditions", st.stable_by_conditions.to_string()));
        rows.push(("stable_by_spectrum", st.stable_by_spectrum.to_string()));
        if let Some(m) = &self.moments {
            rows.push(("var_u", fmt_sig(m.var_u, 6)));
            rows.push(("cov_um", fmt_sig(m.cov_um, 6)));
            rows.push(("var_m", fmt_sig(m.var_m, 6)));
        }
        rows.push(("benchmark_var_m", fmt_sig(self.benchmark_var_m, 6)));
        if let Some(r) = self.variance_ratio {
            rows.push(("variance_ratio", fmt_sig(r, 6)));
        }
        if let Some(g) = &self.profitability {
            rows.push(("c_const", fmt_sig(g.c_const, 6)));
            rows.push(("pi_f", fmt_sig(g.pi_f, 6)));
            rows.push(("pi_c", fmt_sig(g.pi_c, 6)));
            rows.push(("gap", fmt_sig(g.gap, 6)));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.22, 6), "0.220000");
        assert_eq!(fmt_sig(0.04095, 6), "0.0409500");
        assert_eq!(fmt_sig(1.4444444444, 6), "1.44444");
        assert_eq!(fmt_sig(-123456.0, 6), "-123456");
        assert_eq!(fmt_sig(1234567.0, 6), "1.23457e6");
        assert_eq!(fmt_sig(0.0, 6), "0");
    }

    #[test]
    fn reference_text() {
        let text = AnalysisRecord::build(&ModelParams::reference()).unwrap().render_text();
        let value = |key: &str| -> String {
            text.lines()
                .find(|l| l.split('=').next().unwrap().trim() == key)
                .map(|l| l.split('=').nth(1).unwrap().trim().to_string())
                .unwrap()
        };
        assert_eq!(value("var_u"), "0.220000");
        assert_eq!(value("gap"), "0.0409500");
        assert_eq!(value("eigenvalue_1"), "0.250000 + 0.433013i");
        assert_eq!(value("stable_by_conditions"), "true");
    }

    #[test]
    fn unstable_record_explains_missing_sections() {
        let p = ModelParams { alpha_c: 4.0, k: 1.0, ..ModelParams::reference() };
        let r = AnalysisRecord::build(&p).unwrap();
        assert!(r.moments.is_none() && r.profitability.is_none());
        assert_eq!(r.notes.len(), 3);
        assert!(!r.render_text().contains("var_u"));
    }
}
