//! Parameter sweeps over one or two model parameters, and discretization
//! studies that compare simulated estimates against the closed forms.

use crate::analytics::{
    check_stability, momentum_variance_ratio, profitability, stationary_moments,
    ProfitabilityReport, StabilityReport, StationaryMoments,
};
use crate::params::{Horizon, ModelParams, ParamError};
use crate::simulator::{
    euler_spectral_radius, euler_stationary_covariance, monte_carlo, ErgodicEstimates, SimConfig,
    SimError,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweptParam {
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "sigma_f.0")]
    SigmaF0,
    #[serde(rename = "sigma_f.1")]
    SigmaF1,
    #[serde(rename = "sigma_n.0")]
    SigmaN0,
    #[serde(rename = "sigma_n.1")]
    SigmaN1,
    #[serde(rename = "big_z")]
    BigZ,
    #[serde(rename = "alpha_f")]
    AlphaF,
    #[serde(rename = "alpha_c")]
    AlphaC,
    /// Sets `p_c = 1 − p_f` as well.
    #[serde(rename = "p_f")]
    PF,
    /// Sets `p_f = 1 − p_c` as well.
    #[serde(rename = "p_c")]
    PC,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "k")]
    K,
    #[serde(rename = "tau")]
    Tau,
}

impl SweptParam {
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::Mu => "mu",
            SweptParam::SigmaF0 => "sigma_f.0",
            SweptParam::SigmaF1 => "sigma_f.1",
            SweptParam::SigmaN0 => "sigma_n.0",
            SweptParam::SigmaN1 => "sigma_n.1",
            SweptParam::BigZ => "big_z",
            SweptParam::AlphaF => "alpha_f",
            SweptParam::AlphaC => "alpha_c",
            SweptParam::PF => "p_f",
            SweptParam::PC => "p_c",
            SweptParam::Beta => "beta",
            SweptParam::K => "k",
            SweptParam::Tau => "tau",
        }
    }

    pub fn apply(self, p: &mut ModelParams, value: f64) {
        match self {
            SweptParam::Mu => p.mu = value,
            SweptParam::SigmaF0 => p.sigma_f[0] = value,
            SweptParam::SigmaF1 => p.sigma_f[1] = value,
            SweptParam::SigmaN0 => p.sigma_n[0] = value,
            SweptParam::SigmaN1 => p.sigma_n[1] = value,
            SweptParam::BigZ => p.big_z = value,
            SweptParam::AlphaF => p.alpha_f = value,
            SweptParam::AlphaC => p.alpha_c = value,
            SweptParam::PF => {
                p.p_f = value;
                p.p_c = 1.0 - value;
            }
            SweptParam::PC => {
                p.p_c = value;
                p.p_f = 1.0 - value;
            }
            SweptParam::Beta => p.beta = value,
            SweptParam::K => p.k = value,
            SweptParam::Tau => p.tau = Horizon::Finite(value),
        }
    }
}

impl fmt::Display for SweptParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A linear grid `min, …, max` with `n_points` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweptParam,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl SweepAxis {
    pub fn value(&self, i: usize) -> f64 {
        if self.n_points <= 1 {
            self.min
        } else if i + 1 == self.n_points {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n_points - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Analytic,
    Simulated,
    Both,
}

impl SweepMode {
    fn analytic(self) -> bool {
        matches!(self, SweepMode::Analytic | SweepMode::Both)
    }

    fn simulated(self) -> bool {
        matches!(self, SweepMode::Simulated | SweepMode::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axes: Vec<SweepAxis>,
    pub mode: SweepMode,
    /// Required for simulated modes. Point `i` runs with seed `sim.seed ^ i`.
    pub sim: Option<SimConfig>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("grid point {index} has invalid parameters: {source}")]
    InvalidPoint { index: usize, source: ParamError },
    #[error("grid point {index}: {source}")]
    Simulation { index: usize, source: SimError },
}

impl SweepSpec {
    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|a| a.n_points).product()
    }

    /// Grid indices of point `index`; the first axis varies slowest.
    pub fn grid_indices(&self, index: usize) -> Vec<usize> {
        let mut rem = index;
        let mut out = vec![0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = rem % axis.n_points;
            rem /= axis.n_points;
        }
        out
    }

    pub fn coords(&self, index: usize) -> Vec<f64> {
        self.grid_indices(index)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.value(i))
            .collect()
    }

    pub fn params_at(&self, index: usize) -> ModelParams {
        let mut p = self.base;
        for (axis, value) in self.axes.iter().zip(self.coords(index)) {
            axis.param.apply(&mut p, value);
        }
        p
    }

    pub fn point_seed(&self, index: usize) -> Option<u64> {
        self.sim.as_ref().map(|s| s.seed ^ index as u64)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidSpec(m));
        if self.axes.is_empty() || self.axes.len() > 2 {
            return bad(format!("expected one or two axes, got {}", self.axes.len()));
        }
        for a in &self.axes {
            if a.n_points == 0 {
                return bad(format!("axis {} has no points", a.param));
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return bad(format!("axis {} has non-finite bounds", a.param));
            }
        }
        if self.axes.len() == 2 {
            let (a, b) = (self.axes[0].param, self.axes[1].param);
            let populations = [SweptParam::PF, SweptParam::PC];
            if a == b || (populations.contains(&a) && populations.contains(&b)) {
                return bad(format!("axes {a} and {b} set the same parameter"));
            }
        }
        if self.mode.simulated() && self.sim.is_none() {
            return bad("simulated sweeps need a sim section".into());
        }
        for index in 0..self.n_points() {
            self.params_at(index)
                .validate()
                .into_result()
                .map_err(|source| SweepError::InvalidPoint { index, source })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Stable,
    Unstable,
    /// Exactly on the `c1_margin = 0` frontier with positive `c2`.
    Degenerate,
    /// Stable analytically but the simulation blew up (e.g. `Δt` beyond the
    /// explicit-scheme limit).
    Overflowed,
}

impl PointStatus {
    pub fn name(self) -> &'static str {
        match self {
            PointStatus::Stable => "stable",
            PointStatus::Unstable => "unstable",
            PointStatus::Degenerate => "degenerate",
            PointStatus::Overflowed => "overflowed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub coords: Vec<f64>,
    pub params: ModelParams,
    pub status: PointStatus,
    pub stability: StabilityReport,
    pub moments: Option<StationaryMoments>,
    pub profitability: Option<ProfitabilityReport>,
    pub variance_ratio: Option<f64>,
    pub estimates: Option<ErgodicEstimates>,
    pub seed: Option<u64>,
}

/// Evaluates one grid point on its own; the result does not depend on any
/// other point.
pub fn evaluate_point(spec: &SweepSpec, index: usize) -> Result<SweepPoint, SweepError> {
    let params = spec.params_at(index);
    let stability = check_stability(&params)
        .map_err(|e| SweepError::InvalidSpec(format!("point {index}: {e}")))?;
    let mut point = SweepPoint {
        index,
        coords: spec.coords(index),
        params,
        status: if stability.is_stable() {
            PointStatus::Stable
        } else if stability.c1_margin == 0.0 && stability.c2_value > 0.0 {
            PointStatus::Degenerate
        } else {
            PointStatus::Unstable
        },
        stability,
        moments: None,
        profitability: None,
        variance_ratio: None,
        estimates: None,
        seed: None,
    };
    if point.status != PointStatus::Stable {
        return Ok(point);
    }
    if spec.mode.analytic() {
        point.moments = stationary_moments(&params).ok();
        point.profitability = profitability(&params).ok();
        point.variance_ratio = momentum_variance_ratio(&params).ok();
    }
    if spec.mode.simulated() {
        let base = spec.sim.as_ref().expect("validated");
        let config = SimConfig { seed: base.seed ^ index as u64, ..base.clone() };
        point.seed = Some(config.seed);
        match monte_carlo(&params, &config) {
            Ok(est) => point.estimates = Some(est),
            Err(SimError::PathsOverflowed { .. } | SimError::Overflow(_)) => {
                point.status = PointStatus::Overflowed;
            }
            Err(source) => return Err(SweepError::Simulation { index, source }),
        }
    }
    Ok(point)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let points = (0..spec.n_points())
        .into_par_iter()
        .map(|i| evaluate_point(spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { spec: spec.clone(), points })
}

/// A change of stability verdict between neighbouring grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierCrossing {
    pub axis: SweptParam,
    pub from_index: usize,
    pub to_index: usize,
    /// Where the binding margin `min(c1_margin, c2_value)` crosses zero,
    /// interpolated linearly along the axis.
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierSummary {
    pub n_points: usize,
    pub n_stable: usize,
    pub n_unstable: usize,
    pub n_degenerate: usize,
    pub n_overflowed: usize,
    pub crossings: Vec<FrontierCrossing>,
}

impl SweepResult {
    pub fn frontier(&self) -> FrontierSummary {
        let count = |s: PointStatus| self.points.iter().filter(|p| p.status == s).count();
        let mut crossings = Vec::new();
        let index_of = |g: &[usize]| -> usize {
            g.iter().zip(&self.spec.axes).fold(0, |acc, (&i, a)| acc * a.n_points + i)
        };
        for point in &self.points {
            let grid = self.spec.grid_indices(point.index);
            for (ax, axis) in self.spec.axes.iter().enumerate() {
                if grid[ax] + 1 >= axis.n_points {
                    continue;
                }
                let mut next = grid.clone();
                next[ax] += 1;
                let other = &self.points[index_of(&next)];
                if point.stability.is_stable() == other.stability.is_stable() {
                    continue;
                }
                let binding = |p: &SweepPoint| p.stability.c1_margin.min(p.stability.c2_value);
                let (m0, m1) = (binding(point), binding(other));
                let (x0, x1) = (point.coords[ax], other.coords[ax]);
                let estimate = if m1 != m0 { x0 - m0 * (x1 - x0) / (m1 - m0) } else { 0.5 * (x0 + x1) };
                crossings.push(FrontierCrossing {
                    axis: axis.param,
                    from_index: point.index,
                    to_index: other.index,
                    estimate,
                });
            }
        }
        FrontierSummary {
            n_points: self.points.len(),
            n_stable: count(PointStatus::Stable),
            n_unstable: count(PointStatus::Unstable),
            n_degenerate: count(PointStatus::Degenerate),
            n_overflowed: count(PointStatus::Overflowed),
            crossings,
        }
    }
}

/// One row of [`convergence_study`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    /// Spectral radius of `I − ΔtΘ`.
    pub spectral_radius: f64,
    /// The explicit scheme is unstable at this step or the run overflowed.
    pub divergent: bool,
    pub estimates: Option<ErgodicEstimates>,
    /// Stationary `var_u` of the Euler chain itself.
    pub euler_var_u: Option<f64>,
    pub abs_err_var_u: Option<f64>,
    pub abs_err_cov_um: Option<f64>,
    pub abs_err_var_m: Option<f64>,
    pub abs_err_pi_f: Option<f64>,
    pub abs_err_pi_c: Option<f64>,
}

/// Runs `config` at each step size and reports the distance of every
/// estimate from its closed form.
pub fn convergence_study(
    params: &ModelParams,
    dts: &[f64],
    config: &SimConfig,
) -> Result<Vec<ConvergenceRow>, SimError> {
    let moments = stationary_moments(params)?;
    let profit = profitability(params)?;
    let d = params.derive()?;
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        let spectral_radius = euler_spectral_radius(&d.theta, dt);
        let mut row = ConvergenceRow {
            dt,
            spectral_radius,
            divergent: spectral_radius >= 1.0,
            estimates: None,
            euler_var_u: None,
            abs_err_var_u: None,
            abs_err_cov_um: None,
            abs_err_var_m: None,
            abs_err_pi_f: None,
            abs_err_pi_c: None,
        };
        if !row.divergent {
            row.euler_var_u = euler_stationary_covariance(&d.theta, &d.big_sigma, dt)
                .ok()
                .map(|p| p.get(0, 0));
            let cfg = SimConfig { dt, ..config.clone() };
            match monte_carlo(params, &cfg) {
                Ok(est) => {
                    row.abs_err_var_u = Some((est.var_u.value - moments.var_u).abs());
                    row.abs_err_cov_um = Some((est.cov_um.value - moments.cov_um).abs());
                    row.abs_err_var_m = Some((est.var_m.value - moments.var_m).abs());
                    row.abs_err_pi_f = Some((est.pi_f.value - profit.pi_f).abs());
                    row.abs_err_pi_c = Some((est.pi_c.value - profit.pi_c).abs());
                    row.estimates = Some(est);
                }
                Err(SimError::PathsOverflowed { .. } | SimError::Overflow(_)) => row.divergent = true,
                Err(e) => return Err(e),
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analytic(axes: Vec<SweepAxis>) -> SweepSpec {
        SweepSpec { base: ModelParams::reference(), axes, mode: SweepMode::Analytic, sim: None }
    }

    fn axis(param: SweptParam, min: f64, max: f64, n_points: usize) -> SweepAxis {
        SweepAxis { param, min, max, n_points }
    }

    #[test]
    fn grid_layout() {
        let s = analytic(vec![axis(SweptParam::Beta, 0.0, 2.0, 5), axis(SweptParam::K, 0.1, 0.5, 3)]);
        assert_eq!(s.n_points(), 15);
        assert_eq!(s.grid_indices(7), vec![2, 1]);
        assert_eq!(s.coords(7), vec![1.0, 0.30000000000000004]);
        assert_eq!(s.coords(14), vec![2.0, 0.5]);
        let p = s.params_at(7);
        assert_eq!((p.beta, p.k), (1.0, 0.30000000000000004));
    }

    #[test]
    fn population_sweep_keeps_sum() {
        let s = analytic(vec![axis(SweptParam::PF, 0.1, 0.9, 9)]);
        for i in 0..9 {
            let p = s.params_at(i);
            assert!((p.p_f + p.p_c - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(analytic(vec![]).validate().is_err());
        let s = analytic(vec![axis(SweptParam::K, -1.0, 1.0, 3)]);
        assert!(matches!(s.validate(), Err(SweepError::InvalidPoint { index: 0, .. })));
        let s = analytic(vec![axis(SweptParam::PF, 0.0, 1.0, 3), axis(SweptParam::PC, 0.0, 1.0, 3)]);
        assert!(s.validate().is_err());
        let s = SweepSpec { mode: SweepMode::Both, ..analytic(vec![axis(SweptParam::K, 0.1, 1.0, 3)]) };
        assert!(s.validate().is_err());
    }

    #[test]
    fn verdict_flips_with_c1_margin_sign() {
        // chartists four times as sensitive: c1 = k − 1.5 changes sign at k = 1.5
        let base = ModelParams { alpha_c: 4.0, ..ModelParams::reference() };
        let spec = SweepSpec { base, ..analytic(vec![axis(SweptParam::K, 0.25, 3.0, 12)]) };
        let r = run_sweep(&spec).unwrap();
        for p in &r.points {
            assert_eq!(p.stability.is_stable(), p.stability.c1_margin > 0.0);
            assert_eq!(p.moments.is_some(), p.stability.is_stable());
        }
        let f = r.frontier();
        assert_eq!(f.crossings.len(), 1);
        assert!((f.crossings[0].estimate - 1.5).abs() < 1e-12);
        assert_eq!(f.n_stable + f.n_unstable + f.n_degenerate, 12);
    }

    #[test]
    fn exact_frontier_point_is_degenerate() {
        let base = ModelParams { alpha_c: 4.0, ..ModelParams::reference() };
        let spec = SweepSpec { base, ..analytic(vec![axis(SweptParam::K, 1.0, 2.0, 3)]) };
        let r = run_sweep(&spec).unwrap();
        let statuses: Vec<_> = r.points.iter().map(|p| p.status).collect();
        assert_eq!(statuses, [PointStatus::Unstable, PointStatus::Degenerate, PointStatus::Stable]);
    }

    #[test]
    fn chartist_strength_raises_dislocation_variance() {
        // q_c = β p_c α_c grows with α_c at fixed q_f, k, σ
        let spec = analytic(vec![axis(SweptParam::AlphaC, 0.0, 1.9, 20)]);
        let r = run_sweep(&spec).unwrap();
        let var_u: Vec<f64> = r.points.iter().map(|p| p.moments.unwrap().var_u).collect();
        assert!(var_u.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn two_dimensional_grid_shape() {
        let spec = analytic(vec![axis(SweptParam::Beta, 0.0, 2.0, 5), axis(SweptParam::K, 0.1, 1.0, 5)]);
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.points.len(), 25);
        assert!(r.points.iter().enumerate().all(|(i, p)| p.index == i));
        // β = 0 row has no fundamentalist pull
        assert!(r.points[..5].iter().all(|p| p.status == PointStatus::Unstable));
    }

    #[test]
    fn sweep_is_deterministic_and_points_independent() {
        let spec = SweepSpec {
            mode: SweepMode::Both,
            sim: Some(SimConfig { n_paths: 2, seed: 9, burn_in_t: Some(1.0), ..SimConfig::new(0.02, 6.0) }),
            ..analytic(vec![axis(SweptParam::AlphaC, 0.0, 1.5, 4)])
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a, b);
        for i in 0..4 {
            assert_eq!(evaluate_point(&spec, i).unwrap(), a.points[i]);
            assert_eq!(a.points[i].seed, Some(9 ^ i as u64));
        }
    }

    #[test]
    fn divergent_step_is_flagged_not_fatal() {
        // |1 − Δtλ| ≥ 1 for the reference spectrum once Δt ≥ 2Re(λ)/|λ|² = 2
        let cfg = SimConfig { n_paths: 2, burn_in_t: Some(5.0), ..SimConfig::new(0.01, 40.0) };
        let rows = convergence_study(&ModelParams::reference(), &[2.5, 0.05], &cfg).unwrap();
        assert!(rows[0].divergent);
        assert!(rows[0].estimates.is_none());
        assert!(!rows[1].divergent);
        assert!(rows[1].abs_err_var_u.is_some());
    }
}
