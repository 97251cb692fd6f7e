//! Seeded Euler–Maruyama integration of `(f, u, m)` together with the
//! self-financing log-wealth of both trader types, plus Monte-Carlo
//! estimators of the stationary moments and long-run growth rates.
//!
//! Paths are pure functions of `(params, config, path_index)`.

mod discretization;
mod engine;
mod estimates;
pub mod noise;

pub use discretization::{euler_spectral_radius, euler_stationary_covariance};
pub use engine::{integrate, simulate_path, simulate_path_delay, PathSummary, SimPath, StepView};
pub use estimates::{
    monte_carlo, monte_carlo_with_path, run_paths, Estimate, ErgodicEstimates, Execution,
    MonteCarloRun,
};

use crate::analytics::{check_stability, AnalyticsError};
use crate::params::{ModelParams, ParamError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `|u|` or `|m|` beyond this marks a path as blown up.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;

/// Tolerance used when converting a time span into a whole number of steps.
const STEP_ROUNDING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler–Maruyama for every state variable.
    #[default]
    Euler,
    /// Exact Gaussian transition for the `(u, m)` block; `f` and wealth stay
    /// on Euler–Maruyama. Requires `τ = ∞` and a stable market.
    ExactOu,
}

/// Which update rule a path used; recorded in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    Delay,
    ExactOu,
}

impl Integrator {
    pub fn select(params: &ModelParams, scheme: Scheme) -> Result<Self, SimError> {
        match (params.tau.is_infinite(), scheme) {
            (true, Scheme::Euler) => Ok(Integrator::Euler),
            (true, Scheme::ExactOu) => Ok(Integrator::ExactOu),
            (false, Scheme::Euler) => Ok(Integrator::Delay),
            (false, Scheme::ExactOu) => Err(SimError::InvalidConfig(
                "the exact OU scheme is only available for an infinite look-back horizon".into(),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Delay => "delay",
            Integrator::ExactOu => "exact_ou",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialState {
    pub f: f64,
    pub u: f64,
    pub m: f64,
    pub log_v_f: f64,
    pub log_v_c: f64,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Years per step.
    pub dt: f64,
    /// Total simulated years.
    pub horizon_t: f64,
    /// Years discarded before moment estimation; `None` picks
    /// [`default_burn_in`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in_t: Option<f64>,
    #[serde(default = "one")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub record_stride: usize,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub scheme: Scheme,
    /// Also discard the burn-in window from the growth-rate estimates.
    #[serde(default)]
    pub burn_in_growth: bool,
}

impl SimConfig {
    pub fn new(dt: f64, horizon_t: f64) -> Self {
        SimConfig {
            dt,
            horizon_t,
            burn_in_t: None,
            n_paths: 1,
            seed: 0,
            record_stride: 1,
            initial: InitialState::default(),
            scheme: Scheme::Euler,
            burn_in_growth: false,
        }
    }

    pub fn n_steps(&self) -> u64 {
        (self.horizon_t / self.dt + STEP_ROUNDING).floor() as u64
    }

    pub fn burn_in(&self, params: &ModelParams) -> f64 {
        self.burn_in_t.unwrap_or_else(|| default_burn_in(params))
    }

    pub fn burn_in_steps(&self, params: &ModelParams) -> u64 {
        (self.burn_in(params) / self.dt - STEP_ROUNDING).ceil().max(0.0) as u64
    }

    /// Copy with the burn-in made explicit, as written to manifests.
    pub fn resolved(&self, params: &ModelParams) -> SimConfig {
        SimConfig { burn_in_t: Some(self.burn_in(params)), ..self.clone() }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive and finite (got {})", self.dt));
        }
        if !(self.horizon_t.is_finite() && self.horizon_t > 0.0) {
            return bad(format!("horizon_t must be positive and finite (got {})", self.horizon_t));
        }
        if self.n_steps() == 0 {
            return bad("horizon_t is shorter than one step".into());
        }
        let burn = self.burn_in(params);
        if !(burn.is_finite() && burn >= 0.0) {
            return bad(format!("burn_in_t must be non-negative (got {burn})"));
        }
        if burn >= self.horizon_t {
            return bad(format!(
                "burn_in_t ({burn}) must be shorter than horizon_t ({})",
                self.horizon_t
            ));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1".into());
        }
        if let Some(tau) = params.tau.finite() {
            if self.dt > tau {
                return bad(format!("dt ({}) must not exceed tau ({tau})", self.dt));
            }
        }
        Integrator::select(params, self.scheme)?;
        Ok(())
    }
}

/// Default burn-in: `max(10/k, 10/Re(λ_min), 5τ)` rounded up to whole years.
/// The eigenvalue term is skipped when the market is not stable.
pub fn default_burn_in(params: &ModelParams) -> f64 {
    let mut years = 10.0 / params.k;
    if let Ok(report) = check_stability(params) {
        let slowest = report.min_real_eigenvalue();
        if slowest > 0.0 {
            years = years.max(10.0 / slowest);
        }
    }
    if let Some(tau) = params.tau.finite() {
        years = years.max(5.0 * tau);
    }
    years.ceil()
}

/// Instantaneous state of one simulated market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub t: f64,
    /// Log fundamental value.
    pub f: f64,
    /// Price dislocation `s − f`.
    pub u: f64,
    /// Momentum.
    pub m: f64,
    pub log_v_f: f64,
    pub log_v_c: f64,
}

impl MarketState {
    pub fn initial(init: &InitialState) -> Self {
        MarketState {
            t: 0.0,
            f: init.f,
            u: init.u,
            m: init.m,
            log_v_f: init.log_v_f,
            log_v_c: init.log_v_c,
        }
    }

    pub fn log_price(&self) -> f64 {
        self.u + self.f
    }

    /// Risky-asset weights `(Z^f, Z^c)`.
    pub fn weights(&self, params: &ModelParams) -> (f64, f64) {
        (params.big_z - params.alpha_f * self.u, params.big_z + params.alpha_c * self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overflow {
    pub path_index: u64,
    pub step: u64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("path {} overflowed at step {} (t = {})", .0.path_index, .0.step, .0.t)]
    Overflow(Overflow),
    #[error("{} of {total} paths overflowed (first: path {} at step {})", .overflowed.len(), .overflowed[0].path_index, .overflowed[0].step)]
    PathsOverflowed { overflowed: Vec<Overflow>, total: usize },
    #[error("delay buffer underflow")]
    DelayBufferUnderflow,
}
