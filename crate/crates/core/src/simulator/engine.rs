use super::noise::NoiseStream;
use super::{Integrator, MarketState, Overflow, SimConfig, SimError, OVERFLOW_THRESHOLD};
use crate::analytics::{solve_lyapunov, AnalyticsError};
use crate::linalg::{dot, Mat2};
use crate::params::ModelParams;
use serde::Serialize;

/// What the observer of [`integrate`] sees after every step (and once for
/// the initial state at `step = 0`).
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub step: u64,
    pub state: &'a MarketState,
    /// Excess log-price increment `Δs − (μ − σ_fσ_fᵀ/2)Δt` of the step that
    /// produced `state`; zero at `step = 0`.
    pub ds_prime: f64,
    /// Log price integrated directly from the price-setting rule, on the same
    /// noise, independently of `u + f`.
    pub s_direct: f64,
}

/// Per-path statistics over the post-burn-in recorded states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSummary {
    pub path_index: u64,
    pub n_samples: u64,
    pub mean_u: f64,
    pub mean_m: f64,
    /// Time average of `u²`.
    pub mean_uu: f64,
    pub mean_um: f64,
    pub mean_mm: f64,
    /// `(log V^f_T − log V^f_0) / T`
    pub growth_f: f64,
    pub growth_c: f64,
    pub terminal: MarketState,
}

/// A recorded trajectory, thinned by `record_stride`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPath {
    pub params: ModelParams,
    pub config: SimConfig,
    pub path_index: u64,
    pub integrator: Integrator,
    pub states: Vec<MarketState>,
    pub summary: PathSummary,
}

impl SimPath {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }
}

enum MomentumRule {
    Instant,
    Delay { decay: f64, buffer: Vec<f64>, pos: usize },
    Exact { transition: Mat2, chol: Mat2 },
}

#[derive(Default)]
struct Accumulator {
    n: u64,
    u: f64,
    m: f64,
    uu: f64,
    um: f64,
    mm: f64,
}

impl Accumulator {
    #[inline]
    fn push(&mut self, s: &MarketState) {
        self.n += 1;
        self.u += s.u;
        self.m += s.m;
        self.uu += s.u * s.u;
        self.um += s.u * s.m;
        self.mm += s.m * s.m;
    }
}

/// Integrates one path and reports every step to `observe`.
///
/// Dispatches on the look-back horizon: `τ = ∞` uses the instantaneous
/// momentum SDE (or the exact OU transition when requested), finite `τ` keeps
/// a ring buffer of the last `⌈τ/Δt⌉` excess increments and subtracts the
/// one leaving the window.
pub fn integrate<F>(
    params: &ModelParams,
    config: &SimConfig,
    path_index: u64,
    mut observe: F,
) -> Result<PathSummary, SimError>
where
    F: FnMut(&StepView<'_>),
{
    let d = params.derive()?;
    config.validate(params)?;
    let integrator = Integrator::select(params, config.scheme)?;

    let dt = config.dt;
    let sqrt_dt = dt.sqrt();
    let n_steps = config.n_steps();
    let burn_steps = config.burn_in_steps(params);
    let stride = config.record_stride as u64;
    let (q_f, q_c, k) = (d.q_f, d.q_c, params.k);
    let (sigma_f, sigma_n, sigma_u) = (params.sigma_f, params.sigma_n, d.sigma_u);
    let drift = d.drift_const;
    let half_nn = 0.5 * params.noise_variance();

    let mut rule = match integrator {
        Integrator::Euler => MomentumRule::Instant,
        Integrator::Delay => {
            let tau = params.tau.finite().ok_or(SimError::DelayBufferUnderflow)?;
            let lags = (tau / dt - 1e-9).ceil() as usize;
            if lags == 0 {
                return Err(SimError::DelayBufferUnderflow);
            }
            MomentumRule::Delay { decay: (-k * tau).exp(), buffer: vec![0.0; lags], pos: 0 }
        }
        Integrator::ExactOu => {
            let rho = solve_lyapunov(&d.theta, &d.big_sigma)?;
            let transition = d.theta.scale(-dt).expm();
            let step_cov = rho - transition * rho * transition.transpose();
            let chol = step_cov
                .cholesky()
                .ok_or(AnalyticsError::SingularSystem { residual: f64::NAN })?;
            MomentumRule::Exact { transition, chol }
        }
    };

    let mut noise = NoiseStream::new(config.seed, path_index);
    let mut state = MarketState::initial(&config.initial);
    let mut s_direct = state.log_price();
    let mut acc = Accumulator::default();
    let mut growth_anchor = (state.log_v_f, state.log_v_c);

    observe(&StepView { step: 0, state: &state, ds_prime: 0.0, s_direct });
    if burn_steps == 0 {
        acc.push(&state);
    }

    for step in 1..=n_steps {
        let z = noise.next_pair();
        let dw = [z[0] * sqrt_dt, z[1] * sqrt_dt];
        let (u, m) = (state.u, state.m);

        let excess = q_c * m - q_f * u;
        let price_noise = dot(&sigma_n, &dw);
        let ds_prime = excess * dt + price_noise;

        let (z_f, z_c) = state.weights(params);
        let asset_return = (drift + half_nn + excess) * dt + price_noise;
        state.log_v_f += z_f * asset_return - z_f * z_f * half_nn * dt;
        state.log_v_c += z_c * asset_return - z_c * z_c * half_nn * dt;
        state.f += drift * dt + dot(&sigma_f, &dw);
        s_direct += drift * dt + ds_prime;

        match &mut rule {
            MomentumRule::Instant => {
                state.u = u + excess * dt + dot(&sigma_u, &dw);
                state.m = m + ds_prime - k * m * dt;
            }
            MomentumRule::Delay { decay, buffer, pos } => {
                let leaving = std::mem::replace(&mut buffer[*pos], ds_prime);
                *pos += 1;
                if *pos == buffer.len() {
                    *pos = 0;
                }
                state.u = u + excess * dt + dot(&sigma_u, &dw);
                state.m = m + ds_prime - *decay * leaving - k * m * dt;
            }
            MomentumRule::Exact { transition, chol } => {
                let mean = transition.mul_vec([u, m]);
                let shock = chol.mul_vec(z);
                state.u = mean[0] + shock[0];
                state.m = mean[1] + shock[1];
                s_direct = state.u + state.f;
            }
        }
        state.t = step as f64 * dt;

        let blown = !(state.u.abs() <= OVERFLOW_THRESHOLD && state.m.abs() <= OVERFLOW_THRESHOLD)
            || !(state.f.is_finite() && state.log_v_f.is_finite() && state.log_v_c.is_finite());
        if blown {
            return Err(SimError::Overflow(Overflow { path_index, step, t: state.t }));
        }

        observe(&StepView { step, state: &state, ds_prime, s_direct });
        if step == burn_steps && config.burn_in_growth {
            growth_anchor = (state.log_v_f, state.log_v_c);
        }
        if step >= burn_steps && step % stride == 0 {
            acc.push(&state);
        }
    }

    let growth_window = if config.burn_in_growth {
        (n_steps - burn_steps.min(n_steps)) as f64 * dt
    } else {
        n_steps as f64 * dt
    };
    let n = acc.n.max(1) as f64;
    Ok(PathSummary {
        path_index,
        n_samples: acc.n,
        mean_u: acc.u / n,
        mean_m: acc.m / n,
        mean_uu: acc.uu / n,
        mean_um: acc.um / n,
        mean_mm: acc.mm / n,
        growth_f: (state.log_v_f - growth_anchor.0) / growth_window,
        growth_c: (state.log_v_c - growth_anchor.1) / growth_window,
        terminal: state,
    })
}

pub(crate) fn record_path(
    params: &ModelParams,
    config: &SimConfig,
    path_index: u64,
) -> Result<SimPath, SimError> {
    let stride = config.record_stride.max(1) as u64;
    let mut states = Vec::with_capacity((config.n_steps() / stride + 1) as usize);
    let summary = integrate(params, config, path_index, |view| {
        if view.step % stride == 0 {
            states.push(*view.state);
        }
    })?;
    Ok(SimPath {
        params: *params,
        config: config.resolved(params),
        path_index,
        integrator: Integrator::select(params, config.scheme)?,
        states,
        summary,
    })
}

/// Records one path of the `τ = ∞` system.
pub fn simulate_path(
    params: &ModelParams,
    config: &SimConfig,
    path_index: u64,
) -> Result<SimPath, SimError> {
    if !params.tau.is_infinite() {
        return Err(SimError::InvalidConfig(
            "simulate_path needs an infinite look-back horizon; use simulate_path_delay".into(),
        ));
    }
    record_path(params, config, path_index)
}

/// Records one path of the finite-`τ` delay system.
pub fn simulate_path_delay(
    params: &ModelParams,
    config: &SimConfig,
    path_index: u64,
) -> Result<SimPath, SimError> {
    if params.tau.is_infinite() {
        return Err(SimError::InvalidConfig(
            "simulate_path_delay needs a finite look-back horizon".into(),
        ));
    }
    record_path(params, config, path_index)
}
