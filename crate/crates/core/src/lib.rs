//! Continuous-time heterogeneous-agent market model with fundamental traders,
//! momentum-following chartists, a market maker and noise traders.
//!
//! * [`params`]: parameter space, validation, coefficients of the reduced
//!   `(u, m)` Ornstein–Uhlenbeck system.
//! * [`analytics`]: stability conditions, stationary moments, momentum-variance
//!   ratio, long-run growth of both strategies.
//! * [`simulator`]: seeded Euler–Maruyama paths (instantaneous and delayed
//!   momentum) and Monte-Carlo estimators.
//! * [`experiments`]: parameter sweeps and discretization studies.
//! * [`io`]: JSON configuration, CSV output, run manifests.

pub mod analytics;
pub mod io;
pub mod linalg;
pub mod params;
pub mod experiments;
pub mod simulator;

pub use analytics::{
    check_stability, momentum_variance_ratio, profitability, solve_lyapunov, stationary_moments,
    ProfitabilityReport, StabilityReport, StationaryMoments,
};
pub use params::{derive_coefficients, validate, DerivedCoefficients, Horizon, ModelParams};
pub use simulator::{monte_carlo, simulate_path, simulate_path_delay, SimConfig};
