//! Closed-form results for the reduced `(u, m)` system: stability, stationary
//! second moments, the momentum-variance ratio against the `β = 0`
//! benchmark, and long-run log-growth of both trader types.
//!
//! [`solve_lyapunov`] is an independent numerical route to the stationary
//! covariance and is used to cross-check [`stationary_moments`].

use crate::linalg::{dot, Mat2};
use crate::params::{derive_coefficients, ModelParams, ParamError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual bound for the Lyapunov solve, relative to `‖ΣΣᵀ‖`.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

/// Allowed disagreement between `Π_f − Π_c` and the direct growth-gap
/// expression, relative to `max(1, magnitude of the terms)`.
pub const GROWTH_GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("drift matrix has an eigenvalue with non-positive real part: {0:?}")]
    UnstableTheta([Complex64; 2]),
    #[error("Lyapunov system is singular or ill-conditioned (residual {residual:e})")]
    SingularSystem { residual: f64 },
    #[error("market is unstable (c1 margin {c1_margin}, c2 value {c2_value})")]
    UnstableMarket { c1_margin: f64, c2_value: f64 },
    #[error("degenerate denominator: q_f·k·(q_f + k − q_c) = 0")]
    DegenerateDenominator,
    #[error("noise-trader variance σ_nσ_nᵀ is zero")]
    ZeroNoise,
    #[error("growth-gap identity violated: Π_f − Π_c = {direct}, direct expression = {closed_form}")]
    IdentityMismatch { direct: f64, closed_form: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `k − β(p_cα_c − p_fα_f)`; stability requires it to be positive.
    pub c1_margin: f64,
    /// `β·p_f·α_f`; stability requires it to be positive.
    pub c2_value: f64,
    /// Spectrum of Θ, larger real part first.
    pub eigenvalues: [Complex64; 2],
    pub stable_by_conditions: bool,
    pub stable_by_spectrum: bool,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.stable_by_conditions
    }

    pub fn min_real_eigenvalue(&self) -> f64 {
        self.eigenvalues[0].re.min(self.eigenvalues[1].re)
    }
}

/// Stationary second moments of `(u, m)`; both means are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryMoments {
    pub var_u: f64,
    pub cov_um: f64,
    pub var_m: f64,
}

impl StationaryMoments {
    pub fn from_matrix(rho: &Mat2) -> Self {
        StationaryMoments {
            var_u: rho.get(0, 0),
            cov_um: 0.5 * (rho.get(0, 1) + rho.get(1, 0)),
            var_m: rho.get(1, 1),
        }
    }

    pub fn as_matrix(&self) -> Mat2 {
        Mat2::new(self.var_u, self.cov_um, self.cov_um, self.var_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitabilityReport {
    /// Growth shared by both strategies when they hold the constant weight `Z`.
    pub c_const: f64,
    pub pi_f: f64,
    pub pi_c: f64,
    /// `pi_f − pi_c`
    pub gap: f64,
}

pub fn check_stability(p: &ModelParams) -> Result<StabilityReport, AnalyticsError> {
    let d = derive_coefficients(p)?;
    let c1_margin = p.k - p.beta * (p.p_c * p.alpha_c - p.p_f * p.alpha_f);
    let c2_value = p.beta * p.p_f * p.alpha_f;
    let mut eigenvalues = d.theta.eigenvalues();
    if eigenvalues[1].re > eigenvalues[0].re {
        eigenvalues.swap(0, 1);
    }
    let stable_by_spectrum = eigenvalues.iter().all(|l| l.re > 0.0);
    Ok(StabilityReport {
        c1_margin,
        c2_value,
        eigenvalues,
        stable_by_conditions: c1_margin > 0.0 && c2_value > 0.0,
        stable_by_spectrum,
    })
}

/// Stationary covariance `ρ` of `dX = −ΘX dt + Σ dW`, i.e. the solution of
/// `Θρ + ρΘᵀ = ΣΣᵀ`, obtained from the 3x3 linear system in
/// `(ρ₁₁, ρ₁₂, ρ₂₂)`.
pub fn solve_lyapunov(theta: &Mat2, big_sigma: &Mat2) -> Result<Mat2, AnalyticsError> {
    let eig = theta.eigenvalues();
    if !eig.iter().all(|l| l.re > 0.0) {
        return Err(AnalyticsError::UnstableTheta(eig));
    }
    let s = big_sigma.gram();
    let [[a, b], [c, d]] = theta.0;
    // (Θρ + ρΘᵀ)₁₁ = 2(a x + b y)
    // (Θρ + ρΘᵀ)₁₂ = c x + (a + d) y + b z
    // (Θρ + ρΘᵀ)₂₂ = 2(c y + d z)
    let system = [
        [2.0 * a, 2.0 * b, 0.0],
        [c, a + d, b],
        [0.0, 2.0 * c, 2.0 * d],
    ];
    let rhs = [s.get(0, 0), 0.5 * (s.get(0, 1) + s.get(1, 0)), s.get(1, 1)];
    let [x, y, z] = crate::linalg::solve3(system, rhs, 1e-13)
        .ok_or(AnalyticsError::SingularSystem { residual: f64::INFINITY })?;
    let rho = Mat2::new(x, y, y, z);
    let residual = (*theta * rho + rho * theta.transpose() - s).norm();
    if residual.is_nan() || residual > LYAPUNOV_RESIDUAL_TOL * s.norm() {
        return Err(AnalyticsError::SingularSystem { residual });
    }
    Ok(rho)
}

/// Positive-definite `P` with `ΘᵀP + PΘ = I`. The quadratic form `xᵀPx`
/// strictly decreases along every trajectory of `ẋ = −Θx`.
pub fn lyapunov_energy(theta: &Mat2) -> Result<Mat2, AnalyticsError> {
    solve_lyapunov(&theta.transpose(), &Mat2::IDENTITY)
}

fn require_stable(p: &ModelParams) -> Result<StabilityReport, AnalyticsError> {
    let report = check_stability(p)?;
    if report.is_stable() {
        Ok(report)
    } else {
        Err(AnalyticsError::UnstableMarket {
            c1_margin: report.c1_margin,
            c2_value: report.c2_value,
        })
    }
}

/// Closed-form stationary moments of `(u, m)`.
pub fn stationary_moments(p: &ModelParams) -> Result<StationaryMoments, AnalyticsError> {
    p.validate().into_result()?;
    let (q_f, q_c, k) = (p.q_f(), p.q_c(), p.k);
    let denom = q_f + k - q_c;
    if q_f * k * denom == 0.0 {
        return Err(AnalyticsError::DegenerateDenominator);
    }
    require_stable(p)?;

    let sigma_u = p.sigma_u();
    let ff = p.fundamental_variance();
    let nn = p.noise_variance();
    let uu = dot(&sigma_u, &sigma_u);
    let mixed = [
        k * sigma_u[0] + q_c * p.sigma_f[0],
        k * sigma_u[1] + q_c * p.sigma_f[1],
    ];
    Ok(StationaryMoments {
        var_u: (dot(&mixed, &mixed) + q_f * k * uu) / (2.0 * q_f * k * denom),
        cov_um: ((q_c - k) * ff + k * nn) / (2.0 * k * denom),
        var_m: (q_f * ff + k * nn) / (2.0 * k * denom),
    })
}

/// Stationary variance of momentum alone.
///
/// The `m` marginal is stationary not only for stable markets but also when
/// `q_f = 0` and `k > q_c`: momentum then no longer depends on `u`. With
/// `β = 0` this is the benchmark `σ_nσ_nᵀ/(2k)`.
pub fn momentum_variance(p: &ModelParams) -> Result<f64, AnalyticsError> {
    p.validate().into_result()?;
    let (q_f, q_c, k) = (p.q_f(), p.q_c(), p.k);
    let denom = q_f + k - q_c;
    let decoupled = q_f == 0.0 && denom > 0.0;
    if !decoupled {
        require_stable(p)?;
    }
    Ok((q_f * p.fundamental_variance() + k * p.noise_variance()) / (2.0 * k * denom))
}

/// Momentum variance when trader demand has no price impact: `σ_nσ_nᵀ/(2k)`.
pub fn benchmark_momentum_variance(p: &ModelParams) -> Result<f64, AnalyticsError> {
    p.validate().into_result()?;
    Ok(p.noise_variance() / (2.0 * p.k))
}

/// Stationary momentum variance relative to the `β = 0` benchmark.
pub fn momentum_variance_ratio(p: &ModelParams) -> Result<f64, AnalyticsError> {
    require_stable(p)?;
    let nn = p.noise_variance();
    if nn == 0.0 {
        return Err(AnalyticsError::ZeroNoise);
    }
    let (q_f, q_c, k) = (p.q_f(), p.q_c(), p.k);
    let denom = q_f + k - q_c;
    Ok(q_f / denom * (p.fundamental_variance() / nn) + k / denom)
}

/// `C = Z(μ − σ_fσ_fᵀ/2 + (1 − Z)σ_nσ_nᵀ/2)`
pub fn constant_weight_growth(p: &ModelParams) -> f64 {
    p.big_z * (p.mu - 0.5 * p.fundamental_variance() + (1.0 - p.big_z) * 0.5 * p.noise_variance())
}

/// Long-run log growth of each strategy given the stationary moments.
pub fn profitability_from_moments(p: &ModelParams, m: &StationaryMoments) -> ProfitabilityReport {
    let c = constant_weight_growth(p);
    let half_nn = 0.5 * p.noise_variance();
    let (af, ac) = (p.alpha_f, p.alpha_c);
    let pi_f = c + p.beta * p.p_f * af * af * m.var_u
        - p.beta * p.p_c * ac * af * m.cov_um
        - af * af * half_nn * m.var_u;
    let pi_c = c + p.beta * p.p_c * ac * ac * m.var_m
        - p.beta * p.p_f * af * ac * m.cov_um
        - ac * ac * half_nn * m.var_m;
    ProfitabilityReport { c_const: c, pi_f, pi_c, gap: pi_f - pi_c }
}

/// The growth gap `Π_f − Π_c` written directly in terms of the moments.
pub fn growth_difference(p: &ModelParams, m: &StationaryMoments) -> f64 {
    let (af, ac) = (p.alpha_f, p.alpha_c);
    0.5 * p.noise_variance() * (ac * ac * m.var_m - af * af * m.var_u)
        + (p.p_f - p.p_c) * p.beta * af * ac * m.cov_um
        + p.beta * (p.p_f * af * af * m.var_u - p.p_c * ac * ac * m.var_m)
}

/// Long-run log growth of both strategies.
///
/// Requires a stable market, except when `α_f = α_c = 0`: both traders then
/// hold the constant weight `Z` and grow at `C` whatever `(u, m)` does.
pub fn profitability(p: &ModelParams) -> Result<ProfitabilityReport, AnalyticsError> {
    if p.alpha_f == 0.0 && p.alpha_c == 0.0 {
        p.validate().into_result()?;
        let c = constant_weight_growth(p);
        return Ok(ProfitabilityReport { c_const: c, pi_f: c, pi_c: c, gap: 0.0 });
    }
    let moments = stationary_moments(p)?;
    let report = profitability_from_moments(p, &moments);
    let closed_form = growth_difference(p, &moments);
    let scale = [report.pi_f, report.pi_c, closed_form, report.c_const]
        .iter()
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if (report.gap - closed_form).abs() > GROWTH_GAP_TOL * scale {
        return Err(AnalyticsError::IdentityMismatch { direct: report.gap, closed_form });
    }
    Ok(report)
}
