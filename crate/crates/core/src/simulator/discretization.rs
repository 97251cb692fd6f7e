//! Properties of the Euler–Maruyama chain `X' = (I − ΔtΘ)X + √Δt·Σz` itself,
//! used to separate discretization bias from Monte-Carlo error.

use crate::analytics::AnalyticsError;
use crate::linalg::{solve3, Mat2};

/// Spectral radius of `I − ΔtΘ`; the explicit scheme is mean-square stable
/// for the linear block only when this is below one.
pub fn euler_spectral_radius(theta: &Mat2, dt: f64) -> f64 {
    theta
        .eigenvalues()
        .iter()
        .map(|l| (1.0 - dt * l).norm())
        .fold(0.0, f64::max)
}

/// Stationary covariance `P = APAᵀ + Δt·ΣΣᵀ` of the Euler chain, with
/// `A = I − ΔtΘ`. Differs from the continuous-time covariance by `O(Δt)`.
pub fn euler_stationary_covariance(
    theta: &Mat2,
    big_sigma: &Mat2,
    dt: f64,
) -> Result<Mat2, AnalyticsError> {
    if euler_spectral_radius(theta, dt) >= 1.0 {
        return Err(AnalyticsError::UnstableTheta(theta.eigenvalues()));
    }
    let a = Mat2::IDENTITY - theta.scale(dt);
    // P − APAᵀ, applied to the symmetric basis, gives the columns of the
    // linear system in (P₁₁, P₁₂, P₂₂).
    let op = |p: Mat2| p - a * p * a.transpose();
    let basis = [
        Mat2::new(1.0, 0.0, 0.0, 0.0),
        Mat2::new(0.0, 1.0, 1.0, 0.0),
        Mat2::new(0.0, 0.0, 0.0, 1.0),
    ];
    let mut system = [[0.0; 3]; 3];
    for (col, e) in basis.iter().enumerate() {
        let img = op(*e);
        system[0][col] = img.get(0, 0);
        system[1][col] = img.get(0, 1);
        system[2][col] = img.get(1, 1);
    }
    let s = big_sigma.gram().scale(dt);
    let [x, y, z] = solve3(system, [s.get(0, 0), s.get(0, 1), s.get(1, 1)], 1e-15)
        .ok_or(AnalyticsError::SingularSystem { residual: f64::INFINITY })?;
    Ok(Mat2::new(x, y, y, z))
}
