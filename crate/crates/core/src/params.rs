//! Exogenous model parameters, their validation, and the coefficients of the
//! reduced `(u, m)` Ornstein–Uhlenbeck system derived from them.

use crate::linalg::{dot, Loading, Mat2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// Absolute tolerance for `p_f + p_c = 1`.
pub const POPULATION_SUM_TOL: f64 = 1e-12;

/// Momentum look-back horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Horizon {
    Finite(f64),
    /// Momentum integrates the whole past; the delay term vanishes.
    #[default]
    Infinite,
}

impl Horizon {
    pub fn finite(self) -> Option<f64> {
        match self {
            Horizon::Finite(t) => Some(t),
            Horizon::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Horizon::Infinite)
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("infinite"),
        }
    }
}

impl std::str::FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" => Ok(Horizon::Infinite),
            other => other
                .parse::<f64>()
                .map(Horizon::Finite)
                .map_err(|_| format!("expected a positive number or \"infinite\", got {s:?}")),
        }
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Horizon::Finite(t) => s.serialize_f64(*t),
            Horizon::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(t) => Ok(Horizon::Finite(t)),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// All exogenous constants of the market model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Drift of the fundamental value, per year.
    pub mu: f64,
    /// Loading of the log fundamental value on the two Wiener factors.
    pub sigma_f: Loading,
    /// Loading of the noise-trader price impact on the two Wiener factors.
    pub sigma_n: Loading,
    /// Common mean risky-asset weight of both trader types.
    pub big_z: f64,
    pub alpha_f: f64,
    pub alpha_c: f64,
    pub p_f: f64,
    pub p_c: f64,
    /// Market-maker price adjustment speed.
    pub beta: f64,
    /// Momentum decay rate, 1/years.
    pub k: f64,
    #[serde(default)]
    pub tau: Horizon,
}

impl ModelParams {
    /// The reference configuration used throughout the tests: symmetric
    /// populations and sensitivities, `k = 0.5`, `σ_f = (0.2, 0)`,
    /// `σ_n = (0, 0.3)`, `μ = 0.05`, `Z = 0.5`, `τ = ∞`.
    pub fn reference() -> Self {
        ModelParams {
            mu: 0.05,
            sigma_f: [0.2, 0.0],
            sigma_n: [0.0, 0.3],
            big_z: 0.5,
            alpha_f: 1.0,
            alpha_c: 1.0,
            p_f: 0.5,
            p_c: 0.5,
            beta: 1.0,
            k: 0.5,
            tau: Horizon::Infinite,
        }
    }

    /// Relative strength `β·p_f·α_f` of the fundamental traders.
    pub fn q_f(&self) -> f64 {
        self.beta * self.p_f * self.alpha_f
    }

    /// Relative strength `β·p_c·α_c` of the chartists.
    pub fn q_c(&self) -> f64 {
        self.beta * self.p_c * self.alpha_c
    }

    pub fn sigma_u(&self) -> Loading {
        [
            self.sigma_n[0] - self.sigma_f[0],
            self.sigma_n[1] - self.sigma_f[1],
        ]
    }

    /// `σ_f·σ_fᵀ`
    pub fn fundamental_variance(&self) -> f64 {
        dot(&self.sigma_f, &self.sigma_f)
    }

    /// `σ_n·σ_nᵀ`
    pub fn noise_variance(&self) -> f64 {
        dot(&self.sigma_n, &self.sigma_n)
    }

    pub fn validate(&self) -> Validation {
        validate(self)
    }

    pub fn derive(&self) -> Result<DerivedCoefficients, ParamError> {
        derive_coefficients(self)
    }
}

/// A single violated constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NonFinite(&'static str),
    PopulationSum { p_f: f64, p_c: f64 },
    PopulationRange(&'static str, f64),
    Negative(&'static str, f64),
    NotPositive(&'static str, f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(name) => write!(f, "{name} must be finite"),
            Violation::PopulationSum { p_f, p_c } => write!(
                f,
                "population ratios must sum to 1 (p_f + p_c = {})",
                p_f + p_c
            ),
            Violation::PopulationRange(name, v) => write!(f, "{name} must lie in [0, 1] (got {v})"),
            Violation::Negative(name, v) => write!(f, "{name} must be non-negative (got {v})"),
            Violation::NotPositive(name, v) => {
                write!(f, "{name} must be strictly positive (got {v})")
            }
        }
    }
}

/// Outcome of [`validate`]: empty means the parameters are admissible.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), ParamError> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(ParamError::Invalid(self.violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid parameters: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Checks every domain restriction; violations are collected, never raised.
pub fn validate(p: &ModelParams) -> Validation {
    let mut violations = Vec::new();
    let scalars = [
        ("mu", p.mu),
        ("sigma_f[0]", p.sigma_f[0]),
        ("sigma_f[1]", p.sigma_f[1]),
        ("sigma_n[0]", p.sigma_n[0]),
        ("sigma_n[1]", p.sigma_n[1]),
        ("big_z", p.big_z),
        ("alpha_f", p.alpha_f),
        ("alpha_c", p.alpha_c),
        ("p_f", p.p_f),
        ("p_c", p.p_c),
        ("beta", p.beta),
        ("k", p.k),
    ];
    for (name, v) in scalars {
        if !v.is_finite() {
            violations.push(Violation::NonFinite(name));
        }
    }
    if !violations.is_empty() {
        return Validation { violations };
    }

    if (p.p_f + p.p_c - 1.0).abs() > POPULATION_SUM_TOL {
        violations.push(Violation::PopulationSum { p_f: p.p_f, p_c: p.p_c });
    }
    for (name, v) in [("p_f", p.p_f), ("p_c", p.p_c)] {
        if !(0.0..=1.0).contains(&v) {
            violations.push(Violation::PopulationRange(name, v));
        }
    }
    for (name, v) in [("alpha_f", p.alpha_f), ("alpha_c", p.alpha_c), ("beta", p.beta)] {
        if v < 0.0 {
            violations.push(Violation::Negative(name, v));
        }
    }
    if p.k <= 0.0 {
        violations.push(Violation::NotPositive("k", p.k));
    }
    if p.big_z <= 0.0 {
        violations.push(Violation::NotPositive("big_z", p.big_z));
    }
    if let Horizon::Finite(t) = p.tau {
        if !t.is_finite() {
            violations.push(Violation::NonFinite("tau"));
        } else if t <= 0.0 {
            violations.push(Violation::NotPositive("tau", t));
        }
    }
    Validation { violations }
}

/// Coefficients of `dX = −Θ X dt + Σ dW` for `X = (u, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCoefficients {
    pub q_f: f64,
    pub q_c: f64,
    pub sigma_u: Loading,
    /// Drift of the log fundamental value, `μ − σ_fσ_fᵀ/2`.
    pub drift_const: f64,
    pub theta: Mat2,
    /// Rows `(σ_u, σ_n)`.
    pub big_sigma: Mat2,
}

impl DerivedCoefficients {
    /// `ΣΣᵀ`
    pub fn diffusion(&self) -> Mat2 {
        self.big_sigma.gram()
    }
}

pub fn derive_coefficients(p: &ModelParams) -> Result<DerivedCoefficients, ParamError> {
    p.validate().into_result()?;
    let q_f = p.q_f();
    let q_c = p.q_c();
    let sigma_u = p.sigma_u();
    Ok(DerivedCoefficients {
        q_f,
        q_c,
        sigma_u,
        drift_const: p.mu - 0.5 * p.fundamental_variance(),
        theta: Mat2::new(q_f, -q_c, q_f, p.k - q_c),
        big_sigma: Mat2::from_rows(sigma_u, p.sigma_n),
    })
}
