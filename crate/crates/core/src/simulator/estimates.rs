use super::engine::{integrate, record_path, PathSummary, SimPath};
use super::{Integrator, SimConfig, SimError};
use crate::params::ModelParams;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

/// A Monte-Carlo point estimate with its across-path standard error.
/// The standard error is `None` when only one path was run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

impl Estimate {
    /// Mean of per-path values; standard error `sd / √n` with the unbiased
    /// sample deviation.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let value = values.iter().sum::<f64>() / n;
        let std_error = (values.len() > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - value) * (v - value)).sum();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        });
        Estimate { value, std_error }
    }

    pub fn z_score(&self, target: f64) -> Option<f64> {
        self.std_error
            .filter(|se| *se > 0.0)
            .map(|se| (self.value - target) / se)
    }

    /// `|value − target| ≤ n_se · SE`; false when no standard error exists.
    pub fn within(&self, target: f64, n_se: f64) -> bool {
        self.z_score(target).is_some_and(|z| z.abs() <= n_se)
    }
}

/// Time-and-path averages over post-burn-in recorded states, and growth
/// rates averaged over paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicEstimates {
    pub var_u: Estimate,
    pub cov_um: Estimate,
    pub var_m: Estimate,
    pub mean_u: Estimate,
    pub mean_m: Estimate,
    pub pi_f: Estimate,
    pub pi_c: Estimate,
    pub n_paths: usize,
    pub samples_per_path: u64,
    pub integrator: Integrator,
}

impl ErgodicEstimates {
    pub fn from_summaries(summaries: &[PathSummary], integrator: Integrator) -> Self {
        let col = |f: fn(&PathSummary) -> f64| -> Estimate {
            Estimate::from_samples(&summaries.iter().map(f).collect::<Vec<_>>())
        };
        ErgodicEstimates {
            var_u: col(|s| s.mean_uu),
            cov_um: col(|s| s.mean_um),
            var_m: col(|s| s.mean_mm),
            mean_u: col(|s| s.mean_u),
            mean_m: col(|s| s.mean_m),
            pi_f: col(|s| s.growth_f),
            pi_c: col(|s| s.growth_c),
            n_paths: summaries.len(),
            samples_per_path: summaries.first().map_or(0, |s| s.n_samples),
            integrator,
        }
    }

    /// `(name, estimate)` pairs in a fixed order.
    pub fn named(&self) -> [(&'static str, Estimate); 7] {
        [
            ("var_u", self.var_u),
            ("cov_um", self.cov_um),
            ("var_m", self.var_m),
            ("mean_u", self.mean_u),
            ("mean_m", self.mean_m),
            ("pi_f", self.pi_f),
            ("pi_c", self.pi_c),
        ]
    }
}

/// Runs every path independently; results are in path order whatever the
/// execution mode.
pub fn run_paths(
    params: &ModelParams,
    config: &SimConfig,
    execution: Execution,
) -> Vec<Result<PathSummary, SimError>> {
    let one = |i: usize| integrate(params, config, i as u64, |_| {});
    match execution {
        Execution::Parallel => (0..config.n_paths).into_par_iter().map(one).collect(),
        Execution::Serial => (0..config.n_paths).map(one).collect(),
    }
}

fn reduce(results: Vec<Result<PathSummary, SimError>>, total: usize) -> Result<Vec<PathSummary>, SimError> {
    let mut summaries = Vec::with_capacity(results.len());
    let mut overflowed = Vec::new();
    for r in results {
        match r {
            Ok(s) => summaries.push(s),
            Err(SimError::Overflow(o)) => overflowed.push(o),
            Err(e) => return Err(e),
        }
    }
    if overflowed.is_empty() {
        Ok(summaries)
    } else {
        Err(SimError::PathsOverflowed { overflowed, total })
    }
}

pub fn monte_carlo(params: &ModelParams, config: &SimConfig) -> Result<ErgodicEstimates, SimError> {
    params.validate().into_result()?;
    config.validate(params)?;
    let integrator = Integrator::select(params, config.scheme)?;
    let summaries = reduce(run_paths(params, config, Execution::Parallel), config.n_paths)?;
    Ok(ErgodicEstimates::from_summaries(&summaries, integrator))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub estimates: ErgodicEstimates,
    pub path: SimPath,
}

/// Like [`monte_carlo`], but also keeps the recorded trajectory of
/// `record_index`.
pub fn monte_carlo_with_path(
    params: &ModelParams,
    config: &SimConfig,
    record_index: u64,
    execution: Execution,
) -> Result<MonteCarloRun, SimError> {
    params.validate().into_result()?;
    config.validate(params)?;
    if record_index >= config.n_paths as u64 {
        return Err(SimError::InvalidConfig(format!(
            "recorded path {record_index} is outside 0..{}",
            config.n_paths
        )));
    }
    let integrator = Integrator::select(params, config.scheme)?;
    let one = |i: usize| -> Result<(PathSummary, Option<SimPath>), SimError> {
        if i as u64 == record_index {
            let path = record_path(params, config, i as u64)?;
            Ok((path.summary, Some(path)))
        } else {
            integrate(params, config, i as u64, |_| {}).map(|s| (s, None))
        }
    };
    let results: Vec<_> = match execution {
        Execution::Parallel => (0..config.n_paths).into_par_iter().map(one).collect(),
        Execution::Serial => (0..config.n_paths).map(one).collect(),
    };
    let mut recorded = None;
    let mut summaries = Vec::with_capacity(results.len());
    for r in results {
        summaries.push(r.map(|(s, p)| {
            if p.is_some() {
                recorded = p;
            }
            s
        }));
    }
    let summaries = reduce(summaries, config.n_paths)?;
    Ok(MonteCarloRun {
        estimates: ErgodicEstimates::from_summaries(&summaries, integrator),
        path: recorded.expect("recorded path is in range"),
    })
}
