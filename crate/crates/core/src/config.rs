//! Solver parameters and the text formats used to supply them.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::noise::ImpulseKind;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub clusters: usize,
    /// Fuzzification exponent, `m > 1`.
    pub m: f64,
    pub epsilon: f64,
    /// Decay rate of the residual weights `w = exp(-xi r^2)`.
    pub xi: f64,
    /// Fidelity scale; `beta_l = phi * delta_l / 100`.
    pub phi: f64,
    /// Window radius; 1 gives a 3x3 window.
    pub radius: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            clusters: 2,
            m: 2.0,
            epsilon: 1e-6,
            xi: 0.0008,
            phi: 7.0,
            radius: 1,
            max_iter: 200,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_clusters(clusters: usize) -> Self {
        Self {
            clusters,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::Config("cluster count must be at least 1".into()));
        }
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(Error::Config(format!("m must be > 1, got {}", self.m)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::Config(format!("xi must be >= 0, got {}", self.xi)));
        }
        if !(self.phi >= 0.0) || !self.phi.is_finite() {
            return Err(Error::Config(format!("phi must be >= 0, got {}", self.phi)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Contents of a TOML run file. Every key is optional; command-line flags
/// take precedence over it and it takes precedence over defaults.
///
/// ```toml
/// c = 4
/// phi = 5.58
/// xi = 0.0008
///
/// [noise]
/// poisson = true
/// sigma = 30.0
/// impulse_p = 0.2
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub c: Option<usize>,
    pub m: Option<f64>,
    pub eps: Option<f64>,
    pub xi: Option<f64>,
    pub phi: Option<f64>,
    pub window: Option<usize>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<NoiseFileConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFileConfig {
    pub poisson: Option<bool>,
    pub sigma: Option<f64>,
    pub impulse_p: Option<f64>,
    pub impulse_kind: Option<ImpulseKind>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Parses `start:stop:step` into the inclusive list of values, e.g.
/// `5:10:0.5` gives 11 values. The endpoint is kept when it lies within
/// `1e-9 * step` of the grid.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Range(text.to_string());
    let parts: Vec<&str> = text.trim().split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let step: f64 = step.trim().parse().map_err(|_| bad())?;
    if !start.is_finite() || !stop.is_finite() || !(step > 0.0) || !step.is_finite() || stop < start
    {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor();
    if count > 10_000.0 {
        return Err(bad());
    }
    Ok((0..=count as usize)
        .map(|k| start + k as f64 * step)
        .collect())
}
