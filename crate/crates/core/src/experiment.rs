//! End-to-end runs on synthetic benchmarks: generate, corrupt, segment,
//! score.

use std::time::Instant;

use crate::config::SolverConfig;
use crate::error::Result;
use crate::fcm::fcm_fit;
use crate::image::ImageTensor;
use crate::metrics::{report, LabelMap, MetricsReport};
use crate::model::ConvergenceTrace;
use crate::noise::{corrupt, NoiseSpec};
use crate::synthetic::{gen_synthetic, SyntheticSpec};
use crate::wrfcm::wrfcm_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Fcm,
    Wrfcm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fcm => "fcm",
            Algorithm::Wrfcm => "wrfcm",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fcm" => Ok(Algorithm::Fcm),
            "wrfcm" => Ok(Algorithm::Wrfcm),
            other => Err(crate::error::Error::Config(format!(
                "unknown algorithm '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labels: LabelMap,
    pub trace: ConvergenceTrace,
    pub wall_time_ms: f64,
}

pub fn segment(
    algorithm: Algorithm,
    x: &ImageTensor,
    config: &SolverConfig,
) -> Result<Segmentation> {
    let start = Instant::now();
    let (labels, trace) = match algorithm {
        Algorithm::Fcm => {
            let out = fcm_fit(x, config)?;
            (out.labels, out.trace)
        }
        Algorithm::Wrfcm => {
            let out = wrfcm_fit(x, config)?;
            (out.labels, out.trace)
        }
    };
    Ok(Segmentation {
        labels: LabelMap::new(x.width(), x.height(), labels)?,
        trace,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// A clean synthetic image, its labels, and one noisy observation of it.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub clean: ImageTensor,
    pub truth: LabelMap,
    pub observed: ImageTensor,
}

impl Benchmark {
    pub fn generate(spec: &SyntheticSpec, noise: &NoiseSpec) -> Result<Self> {
        let (clean, truth) = gen_synthetic(spec)?;
        let observed = corrupt(&clean, noise)?.observed;
        Ok(Self {
            clean,
            truth,
            observed,
        })
    }

    pub fn run(
        &self,
        algorithm: Algorithm,
        config: &SolverConfig,
    ) -> Result<(Segmentation, MetricsReport)> {
        let seg = segment(algorithm, &self.observed, config)?;
        let metrics = report(&seg.labels, &self.truth, config.clusters)?;
        Ok((seg, metrics))
    }
}
