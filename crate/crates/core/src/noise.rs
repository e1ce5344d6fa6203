//! Mixed Poisson, Gaussian and impulse noise synthesis.
//!
//! Pipeline per pixel: Poisson draw with rate equal to the clean intensity,
//! additive zero-mean Gaussian, then with probability `p` the whole pixel is
//! replaced by impulse noise. Each pixel draws from its own ChaCha stream
//! (`stream = j`) so results do not depend on traversal order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::image::ImageTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpulseKind {
    /// Uniform on `[0, 255]`, independently per channel.
    #[default]
    RandomValued,
    /// 0 or 255 with equal probability, shared by all channels.
    SaltAndPepper,
}

impl std::str::FromStr for ImpulseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-valued" | "random" => Ok(Self::RandomValued),
            "salt-and-pepper" | "salt-pepper" => Ok(Self::SaltAndPepper),
            other => Err(Error::Config(format!("unknown impulse kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub poisson: bool,
    pub sigma: f64,
    pub impulse_p: f64,
    pub impulse_kind: ImpulseKind,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            poisson: false,
            sigma: 0.0,
            impulse_p: 0.0,
            impulse_kind: ImpulseKind::RandomValued,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    /// Poisson on, Gaussian `sigma`, random-valued impulse with probability `p`.
    pub fn mixed(sigma: f64, p: f64, seed: u64) -> Self {
        Self {
            poisson: true,
            sigma,
            impulse_p: p,
            impulse_kind: ImpulseKind::RandomValued,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(0.0..1.0).contains(&self.impulse_p) {
            return Err(Error::Config(format!(
                "impulse probability must be in [0, 1), got {}",
                self.impulse_p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NoisyImage {
    /// Unclamped observation handed to the solvers.
    pub observed: ImageTensor,
    /// Pixels replaced by impulse noise.
    pub replaced: Vec<bool>,
}

impl NoisyImage {
    /// The observation as it would be stored in an 8-bit file.
    pub fn clamped(&self) -> ImageTensor {
        self.observed.clamped()
    }

    pub fn replaced_count(&self) -> usize {
        self.replaced.iter().filter(|&&r| r).count()
    }
}

pub fn corrupt(clean: &ImageTensor, spec: &NoiseSpec) -> Result<NoisyImage> {
    spec.validate()?;
    let channels = clean.channels();
    for (idx, &v) in clean.data().iter().enumerate() {
        if !(0.0..=255.0).contains(&v) {
            return Err(Error::OutOfRange {
                pixel: idx / channels,
                channel: idx % channels,
                value: v,
            });
        }
    }
    let gaussian = if spec.sigma > 0.0 {
        Some(Normal::new(0.0, spec.sigma).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(clean.data().len());
    let mut replaced = Vec::with_capacity(clean.len());
    for j in 0..clean.len() {
        let mut rng = base.clone();
        rng.set_stream(j as u64);
        for &x in clean.pixel(j) {
            let mut v = x;
            if spec.poisson && x > 0.0 {
                let dist = Poisson::new(x).map_err(|e| Error::Config(e.to_string()))?;
                v = dist.sample(&mut rng);
            }
            if let Some(g) = &gaussian {
                v += g.sample(&mut rng);
            }
            data.push(v);
        }
        let hit = spec.impulse_p > 0.0 && rng.random_bool(spec.impulse_p);
        if hit {
            let px = &mut data[j * channels..(j + 1) * channels];
            match spec.impulse_kind {
                ImpulseKind::RandomValued => {
                    for v in px.iter_mut() {
                        *v = rng.random_range(0.0..=255.0);
                    }
                }
                ImpulseKind::SaltAndPepper => {
                    let level = if rng.random_bool(0.5) { 255.0 } else { 0.0 };
                    px.fill(level);
                }
            }
        }
        replaced.push(hit);
    }
    let observed = ImageTensor::new(clean.width(), clean.height(), channels, data)?;
    Ok(NoisyImage { observed, replaced })
}
