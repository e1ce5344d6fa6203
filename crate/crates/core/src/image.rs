//! Pixel storage shared by the solvers, the noise synthesizer and image I/O.

use crate::error::{Error, Result};

/// `K = width * height` pixels with `channels` intensities each, stored
/// row-major as `data[j * channels + l]`. Intensities are raw floats on the
/// 8-bit scale; nothing here normalizes them.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageTensor {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Shape(format!(
                "expected 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "{width}x{height}x{channels} image needs {} values, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                pixel: idx / channels,
                channel: idx % channels,
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of pixels `K`.
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, j: usize) -> &[f64] {
        &self.data[j * self.channels..(j + 1) * self.channels]
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.data[j * self.channels + l]
    }

    pub fn same_geometry(&self, other: &ImageTensor) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Copy with every intensity clamped to `[0, 255]`.
    pub fn clamped(&self) -> ImageTensor {
        ImageTensor {
            data: self.data.iter().map(|v| v.clamp(0.0, 255.0)).collect(),
            ..self.clone()
        }
    }
}

/// Population standard deviation of each channel.
pub fn channel_stddev(image: &ImageTensor) -> Vec<f64> {
    let k = image.len() as f64;
    (0..image.channels())
        .map(|l| {
            let mean = (0..image.len()).map(|j| image.get(j, l)).sum::<f64>() / k;
            let var = (0..image.len())
                .map(|j| {
                    let d = image.get(j, l) - mean;
                    d * d
                })
                .sum::<f64>()
                / k;
            var.sqrt()
        })
        .collect()
}

/// Fidelity strength per channel, `beta_l = phi * delta_l / 100`.
pub fn betas_from_phi(phi: f64, stddev: &[f64]) -> Vec<f64> {
    stddev.iter().map(|d| phi * d / 100.0).collect()
}
