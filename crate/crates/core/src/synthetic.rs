//! Piecewise-constant test images with exact ground truth.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::metrics::LabelMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// A near-square grid of rectangles; the last row is stretched to fill.
    Blocks,
    /// Vertical stripes of (near) equal width.
    Stripes,
    /// Concentric disks around the image center; region 0 is the outside.
    Circles,
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blocks" => Ok(Self::Blocks),
            "stripes" => Ok(Self::Stripes),
            "circles" => Ok(Self::Circles),
            other => Err(Error::Synthetic(format!("unknown geometry '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub geometry: Geometry,
    /// Gray level of each region; the region count is `levels.len()`.
    pub levels: Vec<f64>,
}

impl SyntheticSpec {
    /// `c` regions at evenly spaced levels from 0 to 255.
    pub fn evenly_spaced(width: usize, height: usize, geometry: Geometry, c: usize) -> Self {
        let levels = if c <= 1 {
            vec![128.0; c]
        } else {
            (0..c)
                .map(|k| (k as f64 * 255.0 / (c - 1) as f64).round())
                .collect()
        };
        Self {
            width,
            height,
            geometry,
            levels,
        }
    }

    pub fn regions(&self) -> usize {
        self.levels.len()
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Synthetic("empty image".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Synthetic("at least one region is required".into()));
        }
        for (k, &level) in self.levels.iter().enumerate() {
            if !(0.0..=255.0).contains(&level) {
                return Err(Error::Synthetic(format!(
                    "level {level} of region {k} is outside [0, 255]"
                )));
            }
            if self.levels[..k].contains(&level) {
                return Err(Error::Synthetic(format!("level {level} is used twice")));
            }
        }
        Ok(())
    }
}

fn split(len: usize, parts: usize, pos: usize) -> usize {
    // index of the equal-width part containing `pos`
    pos * parts / len
}

fn region_of(spec: &SyntheticSpec, x: usize, y: usize) -> usize {
    let c = spec.regions();
    match spec.geometry {
        Geometry::Stripes => split(spec.width, c, x),
        Geometry::Blocks => {
            let cols = (c as f64).sqrt().ceil() as usize;
            let rows = c.div_ceil(cols);
            let row = split(spec.height, rows, y);
            let in_row = if row + 1 == rows {
                c - row * cols
            } else {
                cols
            };
            row * cols + split(spec.width, in_row, x)
        }
        Geometry::Circles => {
            let cx = (spec.width as f64 - 1.0) / 2.0;
            let cy = (spec.height as f64 - 1.0) / 2.0;
            let outer = spec.width.min(spec.height) as f64 / 2.0;
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            (1..c)
                .filter(|&k| d < outer * (c - k) as f64 / c as f64)
                .count()
        }
    }
}

pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<(ImageTensor, LabelMap)> {
    spec.validate()?;
    let mut labels = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            labels.push(region_of(spec, x, y));
        }
    }
    let mut counts = vec![0usize; spec.regions()];
    for &l in &labels {
        counts[l] += 1;
    }
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Synthetic(format!(
            "region {k} is empty at {}x{}",
            spec.width, spec.height
        )));
    }
    let data = labels.iter().map(|&l| spec.levels[l]).collect();
    let image = ImageTensor::new(spec.width, spec.height, 1, data)?;
    Ok((image, LabelMap::new(spec.width, spec.height, labels)?))
}
