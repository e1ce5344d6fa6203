//! Matrices produced and consumed by the clustering solvers.

use crate::error::{Error, Result};

/// Fuzzy memberships `u_ij`, `c x K`, stored cluster-major (`i * K + j`).
/// Each column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatrix {
    clusters: usize,
    pixels: usize,
    data: Vec<f64>,
}

impl PartitionMatrix {
    pub fn zeros(clusters: usize, pixels: usize) -> Self {
        Self {
            clusters,
            pixels,
            data: vec![0.0; clusters * pixels],
        }
    }

    /// Checks shape, range and column sums (within `1e-9`).
    pub fn from_vec(clusters: usize, pixels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != clusters * pixels {
            return Err(Error::Shape(format!(
                "partition {clusters}x{pixels} needs {} entries, got {}",
                clusters * pixels,
                data.len()
            )));
        }
        let u = Self {
            clusters,
            pixels,
            data,
        };
        if let Some(j) = (0..pixels).find(|&j| {
            let col = u.column(j);
            col.iter().any(|v| !(0.0..=1.0).contains(v))
                || (col.iter().sum::<f64>() - 1.0).abs() > 1e-9
        }) {
            return Err(Error::Shape(format!(
                "column {j} is not a probability vector"
            )));
        }
        Ok(u)
    }

    pub(crate) fn from_raw(clusters: usize, pixels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), clusters * pixels);
        Self {
            clusters,
            pixels,
            data,
        }
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn pixels(&self) -> usize {
        self.pixels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.pixels + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.pixels + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.pixels..(i + 1) * self.pixels]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.clusters).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Largest deviation of a column sum from one.
    pub fn max_column_error(&self) -> f64 {
        (0..self.pixels)
            .map(|j| ((0..self.clusters).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `||self - other||_F`.
    pub fn frobenius_distance(&self, other: &PartitionMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Per-pixel argmax, lowest cluster index on ties.
    pub fn defuzzify(&self) -> Vec<usize> {
        (0..self.pixels)
            .map(|j| {
                let mut best = 0;
                for i in 1..self.clusters {
                    if self.get(i, j) > self.get(best, j) {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }
}

/// Cluster centers `v_il`, `c x L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    channels: usize,
    data: Vec<f64>,
}

impl PrototypeSet {
    pub fn new(clusters: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != clusters * channels {
            return Err(Error::Shape(format!(
                "prototypes {clusters}x{channels} need {} entries, got {}",
                clusters * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite prototype".into()));
        }
        Ok(Self { channels, data })
    }

    pub fn clusters(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    pub(crate) fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.channels..(i + 1) * self.channels]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A `K x L` field stored pixel-major; backs both residuals and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelField {
    channels: usize,
    data: Vec<f64>,
}

impl PixelField {
    pub fn filled(pixels: usize, channels: usize, value: f64) -> Self {
        Self {
            channels,
            data: vec![value; pixels * channels],
        }
    }

    pub fn from_vec(pixels: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != pixels * channels {
            return Err(Error::Shape(format!(
                "field {pixels}x{channels} needs {} entries, got {}",
                pixels * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite field entry".into()));
        }
        Ok(Self { channels, data })
    }

    pub fn pixels(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.data[j * self.channels + l]
    }

    pub fn pixel(&self, j: usize) -> &[f64] {
        &self.data[j * self.channels..(j + 1) * self.channels]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Residuals `r_jl`: the estimated noise, `X = X_clean + R`.
pub type ResidualField = PixelField;

/// Residual weights `w_jl` in `(0, 1]`.
pub type WeightField = PixelField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// `||U^(t+1) - U^(t)||_F`
    pub theta: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reseed {
    pub iter: usize,
    pub cluster: usize,
    pub pixel: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub reseeds: Vec<Reseed>,
    pub converged: bool,
    pub hit_max_iter: bool,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_theta(&self) -> Option<f64> {
        self.records.last().map(|r| r.theta)
    }

    /// CSV with header `iter,theta,objective`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,theta,objective\n");
        for r in &self.records {
            out.push_str(&format!("{},{:e},{:e}\n", r.iter, r.theta, r.objective));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_validation() {
        assert!(PartitionMatrix::from_vec(2, 2, vec![0.5, 1.0, 0.5, 0.0]).is_ok());
        assert!(PartitionMatrix::from_vec(2, 2, vec![0.5, 1.0, 0.4, 0.0]).is_err());
        assert!(PartitionMatrix::from_vec(2, 1, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn defuzzify_breaks_ties_low() {
        let u = PartitionMatrix::from_vec(3, 2, vec![0.4, 0.2, 0.4, 0.4, 0.2, 0.4]).unwrap();
        assert_eq!(u.defuzzify(), vec![0, 1]);
        let u = PartitionMatrix::from_vec(2, 1, vec![0.3, 0.7]).unwrap();
        assert_eq!(u.defuzzify(), vec![1]);
    }

    #[test]
    fn trace_csv_header() {
        let mut t = ConvergenceTrace::default();
        t.records.push(TraceRecord {
            iter: 0,
            theta: 0.5,
            objective: 12.0,
        });
        assert_eq!(t.to_csv(), "iter,theta,objective\n0,5e-1,1.2e1\n");
    }
}
