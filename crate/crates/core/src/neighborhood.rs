//! Square local windows with inverse-distance spatial weights.

/// For every pixel `j`, the pixels of the `(2r+1) x (2r+1)` box centered at
/// `j` (truncated at the image border, `j` itself included) together with
/// `s_nj = 1 / (1 + d_nj)`.
///
/// Stored CSR-style: the window of pixel `j` is `offsets[j]..offsets[j + 1]`.
/// Truncation keeps the relation symmetric, `n in N_j <=> j in N_n`, which
/// the residual update and the symmetric objective rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSystem {
    width: usize,
    height: usize,
    radius: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
    weight_sums: Vec<f64>,
}

impl NeighborhoodSystem {
    pub fn build(width: usize, height: usize, radius: usize) -> Self {
        let k = width * height;
        let side = 2 * radius + 1;
        let mut offsets = Vec::with_capacity(k + 1);
        let mut indices = Vec::with_capacity(k * side * side);
        let mut weights = Vec::with_capacity(k * side * side);
        let mut weight_sums = Vec::with_capacity(k);
        offsets.push(0);
        let r = radius as isize;
        for y in 0..height as isize {
            for x in 0..width as isize {
                let mut sum = 0.0;
                for dy in -r..=r {
                    let ny = y + dy;
                    if ny < 0 || ny >= height as isize {
                        continue;
                    }
                    for dx in -r..=r {
                        let nx = x + dx;
                        if nx < 0 || nx >= width as isize {
                            continue;
                        }
                        let d = ((dx * dx + dy * dy) as f64).sqrt();
                        let s = 1.0 / (1.0 + d);
                        indices.push(ny as usize * width + nx as usize);
                        weights.push(s);
                        sum += s;
                    }
                }
                weight_sums.push(sum);
                offsets.push(indices.len());
            }
        }
        Self {
            width,
            height,
            radius,
            offsets,
            indices,
            weights,
            weight_sums,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.weight_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight_sums.is_empty()
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.indices[self.offsets[j]..self.offsets[j + 1]]
    }

    pub fn weights(&self, j: usize) -> &[f64] {
        &self.weights[self.offsets[j]..self.offsets[j + 1]]
    }

    /// `(n, s_nj)` pairs of the window around `j`.
    pub fn window(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors(j)
            .iter()
            .copied()
            .zip(self.weights(j).iter().copied())
    }

    /// `sum_{n in N_j} s_nj`.
    pub fn weight_sum(&self, j: usize) -> f64 {
        self.weight_sums[j]
    }
}
