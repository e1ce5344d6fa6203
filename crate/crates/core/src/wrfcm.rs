//! Residual-driven fuzzy C-means with a weighted squared fidelity term and
//! spatial windows.
//!
//! The objective, with `s_nj = 1 / (1 + d_nj)` and `y_n = x_n - r_n`, is
//!
//! ```text
//! J = sum_i sum_j u_ij^m sum_{n in N_j} s_nj ||y_n - v_i||^2
//!   + sum_l beta_l sum_j sum_{n in N_j} s_nj (w_nl r_nl)^2
//! ```
//!
//! Each iteration minimizes `J` exactly in `U`, then `V`, then `R` with the
//! weights held fixed, and then recomputes `w_jl = exp(-xi r_jl^2)`.
//! Because windows are symmetric, `J` can equally be summed per pixel with
//! the neighbors' memberships (`objective_symmetric`), which is the form
//! the residual update is derived from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fcm::{
    memberships_from_distances, sample_prototypes, squared_distance, EMPTY_CLUSTER_MASS,
};
use crate::image::{betas_from_phi, channel_stddev, ImageTensor};
use crate::model::{
    ConvergenceTrace, PartitionMatrix, PrototypeSet, Reseed, ResidualField, TraceRecord,
    WeightField,
};
use crate::neighborhood::NeighborhoodSystem;

/// The fixed data of one segmentation problem: observation, windows,
/// fuzzifier and per-channel fidelity strengths.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    image: &'a ImageTensor,
    nbhd: &'a NeighborhoodSystem,
    m: f64,
    betas: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(
        image: &'a ImageTensor,
        nbhd: &'a NeighborhoodSystem,
        m: f64,
        betas: Vec<f64>,
    ) -> Result<Self> {
        if nbhd.width() != image.width() || nbhd.height() != image.height() {
            return Err(Error::Shape(format!(
                "neighborhood is {}x{}, image is {}x{}",
                nbhd.width(),
                nbhd.height(),
                image.width(),
                image.height()
            )));
        }
        if betas.len() != image.channels() {
            return Err(Error::Shape(format!(
                "{} betas for {} channels",
                betas.len(),
                image.channels()
            )));
        }
        if betas.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::Config("betas must be >= 0".into()));
        }
        if !(m > 1.0) {
            return Err(Error::Config(format!("m must be > 1, got {m}")));
        }
        Ok(Self {
            image,
            nbhd,
            m,
            betas,
        })
    }

    pub fn image(&self) -> &ImageTensor {
        self.image
    }

    pub fn neighborhood(&self) -> &NeighborhoodSystem {
        self.nbhd
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    fn channels(&self) -> usize {
        self.image.channels()
    }

    fn pixels(&self) -> usize {
        self.image.len()
    }

    /// `x - r`, pixel-major.
    fn cleaned(&self, r: &ResidualField) -> Vec<f64> {
        self.image
            .data()
            .iter()
            .zip(r.data())
            .map(|(x, r)| x - r)
            .collect()
    }

    fn powered(&self, u: &PartitionMatrix) -> Vec<f64> {
        let m = self.m;
        if m == 2.0 {
            u.data().iter().map(|v| v * v).collect()
        } else {
            u.data().iter().map(|v| v.powf(m)).collect()
        }
    }

    /// `D_ij = sum_{n in N_j} s_nj ||x_n - r_n - v_i||^2`, cluster-major.
    fn window_distances(&self, v: &PrototypeSet, r: &ResidualField) -> Vec<f64> {
        let (k, ch, c) = (self.pixels(), self.channels(), v.clusters());
        let y = self.cleaned(r);
        let mut d = vec![0.0; c * k];
        for j in 0..k {
            for i in 0..c {
                let vi = v.get(i);
                d[i * k + j] = self
                    .nbhd
                    .window(j)
                    .map(|(n, s)| s * squared_distance(&y[n * ch..(n + 1) * ch], vi))
                    .sum();
            }
        }
        d
    }

    /// Objective summed per window center, memberships of the center.
    pub fn objective(
        &self,
        u: &PartitionMatrix,
        v: &PrototypeSet,
        r: &ResidualField,
        w: &WeightField,
    ) -> f64 {
        let (k, ch) = (self.pixels(), self.channels());
        let um = self.powered(u);
        let d = self.window_distances(v, r);
        let data: f64 = um.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut fidelity = 0.0;
        for (l, &beta) in self.betas.iter().enumerate() {
            let mut sum = 0.0;
            for j in 0..k {
                for (n, s) in self.nbhd.window(j) {
                    let wr = w.data()[n * ch + l] * r.data()[n * ch + l];
                    sum += s * wr * wr;
                }
            }
            fidelity += beta * sum;
        }
        data + fidelity
    }

    /// Same value as [`Problem::objective`], summed per pixel with the
    /// neighbors' memberships: `sum_i sum_j a_ij ||y_j - v_i||^2` with
    /// `a_ij = sum_{n in N_j} s_nj u_in^m`.
    pub fn objective_symmetric(
        &self,
        u: &PartitionMatrix,
        v: &PrototypeSet,
        r: &ResidualField,
        w: &WeightField,
    ) -> f64 {
        let (k, ch, c) = (self.pixels(), self.channels(), v.clusters());
        let um = self.powered(u);
        let y = self.cleaned(r);
        let mut total = 0.0;
        for j in 0..k {
            let yj = &y[j * ch..(j + 1) * ch];
            for i in 0..c {
                let a: f64 = self.nbhd.window(j).map(|(n, s)| s * um[i * k + n]).sum();
                total += a * squared_distance(yj, v.get(i));
            }
            let sj = self.nbhd.weight_sum(j);
            for (l, &beta) in self.betas.iter().enumerate() {
                let wr = w.get(j, l) * r.get(j, l);
                total += beta * sj * wr * wr;
            }
        }
        total
    }

    /// Exact minimizer of `J` over column-stochastic `U` for fixed `V`, `R`.
    pub fn update_membership(&self, v: &PrototypeSet, r: &ResidualField) -> PartitionMatrix {
        let (k, c) = (self.pixels(), v.clusters());
        let d = self.window_distances(v, r);
        let mut u = vec![0.0; c * k];
        let mut dist = vec![0.0; c];
        let mut col = vec![0.0; c];
        for j in 0..k {
            for i in 0..c {
                dist[i] = d[i * k + j];
            }
            memberships_from_distances(&dist, self.m, &mut col);
            for i in 0..c {
                u[i * k + j] = col[i];
            }
        }
        PartitionMatrix::from_raw(c, k, u)
    }

    /// Exact minimizer of `J` over `V` for fixed `U`, `R`. Clusters whose
    /// denominator vanishes are returned in the second slot, prototype
    /// zeroed, for the caller to reseed.
    pub fn update_prototypes(
        &self,
        u: &PartitionMatrix,
        r: &ResidualField,
    ) -> (PrototypeSet, Vec<usize>) {
        let (k, ch, c) = (self.pixels(), self.channels(), u.clusters());
        let y = self.cleaned(r);
        // per-pixel window sums of s_nj * y_n
        let mut local = vec![0.0; k * ch];
        for j in 0..k {
            let acc = &mut local[j * ch..(j + 1) * ch];
            for (n, s) in self.nbhd.window(j) {
                for (a, yn) in acc.iter_mut().zip(&y[n * ch..(n + 1) * ch]) {
                    *a += s * yn;
                }
            }
        }
        let um = self.powered(u);
        let mut data = vec![0.0; c * ch];
        let mut empty = Vec::new();
        for i in 0..c {
            let num = &mut data[i * ch..(i + 1) * ch];
            let mut den = 0.0;
            for j in 0..k {
                let weight = um[i * k + j];
                den += weight * self.nbhd.weight_sum(j);
                for (a, b) in num.iter_mut().zip(&local[j * ch..(j + 1) * ch]) {
                    *a += weight * b;
                }
            }
            if den > EMPTY_CLUSTER_MASS {
                num.iter_mut().for_each(|a| *a /= den);
            } else {
                num.fill(0.0);
                empty.push(i);
            }
        }
        let v = PrototypeSet::new(c, ch, data).expect("prototype shape");
        (v, empty)
    }

    /// Exact minimizer of `J` over `R` for fixed `U`, `V`, `W`; separable
    /// into one scalar quadratic per pixel and channel.
    pub fn update_residual(
        &self,
        u: &PartitionMatrix,
        v: &PrototypeSet,
        w: &WeightField,
    ) -> Result<ResidualField> {
        let (k, ch, c) = (self.pixels(), self.channels(), u.clusters());
        let um = self.powered(u);
        let mut r = ResidualField::filled(k, ch, 0.0);
        let mut a = vec![0.0; c];
        let out = r.data_mut();
        for j in 0..k {
            let mut a_total = 0.0;
            for (i, ai) in a.iter_mut().enumerate() {
                *ai = self.nbhd.window(j).map(|(n, s)| s * um[i * k + n]).sum();
                a_total += *ai;
            }
            let sj = self.nbhd.weight_sum(j);
            for l in 0..ch {
                let xjl = self.image.get(j, l);
                let num: f64 = a
                    .iter()
                    .enumerate()
                    .map(|(i, ai)| ai * (xjl - v.get(i)[l]))
                    .sum();
                let wjl = w.get(j, l);
                let den = a_total + self.betas[l] * wjl * wjl * sj;
                if !(den > 0.0) {
                    return Err(Error::DegenerateWindow { pixel: j });
                }
                out[j * ch + l] = num / den;
            }
        }
        Ok(r)
    }
}

/// `w_jl = exp(-xi r_jl^2)`.
pub fn update_weights(r: &ResidualField, xi: f64) -> WeightField {
    let data = r.data().iter().map(|v| (-xi * v * v).exp()).collect();
    WeightField::from_vec(r.pixels(), r.channels(), data).expect("weight shape")
}

/// Objective values around the three exact sub-updates of one iteration,
/// all evaluated with the weights that were fixed for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepObjectives {
    pub before: f64,
    pub after_membership: f64,
    pub after_prototypes: f64,
    pub after_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub iter: usize,
    pub theta: f64,
    /// Objective after the residual update, with the weights of this step.
    pub objective: f64,
    /// Only filled by [`WrfcmSolver::step_instrumented`].
    pub sub_objectives: Option<StepObjectives>,
}

/// Iteration state. [`wrfcm_fit`] drives it to convergence; tests can step
/// it directly.
#[derive(Debug, Clone)]
pub struct WrfcmSolver<'a> {
    problem: Problem<'a>,
    xi: f64,
    rng: ChaCha8Rng,
    iter: usize,
    u: PartitionMatrix,
    v: PrototypeSet,
    r: ResidualField,
    w: WeightField,
    reseeds: Vec<Reseed>,
}

impl<'a> WrfcmSolver<'a> {
    /// `W = 1`, `R = 0`, `U = 0`, prototypes sampled from distinct pixels.
    pub fn new(problem: Problem<'a>, clusters: usize, xi: f64, seed: u64) -> Result<Self> {
        let x = problem.image;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = sample_prototypes(
            |j| x.pixel(j).to_vec(),
            x.len(),
            clusters,
            x.channels(),
            &mut rng,
        )?;
        Ok(Self::with_prototypes(problem, v, xi, rng))
    }

    pub fn from_prototypes(problem: Problem<'a>, v: PrototypeSet, xi: f64, seed: u64) -> Self {
        Self::with_prototypes(problem, v, xi, ChaCha8Rng::seed_from_u64(seed))
    }

    fn with_prototypes(problem: Problem<'a>, v: PrototypeSet, xi: f64, rng: ChaCha8Rng) -> Self {
        let (k, ch) = (problem.pixels(), problem.channels());
        Self {
            u: PartitionMatrix::zeros(v.clusters(), k),
            r: ResidualField::filled(k, ch, 0.0),
            w: WeightField::filled(k, ch, 1.0),
            v,
            problem,
            xi,
            rng,
            iter: 0,
            reseeds: Vec::new(),
        }
    }

    pub fn problem(&self) -> &Problem<'a> {
        &self.problem
    }

    pub fn membership(&self) -> &PartitionMatrix {
        &self.u
    }

    pub fn prototypes(&self) -> &PrototypeSet {
        &self.v
    }

    pub fn residual(&self) -> &ResidualField {
        &self.r
    }

    pub fn weights(&self) -> &WeightField {
        &self.w
    }

    pub fn reseeds(&self) -> &[Reseed] {
        &self.reseeds
    }

    /// Replaces the residual, e.g. to pin it at zero.
    pub fn set_residual(&mut self, r: ResidualField) {
        self.r = r;
    }

    pub fn step(&mut self) -> Result<StepReport> {
        self.advance(false, true)
    }

    pub fn step_instrumented(&mut self) -> Result<StepReport> {
        self.advance(true, true)
    }

    /// One iteration that leaves `R` (and therefore `W`) unchanged.
    pub fn step_fixed_residual(&mut self) -> Result<StepReport> {
        self.advance(false, false)
    }

    fn advance(&mut self, instrumented: bool, update_residual: bool) -> Result<StepReport> {
        let p = &self.problem;
        let before =
            instrumented.then(|| p.objective_symmetric(&self.u, &self.v, &self.r, &self.w));

        let u = p.update_membership(&self.v, &self.r);
        let after_membership =
            instrumented.then(|| p.objective_symmetric(&u, &self.v, &self.r, &self.w));

        let (mut v, empty) = p.update_prototypes(&u, &self.r);
        for cluster in empty {
            let pixel = self.rng.random_range(0..p.pixels());
            v.get_mut(cluster).copy_from_slice(p.image.pixel(pixel));
            self.reseeds.push(Reseed {
                iter: self.iter,
                cluster,
                pixel,
            });
        }
        let after_prototypes =
            instrumented.then(|| p.objective_symmetric(&u, &v, &self.r, &self.w));

        let r = if update_residual {
            p.update_residual(&u, &v, &self.w)?
        } else {
            self.r.clone()
        };
        let objective = p.objective_symmetric(&u, &v, &r, &self.w);

        let theta = u.frobenius_distance(&self.u);
        if update_residual {
            self.w = update_weights(&r, self.xi);
        }
        self.u = u;
        self.v = v;
        self.r = r;
        let report = StepReport {
            iter: self.iter,
            theta,
            objective,
            sub_objectives: match (before, after_membership, after_prototypes) {
                (Some(before), Some(after_membership), Some(after_prototypes)) => {
                    Some(StepObjectives {
                        before,
                        after_membership,
                        after_prototypes,
                        after_residual: objective,
                    })
                }
                _ => None,
            },
        };
        self.iter += 1;
        Ok(report)
    }

    pub fn finish(self, trace: ConvergenceTrace) -> SolveOutput {
        let labels = self.u.defuzzify();
        let x = self.problem.image;
        let data = labels
            .iter()
            .flat_map(|&l| self.v.get(l).iter().copied())
            .collect();
        let segmented = ImageTensor::new(x.width(), x.height(), x.channels(), data)
            .expect("prototypes are finite");
        SolveOutput {
            betas: self.problem.betas.clone(),
            u: self.u,
            v: self.v,
            r: self.r,
            w: self.w,
            labels,
            segmented,
            trace,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub u: PartitionMatrix,
    pub v: PrototypeSet,
    pub r: ResidualField,
    pub w: WeightField,
    /// Argmax cluster per pixel, lowest index on ties.
    pub labels: Vec<usize>,
    /// Each pixel replaced by its cluster's prototype.
    pub segmented: ImageTensor,
    pub trace: ConvergenceTrace,
    pub betas: Vec<f64>,
}

/// Fits with `beta_l = phi * delta_l / 100` derived from the image.
pub fn wrfcm_fit(x: &ImageTensor, config: &SolverConfig) -> Result<SolveOutput> {
    config.validate()?;
    let betas = betas_from_phi(config.phi, &channel_stddev(x));
    wrfcm_fit_with_betas(x, config, betas)
}

pub fn wrfcm_fit_with_betas(
    x: &ImageTensor,
    config: &SolverConfig,
    betas: Vec<f64>,
) -> Result<SolveOutput> {
    config.validate()?;
    let nbhd = NeighborhoodSystem::build(x.width(), x.height(), config.radius);
    let problem = Problem::new(x, &nbhd, config.m, betas)?;
    let mut solver = WrfcmSolver::new(problem, config.clusters, config.xi, config.seed)?;
    let mut trace = ConvergenceTrace::default();
    for _ in 0..config.max_iter {
        let report = solver.step()?;
        trace.records.push(TraceRecord {
            iter: report.iter,
            theta: report.theta,
            objective: report.objective,
        });
        if report.theta < config.epsilon {
            trace.converged = true;
            break;
        }
    }
    trace.hit_max_iter = !trace.converged;
    trace.reseeds = solver.reseeds().to_vec();
    Ok(solver.finish(trace))
}
