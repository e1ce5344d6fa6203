//! Classical fuzzy C-means, the baseline the residual-driven solver is
//! measured against. The membership rule and initialization here are also
//! reused by [`crate::wrfcm`].

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::model::{ConvergenceTrace, PartitionMatrix, PrototypeSet, Reseed, TraceRecord};

/// Below this, a cluster's membership mass is treated as empty.
pub(crate) const EMPTY_CLUSTER_MASS: f64 = 1e-300;

/// Writes the minimizer of `sum_i u_i^m d_i` over the simplex into `out`.
/// Zero distances take all the mass, split equally.
pub(crate) fn memberships_from_distances(dist: &[f64], m: f64, out: &mut [f64]) {
    let zeros = dist.iter().filter(|&&d| d <= 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        for (o, &d) in out.iter_mut().zip(dist) {
            *o = if d <= 0.0 { share } else { 0.0 };
        }
        return;
    }
    // Scale by the smallest distance so the largest term is exactly one.
    let dmin = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let exponent = 1.0 / (m - 1.0);
    let mut total = 0.0;
    for (o, &d) in out.iter_mut().zip(dist) {
        let ratio = dmin / d;
        *o = if exponent == 1.0 {
            ratio
        } else {
            ratio.powf(exponent)
        };
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `c` prototypes copied from pixels visited in a seeded random order,
/// skipping pixels whose intensities repeat an earlier pick. Repeats are
/// only used when the image has fewer than `c` distinct values.
pub(crate) fn sample_prototypes(
    pixels: impl Fn(usize) -> Vec<f64>,
    count: usize,
    clusters: usize,
    channels: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PrototypeSet> {
    if clusters > count {
        return Err(Error::Config(format!(
            "{clusters} clusters requested for {count} pixels"
        )));
    }
    let order = sample(rng, count, count);
    let mut picked: Vec<Vec<f64>> = Vec::with_capacity(clusters);
    let mut repeats = Vec::new();
    for j in order.iter() {
        let px = pixels(j);
        if picked.contains(&px) {
            if repeats.len() < clusters {
                repeats.push(px);
            }
        } else {
            picked.push(px);
            if picked.len() == clusters {
                break;
            }
        }
    }
    picked.extend(repeats.into_iter().take(clusters - picked.len()));
    PrototypeSet::new(clusters, channels, picked.concat())
}

/// `J(U, V) = sum_i sum_j u_ij^m ||x_j - v_i||^2`.
pub fn fcm_objective(x: &ImageTensor, u: &PartitionMatrix, v: &PrototypeSet, m: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..v.clusters() {
        let vi = v.get(i);
        for (j, &uij) in u.row(i).iter().enumerate() {
            total += uij.powf(m) * squared_distance(x.pixel(j), vi);
        }
    }
    total
}

pub fn fcm_membership(x: &ImageTensor, v: &PrototypeSet, m: f64) -> PartitionMatrix {
    let c = v.clusters();
    let k = x.len();
    let mut u = PartitionMatrix::zeros(c, k);
    let mut dist = vec![0.0; c];
    let mut col = vec![0.0; c];
    for j in 0..k {
        for (i, d) in dist.iter_mut().enumerate() {
            *d = squared_distance(x.pixel(j), v.get(i));
        }
        memberships_from_distances(&dist, m, &mut col);
        for (i, &uij) in col.iter().enumerate() {
            u.set(i, j, uij);
        }
    }
    u
}

/// Prototype update. Clusters with no membership mass keep a zero
/// prototype and are listed in the second return value for the caller to
/// reseed.
pub fn fcm_prototypes(x: &ImageTensor, u: &PartitionMatrix, m: f64) -> (PrototypeSet, Vec<usize>) {
    let c = u.clusters();
    let channels = x.channels();
    let mut data = vec![0.0; c * channels];
    let mut empty = Vec::new();
    for i in 0..c {
        let mut den = 0.0;
        let num = &mut data[i * channels..(i + 1) * channels];
        for (j, &uij) in u.row(i).iter().enumerate() {
            let w = uij.powf(m);
            den += w;
            for (acc, &xl) in num.iter_mut().zip(x.pixel(j)) {
                *acc += w * xl;
            }
        }
        if den > EMPTY_CLUSTER_MASS {
            num.iter_mut().for_each(|a| *a /= den);
        } else {
            num.fill(0.0);
            empty.push(i);
        }
    }
    let v = PrototypeSet::new(c, channels, data).expect("prototype shape");
    (v, empty)
}

#[derive(Debug, Clone)]
pub struct FcmOutput {
    pub u: PartitionMatrix,
    pub v: PrototypeSet,
    pub labels: Vec<usize>,
    pub trace: ConvergenceTrace,
}

pub fn fcm_fit(x: &ImageTensor, config: &SolverConfig) -> Result<FcmOutput> {
    config.validate()?;
    let c = config.clusters;
    let k = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut v = sample_prototypes(|j| x.pixel(j).to_vec(), k, c, x.channels(), &mut rng)?;
    let mut u = PartitionMatrix::zeros(c, k);
    let mut trace = ConvergenceTrace::default();
    for iter in 0..config.max_iter {
        let next_u = fcm_membership(x, &v, config.m);
        let (mut next_v, empty) = fcm_prototypes(x, &next_u, config.m);
        for cluster in empty {
            let pixel = rng.random_range(0..k);
            next_v.get_mut(cluster).copy_from_slice(x.pixel(pixel));
            trace.reseeds.push(Reseed {
                iter,
                cluster,
                pixel,
            });
        }
        let theta = next_u.frobenius_distance(&u);
        u = next_u;
        v = next_v;
        trace.records.push(TraceRecord {
            iter,
            theta,
            objective: fcm_objective(x, &u, &v, config.m),
        });
        if theta < config.epsilon {
            trace.converged = true;
            break;
        }
    }
    trace.hit_max_iter = !trace.converged;
    let labels = u.defuzzify();
    Ok(FcmOutput {
        u,
        v,
        labels,
        trace,
    })
}
