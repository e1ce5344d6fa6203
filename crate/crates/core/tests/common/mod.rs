//! Independent reference computations for the closed-form updates. Nothing
//! here goes through `NeighborhoodSystem` or the solver's inner sums:
//! windows are rebuilt from pixel coordinates and every objective is summed
//! straight from its definition.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wrfcm::{ImageTensor, PartitionMatrix, PrototypeSet, ResidualField, WeightField};

pub struct Instance {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub clusters: usize,
    pub radius: usize,
    pub m: f64,
    pub betas: Vec<f64>,
    pub x: ImageTensor,
    pub u: PartitionMatrix,
    pub v: PrototypeSet,
    pub r: ResidualField,
    pub w: WeightField,
}

pub fn random_instance(rng: &mut ChaCha8Rng, clusters: usize, channels: usize) -> Instance {
    let (width, height) = loop {
        let w = rng.random_range(1..=9);
        let h = rng.random_range(1..=9);
        if w * h <= 9 && w * h >= clusters {
            break (w, h);
        }
    };
    let k = width * height;
    let x: Vec<f64> = (0..k * channels)
        .map(|_| rng.random_range(0.0..255.0))
        .collect();
    let mut u = vec![0.0; clusters * k];
    for j in 0..k {
        let raw: Vec<f64> = (0..clusters).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        for i in 0..clusters {
            u[i * k + j] = raw[i] / total;
        }
    }
    let v: Vec<f64> = (0..clusters * channels)
        .map(|_| rng.random_range(0.0..255.0))
        .collect();
    let r: Vec<f64> = (0..k * channels)
        .map(|_| rng.random_range(-40.0..40.0))
        .collect();
    let w: Vec<f64> = (0..k * channels)
        .map(|_| rng.random_range(0.01..=1.0))
        .collect();
    Instance {
        width,
        height,
        channels,
        clusters,
        radius: rng.random_range(0..=2),
        m: rng.random_range(1.5..3.0),
        betas: (0..channels).map(|_| rng.random_range(0.0..8.0)).collect(),
        x: ImageTensor::new(width, height, channels, x).unwrap(),
        u: PartitionMatrix::from_vec(clusters, k, u).unwrap(),
        v: PrototypeSet::new(clusters, channels, v).unwrap(),
        r: ResidualField::from_vec(k, channels, r).unwrap(),
        w: WeightField::from_vec(k, channels, w).unwrap(),
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(n, s_nj)` for every `n` within the box of radius `radius` around `j`.
pub fn brute_window(width: usize, height: usize, radius: usize, j: usize) -> Vec<(usize, f64)> {
    let (jx, jy) = ((j % width) as i64, (j / width) as i64);
    let mut out = Vec::new();
    for n in 0..width * height {
        let (nx, ny) = ((n % width) as i64, (n / width) as i64);
        let (dx, dy) = (nx - jx, ny - jy);
        if dx.unsigned_abs() as usize <= radius && dy.unsigned_abs() as usize <= radius {
            let d = ((dx * dx + dy * dy) as f64).sqrt();
            out.push((n, 1.0 / (1.0 + d)));
        }
    }
    out
}

/// The objective exactly as written: per window center, center memberships.
pub fn brute_objective(
    inst: &Instance,
    u: &PartitionMatrix,
    v: &PrototypeSet,
    r: &ResidualField,
    w: &WeightField,
) -> f64 {
    let k = inst.width * inst.height;
    let mut total = 0.0;
    for j in 0..k {
        let window = brute_window(inst.width, inst.height, inst.radius, j);
        for i in 0..inst.clusters {
            let mut inner = 0.0;
            for &(n, s) in &window {
                let mut dist = 0.0;
                for l in 0..inst.channels {
                    let e = inst.x.get(n, l) - r.get(n, l) - v.get(i)[l];
                    dist += e * e;
                }
                inner += s * dist;
            }
            total += u.get(i, j).powf(inst.m) * inner;
        }
        for l in 0..inst.channels {
            for &(n, s) in &window {
                let wr = w.get(n, l) * r.get(n, l);
                total += inst.betas[l] * s * wr * wr;
            }
        }
    }
    total
}

pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// Minimizer of `sum_i u_i^m d_i` over the probability simplex, by golden
/// section (c = 2) or nested golden section (c = 3).
pub fn simplex_search(d: &[f64], m: f64) -> Vec<f64> {
    let f2 = |a: f64, b: f64| a.powf(m) * d[0] + b.powf(m) * d[1];
    match d.len() {
        2 => {
            let u0 = golden_section(|a| f2(a, 1.0 - a), 0.0, 1.0, 120);
            vec![u0, 1.0 - u0]
        }
        3 => {
            let inner = |u0: f64| {
                let rest = 1.0 - u0;
                let u1 = golden_section(
                    |b| f2(u0, b) + (rest - b).max(0.0).powf(m) * d[2],
                    0.0,
                    rest,
                    120,
                );
                (u1, f2(u0, u1) + (rest - u1).max(0.0).powf(m) * d[2])
            };
            let u0 = golden_section(|a| inner(a).1, 0.0, 1.0, 120);
            let u1 = inner(u0).0;
            vec![u0, u1, 1.0 - u0 - u1]
        }
        _ => unimplemented!("simplex search is only needed for c <= 3"),
    }
}

/// `D_ij` from the definition.
pub fn brute_distances(inst: &Instance, v: &PrototypeSet, r: &ResidualField, j: usize) -> Vec<f64> {
    let window = brute_window(inst.width, inst.height, inst.radius, j);
    (0..inst.clusters)
        .map(|i| {
            window
                .iter()
                .map(|&(n, s)| {
                    s * (0..inst.channels)
                        .map(|l| (inst.x.get(n, l) - r.get(n, l) - v.get(i)[l]).powi(2))
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Double-double value `hi + lo`, enough to resolve the flat bottom of the
/// per-entry residual energy.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Dd(pub f64, pub f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    pub fn from(a: f64) -> Self {
        Dd(a, 0.0)
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let t = s.1 + self.1 + o.1;
        let hi = s.0 + t;
        Dd(hi, t - (hi - s.0))
    }

    pub fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        let hi = p + e;
        Dd(hi, e - (hi - p))
    }

    pub fn less_eq(self, o: Dd) -> bool {
        self.0 < o.0 || (self.0 == o.0 && self.1 <= o.1)
    }
}

/// Energy of one residual entry `r_jl` with everything else fixed, summed
/// per window center as in the objective, in double-double.
pub fn residual_energy(
    inst: &Instance,
    u: &PartitionMatrix,
    v: &PrototypeSet,
    j: usize,
    l: usize,
    r: f64,
) -> Dd {
    let k = inst.width * inst.height;
    let mut total = Dd::from(0.0);
    let rr = Dd::from(r);
    for center in 0..k {
        for (n, s) in brute_window(inst.width, inst.height, inst.radius, center) {
            if n != j {
                continue;
            }
            for i in 0..inst.clusters {
                let coef = Dd::from(s).mul(Dd::from(u.get(i, center).powf(inst.m)));
                let e = Dd::from(inst.x.get(j, l))
                    .add(Dd::from(v.get(i)[l]).neg())
                    .add(rr.neg());
                total = total.add(coef.mul(e.mul(e)));
            }
            let wr = Dd::from(inst.w.get(j, l)).mul(rr);
            total = total.add(Dd::from(inst.betas[l] * s).mul(wr.mul(wr)));
        }
    }
    total
}

pub fn golden_section_dd(f: impl Fn(f64) -> Dd, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa.less_eq(fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// Central difference of the brute objective in `v_il`.
pub fn prototype_gradient(inst: &Instance, v: &PrototypeSet, i: usize, l: usize, h: f64) -> f64 {
    let shifted = |delta: f64| {
        let mut data = v.data().to_vec();
        data[i * inst.channels + l] += delta;
        let vv = PrototypeSet::new(inst.clusters, inst.channels, data).unwrap();
        brute_objective(inst, &inst.u, &vv, &inst.r, &inst.w)
    };
    (shifted(h) - shifted(-h)) / (2.0 * h)
}
