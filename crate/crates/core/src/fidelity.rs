//! Per-channel fidelity penalties on a residual field. Only the weighted
//! squared penalty has a solver ([`crate::wrfcm`]); the others are for
//! evaluation.

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::model::{ResidualField, WeightField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityKind {
    /// `sum_j r_jl^2`, matched to Gaussian noise.
    L2,
    /// `sum_j |r_jl|`, matched to impulse noise.
    L1,
    /// Csiszar I-divergence `sum_j (x - r) - x log(x - r)`, matched to
    /// Poisson noise. Needs the observation.
    IDivergence,
    /// `sum_j (w_jl r_jl)^2`. Needs the weights.
    WeightedL2,
}

pub fn fidelity_eval(
    r: &ResidualField,
    kind: FidelityKind,
    x: Option<&ImageTensor>,
    w: Option<&WeightField>,
) -> Result<Vec<f64>> {
    let (k, channels) = (r.pixels(), r.channels());
    let per_channel = |f: &dyn Fn(usize, usize) -> Result<f64>| -> Result<Vec<f64>> {
        (0..channels)
            .map(|l| (0..k).map(|j| f(j, l)).sum::<Result<f64>>())
            .collect()
    };
    match kind {
        FidelityKind::L2 => per_channel(&|j, l| Ok(r.get(j, l).powi(2))),
        FidelityKind::L1 => per_channel(&|j, l| Ok(r.get(j, l).abs())),
        FidelityKind::WeightedL2 => {
            let w = w.ok_or_else(|| Error::Config("weighted l2 fidelity needs weights".into()))?;
            if w.pixels() != k || w.channels() != channels {
                return Err(Error::Shape("weights do not match residuals".into()));
            }
            per_channel(&|j, l| Ok((w.get(j, l) * r.get(j, l)).powi(2)))
        }
        FidelityKind::IDivergence => {
            let x = x.ok_or_else(|| {
                Error::Config("I-divergence fidelity needs the observed image".into())
            })?;
            if x.len() != k || x.channels() != channels {
                return Err(Error::Shape("image does not match residuals".into()));
            }
            per_channel(&|j, l| {
                let xv = x.get(j, l);
                let clean = xv - r.get(j, l);
                if clean <= 0.0 {
                    return Err(Error::Domain {
                        pixel: j,
                        channel: l,
                        value: clean,
                    });
                }
                Ok(clean - xv * clean.ln())
            })
        }
    }
}
