//! Exhaustive MAP inference for small instances, the ground truth the
//! approximate detectors are checked against.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{log_sum_exp, Constellation, SymbolPrior};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Largest number of hypotheses `M^Nt` the enumeration accepts.
pub const MAX_HYPOTHESES: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactMarginals {
    /// Posterior pmf of each antenna over the alphabet.
    pub pmfs: Vec<Vec<f64>>,
    /// Per antenna, `Q` extrinsic bit LLRs: posterior bit LLR minus the
    /// bit's own prior LLR.
    pub extrinsic_llrs: Vec<Vec<f64>>,
}

impl ExactMarginals {
    /// Symbol-wise MAP decision per antenna.
    pub fn decisions(&self) -> Vec<usize> {
        self.pmfs
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
                    .0
            })
            .collect()
    }
}

/// Prior bit LLR `ln P(b_q = 0) / P(b_q = 1)` implied by a symbol pmf.
fn prior_bit_llr(prior: &SymbolPrior, c: &Constellation, q: usize) -> f64 {
    let (mut p0, mut p1) = (0.0, 0.0);
    for (i, &p) in prior.probs.iter().enumerate() {
        if c.label_bit(i, q) == 0 {
            p0 += p;
        } else {
            p1 += p;
        }
    }
    p0.ln() - p1.ln()
}

/// Enumerates every `u` in the alphabet product, weights it by
/// `N(y; Hu, noise_var I) * prod_k prior_k(u_k)` in the log domain and
/// marginalizes per antenna and per bit.
pub fn map_marginals(
    y: &[Complex64],
    h: &CMatrix,
    noise_var: f64,
    priors: &[SymbolPrior],
    c: &Constellation,
) -> Result<ExactMarginals> {
    map_marginals_shifted(y, h, noise_var, priors, c, 0.0)
}

/// As [`map_marginals`] with `shift` added to every log weight; the result
/// must not depend on it.
pub fn map_marginals_shifted(
    y: &[Complex64],
    h: &CMatrix,
    noise_var: f64,
    priors: &[SymbolPrior],
    c: &Constellation,
    shift: f64,
) -> Result<ExactMarginals> {
    let nt = h.cols();
    let m = c.order();
    let hypotheses = (m as f64).powi(nt as i32);
    if hypotheses > MAX_HYPOTHESES {
        return Err(Error::InstanceTooLarge(hypotheses));
    }
    if priors.len() != nt {
        return Err(Error::Dimension {
            what: "priors per antenna",
            expected: nt,
            got: priors.len(),
        });
    }
    if y.len() != h.rows() {
        return Err(Error::Dimension {
            what: "received vector",
            expected: h.rows(),
            got: y.len(),
        });
    }
    let total = m.pow(nt as u32);
    let log_priors: Vec<Vec<f64>> = priors
        .iter()
        .map(|p| p.probs.iter().map(|x| x.ln()).collect())
        .collect();
    let mut idx = vec![0usize; nt];
    let mut u = vec![Complex64::new(0.0, 0.0); nt];
    let mut logw = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for n in 0..total {
        let mut r = n;
        for k in (0..nt).rev() {
            idx[k] = r % m;
            r /= m;
            u[k] = c.points()[idx[k]];
        }
        let hu = h.mul_vec(&u);
        let dist: f64 = hu.iter().zip(y).map(|(a, b)| (b - a).norm_sqr()).sum();
        let lp: f64 = idx.iter().enumerate().map(|(k, &i)| log_priors[k][i]).sum();
        logw.push(-dist / noise_var + lp + shift);
        labels.push(idx.clone());
    }
    let norm = log_sum_exp(&logw);

    let mut pmfs = vec![vec![0.0; m]; nt];
    for (w, lab) in logw.iter().zip(&labels) {
        let p = (w - norm).exp();
        for k in 0..nt {
            pmfs[k][lab[k]] += p;
        }
    }

    let q = c.bits_per_symbol();
    let mut extrinsic = vec![vec![0.0; q]; nt];
    for k in 0..nt {
        for (bit, out) in extrinsic[k].iter_mut().enumerate() {
            let (mut zeros, mut ones) = (Vec::new(), Vec::new());
            for (w, lab) in logw.iter().zip(&labels) {
                if c.label_bit(lab[k], bit) == 0 {
                    zeros.push(*w);
                } else {
                    ones.push(*w);
                }
            }
            let posterior = log_sum_exp(&zeros) - log_sum_exp(&ones);
            *out = posterior - prior_bit_llr(&priors[k], c, bit);
        }
    }
    Ok(ExactMarginals {
        pmfs,
        extrinsic_llrs: extrinsic,
    })
}
