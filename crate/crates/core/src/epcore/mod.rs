//! Expectation-propagation soft MIMO detection.
//!
//! The discrete symbol priors are replaced by diagonal Gaussian factors
//! `t_k`. Each self-iteration computes the joint Gaussian posterior, divides
//! each factor out of its marginal to get the cavity, moment-matches the
//! cavity against the discrete prior and damps the refreshed factor. The
//! detector output is the cavity left after the last pass.

mod detector;
mod params;
mod posterior;
mod scalar;

pub use detector::{detect, detect_block, mmd_pass, mmd_pass_with, MIN_VARIANCE};
pub use params::{
    DampingSchedule, DetectorParams, FloorSchedule, NegativeVariancePolicy, ParamOverrides, Variant,
};
pub use posterior::{compute_posterior, LinearModel};
pub use scalar::{cavity, damp, moment_match, tilted_moments, Gaussian, CAVITY_GUARD};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Per-antenna Gaussian factors (also used for plain marginals).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFactorSet {
    pub means: Vec<Complex64>,
    pub variances: Vec<f64>,
}

impl GaussianFactorSet {
    pub fn new(means: Vec<Complex64>, variances: Vec<f64>) -> Self {
        assert_eq!(means.len(), variances.len());
        Self { means, variances }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn get(&self, k: usize) -> Gaussian {
        Gaussian::new(self.means[k], self.variances[k])
    }

    pub fn set(&mut self, k: usize, g: Gaussian) {
        self.means[k] = g.mean;
        self.variances[k] = g.var;
    }

    pub fn validate(&self) -> Result<()> {
        match self.variances.iter().find(|v| !(**v > 0.0)) {
            Some(&v) => Err(Error::Config(format!("factor variance must be positive, got {v}"))),
            None => Ok(()),
        }
    }
}

/// Joint Gaussian approximation `q(u) = CN(mean, covariance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGaussian {
    pub mean: Vec<Complex64>,
    pub covariance: CMatrix,
}

impl PosteriorGaussian {
    pub fn marginal(&self, k: usize) -> Gaussian {
        Gaussian::new(self.mean[k], self.covariance[(k, k)].re)
    }
}

/// Extrinsic (cavity) marginals handed to the demapper.
#[derive(Debug, Clone, PartialEq)]
pub struct CavitySet {
    pub means: Vec<Complex64>,
    pub variances: Vec<f64>,
    /// `false` where the cavity was degenerate and the posterior marginal
    /// was reported instead.
    pub valid: Vec<bool>,
}

impl CavitySet {
    pub fn get(&self, k: usize) -> Gaussian {
        Gaussian::new(self.means[k], self.variances[k])
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}
