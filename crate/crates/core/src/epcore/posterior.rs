//! Joint Gaussian posterior of the transmitted block under diagonal
//! Gaussian factors.

use num_complex::Complex64;

use super::{GaussianFactorSet, PosteriorGaussian};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};

/// `H^H H / noise_var` for one channel, shared by every block and pass that
/// uses it.
#[derive(Debug, Clone)]
pub struct LinearModel {
    h: CMatrix,
    noise_var: f64,
    gram: CMatrix,
}

impl LinearModel {
    pub fn new(h: &CMatrix, noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0) {
            return Err(Error::Config(format!("noise variance must be positive, got {noise_var}")));
        }
        let mut gram = h.gram();
        let inv = 1.0 / noise_var;
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                gram[(i, j)] *= inv;
            }
        }
        Ok(Self {
            h: h.clone(),
            noise_var,
            gram,
        })
    }

    pub fn nt(&self) -> usize {
        self.h.cols()
    }

    pub fn nr(&self) -> usize {
        self.h.rows()
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn channel(&self) -> &CMatrix {
        &self.h
    }

    /// `H^H y / noise_var`.
    pub fn matched(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.nr() {
            return Err(Error::Dimension {
                what: "received vector",
                expected: self.nr(),
                got: y.len(),
            });
        }
        let inv = 1.0 / self.noise_var;
        Ok(self.h.adjoint_mul_vec(y).into_iter().map(|z| z * inv).collect())
    }

    /// Factors the posterior precision `H^H H / s2 + diag(1/var_t)` and
    /// returns it with the right-hand side `H^H y / s2 + mean_t / var_t`.
    fn factor(&self, matched: &[Complex64], factors: &GaussianFactorSet) -> (Cholesky, Vec<Complex64>) {
        let nt = self.nt();
        assert_eq!(factors.len(), nt, "one factor per transmit antenna");
        let mut precision = self.gram.clone();
        let mut rhs = Vec::with_capacity(nt);
        for k in 0..nt {
            let inv = 1.0 / factors.variances[k];
            precision[(k, k)].re += inv;
            rhs.push(matched[k] + factors.means[k] * inv);
        }
        let chol = Cholesky::factor(&precision)
            .expect("posterior precision is positive definite for positive factor variances");
        (chol, rhs)
    }

    /// Posterior means and marginal variances, from one factorization.
    pub fn marginals(&self, matched: &[Complex64], factors: &GaussianFactorSet) -> GaussianFactorSet {
        let (chol, rhs) = self.factor(matched, factors);
        GaussianFactorSet {
            means: chol.solve(&rhs),
            variances: chol.inverse_diagonal(),
        }
    }

    /// Full posterior mean and covariance.
    pub fn posterior(&self, matched: &[Complex64], factors: &GaussianFactorSet) -> PosteriorGaussian {
        let (chol, rhs) = self.factor(matched, factors);
        PosteriorGaussian {
            mean: chol.solve(&rhs),
            covariance: chol.inverse(),
        }
    }
}

/// Joint posterior `q(u)` for one received vector.
pub fn compute_posterior(
    h: &CMatrix,
    noise_var: f64,
    y: &[Complex64],
    factors: &GaussianFactorSet,
) -> Result<PosteriorGaussian> {
    factors.validate()?;
    if factors.len() != h.cols() {
        return Err(Error::Dimension {
            what: "factor set",
            expected: h.cols(),
            got: factors.len(),
        });
    }
    let model = LinearModel::new(h, noise_var)?;
    let matched = model.matched(y)?;
    Ok(model.posterior(&matched, factors))
}
