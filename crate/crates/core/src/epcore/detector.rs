use num_complex::Complex64;

use super::{
    cavity, damp, moment_match, tilted_moments, CavitySet, DetectorParams, GaussianFactorSet,
    LinearModel, NegativeVariancePolicy,
};
use crate::constellation::{Constellation, SymbolPrior};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Smallest variance a factor or tilted moment may take. Keeps the posterior
/// precision finite when a prior or tilted pmf collapses onto one point.
pub const MIN_VARIANCE: f64 = 1e-10;

/// One moment-matching-and-damping sweep over all antennas.
///
/// Antennas with a degenerate cavity keep their factor. When the damped
/// variance is not positive the factor is either left unchanged or replaced
/// by the tilted moments, depending on `policy`.
#[allow(clippy::too_many_arguments)]
pub fn mmd_pass_with(
    model: &LinearModel,
    matched: &[Complex64],
    priors: &[SymbolPrior],
    factors: &GaussianFactorSet,
    constellation: &Constellation,
    epsilon: f64,
    beta: f64,
    policy: NegativeVariancePolicy,
) -> GaussianFactorSet {
    let marginals = model.marginals(matched, factors);
    let floor = epsilon.max(MIN_VARIANCE);
    let mut next = factors.clone();
    for k in 0..factors.len() {
        let old = factors.get(k);
        let Ok(cav) = cavity(marginals.get(k), old) else {
            continue;
        };
        let tilted = tilted_moments(cav, &priors[k], constellation, floor);
        match moment_match(tilted, cav).map(|new| damp(new, old, beta)) {
            Some(g) if g.is_proper() => next.set(k, g),
            _ => {
                if policy == NegativeVariancePolicy::UseTilted {
                    next.set(k, tilted);
                }
            }
        }
    }
    next
}

/// [`mmd_pass_with`] on a raw `(y, H, noise_var)` observation.
#[allow(clippy::too_many_arguments)]
pub fn mmd_pass(
    y: &[Complex64],
    h: &CMatrix,
    noise_var: f64,
    priors: &[SymbolPrior],
    factors: &GaussianFactorSet,
    constellation: &Constellation,
    epsilon: f64,
    beta: f64,
    policy: NegativeVariancePolicy,
) -> Result<GaussianFactorSet> {
    check_inputs(h, priors, constellation)?;
    factors.validate()?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Config(format!("beta must lie in [0, 1], got {beta}")));
    }
    let model = LinearModel::new(h, noise_var)?;
    let matched = model.matched(y)?;
    Ok(mmd_pass_with(&model, &matched, priors, factors, constellation, epsilon, beta, policy))
}

/// Detector output for one channel use: runs the variant's self-iterations
/// starting from the prior moments and returns the final cavities.
pub fn detect_block(
    params: &DetectorParams,
    model: &LinearModel,
    matched: &[Complex64],
    priors: &[SymbolPrior],
    constellation: &Constellation,
    turbo_iter: usize,
) -> CavitySet {
    let nt = model.nt();
    let mut means = Vec::with_capacity(nt);
    let mut variances = Vec::with_capacity(nt);
    for prior in priors {
        let (m, v) = constellation.pmf_moments(prior);
        means.push(m);
        variances.push(v.max(MIN_VARIANCE));
    }
    let mut factors = GaussianFactorSet { means, variances };

    let uniform;
    let tilted_priors: &[SymbolPrior] = if params.uniform_tilted_prior {
        uniform = vec![SymbolPrior::uniform(constellation.order()); nt];
        &uniform
    } else {
        priors
    };
    let beta = params.beta(turbo_iter);
    for l in 1..=params.self_iterations {
        factors = mmd_pass_with(
            model,
            matched,
            tilted_priors,
            &factors,
            constellation,
            params.epsilon(l),
            beta,
            params.negative_policy,
        );
    }

    let marginals = model.marginals(matched, &factors);
    let mut out = CavitySet {
        means: Vec::with_capacity(nt),
        variances: Vec::with_capacity(nt),
        valid: Vec::with_capacity(nt),
    };
    for k in 0..nt {
        let marginal = marginals.get(k);
        let (g, ok) = match cavity(marginal, factors.get(k)) {
            Ok(c) => (c, true),
            Err(_) => (marginal, false),
        };
        out.means.push(g.mean);
        out.variances.push(g.var);
        out.valid.push(ok);
    }
    out
}

/// Validated single-block detection on a raw `(y, H, noise_var)` observation.
pub fn detect(
    params: &DetectorParams,
    y: &[Complex64],
    h: &CMatrix,
    noise_var: f64,
    priors: &[SymbolPrior],
    constellation: &Constellation,
    turbo_iter: usize,
) -> Result<CavitySet> {
    check_inputs(h, priors, constellation)?;
    let model = LinearModel::new(h, noise_var)?;
    let matched = model.matched(y)?;
    Ok(detect_block(params, &model, &matched, priors, constellation, turbo_iter))
}

fn check_inputs(h: &CMatrix, priors: &[SymbolPrior], constellation: &Constellation) -> Result<()> {
    if priors.len() != h.cols() {
        return Err(Error::Dimension {
            what: "priors per antenna",
            expected: h.cols(),
            got: priors.len(),
        });
    }
    for p in priors {
        if p.probs.len() != constellation.order() {
            return Err(Error::Dimension {
                what: "prior pmf length",
                expected: constellation.order(),
                got: p.probs.len(),
            });
        }
        let total: f64 = p.probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 || p.probs.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Config(format!("prior pmf is not normalized (sum {total})")));
        }
    }
    Ok(())
}
