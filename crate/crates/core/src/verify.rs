//! Self-checks against closed forms and the exhaustive oracle, shared by the
//! `verify` subcommand and the test suites.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_gaussian, sample_channel, transmit};
use crate::constellation::{Constellation, SymbolPrior};
use crate::epcore::{
    cavity, compute_posterior, damp, detect, moment_match, tilted_moments, DetectorParams, Gaussian,
    GaussianFactorSet, Variant,
};
use crate::error::Result;
use crate::linalg::Cholesky;
use crate::oracle::map_marginals;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn random_gaussian(rng: &mut ChaCha8Rng, max_var: f64) -> Gaussian {
    Gaussian::new(complex_gaussian(rng, 2.0), rng.random_range(1e-3..max_var))
}

fn random_prior(rng: &mut ChaCha8Rng, c: &Constellation) -> SymbolPrior {
    let llrs: Vec<f64> = (0..c.bits_per_symbol()).map(|_| rng.random_range(-8.0..8.0)).collect();
    c.llrs_to_prior(&llrs)
}

const ALPHABETS: [usize; 5] = [2, 4, 16, 64, 128];

/// Scalar identities and posterior structure on `instances` random draws each.
pub fn identity_suite(instances: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabets: Vec<Constellation> = ALPHABETS.iter().map(|&m| Constellation::qam(m).unwrap()).collect();

    // cavity then product with the factor recovers the marginal
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let factor = random_gaussian(&mut rng, 5.0);
        let marginal = Gaussian::new(complex_gaussian(&mut rng, 2.0), factor.var * rng.random_range(0.01..0.99));
        let cav = cavity(marginal, factor).expect("marginal variance below the factor's");
        let back = cav.product(&factor);
        worst = worst.max(rel_err(back.mean, marginal.mean)).max((back.var - marginal.var).abs() / marginal.var);
    }
    let mut checks = vec![Check::new(
        "cavity round trip",
        worst <= 1e-10,
        format!("max relative error {worst:.2e} (tol 1e-10)"),
    )];

    // new factor times cavity has the tilted moments
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for i in 0..instances {
        let c = &alphabets[i % alphabets.len()];
        let cav = random_gaussian(&mut rng, 2.0);
        let prior = random_prior(&mut rng, c);
        let tilted = tilted_moments(cav, &prior, c, 1e-8);
        match moment_match(tilted, cav) {
            Some(new) => {
                let back = new.product(&cav);
                worst = worst.max(rel_err(back.mean, tilted.mean)).max((back.var - tilted.var).abs() / tilted.var);
            }
            None => skipped += 1,
        }
    }
    checks.push(Check::new(
        "moment matching identity",
        worst <= 1e-8,
        format!("max relative error {worst:.2e} (tol 1e-8), {skipped} singular draws"),
    ));

    let mut exact = true;
    for _ in 0..instances {
        let (a, b) = (random_gaussian(&mut rng, 3.0), random_gaussian(&mut rng, 3.0));
        exact &= damp(a, b, 1.0) == a && damp(a, b, 0.0) == b;
    }
    checks.push(Check::new(
        "damping endpoints",
        exact,
        format!("beta=1 returns the new factor and beta=0 the old one exactly on {instances} draws"),
    ));

    // posterior covariance is Hermitian and positive definite
    let mut worst_asym = 0.0f64;
    let mut all_pd = true;
    for i in 0..instances {
        let nt = 1 + i % 8;
        let nr = nt + i % 3;
        let h = sample_channel(nt, nr, &mut rng).unwrap();
        let y: Vec<Complex64> = (0..nr).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let factors = GaussianFactorSet::new(
            (0..nt).map(|_| complex_gaussian(&mut rng, 1.0)).collect(),
            (0..nt).map(|_| 10f64.powf(rng.random_range(-6.0..1.0))).collect(),
        );
        let noise_var = 10f64.powf(rng.random_range(-3.0..1.0));
        let post = compute_posterior(&h, noise_var, &y, &factors).unwrap();
        let s = &post.covariance;
        let scale = (0..nt).map(|k| s[(k, k)].re).fold(0.0, f64::max);
        worst_asym = worst_asym.max(s.max_abs_diff(&s.adjoint()) / scale);
        all_pd &= Cholesky::factor(s).is_some() && (0..nt).all(|k| s[(k, k)].re > 0.0);
    }
    checks.push(Check::new(
        "posterior covariance Hermitian positive definite",
        worst_asym <= 1e-12 && all_pd,
        format!("max relative asymmetry {worst_asym:.2e} (tol 1e-12), positive definite: {all_pd}"),
    ));

    // symbol priors and exact posterior pmfs sum to one
    let mut worst = 0.0f64;
    for i in 0..instances {
        let c = &alphabets[i % 3];
        let nt = 1 + i % 2;
        let priors: Vec<SymbolPrior> = (0..nt).map(|_| random_prior(&mut rng, c)).collect();
        let h = sample_channel(nt, nt, &mut rng).unwrap();
        let y: Vec<Complex64> = (0..nt).map(|_| complex_gaussian(&mut rng, 2.0)).collect();
        let exact = map_marginals(&y, &h, 0.2, &priors, c).unwrap();
        for p in priors.iter().map(|p| &p.probs).chain(&exact.pmfs) {
            worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
        }
    }
    checks.push(Check::new(
        "pmf normalization",
        worst <= 1e-12,
        format!("max |sum p - 1| {worst:.2e} (tol 1e-12)"),
    ));
    checks
}

/// Single-antenna nuBEP extrinsic LLRs against the exhaustive oracle.
pub fn single_antenna_oracle(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = DetectorParams::nubep();
    let mut worst = 0.0f64;
    for i in 0..instances {
        let c = Constellation::qam(ALPHABETS[i % ALPHABETS.len()]).unwrap();
        let nr = 1 + i % 3;
        let h = sample_channel(1, nr, &mut rng).unwrap();
        let noise_var = 10f64.powf(rng.random_range(-2.0..0.5));
        let u = [c.points()[rng.random_range(0..c.order())]];
        let y = transmit(&h, &u, noise_var, &mut rng).unwrap();
        let priors = [SymbolPrior::uniform(c.order())];
        let exact = map_marginals(&y, &h, noise_var, &priors, &c).unwrap();
        let cav = detect(&params, &y, &h, noise_var, &priors, &c, i % 6).unwrap();
        let g = cav.get(0);
        let llrs = c.extrinsic_llr(g.mean, g.var, f64::INFINITY).unwrap();
        for (a, b) in llrs.iter().zip(&exact.extrinsic_llrs[0]) {
            worst = worst.max((a - b).abs());
        }
    }
    Check::new(
        "single-antenna extrinsic LLRs equal the exact ones",
        worst <= 1e-6,
        format!("max |LLR difference| {worst:.2e} over {instances} instances (tol 1e-6)"),
    )
}

/// Symbol errors of exact MAP, nuBEP and LMMSE on the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerCounts {
    pub symbols: u64,
    pub map: u64,
    pub nubep: u64,
    pub lmmse: u64,
}

impl SerCounts {
    pub fn rate(&self, errors: u64) -> f64 {
        errors as f64 / self.symbols as f64
    }
}

/// Uncoded hard-decision symbol errors with uniform priors on `nt x nt`
/// Rayleigh channels. The nuBEP run uses the damping of turbo iteration `t`.
pub fn uncoded_ser(
    c: &Constellation,
    nt: usize,
    noise_var: f64,
    draws: usize,
    t: usize,
    seed: u64,
) -> Result<SerCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let priors = vec![SymbolPrior::uniform(c.order()); nt];
    let nubep = DetectorParams::nubep();
    let lmmse = DetectorParams::lmmse();
    let mut counts = SerCounts {
        symbols: 0,
        map: 0,
        nubep: 0,
        lmmse: 0,
    };
    for _ in 0..draws {
        let h = sample_channel(nt, nt, &mut rng)?;
        let idx: Vec<usize> = (0..nt).map(|_| rng.random_range(0..c.order())).collect();
        let u: Vec<Complex64> = idx.iter().map(|&i| c.points()[i]).collect();
        let y = transmit(&h, &u, noise_var, &mut rng)?;
        let map = map_marginals(&y, &h, noise_var, &priors, c)?.decisions();
        let ep = detect(&nubep, &y, &h, noise_var, &priors, c, t)?;
        let lin = detect(&lmmse, &y, &h, noise_var, &priors, c, t)?;
        for k in 0..nt {
            counts.symbols += 1;
            counts.map += u64::from(map[k] != idx[k]);
            counts.nubep += u64::from(c.nearest(ep.means[k]) != idx[k]);
            counts.lmmse += u64::from(c.nearest(lin.means[k]) != idx[k]);
        }
    }
    Ok(counts)
}

/// The paired SER comparison against MAP: nuBEP within `rel_tol` relative,
/// LMMSE no better than MAP beyond a two-sigma band.
pub fn ser_checks(counts: &SerCounts, rel_tol: f64) -> Vec<Check> {
    let map = counts.rate(counts.map);
    let ep = counts.rate(counts.nubep);
    let lin = counts.rate(counts.lmmse);
    let rel = (ep - map).abs() / map;
    // binomial standard deviation of the MAP estimate
    let sigma = (map * (1.0 - map) / counts.symbols as f64).sqrt();
    vec![
        Check::new(
            "nuBEP SER close to MAP",
            rel <= rel_tol,
            format!("nuBEP {ep:.4e} vs MAP {map:.4e}, relative gap {rel:.3} (tol {rel_tol})"),
        ),
        Check::new(
            "LMMSE SER not below MAP",
            lin >= map - 2.0 * sigma,
            format!("LMMSE {lin:.4e} vs MAP {map:.4e} - 2 sigma {:.4e}", map - 2.0 * sigma),
        ),
    ]
}

/// LMMSE against the EP detector with zero self-iterations, bit for bit.
pub fn lmmse_degeneracy(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zero_s = DetectorParams::nubep();
    zero_s.self_iterations = 0;
    let lmmse = DetectorParams::lmmse();
    let mut identical = 0;
    for i in 0..instances {
        let c = Constellation::qam(ALPHABETS[1 + i % 4]).unwrap();
        let nt = 1 + i % 8;
        let h = sample_channel(nt, nt + i % 2, &mut rng).unwrap();
        let u: Vec<Complex64> = (0..nt).map(|_| c.points()[rng.random_range(0..c.order())]).collect();
        let y = transmit(&h, &u, 10f64.powf(rng.random_range(-2.0..0.0)), &mut rng).unwrap();
        let priors: Vec<SymbolPrior> = (0..nt).map(|_| random_prior(&mut rng, &c)).collect();
        let t = i % 6;
        let a = detect(&lmmse, &y, &h, 0.3, &priors, &c, t).unwrap();
        let b = detect(&zero_s, &y, &h, 0.3, &priors, &c, t).unwrap();
        let same = a
            .means
            .iter()
            .zip(&b.means)
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
            && a.variances.iter().zip(&b.variances).all(|(x, y)| x.to_bits() == y.to_bits());
        identical += usize::from(same);
    }
    Check::new(
        "LMMSE equals zero self-iterations",
        identical == instances,
        format!("{identical}/{instances} instances bitwise identical"),
    )
}

/// Damping and floor schedules against their defining formulas.
pub fn schedule_checks() -> Vec<Check> {
    let nubep = DetectorParams::for_variant(Variant::Nubep);
    let betas: Vec<f64> = (0..=5).map(|t| nubep.beta(t)).collect();
    let beta_ok = betas
        .iter()
        .enumerate()
        .all(|(t, &b)| b == ((t as f64 / 1.5).exp() / 10.0).min(0.7));
    let epd = DetectorParams::for_variant(Variant::Epd);
    let eps: Vec<f64> = (1..=10).map(|l| epd.epsilon(l)).collect();
    let eps_ok = eps
        .iter()
        .enumerate()
        .all(|(i, &e)| e == 2f64.powi(-((i as i32 + 1 - 4).max(1))));
    vec![
        Check::new("nuBEP damping schedule", beta_ok, format!("beta_t for t=0..5: {betas:?}")),
        Check::new("EPD floor schedule", eps_ok, format!("epsilon_l for l=1..10: {eps:?}")),
    ]
}

/// Sizes for [`run_all`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub instances: usize,
    pub ser_draws: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            instances: 1000,
            ser_draws: 20_000,
            seed: 1,
        }
    }
}

/// Uncoded 2x2 QPSK operating point of the SER comparison.
pub const SER_NOISE_VAR: f64 = 0.1;
/// Turbo iteration whose damping the uncoded nuBEP run uses; uniform priors
/// only occur in the first one.
pub const SER_TURBO_ITER: usize = 0;

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = identity_suite(opts.instances, opts.seed);
    checks.push(single_antenna_oracle(opts.instances, opts.seed + 1));
    let qpsk = Constellation::qam(4)?;
    let counts = uncoded_ser(&qpsk, 2, SER_NOISE_VAR, opts.ser_draws, SER_TURBO_ITER, opts.seed + 2)?;
    checks.extend(ser_checks(&counts, 0.1));
    checks.push(lmmse_degeneracy(opts.instances.min(100), opts.seed + 3));
    checks.extend(schedule_checks());
    Ok(checks)
}
