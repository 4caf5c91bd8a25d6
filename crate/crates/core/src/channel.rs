//! Flat-fading MIMO channel: i.i.d. Rayleigh gains, AWGN, SNR bookkeeping
//! and the additive imperfect-CSI model.
//!
//! Complex Gaussian variances are `E|z|^2`, i.e. each of the real and
//! imaginary parts carries half of it.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Draws one circularly-symmetric complex Gaussian sample with `E|z|^2 = var`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// A channel matrix together with its true noise variance.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub noise_var: f64,
}

impl ChannelRealization {
    pub fn new(h: CMatrix, noise_var: f64) -> Result<Self> {
        if h.rows() < h.cols() {
            return Err(Error::Config(format!(
                "channel needs nr >= nt, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if !(noise_var > 0.0) {
            return Err(Error::Config(format!("noise variance must be positive, got {noise_var}")));
        }
        Ok(Self { h, noise_var })
    }

    pub fn nt(&self) -> usize {
        self.h.cols()
    }

    pub fn nr(&self) -> usize {
        self.h.rows()
    }
}

/// Additive channel-estimation error seen by the detector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CsiModel {
    /// Per-entry variance of the estimation error.
    pub sigma2: f64,
    /// Inflate the detector's noise variance by `nt * sigma2 * es`.
    pub compensate: bool,
}

impl CsiModel {
    pub fn perfect() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= 0.0) {
            return Err(Error::Config(format!("csi_sigma2 must be >= 0, got {}", self.sigma2)));
        }
        Ok(())
    }

    /// Noise variance handed to the detector.
    pub fn detector_noise_var(&self, noise_var: f64, nt: usize, es: f64) -> f64 {
        if self.compensate {
            nt as f64 * self.sigma2 * es + noise_var
        } else {
            noise_var
        }
    }
}

/// `nr x nt` matrix of i.i.d. unit-variance complex Gaussian gains.
pub fn sample_channel<R: Rng + ?Sized>(nt: usize, nr: usize, rng: &mut R) -> Result<CMatrix> {
    if nt == 0 || nr < nt {
        return Err(Error::Config(format!("need nr >= nt >= 1, got nt={nt}, nr={nr}")));
    }
    Ok(CMatrix::from_fn(nr, nt, |_, _| complex_gaussian(rng, 1.0)))
}

/// Noise variance for an `Nt Es/N0` operating point in dB.
pub fn snr_to_noise_var(snr_db: f64, nt: usize, es: f64) -> f64 {
    nt as f64 * es / 10f64.powf(snr_db / 10.0)
}

/// `y = H u + w` with `w ~ CN(0, noise_var I)`.
pub fn transmit<R: Rng + ?Sized>(
    h: &CMatrix,
    u: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if u.len() != h.cols() {
        return Err(Error::Dimension {
            what: "transmit symbol vector",
            expected: h.cols(),
            got: u.len(),
        });
    }
    let mut y = h.mul_vec(u);
    for yi in y.iter_mut() {
        *yi += complex_gaussian(rng, noise_var);
    }
    Ok(y)
}

/// `H + Delta` with `Delta` i.i.d. `CN(0, sigma2)`; returns `H` unchanged for
/// `sigma2 == 0` without consuming randomness.
pub fn perturb_csi<R: Rng + ?Sized>(h: &CMatrix, sigma2: f64, rng: &mut R) -> CMatrix {
    if sigma2 == 0.0 {
        return h.clone();
    }
    CMatrix::from_fn(h.rows(), h.cols(), |r, c| h[(r, c)] + complex_gaussian(rng, sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn channel_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        let mut drawn = 0;
        while drawn < n {
            let h = sample_channel(4, 5, &mut rng).unwrap();
            for z in h.as_slice() {
                sum += z;
                sq += z.norm_sqr();
            }
            drawn += 20;
        }
        let mean = sum / drawn as f64;
        let var = sq / drawn as f64 - mean.norm_sqr();
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((0.98..=1.02).contains(&var), "var {var}");
    }

    #[test]
    fn channel_is_reproducible() {
        let a = sample_channel(3, 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_channel(3, 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn channel_rejects_nr_below_nt() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_channel(4, 3, &mut rng), Err(Error::Config(_))));
        assert!(sample_channel(0, 3, &mut rng).is_err());
        assert!(ChannelRealization::new(CMatrix::zeros(2, 3), 1.0).is_err());
        assert!(ChannelRealization::new(CMatrix::zeros(3, 3), 0.0).is_err());
    }

    #[test]
    fn snr_conversion() {
        assert_abs_diff_eq!(snr_to_noise_var(0.0, 1, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(snr_to_noise_var(10.0, 1, 1.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(snr_to_noise_var(30.0, 6, 1.0), 6e-3, epsilon = 1e-15);
    }

    #[test]
    fn noiseless_identity_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = vec![Complex64::new(0.3, -0.2), Complex64::new(-1.0, 0.5)];
        let y = transmit(&CMatrix::identity(2), &u, 0.0, &mut rng).unwrap();
        assert_eq!(y, u);
        assert!(matches!(
            transmit(&CMatrix::identity(3), &u, 0.1, &mut rng),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn transmit_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = sample_channel(2, 4, &mut rng).unwrap();
        let u = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let clean = h.mul_vec(&u);
        let sigma2 = 0.37;
        let mut acc = 0.0;
        let mut count = 0;
        while count < 100_000 {
            let y = transmit(&h, &u, sigma2, &mut rng).unwrap();
            acc += y.iter().zip(&clean).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            count += y.len();
        }
        let est = acc / count as f64;
        assert!((est / sigma2 - 1.0).abs() < 0.02, "estimated {est}");
        let a = transmit(&h, &u, sigma2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = transmit(&h, &u, sigma2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csi_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = sample_channel(10, 10, &mut rng).unwrap();
        assert_eq!(perturb_csi(&h, 0.0, &mut rng), h);
        let mut acc = 0.0;
        let mut count = 0;
        while count < 100_000 {
            let hh = perturb_csi(&h, 1e-3, &mut rng);
            acc += hh
                .as_slice()
                .iter()
                .zip(h.as_slice())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
            count += 100;
        }
        let est = acc / count as f64;
        assert!((est / 1e-3 - 1.0).abs() < 0.05, "estimated {est}");
    }

    #[test]
    fn csi_compensation() {
        let on = CsiModel { sigma2: 1e-3, compensate: true };
        let off = CsiModel { sigma2: 1e-3, compensate: false };
        assert_abs_diff_eq!(on.detector_noise_var(0.01, 8, 1.0), 0.018, epsilon = 1e-15);
        assert_eq!(off.detector_noise_var(0.01, 8, 1.0), 0.01);
        assert!(CsiModel { sigma2: -1.0, compensate: false }.validate().is_err());
    }

    #[test]
    fn received_energy_per_antenna_approaches_nt() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let c = crate::constellation::Constellation::qam(16).unwrap();
        let (nt, nr) = (4, 6);
        let mut acc = 0.0;
        let draws = 20_000;
        for _ in 0..draws {
            let h = sample_channel(nt, nr, &mut rng).unwrap();
            let u: Vec<Complex64> = (0..nt).map(|_| c.points()[rng.random_range(0..16)]).collect();
            acc += h.mul_vec(&u).iter().map(|z| z.norm_sqr()).sum::<f64>() / nr as f64;
        }
        let e = acc / draws as f64;
        assert!((e / nt as f64 - 1.0).abs() < 0.03, "energy {e}");
    }
}
