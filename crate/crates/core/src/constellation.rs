//! QAM alphabets with per-axis Gray labelling, bit/symbol conversion and the
//! soft conversions between bit LLRs and per-symbol probability mass
//! functions used by the turbo receiver.
//!
//! LLR sign convention everywhere in this crate: `L = ln P(b=0) / P(b=1)`.
//! Point `i` of a constellation carries label `i`; the label bits are read
//! MSB first, so bit `q` of point `i` is `(i >> (Q - 1 - q)) & 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Clip applied to detector-to-decoder LLRs.
pub const DEFAULT_LLR_CLIP: f64 = 5.0;

/// A unit-energy complex alphabet with a Gray bit labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    /// Grid sizes along the in-phase and quadrature axes.
    grid: (usize, usize),
}

/// Per-antenna discrete prior over the constellation points.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPrior {
    pub probs: Vec<f64>,
}

/// Gray-coded pulse amplitude levels, descending so that label 0 sits at the
/// most positive amplitude. Returns `(amplitude, label)` pairs.
fn gray_pam(levels: usize) -> Vec<(f64, usize)> {
    (0..levels)
        .map(|i| {
            let amp = (levels - 1) as f64 - 2.0 * i as f64;
            (amp, i ^ (i >> 1))
        })
        .collect()
}

impl Constellation {
    /// Builds a square or rectangular Gray-labelled QAM alphabet
    /// (`M = 2` gives BPSK). Odd `log2(M)` uses an `M_I x M_Q` grid with
    /// `M_Q = 2 M_I`, e.g. 8x16 for 128-QAM.
    pub fn qam(order: usize) -> Result<Self> {
        let q = match order {
            2 => 1,
            4 => 2,
            16 => 4,
            64 => 6,
            128 => 7,
            256 => 8,
            _ => {
                return Err(Error::Config(format!(
                    "unsupported constellation order {order}; expected one of 2, 4, 16, 64, 128, 256"
                )))
            }
        };
        if order == 2 {
            return Ok(Self {
                points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
                bits_per_symbol: 1,
                grid: (2, 1),
            });
        }
        let bits_i = q / 2;
        let bits_q = q - bits_i;
        let (levels_i, levels_q) = (1usize << bits_i, 1usize << bits_q);
        let energy = ((levels_i * levels_i - 1) + (levels_q * levels_q - 1)) as f64 / 3.0;
        let scale = energy.sqrt().recip();
        let mut points = vec![Complex64::new(0.0, 0.0); order];
        for &(amp_i, lab_i) in &gray_pam(levels_i) {
            for &(amp_q, lab_q) in &gray_pam(levels_q) {
                let label = (lab_i << bits_q) | lab_q;
                points[label] = Complex64::new(amp_i * scale, amp_q * scale);
            }
        }
        Ok(Self {
            points,
            bits_per_symbol: q,
            grid: (levels_i, levels_q),
        })
    }

    /// Resolves harness names such as `"qpsk"`, `"16qam"` or `"128qam"`.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let order = match lower.as_str() {
            "bpsk" => 2,
            "qpsk" | "4qam" => 4,
            other => other
                .strip_suffix("qam")
                .and_then(|m| m.parse::<usize>().ok())
                .ok_or_else(|| Error::Config(format!("unknown constellation name '{name}'")))?,
        };
        Self::qam(order)
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    /// Bit `q` (0 = MSB) of the label of point `index`.
    #[inline]
    pub fn label_bit(&self, index: usize, q: usize) -> u8 {
        ((index >> (self.bits_per_symbol - 1 - q)) & 1) as u8
    }

    pub fn label_bits(&self, index: usize) -> Vec<u8> {
        (0..self.bits_per_symbol).map(|q| self.label_bit(index, q)).collect()
    }

    fn label_of(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    /// Maps consecutive groups of `Q` bits onto constellation points.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let q = self.bits_per_symbol;
        if !bits.len().is_multiple_of(q) {
            return Err(Error::Framing(format!(
                "{} bits is not a multiple of {q} bits per symbol",
                bits.len()
            )));
        }
        Ok(bits
            .chunks_exact(q)
            .map(|group| self.points[self.label_of(group)])
            .collect())
    }

    /// Index of the point closest to `z`.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p - z).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Hard demapping: nearest point, then its label bits.
    pub fn demap_hard(&self, symbols: &[Complex64]) -> Vec<u8> {
        symbols
            .iter()
            .flat_map(|&z| self.label_bits(self.nearest(z)))
            .collect()
    }

    /// Mean and variance of a discrete pmf over this alphabet.
    pub fn pmf_moments(&self, prior: &SymbolPrior) -> (Complex64, f64) {
        let mean: Complex64 = prior
            .probs
            .iter()
            .zip(&self.points)
            .map(|(&p, &s)| s * p)
            .sum();
        // sum p |s - mean|^2 equals sum p |s|^2 - |mean|^2 and stays non-negative
        let var = prior
            .probs
            .iter()
            .zip(&self.points)
            .map(|(&p, &s)| p * (s - mean).norm_sqr())
            .sum();
        (mean, var)
    }

    /// Symbol pmf implied by independent per-bit LLRs (`llrs.len() == Q`).
    pub fn llrs_to_prior(&self, llrs: &[f64]) -> SymbolPrior {
        debug_assert_eq!(llrs.len(), self.bits_per_symbol);
        // log P(b=0) = -ln(1 + e^{-L}), log P(b=1) = -ln(1 + e^{L})
        let log_p: Vec<[f64; 2]> = llrs
            .iter()
            .map(|&l| [-softplus(-l), -softplus(l)])
            .collect();
        let logw: Vec<f64> = (0..self.order())
            .map(|i| {
                log_p
                    .iter()
                    .enumerate()
                    .map(|(q, lp)| lp[self.label_bit(i, q) as usize])
                    .sum()
            })
            .collect();
        SymbolPrior::from_log_weights(&logw)
    }

    /// Extrinsic bit LLRs of a Gaussian message `N(mean, var)` on the symbol,
    /// computed with exact log-sum-exp and clipped to `[-clip, clip]`.
    pub fn extrinsic_llr(&self, mean: Complex64, var: f64, clip: f64) -> Result<Vec<f64>> {
        if !(var > 0.0) {
            return Err(Error::InvalidCavity(var));
        }
        let metric: Vec<f64> = self
            .points
            .iter()
            .map(|&s| -(s - mean).norm_sqr() / var)
            .collect();
        let q = self.bits_per_symbol;
        let mut out = Vec::with_capacity(q);
        let mut zeros = Vec::with_capacity(self.order() / 2);
        let mut ones = Vec::with_capacity(self.order() / 2);
        for bit in 0..q {
            zeros.clear();
            ones.clear();
            for (i, &m) in metric.iter().enumerate() {
                if self.label_bit(i, bit) == 0 {
                    zeros.push(m);
                } else {
                    ones.push(m);
                }
            }
            let l = log_sum_exp(&zeros) - log_sum_exp(&ones);
            out.push(l.clamp(-clip, clip));
        }
        Ok(out)
    }
}

impl SymbolPrior {
    pub fn uniform(order: usize) -> Self {
        Self {
            probs: vec![1.0 / order as f64; order],
        }
    }

    /// Point mass on point `index`.
    pub fn delta(order: usize, index: usize) -> Self {
        let mut probs = vec![0.0; order];
        probs[index] = 1.0;
        Self { probs }
    }

    /// Normalizes `exp(logw)` with max-subtraction.
    pub fn from_log_weights(logw: &[f64]) -> Self {
        let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = logw.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Self { probs }
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.probs[0];
        self.probs.iter().all(|&p| p == first)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln sum exp(v)`; `-inf` for an empty slice.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}
