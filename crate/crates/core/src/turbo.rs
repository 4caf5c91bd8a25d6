//! Outer turbo loop: soft detection of every channel use of a codeword,
//! LDPC decoding, and decoder feedback turned into symbol priors.
//!
//! Codeword bit `n` (0-based) travels in block `p`, antenna `k`, label bit
//! `q` with `n = p * Nt * Q + k * Q + q`; no interleaver.

use num_complex::Complex64;

use crate::constellation::{Constellation, SymbolPrior, DEFAULT_LLR_CLIP};
use crate::epcore::{detect_block, CavitySet, DetectorParams, LinearModel};
use crate::error::{Error, Result};
use crate::ldpc::{LdpcCode, DEFAULT_MAX_ITER};
use crate::linalg::CMatrix;

/// Default number of turbo iterations after the initial detection.
pub const DEFAULT_TURBO_ITERS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct TurboConfig {
    /// Feedback iterations; the loop runs detection `turbo_iters + 1` times.
    pub turbo_iters: usize,
    pub detector: DetectorParams,
    pub llr_clip: f64,
    pub early_exit: bool,
    pub decoder_max_iter: usize,
}

impl TurboConfig {
    pub fn new(detector: DetectorParams) -> Self {
        Self {
            turbo_iters: DEFAULT_TURBO_ITERS,
            detector,
            llr_clip: DEFAULT_LLR_CLIP,
            early_exit: true,
            decoder_max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Mapping between codeword bits and `(block, antenna, bit)` positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub nt: usize,
    pub bits_per_symbol: usize,
    pub blocks: usize,
}

impl FrameLayout {
    /// Rejects codeword lengths that do not fill an integer number of blocks.
    pub fn new(codeword_len: usize, nt: usize, bits_per_symbol: usize) -> Result<Self> {
        let per_block = nt * bits_per_symbol;
        if per_block == 0 || !codeword_len.is_multiple_of(per_block) {
            return Err(Error::Framing(format!(
                "codeword length {codeword_len} is not a multiple of nt * Q = {nt} * {bits_per_symbol}"
            )));
        }
        Ok(Self {
            nt,
            bits_per_symbol,
            blocks: codeword_len / per_block,
        })
    }

    pub fn bits_per_block(&self) -> usize {
        self.nt * self.bits_per_symbol
    }

    pub fn codeword_len(&self) -> usize {
        self.blocks * self.bits_per_block()
    }

    #[inline]
    pub fn bit_index(&self, block: usize, antenna: usize, bit: usize) -> usize {
        block * self.bits_per_block() + antenna * self.bits_per_symbol + bit
    }

    /// Inverse of [`FrameLayout::bit_index`].
    pub fn position(&self, n: usize) -> (usize, usize, usize) {
        let block = n / self.bits_per_block();
        let rem = n % self.bits_per_block();
        (block, rem / self.bits_per_symbol, rem % self.bits_per_symbol)
    }

    /// Splits a codeword into per-block symbol vectors.
    pub fn map_codeword(&self, codeword: &[u8], c: &Constellation) -> Result<Vec<Vec<Complex64>>> {
        if codeword.len() != self.codeword_len() {
            return Err(Error::Framing(format!(
                "codeword has {} bits, layout expects {}",
                codeword.len(),
                self.codeword_len()
            )));
        }
        codeword
            .chunks_exact(self.bits_per_block())
            .map(|chunk| c.modulate(chunk))
            .collect()
    }

    /// Symbol priors of one block from decoder LLRs over the whole codeword.
    pub fn block_priors(&self, llrs: &[f64], block: usize, c: &Constellation) -> Vec<SymbolPrior> {
        (0..self.nt)
            .map(|k| {
                let start = self.bit_index(block, k, 0);
                c.llrs_to_prior(&llrs[start..start + self.bits_per_symbol])
            })
            .collect()
    }

    /// Demaps one block of detector cavities into `out` (codeword-length).
    pub fn write_block_llrs(
        &self,
        cavities: &CavitySet,
        block: usize,
        c: &Constellation,
        clip: f64,
        out: &mut [f64],
    ) -> Result<()> {
        for k in 0..self.nt {
            let g = cavities.get(k);
            let llrs = c.extrinsic_llr(g.mean, g.var, clip)?;
            let start = self.bit_index(block, k, 0);
            out[start..start + self.bits_per_symbol].copy_from_slice(&llrs);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboOutput {
    /// Information bits after the last decoder run.
    pub info_bits: Vec<u8>,
    /// Information-bit decisions after each decoder run, `t = 0, 1, ...`.
    pub iteration_info_bits: Vec<Vec<u8>>,
    pub decoder_iterations: Vec<usize>,
    /// Set when the loop stopped before `turbo_iters` because parity held.
    pub early_exit: bool,
    pub parity_ok: bool,
}

impl TurboOutput {
    /// Information-bit errors per turbo iteration, `turbo_iters + 1` entries;
    /// after an early exit the last count is carried forward.
    pub fn bit_errors_per_iteration(&self, truth: &[u8], turbo_iters: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .iteration_info_bits
            .iter()
            .map(|bits| bits.iter().zip(truth).filter(|(a, b)| a != b).count())
            .collect();
        let last = *out.last().unwrap_or(&truth.len());
        out.resize(turbo_iters + 1, last);
        out
    }
}

/// Runs the turbo receiver on the `P` channel uses of one codeword, all
/// sharing channel `h` (the one the detector believes in) and `noise_var`.
pub fn turbo_receive(
    y_blocks: &[Vec<Complex64>],
    h: &CMatrix,
    noise_var: f64,
    code: &LdpcCode,
    c: &Constellation,
    cfg: &TurboConfig,
) -> Result<TurboOutput> {
    let layout = FrameLayout::new(code.n(), h.cols(), c.bits_per_symbol())?;
    if y_blocks.len() != layout.blocks {
        return Err(Error::Framing(format!(
            "got {} received blocks, codeword needs {}",
            y_blocks.len(),
            layout.blocks
        )));
    }
    let model = LinearModel::new(h, noise_var)?;
    let matched: Vec<Vec<Complex64>> = y_blocks
        .iter()
        .map(|y| model.matched(y))
        .collect::<Result<_>>()?;

    let uniform = vec![SymbolPrior::uniform(c.order()); layout.nt];
    let mut priors: Vec<Vec<SymbolPrior>> = vec![uniform; layout.blocks];
    let mut detector_llrs = vec![0.0; code.n()];
    let mut out = TurboOutput {
        info_bits: Vec::new(),
        iteration_info_bits: Vec::with_capacity(cfg.turbo_iters + 1),
        decoder_iterations: Vec::with_capacity(cfg.turbo_iters + 1),
        early_exit: false,
        parity_ok: false,
    };
    for t in 0..=cfg.turbo_iters {
        for (p, (m, pr)) in matched.iter().zip(&priors).enumerate() {
            let cav = detect_block(&cfg.detector, &model, m, pr, c, t);
            layout.write_block_llrs(&cav, p, c, cfg.llr_clip, &mut detector_llrs)?;
        }
        let dec = code.decode(&detector_llrs, cfg.decoder_max_iter);
        out.iteration_info_bits.push(dec.info_bits.clone());
        out.decoder_iterations.push(dec.iterations_used);
        out.info_bits = dec.info_bits;
        out.parity_ok = dec.parity_ok;
        if dec.parity_ok && cfg.early_exit {
            out.early_exit = t < cfg.turbo_iters;
            break;
        }
        if t < cfg.turbo_iters {
            for (p, pr) in priors.iter_mut().enumerate() {
                *pr = layout.block_priors(&dec.extrinsic_llrs, p, c);
            }
        }
    }
    Ok(out)
}
