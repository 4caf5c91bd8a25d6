//! Flooding sum-product decoder with the exact tanh rule.

use super::LdpcCode;

/// Largest `|prod tanh(L/2)|` fed to `atanh`; caps check messages near 35.
const MAX_TANH: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub info_bits: Vec<u8>,
    /// Hard decision on every coded bit.
    pub codeword: Vec<u8>,
    /// `posterior - channel`, i.e. the sum of incoming check messages.
    pub extrinsic_llrs: Vec<f64>,
    /// `channel + extrinsic`, evaluated exactly as that sum.
    pub posterior_llrs: Vec<f64>,
    pub iterations_used: usize,
    pub parity_ok: bool,
}

/// `tanh(l / 2)` through a single exponential.
#[inline]
fn half_tanh(l: f64) -> f64 {
    let e = (-l.abs()).exp();
    ((1.0 - e) / (1.0 + e)).copysign(l)
}

impl LdpcCode {
    /// Decodes channel LLRs (`ln P(0)/P(1)`), stopping as soon as all parity
    /// checks hold or after `max_iter` iterations.
    pub fn decode(&self, channel_llrs: &[f64], max_iter: usize) -> DecodeResult {
        let n = self.n;
        assert_eq!(channel_llrs.len(), n, "channel LLR length must equal n");
        let edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| channel_llrs[v]).collect();
        let mut c2v = vec![0.0f64; edges];
        let mut extrinsic = vec![0.0f64; n];
        let mut posterior = channel_llrs.to_vec();
        let mut hard: Vec<u8> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut parity_ok = false;
        let mut iterations = 0;
        let mut tanh_buf: Vec<f64> = Vec::with_capacity(16);
        let mut suffix: Vec<f64> = Vec::with_capacity(16);

        for it in 1..=max_iter {
            iterations = it;
            // check nodes
            for c in 0..self.m {
                let range = self.check_ptr[c]..self.check_ptr[c + 1];
                tanh_buf.clear();
                tanh_buf.extend(v2c[range.clone()].iter().map(|&l| half_tanh(l)));
                let d = tanh_buf.len();
                suffix.clear();
                suffix.resize(d + 1, 1.0);
                for i in (0..d).rev() {
                    suffix[i] = suffix[i + 1] * tanh_buf[i];
                }
                let mut prefix = 1.0;
                for (i, e) in range.enumerate() {
                    let p = (prefix * suffix[i + 1]).clamp(-MAX_TANH, MAX_TANH);
                    c2v[e] = ((1.0 + p) / (1.0 - p)).ln();
                    prefix *= tanh_buf[i];
                }
            }
            // variable nodes
            for v in 0..n {
                let es = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let ext: f64 = es.iter().map(|&e| c2v[e]).sum();
                extrinsic[v] = ext;
                let total = channel_llrs[v] + ext;
                posterior[v] = total;
                hard[v] = u8::from(total < 0.0);
                for &e in es {
                    v2c[e] = total - c2v[e];
                }
            }
            if self.syndrome_ok(&hard) {
                parity_ok = true;
                break;
            }
        }
        if max_iter == 0 {
            parity_ok = self.syndrome_ok(&hard);
        }
        DecodeResult {
            info_bits: self.extract_info(&hard),
            codeword: hard,
            extrinsic_llrs: extrinsic,
            posterior_llrs: posterior,
            iterations_used: iterations,
            parity_ok,
        }
    }
}
