#![allow(clippy::needless_range_loop)]

use approx::assert_relative_eq;
use ep_mimo::ldpc::{LdpcCode, DEFAULT_MAX_ITER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Counts 4-cycles by brute force: two rows sharing two or more columns.
fn four_cycles(code: &LdpcCode) -> usize {
    let m = code.m();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); code.n()];
    for (r, row) in code.checks().iter().enumerate() {
        for &v in row {
            col_rows[v].push(r);
        }
    }
    let mut cycles = 0;
    for r in 0..m {
        let mut shared = vec![0usize; m];
        for &v in &code.checks()[r] {
            for &r2 in &col_rows[v] {
                if r2 > r {
                    shared[r2] += 1;
                }
            }
        }
        cycles += shared.iter().map(|&s| s * s.saturating_sub(1) / 2).sum::<usize>();
    }
    cycles
}

fn bpsk_llrs(cw: &[u8], sigma2: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    cw.iter()
        .map(|&b| {
            let x = if b == 0 { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            let y = x + noise * sigma2.sqrt();
            2.0 * y / sigma2
        })
        .collect()
}

#[test]
fn full_size_code_structure() {
    let code = LdpcCode::build(4096, 0.5, 3, 6, 2024).unwrap();
    assert_eq!(code.m(), 2048);
    assert_eq!(code.k(), 2048);
    assert!(code.column_weights().iter().all(|&w| w == 3));
    let repaired = code.checks().iter().filter(|r| r.len() != 6).count();
    assert_eq!(repaired, code.report().degree_repairs);
    assert!(repaired * 100 <= code.m(), "{repaired} rows repaired");
    println!("n=4096 report: {:?}", code.report());
}

#[test]
fn desk_scale_code_has_no_four_cycles() {
    for n in [1008, 1024] {
        let code = LdpcCode::build(n, 0.5, 3, 6, 7).unwrap();
        assert_eq!(four_cycles(&code), 0, "n={n}");
        assert_eq!(code.report().forced_short_cycles, 0);
        assert!(code.report().degree_repairs * 100 <= code.m());
        println!("n={n} report: {:?}", code.report());
    }
}

#[test]
fn single_flipped_bit_is_corrected() {
    let code = LdpcCode::build(96, 0.5, 3, 6, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
    let cw = code.encode(&info).unwrap();
    let mut llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
    llrs[17] = -llrs[17];
    let out = code.decode(&llrs, DEFAULT_MAX_ITER);
    assert!(out.parity_ok);
    assert_eq!(out.codeword, cw);
    assert_eq!(out.info_bits, info);
}

#[test]
fn noiseless_llrs_decode_in_one_iteration() {
    let code = LdpcCode::build(1008, 0.5, 3, 6, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
    let cw = code.encode(&info).unwrap();
    let llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 30.0 } else { -30.0 }).collect();
    let out = code.decode(&llrs, DEFAULT_MAX_ITER);
    assert!(out.parity_ok);
    assert_eq!(out.iterations_used, 1);
    assert_eq!(out.info_bits, info);
}

#[test]
fn extrinsic_plus_channel_is_posterior() {
    let code = LdpcCode::build(240, 0.5, 3, 6, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cw = code.encode(&vec![0; code.k()]).unwrap();
    let llrs = bpsk_llrs(&cw, 0.9, &mut rng);
    let out = code.decode(&llrs, 20);
    for i in 0..code.n() {
        assert_eq!(out.extrinsic_llrs[i] + llrs[i], out.posterior_llrs[i]);
    }
    if out.parity_ok {
        assert!(code.syndrome_ok(&out.codeword));
    }
}

#[test]
fn decoder_is_sign_symmetric() {
    // the symmetry needs every row weight even
    let code = (8..)
        .map(|seed| LdpcCode::build(240, 0.5, 3, 6, seed).unwrap())
        .find(|c| c.checks().iter().all(|r| r.len() % 2 == 0))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let llrs: Vec<f64> = (0..code.n()).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0 + 0.5).collect();
        let neg: Vec<f64> = llrs.iter().map(|x| -x).collect();
        let a = code.decode(&llrs, 15);
        let b = code.decode(&neg, 15);
        assert_eq!(a.iterations_used, b.iterations_used);
        for i in 0..code.n() {
            assert_relative_eq!(a.posterior_llrs[i], -b.posterior_llrs[i], max_relative = 1e-9, epsilon = 1e-12);
            assert_relative_eq!(a.extrinsic_llrs[i], -b.extrinsic_llrs[i], max_relative = 1e-9, epsilon = 1e-12);
        }
        assert_eq!(a.codeword.iter().map(|b| 1 - b).collect::<Vec<_>>(), b.codeword);
    }
}

#[test]
fn parity_ok_implies_codeword() {
    let code = LdpcCode::build(240, 0.5, 3, 6, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..30 {
        let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&info).unwrap();
        let out = code.decode(&bpsk_llrs(&cw, 0.7, &mut rng), DEFAULT_MAX_ITER);
        if out.parity_ok {
            assert!(code.syndrome_ok(&out.codeword));
        }
        assert!(out.iterations_used <= DEFAULT_MAX_ITER);
    }
}

#[test]
fn coded_ber_falls_with_snr() {
    let code = LdpcCode::build(1008, 0.5, 3, 6, 11).unwrap();
    let mut bers = Vec::new();
    // Eb/N0 = 1, 1.5, 2 dB at rate 1/2
    for ebn0_db in [1.0f64, 1.5, 2.0] {
        let sigma2 = 1.0 / (2.0 * 0.5 * 10f64.powf(ebn0_db / 10.0));
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let mut errors = 0;
        let mut total = 0;
        for _ in 0..60 {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&info).unwrap();
            let out = code.decode(&bpsk_llrs(&cw, sigma2, &mut rng), DEFAULT_MAX_ITER);
            errors += out.info_bits.iter().zip(&info).filter(|(a, b)| a != b).count();
            total += info.len();
        }
        bers.push(errors as f64 / total as f64);
    }
    println!("coded BER over Eb/N0 1, 1.5, 2 dB: {bers:?}");
    assert!(bers[0] > bers[1] && bers[1] >= bers[2], "{bers:?}");
}
