use ep_mimo::channel::{sample_channel, snr_to_noise_var, transmit};
use ep_mimo::constellation::{Constellation, SymbolPrior};
use ep_mimo::epcore::{detect, DetectorParams, Variant};
use ep_mimo::ldpc::LdpcCode;
use ep_mimo::linalg::CMatrix;
use ep_mimo::turbo::{turbo_receive, FrameLayout, TurboConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Frame {
    info: Vec<u8>,
    symbols: Vec<Vec<Complex64>>,
    y: Vec<Vec<Complex64>>,
    h: CMatrix,
}

fn frame(code: &LdpcCode, c: &Constellation, nt: usize, noise_var: f64, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = sample_channel(nt, nt, &mut rng).unwrap();
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
    let cw = code.encode(&info).unwrap();
    let layout = FrameLayout::new(code.n(), nt, c.bits_per_symbol()).unwrap();
    let symbols = layout.map_codeword(&cw, c).unwrap();
    let y = symbols.iter().map(|u| transmit(&h, u, noise_var, &mut rng).unwrap()).collect();
    Frame { info, symbols, y, h }
}

#[test]
fn near_noiseless_frames_decode_for_every_variant() {
    let c = Constellation::qam(16).unwrap();
    let code = LdpcCode::build(192, 0.5, 3, 6, 3).unwrap();
    let noise_var = snr_to_noise_var(60.0, 4, 1.0);
    let f = frame(&code, &c, 4, noise_var, 1);
    for v in Variant::ALL {
        let out = turbo_receive(&f.y, &f.h, noise_var, &code, &c, &TurboConfig::new(DetectorParams::for_variant(v))).unwrap();
        assert_eq!(out.info_bits, f.info, "{v}");
        assert!(out.parity_ok);
        assert!(out.early_exit);
        assert_eq!(out.iteration_info_bits.len(), 1);
    }
}

#[test]
fn zero_turbo_iterations_is_one_detect_decode_pass() {
    let c = Constellation::qam(16).unwrap();
    let code = LdpcCode::build(240, 0.5, 3, 6, 4).unwrap();
    let noise_var = snr_to_noise_var(11.0, 4, 1.0);
    let f = frame(&code, &c, 4, noise_var, 2);
    let mut cfg = TurboConfig::new(DetectorParams::lmmse());
    cfg.turbo_iters = 0;
    let out = turbo_receive(&f.y, &f.h, noise_var, &code, &c, &cfg).unwrap();
    assert_eq!(out.iteration_info_bits.len(), 1);
    assert!(!out.early_exit);

    // the same pass assembled by hand
    let layout = FrameLayout::new(code.n(), 4, 4).unwrap();
    let priors = vec![SymbolPrior::uniform(16); 4];
    let mut llrs = vec![0.0; code.n()];
    for (p, y) in f.y.iter().enumerate() {
        let cav = detect(&DetectorParams::lmmse(), y, &f.h, noise_var, &priors, &c, 0).unwrap();
        layout.write_block_llrs(&cav, p, &c, 5.0, &mut llrs).unwrap();
    }
    assert!(llrs.iter().all(|l| l.abs() <= 5.0));
    let dec = code.decode(&llrs, 100);
    assert_eq!(out.info_bits, dec.info_bits);
    assert_eq!(out.decoder_iterations, vec![dec.iterations_used]);
}

#[test]
fn genie_priors_saturate_detector_llrs() {
    let c = Constellation::qam(16).unwrap();
    let code = LdpcCode::build(96, 0.5, 3, 6, 5).unwrap();
    let noise_var = snr_to_noise_var(30.0, 4, 1.0);
    let f = frame(&code, &c, 4, noise_var, 3);
    let layout = FrameLayout::new(code.n(), 4, 4).unwrap();
    let cw = code.encode(&f.info).unwrap();
    for v in [Variant::Nubep, Variant::Mpep, Variant::Lmmse] {
        let mut llrs = vec![0.0; code.n()];
        for (p, (y, u)) in f.y.iter().zip(&f.symbols).enumerate() {
            let priors: Vec<SymbolPrior> = u.iter().map(|s| SymbolPrior::delta(16, c.nearest(*s))).collect();
            let cav = detect(&DetectorParams::for_variant(v), y, &f.h, noise_var, &priors, &c, 5).unwrap();
            layout.write_block_llrs(&cav, p, &c, 5.0, &mut llrs).unwrap();
        }
        for (l, b) in llrs.iter().zip(&cw) {
            assert_eq!(*l, if *b == 0 { 5.0 } else { -5.0 }, "{v}");
        }
    }
}

#[test]
fn early_exit_only_on_satisfied_parity() {
    let c = Constellation::qam(16).unwrap();
    let code = LdpcCode::build(240, 0.5, 3, 6, 6).unwrap();
    for (seed, snr) in [(10, 9.0), (11, 11.0), (12, 13.0), (13, 15.0)] {
        let noise_var = snr_to_noise_var(snr, 4, 1.0);
        let f = frame(&code, &c, 4, noise_var, seed);
        for early in [true, false] {
            let mut cfg = TurboConfig::new(DetectorParams::nubep());
            cfg.early_exit = early;
            let out = turbo_receive(&f.y, &f.h, noise_var, &code, &c, &cfg).unwrap();
            let runs = out.iteration_info_bits.len();
            assert_eq!(runs, out.decoder_iterations.len());
            if early {
                assert_eq!(out.early_exit, runs < 6);
                if out.early_exit {
                    assert!(out.parity_ok);
                }
            } else {
                assert_eq!(runs, 6);
                assert!(!out.early_exit);
            }
            let errs = out.bit_errors_per_iteration(&f.info, 5);
            assert_eq!(errs.len(), 6);
        }
    }
}

#[test]
fn feedback_reduces_errors_on_average() {
    let c = Constellation::qam(16).unwrap();
    let code = LdpcCode::build(480, 0.5, 3, 6, 8).unwrap();
    let noise_var = snr_to_noise_var(11.5, 4, 1.0);
    let (mut first, mut last) = (0, 0);
    for seed in 0..20 {
        let f = frame(&code, &c, 4, noise_var, 100 + seed);
        let out = turbo_receive(&f.y, &f.h, noise_var, &code, &c, &TurboConfig::new(DetectorParams::nubep())).unwrap();
        let errs = out.bit_errors_per_iteration(&f.info, 5);
        first += errs[0];
        last += errs[5];
    }
    assert!(last <= first, "{first} -> {last}");
}

#[test]
fn mismatched_block_count_is_a_framing_error() {
    let c = Constellation::qam(4).unwrap();
    let code = LdpcCode::build(96, 0.5, 3, 6, 1).unwrap();
    let f = frame(&code, &c, 4, 0.1, 1);
    let r = turbo_receive(&f.y[1..], &f.h, 0.1, &code, &c, &TurboConfig::new(DetectorParams::nubep()));
    assert!(matches!(r, Err(ep_mimo::Error::Framing(_))));
    let c16 = Constellation::qam(64).unwrap();
    let r = turbo_receive(&f.y, &f.h, 0.1, &code, &c16, &TurboConfig::new(DetectorParams::nubep()));
    assert!(matches!(r, Err(ep_mimo::Error::Framing(_))));
}
