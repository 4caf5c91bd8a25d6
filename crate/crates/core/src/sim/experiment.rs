//! Monte-Carlo BER sweeps with common random numbers.
//!
//! Every draw of channel, CSI error, information bits and noise comes from a
//! ChaCha stream keyed by `(seed, channel, codeword)`. Noise is drawn at unit
//! scale and multiplied by the SNR-dependent standard deviation, so all
//! variants and all SNR points see the same realizations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::channel::{perturb_csi, sample_channel, snr_to_noise_var, transmit};
use crate::constellation::Constellation;
use crate::epcore::Variant;
use crate::error::{Error, Result};
use crate::ldpc::LdpcCode;
use crate::linalg::CMatrix;
use crate::turbo::{turbo_receive, FrameLayout, TurboConfig};

pub const CSV_HEADER: &str = "variant,snr_db,bit_errors,bits_total,frame_errors,frames_total,wall_time_s";
pub const ITERATIONS_CSV_HEADER: &str = "variant,snr_db,iteration,bit_errors,bits_total";

/// Average symbol energy of the normalized constellations.
const ES: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub variant: Variant,
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub frame_errors: u64,
    pub frames_total: u64,
    /// Detector plus decoder time summed over all work units.
    pub wall_time_s: f64,
    /// Information-bit errors after each turbo iteration `t = 0..=T`.
    pub iteration_bit_errors: Vec<u64>,
}

impl BerRecord {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits_total as f64
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames_total as f64
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.variant, self.snr_db, self.bit_errors, self.bits_total, self.frame_errors, self.frames_total, self.wall_time_s
        )
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 7 {
            return Err(Error::Parse(format!("expected 7 CSV fields, got {}: `{line}`", f.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        let float = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        Ok(Self {
            variant: f[0].parse()?,
            snr_db: float(f[1])?,
            bit_errors: int(f[2])?,
            bits_total: int(f[3])?,
            frame_errors: int(f[4])?,
            frames_total: int(f[5])?,
            wall_time_s: float(f[6])?,
            iteration_bit_errors: Vec::new(),
        })
    }
}

/// Reads records back from a CSV produced by [`run_experiment`].
pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    lines.filter(|l| !l.trim().is_empty()).map(BerRecord::from_csv_row).collect()
}

/// Error counts of one variant accumulated over work units.
#[derive(Debug, Clone, Default)]
struct Tally {
    bit_errors: u64,
    bits: u64,
    frame_errors: u64,
    frames: u64,
    seconds: f64,
    per_iteration: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
        self.frame_errors += other.frame_errors;
        self.frames += other.frames;
        self.seconds += other.seconds;
        if self.per_iteration.is_empty() {
            self.per_iteration = other.per_iteration;
        } else {
            for (a, b) in self.per_iteration.iter_mut().zip(other.per_iteration) {
                *a += b;
            }
        }
        self
    }
}

/// The ChaCha stream of channel `c` (`w = None`) or of codeword `w` sent over it.
pub fn unit_rng(seed: u64, channel: usize, codeword: Option<usize>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = codeword.map_or(0, |w| w as u64 + 1);
    rng.set_stream(((channel as u64) << 32) | w);
    rng
}

/// Channel as transmitted over and channel as believed by the detector.
pub fn draw_channel(cfg: &ExperimentConfig, channel: usize) -> Result<(CMatrix, CMatrix)> {
    let mut rng = unit_rng(cfg.sweep.seed, channel, None);
    let h = sample_channel(cfg.system.nt, cfg.system.nr, &mut rng)?;
    let h_est = perturb_csi(&h, cfg.csi.sigma2, &mut rng);
    Ok((h, h_est))
}

/// Information bits and received blocks of one codeword at one noise level.
pub fn draw_codeword(
    cfg: &ExperimentConfig,
    code: &LdpcCode,
    c: &Constellation,
    h: &CMatrix,
    channel: usize,
    codeword: usize,
    noise_var: f64,
) -> Result<(Vec<u8>, Vec<Vec<Complex64>>)> {
    let mut rng = unit_rng(cfg.sweep.seed, channel, Some(codeword));
    let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
    let cw = code.encode(&info)?;
    let layout = FrameLayout::new(code.n(), h.cols(), c.bits_per_symbol())?;
    let y = layout
        .map_codeword(&cw, c)?
        .iter()
        .map(|u| transmit(h, u, noise_var, &mut rng))
        .collect::<Result<_>>()?;
    Ok((info, y))
}

/// Builds the code an experiment uses.
pub fn build_code(cfg: &ExperimentConfig) -> Result<LdpcCode> {
    LdpcCode::build(cfg.code.n, cfg.code.rate, cfg.code.dv, cfg.code.dc, cfg.code.seed)
}

struct Sinks {
    csv: Option<BufWriter<File>>,
    iterations: Option<BufWriter<File>>,
}

impl Sinks {
    fn open(cfg: &ExperimentConfig) -> Result<Self> {
        let open = |p: &std::path::Path, header: &str| -> Result<BufWriter<File>> {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "{header}")?;
            w.flush()?;
            Ok(w)
        };
        Ok(Self {
            csv: cfg.output.csv.as_deref().map(|p| open(p, CSV_HEADER)).transpose()?,
            iterations: cfg
                .output
                .iterations_csv
                .as_deref()
                .map(|p| open(p, ITERATIONS_CSV_HEADER))
                .transpose()?,
        })
    }

    fn write(&mut self, r: &BerRecord) -> Result<()> {
        if let Some(w) = self.csv.as_mut() {
            writeln!(w, "{}", r.csv_row())?;
            w.flush()?;
        }
        if let Some(w) = self.iterations.as_mut() {
            for (t, e) in r.iteration_bit_errors.iter().enumerate() {
                writeln!(w, "{},{},{},{},{}", r.variant, r.snr_db, t, e, r.bits_total)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

/// Runs the sweep described by `cfg`, writing CSV rows as each
/// `(snr, variant)` point completes and plot data at the end when requested.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<BerRecord>> {
    run_experiment_with(cfg, |_| {})
}

/// As [`run_experiment`], calling `progress` after each record.
pub fn run_experiment_with(cfg: &ExperimentConfig, mut progress: impl FnMut(&BerRecord)) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let c = cfg.constellation()?;
    let code = build_code(cfg)?;
    let turbo: Vec<(Variant, TurboConfig)> = cfg
        .sweep
        .variants
        .iter()
        .map(|&v| cfg.turbo_config(v).map(|t| (v, t)))
        .collect::<Result<_>>()?;
    let channels: Vec<(CMatrix, CMatrix)> =
        (0..cfg.sweep.channels).map(|ch| draw_channel(cfg, ch)).collect::<Result<_>>()?;
    let units: Vec<(usize, usize)> = (0..cfg.sweep.channels)
        .flat_map(|ch| (0..cfg.sweep.codewords).map(move |w| (ch, w)))
        .collect();
    let nt = cfg.system.nt;
    let csi = cfg.csi_model();
    let t_iters = cfg.turbo.iterations;

    let mut sinks = Sinks::open(cfg)?;
    let mut records = Vec::with_capacity(cfg.sweep.snr_db.len() * turbo.len());
    for &snr_db in &cfg.sweep.snr_db {
        let noise_var = snr_to_noise_var(snr_db, nt, ES);
        let detector_var = csi.detector_noise_var(noise_var, nt, ES);
        let unit_tallies: Vec<Vec<Tally>> = units
            .par_iter()
            .map(|&(ch, w)| -> Result<Vec<Tally>> {
                let (h, h_est) = &channels[ch];
                let (info, y) = draw_codeword(cfg, &code, &c, h, ch, w, noise_var)?;
                turbo
                    .iter()
                    .map(|(_, tc)| {
                        let start = Instant::now();
                        let out = turbo_receive(&y, h_est, detector_var, &code, &c, tc)?;
                        let seconds = start.elapsed().as_secs_f64();
                        let errors = out.info_bits.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
                        Ok(Tally {
                            bit_errors: errors,
                            bits: info.len() as u64,
                            frame_errors: u64::from(errors > 0),
                            frames: 1,
                            seconds,
                            per_iteration: out
                                .bit_errors_per_iteration(&info, t_iters)
                                .into_iter()
                                .map(|e| e as u64)
                                .collect(),
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (i, (variant, _)) in turbo.iter().enumerate() {
            let total = unit_tallies
                .iter()
                .map(|u| u[i].clone())
                .fold(Tally::default(), Tally::merge);
            let rec = BerRecord {
                variant: *variant,
                snr_db,
                bit_errors: total.bit_errors,
                bits_total: total.bits,
                frame_errors: total.frame_errors,
                frames_total: total.frames,
                wall_time_s: if cfg.output.wall_time { total.seconds } else { 0.0 },
                iteration_bit_errors: total.per_iteration,
            };
            sinks.write(&rec)?;
            progress(&rec);
            records.push(rec);
        }
    }
    if let Some(dir) = &cfg.output.plot_dir {
        super::plot::emit_plot_data(&records, dir)?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: u64 = unit_rng(3, 0, None).random();
        let b: u64 = unit_rng(3, 0, Some(0)).random();
        let c: u64 = unit_rng(3, 1, None).random();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, unit_rng(3, 0, None).random::<u64>());
        assert_ne!(a, unit_rng(4, 0, None).random::<u64>());
    }

    #[test]
    fn csv_row_round_trip() {
        let r = BerRecord {
            variant: Variant::Mpep,
            snr_db: 12.5,
            bit_errors: 17,
            bits_total: 100800,
            frame_errors: 2,
            frames_total: 200,
            wall_time_s: 0.125,
            iteration_bit_errors: Vec::new(),
        };
        let text = format!("{CSV_HEADER}\n{}\n", r.csv_row());
        assert_eq!(parse_csv(&text).unwrap(), vec![r]);
        assert!(parse_csv("a,b\n").is_err());
    }

    #[test]
    fn tallies_merge_exactly() {
        let t = |e, it: Vec<u64>| Tally {
            bit_errors: e,
            bits: 10,
            frame_errors: u64::from(e > 0),
            frames: 1,
            seconds: 0.0,
            per_iteration: it,
        };
        let total = [t(3, vec![5, 3]), t(0, vec![1, 0]), t(1, vec![2, 1])]
            .into_iter()
            .fold(Tally::default(), Tally::merge);
        assert_eq!((total.bit_errors, total.bits, total.frame_errors, total.frames), (4, 30, 2, 3));
        assert_eq!(total.per_iteration, vec![8, 4]);
    }
}
