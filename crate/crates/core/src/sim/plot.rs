//! Gnuplot-style column files, one per detector variant.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::experiment::BerRecord;
use crate::epcore::Variant;
use crate::error::{Error, Result};

/// `snr_db ber` text per variant, rows sorted by SNR. Zero-error points are
/// kept as `0`.
pub fn plot_data(records: &[BerRecord]) -> BTreeMap<Variant, String> {
    let mut grouped: BTreeMap<Variant, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.variant).or_default().push((r.snr_db, r.ber()));
    }
    grouped
        .into_iter()
        .map(|(v, mut rows)| {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut text = String::from("# snr_db ber\n");
            for (snr, ber) in rows {
                text += &format!("{snr} {ber}\n");
            }
            (v, text)
        })
        .collect()
}

/// Writes `<variant>.dat` files into `dir` and returns their paths.
pub fn emit_plot_data(records: &[BerRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    plot_data(records)
        .into_iter()
        .map(|(v, text)| {
            let path = dir.join(format!("{v}.dat"));
            std::fs::write(&path, text)?;
            Ok(path)
        })
        .collect()
}

/// Parses a file written by [`emit_plot_data`] into `(snr_db, ber)` rows.
pub fn parse_plot_data(text: &str) -> Result<Vec<(f64, f64)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(s)), Some(Ok(b)), None) => Ok((s, b)),
                _ => Err(Error::Parse(format!("bad plot row `{l}`"))),
            }
        })
        .collect()
}
