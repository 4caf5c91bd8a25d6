//! Experiment configuration: TOML with sections, plus `section.key=value`
//! overrides applied before validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::CsiModel;
use crate::constellation::{Constellation, DEFAULT_LLR_CLIP};
use crate::epcore::{DetectorParams, ParamOverrides, Variant};
use crate::error::{Error, Result};
use crate::ldpc::DEFAULT_MAX_ITER;
use crate::turbo::{TurboConfig, DEFAULT_TURBO_ITERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub constellation: String,
    pub nt: usize,
    pub nr: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `Nt Es/N0` operating points in dB.
    pub snr_db: Vec<f64>,
    pub variants: Vec<Variant>,
    pub channels: usize,
    pub codewords: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub n: usize,
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default = "default_dv")]
    pub dv: usize,
    #[serde(default = "default_dc")]
    pub dc: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_decoder_iters")]
    pub decoder_max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurboSection {
    #[serde(default = "default_turbo_iters")]
    pub iterations: usize,
    #[serde(default = "default_clip")]
    pub llr_clip: f64,
    #[serde(default = "default_true")]
    pub early_exit: bool,
}

impl Default for TurboSection {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_TURBO_ITERS,
            llr_clip: DEFAULT_LLR_CLIP,
            early_exit: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsiSection {
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub compensate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
    /// Per-turbo-iteration error counts, one row per iteration.
    pub iterations_csv: Option<PathBuf>,
    /// When off, `wall_time_s` is written as 0 so reruns are byte-identical.
    #[serde(default = "default_true")]
    pub wall_time: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv: None,
            plot_dir: None,
            iterations_csv: None,
            wall_time: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub sweep: SweepSection,
    pub code: CodeSection,
    #[serde(default)]
    pub turbo: TurboSection,
    #[serde(default)]
    pub csi: CsiSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Per-variant parameter overrides, `[detector.nubep]` etc.
    #[serde(default)]
    pub detector: BTreeMap<Variant, ParamOverrides>,
}

fn default_rate() -> f64 {
    0.5
}
fn default_dv() -> usize {
    3
}
fn default_dc() -> usize {
    6
}
fn default_decoder_iters() -> usize {
    DEFAULT_MAX_ITER
}
fn default_turbo_iters() -> usize {
    DEFAULT_TURBO_ITERS
}
fn default_clip() -> f64 {
    DEFAULT_LLR_CLIP
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Applies `section.key=value` overrides on top of the document, then
    /// validates. Values are read as TOML, falling back to a bare string.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = doc.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = Constellation::by_name(&self.system.constellation)?;
        let (nt, nr) = (self.system.nt, self.system.nr);
        if nt == 0 || nr < nt {
            return Err(Error::Config(format!("system: need nr >= nt >= 1, got nt={nt}, nr={nr}")));
        }
        let s = &self.sweep;
        if s.channels == 0 {
            return Err(Error::Config("sweep.channels must be >= 1".into()));
        }
        if s.codewords == 0 {
            return Err(Error::Config("sweep.codewords must be >= 1".into()));
        }
        if s.snr_db.is_empty() {
            return Err(Error::Config("sweep.snr_db must list at least one point".into()));
        }
        if let Some(x) = s.snr_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("sweep.snr_db contains non-finite value {x}")));
        }
        if let Some(w) = s.snr_db.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "sweep.snr_db must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        if s.variants.is_empty() {
            return Err(Error::Config("sweep.variants must name at least one detector".into()));
        }
        for (i, v) in s.variants.iter().enumerate() {
            if s.variants[..i].contains(v) {
                return Err(Error::Config(format!("sweep.variants lists {v} twice")));
            }
        }
        let per_block = nt * c.bits_per_symbol();
        if !self.code.n.is_multiple_of(per_block) {
            return Err(Error::Config(format!(
                "code.n = {} is not a multiple of nt * bits per symbol = {nt} * {} = {per_block}",
                self.code.n,
                c.bits_per_symbol()
            )));
        }
        if !(self.turbo.llr_clip > 0.0) {
            return Err(Error::Config(format!("turbo.llr_clip must be positive, got {}", self.turbo.llr_clip)));
        }
        self.csi_model().validate()?;
        for v in s.variants.iter().chain(self.detector.keys()) {
            self.detector_params(*v)?;
        }
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::by_name(&self.system.constellation)
    }

    pub fn csi_model(&self) -> CsiModel {
        CsiModel {
            sigma2: self.csi.sigma2,
            compensate: self.csi.compensate,
        }
    }

    pub fn detector_params(&self, v: Variant) -> Result<DetectorParams> {
        let base = DetectorParams::for_variant(v);
        match self.detector.get(&v) {
            Some(o) => base.with_overrides(o),
            None => Ok(base),
        }
    }

    pub fn turbo_config(&self, v: Variant) -> Result<TurboConfig> {
        Ok(TurboConfig {
            turbo_iters: self.turbo.iterations,
            detector: self.detector_params(v)?,
            llr_clip: self.turbo.llr_clip,
            early_exit: self.turbo.early_exit,
            decoder_max_iter: self.code.decoder_max_iter,
        })
    }
}

fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let value = parse_value(raw.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one item");
    let mut table = doc;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{path}`: `{k}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
