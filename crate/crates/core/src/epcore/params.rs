//! Detector parameterizations: self-iteration count, damping and variance
//! floor schedules, and the negative-variance policy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Damped self-iterated EP with the decoder's non-uniform prior.
    Nubep,
    /// Self-iterated EP with fast damping and a uniform prior in moment matching.
    Epd,
    /// A single undamped EP pass with the decoder prior.
    Mpep,
    /// Linear MMSE with soft prior moments; no EP pass.
    Lmmse,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Nubep, Variant::Epd, Variant::Mpep, Variant::Lmmse];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Nubep => "nubep",
            Variant::Epd => "epd",
            Variant::Mpep => "mpep",
            Variant::Lmmse => "lmmse",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nubep" => Ok(Variant::Nubep),
            "epd" => Ok(Variant::Epd),
            "mpep" => Ok(Variant::Mpep),
            "lmmse" => Ok(Variant::Lmmse),
            other => Err(Error::Config(format!(
                "unknown detector variant '{other}'; expected nubep, epd, mpep or lmmse"
            ))),
        }
    }
}

/// Damping weight as a function of the turbo iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingSchedule {
    Constant(f64),
    /// `min(exp(t / 1.5) / 10, cap)`.
    Exponential { cap: f64 },
}

impl DampingSchedule {
    pub fn beta(&self, turbo_iter: usize) -> f64 {
        match *self {
            DampingSchedule::Constant(b) => b,
            DampingSchedule::Exponential { cap } => ((turbo_iter as f64 / 1.5).exp() / 10.0).min(cap),
        }
    }
}

/// Minimum tilted variance as a function of the self-iteration `l >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FloorSchedule {
    Constant(f64),
    /// `2^-max(l - 4, 1)`.
    Halving,
}

impl FloorSchedule {
    pub fn epsilon(&self, self_iter: usize) -> f64 {
        match *self {
            FloorSchedule::Constant(e) => e,
            FloorSchedule::Halving => {
                let exp = (self_iter as i32 - 4).max(1);
                2f64.powi(-exp)
            }
        }
    }
}

/// What to do when a damped factor variance is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeVariancePolicy {
    /// Leave the factor as it was before the update.
    KeepOld,
    /// Replace the factor by the tilted moments.
    UseTilted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    pub variant: Variant,
    pub self_iterations: usize,
    pub damping: DampingSchedule,
    pub floor: FloorSchedule,
    pub negative_policy: NegativeVariancePolicy,
    /// Ignore decoder feedback inside moment matching.
    pub uniform_tilted_prior: bool,
}

/// Config-level overrides for ablations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub self_iterations: Option<usize>,
    /// Replaces the damping cap (exponential schedule) or the constant weight.
    pub beta_cap: Option<f64>,
    /// Replaces the floor schedule with a constant.
    pub epsilon: Option<f64>,
}

impl DetectorParams {
    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::Nubep => Self {
                variant,
                self_iterations: 3,
                damping: DampingSchedule::Exponential { cap: 0.7 },
                floor: FloorSchedule::Constant(1e-8),
                negative_policy: NegativeVariancePolicy::KeepOld,
                uniform_tilted_prior: false,
            },
            Variant::Epd => Self {
                variant,
                self_iterations: 10,
                damping: DampingSchedule::Constant(0.95),
                floor: FloorSchedule::Halving,
                negative_policy: NegativeVariancePolicy::KeepOld,
                uniform_tilted_prior: true,
            },
            Variant::Mpep => Self {
                variant,
                self_iterations: 1,
                damping: DampingSchedule::Constant(1.0),
                floor: FloorSchedule::Constant(0.0),
                negative_policy: NegativeVariancePolicy::UseTilted,
                uniform_tilted_prior: false,
            },
            Variant::Lmmse => Self {
                variant,
                self_iterations: 0,
                damping: DampingSchedule::Constant(1.0),
                floor: FloorSchedule::Constant(0.0),
                negative_policy: NegativeVariancePolicy::KeepOld,
                uniform_tilted_prior: false,
            },
        }
    }

    pub fn nubep() -> Self {
        Self::for_variant(Variant::Nubep)
    }

    pub fn epd() -> Self {
        Self::for_variant(Variant::Epd)
    }

    pub fn mpep() -> Self {
        Self::for_variant(Variant::Mpep)
    }

    pub fn lmmse() -> Self {
        Self::for_variant(Variant::Lmmse)
    }

    pub fn with_overrides(mut self, o: &ParamOverrides) -> Result<Self, Error> {
        if let Some(s) = o.self_iterations {
            self.self_iterations = s;
        }
        if let Some(b) = o.beta_cap {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::Config(format!("beta must lie in [0, 1], got {b}")));
            }
            self.damping = match self.damping {
                DampingSchedule::Exponential { .. } => DampingSchedule::Exponential { cap: b },
                DampingSchedule::Constant(_) => DampingSchedule::Constant(b),
            };
        }
        if let Some(e) = o.epsilon {
            if !(e >= 0.0) {
                return Err(Error::Config(format!("epsilon must be >= 0, got {e}")));
            }
            self.floor = FloorSchedule::Constant(e);
        }
        Ok(self)
    }

    pub fn beta(&self, turbo_iter: usize) -> f64 {
        self.damping.beta(turbo_iter)
    }

    pub fn epsilon(&self, self_iter: usize) -> f64 {
        self.floor.epsilon(self_iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nubep_beta_schedule() {
        let p = DetectorParams::nubep();
        let want = [0.1, 0.19477340410546757, 0.37936678946831776, 0.7];
        for (t, w) in want.iter().enumerate() {
            assert_abs_diff_eq!(p.beta(t), *w, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(p.beta(1), 0.1948, epsilon = 1e-4);
        assert_abs_diff_eq!(p.beta(2), 0.3793, epsilon = 1e-4);
    }

    #[test]
    fn epd_floor_schedule() {
        let p = DetectorParams::epd();
        let got: Vec<f64> = (1..=6).map(|l| p.epsilon(l)).collect();
        assert_eq!(got, vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.25]);
        assert_eq!(p.epsilon(10), 1.0 / 64.0);
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("zf".parse::<Variant>().is_err());
    }

    #[test]
    fn overrides_apply() {
        let o = ParamOverrides {
            self_iterations: Some(5),
            beta_cap: Some(0.5),
            epsilon: Some(1e-4),
        };
        let p = DetectorParams::nubep().with_overrides(&o).unwrap();
        assert_eq!(p.self_iterations, 5);
        assert_eq!(p.beta(10), 0.5);
        assert_eq!(p.epsilon(1), 1e-4);
        let bad = ParamOverrides { beta_cap: Some(1.5), ..Default::default() };
        assert!(DetectorParams::epd().with_overrides(&bad).is_err());
    }
}
