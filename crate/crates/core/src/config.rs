//! Scenario configuration, JSON round-tripping and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{DelayModel, PathProfile, Threshold};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::multicarrier::t_beta;
use crate::theory::{alpha_min, efficiency_check};

/// Guard length, either fixed or derived from the channel once drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Redundancy {
    Fixed(usize),
    Rule(RedundancyRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedundancyRule {
    None,
    /// `ceil(delta / 4)`.
    QuarterDelay,
    /// `ceil(delta / 2)`, the smallest guard free of backward IBI.
    HalfDelay,
    /// The channel order `nu`.
    Full,
}

impl RedundancyRule {
    pub fn resolve(&self, delay: usize, order: usize) -> usize {
        match self {
            RedundancyRule::None => 0,
            RedundancyRule::QuarterDelay => delay.div_ceil(4),
            RedundancyRule::HalfDelay => delay.div_ceil(2),
            RedundancyRule::Full => order,
        }
    }
}

impl Redundancy {
    pub fn resolve(&self, delay: usize, order: usize) -> usize {
        match self {
            Redundancy::Fixed(r) => *r,
            Redundancy::Rule(rule) => rule.resolve(delay, order),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// Group delay: the peak tap (`"auto"`) or a fixed index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DelaySpec {
    Fixed(usize),
    Auto(AutoKeyword),
}

impl DelaySpec {
    pub const AUTO: DelaySpec = DelaySpec::Auto(AutoKeyword::Auto);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    White,
    /// Receive-filtered noise with covariance `sigma^2 C_f`.
    Colored,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    Zf,
    Slp,
}

impl std::fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrecoderKind::Zf => "zf",
            PrecoderKind::Slp => "slp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub subcarriers: usize,
    pub antennas: usize,
    pub users: usize,
    pub redundancy: Redundancy,
    pub alpha: f64,
    pub beta: f64,
    pub rolloff: f64,
    /// Nyquist period `T_1` of the unpacked system, seconds.
    pub t1: f64,
    pub delay: DelaySpec,
    pub constellation: Constellation,
    pub sinr_db: f64,
    pub noise_var: f64,
    pub impedance: f64,
    pub threshold: Threshold,
    pub n_paths: usize,
    /// Power-decay constant of the path profile, seconds.
    pub tau_decay: f64,
    pub delays: DelayModel,
    pub pulse_span: usize,
    pub n_blocks: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub noise: NoiseKind,
    /// Leading blocks excluded from error counting; `None` uses the forward
    /// IBI depth.
    pub warmup: Option<usize>,
    pub precoder: PrecoderKind,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            subcarriers: 16,
            antennas: 4,
            users: 4,
            redundancy: Redundancy::Rule(RedundancyRule::HalfDelay),
            alpha: 1.0,
            beta: 1.0,
            rolloff: 0.25,
            t1: 100e-9,
            delay: DelaySpec::AUTO,
            constellation: Constellation::Qpsk,
            sinr_db: 10.0,
            noise_var: 1.0,
            impedance: 1.0,
            threshold: Threshold::RelativeToPeak(1e-4),
            n_paths: 8,
            tau_decay: 300e-9,
            delays: DelayModel::Uniform { tau_max: 1e-6 },
            pulse_span: crate::pulse::DEFAULT_SPAN,
            n_blocks: 50,
            n_trials: 200,
            seed: 1,
            noise: NoiseKind::White,
            warmup: None,
            precoder: PrecoderKind::Slp,
        }
    }
}

impl SystemConfig {
    pub fn t_beta(&self) -> f64 {
        t_beta(self.t1, self.subcarriers, self.beta)
    }

    /// `T_s = alpha T_1`.
    pub fn sampling_time(&self) -> f64 {
        self.alpha * self.t1
    }

    pub fn sinr_linear(&self) -> f64 {
        10f64.powf(self.sinr_db / 10.0)
    }

    /// Per-symbol QoS scale `sqrt(gamma sigma^2)`.
    pub fn qos(&self) -> f64 {
        (self.sinr_linear() * self.noise_var).sqrt()
    }

    pub fn path_profile(&self) -> PathProfile {
        PathProfile {
            n_paths: self.n_paths,
            tau_decay: self.tau_decay,
            delays: self.delays,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Outcome of [`validate_config`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedConfig {
    pub config: SystemConfig,
    pub warnings: Vec<String>,
    /// Guard length when it does not depend on the channel draw.
    pub redundancy: Option<usize>,
}

/// Checks domains and relations between fields. Hard violations are returned
/// together as [`Error::Config`]; soft ones become warnings.
pub fn validate_config(cfg: &SystemConfig) -> Result<ValidatedConfig> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let unit = |name: &str, v: f64, errors: &mut Vec<String>| {
        if !(v > 0.0 && v <= 1.0) {
            errors.push(format!("{name} must lie in (0, 1], got {v}"));
        }
    };
    let positive = |name: &str, v: f64, errors: &mut Vec<String>| {
        if !(v > 0.0 && v.is_finite()) {
            errors.push(format!("{name} must be positive, got {v}"));
        }
    };
    if cfg.users == 0 {
        errors.push("at least one user is required".into());
    }
    if cfg.users > cfg.antennas {
        errors.push(format!(
            "K = {} users exceed N = {} antennas",
            cfg.users, cfg.antennas
        ));
    }
    if cfg.subcarriers == 0 {
        errors.push("at least one subcarrier is required".into());
    }
    unit("alpha", cfg.alpha, &mut errors);
    unit("beta", cfg.beta, &mut errors);
    unit("rolloff", cfg.rolloff, &mut errors);
    positive("t1", cfg.t1, &mut errors);
    positive("noise_var", cfg.noise_var, &mut errors);
    positive("impedance", cfg.impedance, &mut errors);
    if cfg.tau_decay < 0.0 {
        errors.push(format!("tau_decay must be non-negative, got {}", cfg.tau_decay));
    }
    match cfg.delays {
        DelayModel::Uniform { tau_max } if tau_max < 0.0 => {
            errors.push(format!("tau_max must be non-negative, got {tau_max}"))
        }
        DelayModel::Tapped { spacing } if spacing < 0.0 => {
            errors.push(format!("tap spacing must be non-negative, got {spacing}"))
        }
        _ => {}
    }
    match cfg.threshold {
        Threshold::Absolute(v) | Threshold::RelativeToPeak(v) if !(v > 0.0) => {
            errors.push(format!("channel threshold must be positive, got {v}"))
        }
        _ => {}
    }
    if cfg.n_paths == 0 {
        errors.push("at least one path is required".into());
    }
    if cfg.pulse_span < 4 {
        errors.push(format!("pulse span must be >= 4, got {}", cfg.pulse_span));
    }
    if cfg.n_trials == 0 {
        errors.push("at least one trial is required".into());
    }
    if let Some(w) = cfg.warmup {
        if w >= cfg.n_blocks {
            errors.push(format!("warm-up of {w} blocks leaves none of {} counted", cfg.n_blocks));
        }
    }
    if cfg.n_blocks == 0 {
        errors.push("at least one block is required".into());
    }
    if !cfg.sinr_db.is_finite() {
        errors.push("target SINR must be finite".into());
    }
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }

    let a_min = alpha_min(cfg.subcarriers, cfg.beta, cfg.rolloff);
    if cfg.alpha < a_min {
        warnings.push(format!(
            "alpha = {} is below alpha_min={a_min:.4}; sampling is not information lossless",
            cfg.alpha
        ));
    }
    let redundancy = match (cfg.redundancy, cfg.delay) {
        (Redundancy::Fixed(r), _) => Some(r),
        (Redundancy::Rule(RedundancyRule::None), _) => Some(0),
        (Redundancy::Rule(RedundancyRule::Full), _) => None,
        (Redundancy::Rule(rule), DelaySpec::Fixed(d)) => Some(rule.resolve(d, 0)),
        (Redundancy::Rule(_), DelaySpec::Auto(_)) => None,
    };
    if let Some(r) = redundancy {
        if !efficiency_check(cfg.subcarriers, r) {
            warnings.push(format!(
                "R = {r} is not smaller than M = {}; at most half of each block carries data",
                cfg.subcarriers
            ));
        }
    }
    Ok(ValidatedConfig {
        config: cfg.clone(),
        warnings,
        redundancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warns_below_alpha_min() {
        let cfg = SystemConfig {
            alpha: 0.5,
            ..Default::default()
        };
        let v = validate_config(&cfg).unwrap();
        assert!(v.warnings.iter().any(|w| w.contains("below alpha_min=0.8000")));
    }

    #[test]
    fn half_delay_rule() {
        let cfg = SystemConfig {
            delay: DelaySpec::Fixed(10),
            redundancy: Redundancy::Rule(RedundancyRule::HalfDelay),
            ..Default::default()
        };
        assert_eq!(validate_config(&cfg).unwrap().redundancy, Some(5));
        assert_eq!(RedundancyRule::QuarterDelay.resolve(10, 24), 3);
        assert_eq!(RedundancyRule::Full.resolve(10, 24), 24);
    }

    #[test]
    fn more_users_than_antennas_is_an_error() {
        let cfg = SystemConfig {
            users: 5,
            antennas: 4,
            ..Default::default()
        };
        match validate_config(&cfg) {
            Err(Error::Config(list)) => assert!(list.iter().any(|e| e.contains("exceed"))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_are_aggregated() {
        let cfg = SystemConfig {
            alpha: 0.0,
            beta: 1.5,
            t1: -1.0,
            ..Default::default()
        };
        match validate_config(&cfg) {
            Err(Error::Config(list)) => assert_eq!(list.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        for cfg in [
            SystemConfig::default(),
            SystemConfig {
                redundancy: Redundancy::Fixed(3),
                delay: DelaySpec::Fixed(7),
                constellation: Constellation::Qam16,
                threshold: Threshold::Absolute(1e-3),
                delays: DelayModel::Tapped { spacing: 1e-7 },
                noise: NoiseKind::Colored,
                warmup: Some(2),
                precoder: PrecoderKind::Zf,
                ..Default::default()
            },
        ] {
            let text = cfg.to_json().unwrap();
            assert_eq!(SystemConfig::from_json(&text).unwrap(), cfg);
        }
        let partial = SystemConfig::from_json(r#"{"redundancy": "quarter-delay", "delay": "auto", "users": 2}"#).unwrap();
        assert_eq!(partial.redundancy, Redundancy::Rule(RedundancyRule::QuarterDelay));
        assert_eq!(partial.users, 2);
    }
}
