//! Experiment presets, parameter sweeps, Monte Carlo execution and result
//! files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{draw_channels, effective_channel, mix_seed, DelayModel, Threshold};
use crate::config::{
    validate_config, DelaySpec, PrecoderKind, Redundancy, RedundancyRule, SystemConfig,
};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linksim::{run_stream, stats, StreamResult};
use crate::pulse::make_srrc;
use crate::theory::alpha_min;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Exp1,
    Exp2,
    Exp3,
    Custom,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Preset::Exp1),
            "exp2" => Ok(Preset::Exp2),
            "exp3" => Ok(Preset::Exp3),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::InvalidParameter(format!("unknown preset '{other}'"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Exp1 => "exp1",
            Preset::Exp2 => "exp2",
            Preset::Exp3 => "exp3",
            Preset::Custom => "custom",
        })
    }
}

/// One swept parameter of a custom experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<f64>,
    pub preset: Preset,
}

/// Fields accepted as sweep axes.
pub const SWEEP_AXES: [&str; 8] = [
    "alpha",
    "beta",
    "rolloff",
    "sinr_db",
    "users",
    "antennas",
    "subcarriers",
    "redundancy",
];

/// Sets one configuration field from a sweep value, checking its domain.
pub fn apply_axis(cfg: &mut SystemConfig, axis: &str, value: f64) -> Result<()> {
    let count = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::InvalidParameter(format!("{axis} needs a non-negative integer, got {v}")))
        }
    };
    match axis {
        "alpha" => cfg.alpha = value,
        "beta" => cfg.beta = value,
        "rolloff" => cfg.rolloff = value,
        "sinr_db" => cfg.sinr_db = value,
        "users" => cfg.users = count(value)?,
        "antennas" => cfg.antennas = count(value)?,
        "subcarriers" => cfg.subcarriers = count(value)?,
        "redundancy" => cfg.redundancy = Redundancy::Fixed(count(value)?),
        other => {
            return Err(Error::InvalidParameter(format!(
                "'{other}' is not a sweep axis; expected one of {}",
                SWEEP_AXES.join(", ")
            )))
        }
    }
    Ok(())
}

/// One curve point: a fully specified configuration run over all trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub label: String,
    pub config: SystemConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub arms: Vec<Arm>,
}

/// Command-line style adjustments applied when a preset is built. List
/// overrides replace the corresponding preset axis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub alphas: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub users: Option<Vec<usize>>,
    pub sinr_db: Option<Vec<f64>>,
    pub subcarriers: Option<usize>,
    pub antennas: Option<usize>,
    pub n_trials: Option<usize>,
    pub n_blocks: Option<usize>,
    pub seed: Option<u64>,
    /// Restrict to arms whose label contains one of these fragments.
    pub only: Option<Vec<String>>,
}

impl Overrides {
    fn scalar(&self, cfg: &mut SystemConfig) {
        if let Some(m) = self.subcarriers {
            cfg.subcarriers = m;
        }
        if let Some(n) = self.antennas {
            cfg.antennas = n;
        }
        if let Some(t) = self.n_trials {
            cfg.n_trials = t;
        }
        if let Some(b) = self.n_blocks {
            cfg.n_blocks = b;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

/// Amplitude floor, relative to the peak, that sets the channel order.
const ORDER_THRESHOLD: f64 = 1e-4;

/// Defaults for Experiment 1 with `m` subcarriers: multipath Rayleigh links
/// at the Nyquist rate, no packing or acceleration. The power decay is
/// chosen so the thresholded order is about `3m/8` (24 taps at `m = 64`),
/// which keeps the channel shorter than a block at desk scale too.
pub fn exp1_base(m: usize) -> SystemConfig {
    let t1 = 100e-9;
    let order = 3.0 * m as f64 / 8.0;
    SystemConfig {
        subcarriers: m,
        antennas: 8,
        users: 8,
        alpha: 1.0,
        beta: 1.0,
        t1,
        delay: DelaySpec::Fixed(0),
        constellation: Constellation::Qam16,
        sinr_db: 15.0,
        n_paths: order.ceil() as usize + 1,
        // power falls by ORDER_THRESHOLD^2 over `order` taps
        tau_decay: order / (-2.0 * ORDER_THRESHOLD.ln()) * t1,
        delays: DelayModel::Tapped { spacing: t1 },
        threshold: Threshold::RelativeToPeak(ORDER_THRESHOLD),
        n_blocks: 4,
        n_trials: 200,
        seed: 2024,
        ..SystemConfig::default()
    }
}

/// Desk-scale defaults for Experiment 2: flat fading.
pub fn exp2_base() -> SystemConfig {
    let t1 = 100e-9;
    SystemConfig {
        subcarriers: 16,
        antennas: 4,
        users: 4,
        t1,
        redundancy: Redundancy::Rule(RedundancyRule::HalfDelay),
        constellation: Constellation::Qpsk,
        n_paths: 1,
        tau_decay: t1,
        delays: DelayModel::Tapped { spacing: t1 },
        threshold: Threshold::RelativeToPeak(1e-3),
        n_blocks: 6,
        n_trials: 100,
        seed: 2025,
        ..SystemConfig::default()
    }
}

/// Desk-scale defaults for Experiment 3: short multipath links whose
/// accelerated sampling adds precursor taps.
pub fn exp3_base() -> SystemConfig {
    let t1 = 100e-9;
    SystemConfig {
        subcarriers: 32,
        antennas: 4,
        users: 4,
        t1,
        constellation: Constellation::Qpsk,
        sinr_db: 6.0,
        n_paths: 6,
        tau_decay: 2.0 * t1,
        delays: DelayModel::Tapped { spacing: t1 },
        threshold: Threshold::RelativeToPeak(1e-3),
        n_blocks: 3,
        n_trials: 100,
        seed: 2026,
        ..SystemConfig::default()
    }
}

/// `(alpha, beta)` pairs of Experiment 2. All but the unaccelerated reference
/// have `alpha xi(beta)` close to `1 / (1 + rho)`.
pub const EXP2_PAIRS: [(f64, f64); 4] = [(0.90, 0.88), (0.80, 1.0), (1.0, 0.79), (1.0, 1.0)];

pub const EXP3_BETAS: [f64; 3] = [0.80, 0.90, 1.0];

/// Acceleration grid starting at `alpha_min` in steps of `step`, ending at 1.
pub fn alpha_grid(subcarriers: usize, beta: f64, rolloff: f64, step: f64) -> Vec<f64> {
    let start = alpha_min(subcarriers, beta, rolloff).min(1.0);
    let mut grid = Vec::new();
    let mut a = start;
    while a < 1.0 - 1e-9 {
        grid.push(a);
        a += step;
    }
    // close the grid at 1; a point crowding 1 gives way unless it is alpha_min
    if grid.len() > 1 && grid.last().is_some_and(|&last| 1.0 - last <= 0.02) {
        grid.pop();
    }
    grid.push(1.0);
    grid
}

fn arm(label: String, mut cfg: SystemConfig, precoder: PrecoderKind, redundancy: Redundancy, ov: &Overrides) -> Arm {
    cfg.precoder = precoder;
    cfg.redundancy = redundancy;
    ov.scalar(&mut cfg);
    Arm { label, config: cfg }
}

pub fn build_preset(preset: Preset, ov: &Overrides) -> Result<ExperimentSpec> {
    let mut arms = Vec::new();
    match preset {
        Preset::Exp1 => {
            let base = exp1_base(ov.subcarriers.unwrap_or(16));
            let n = ov.antennas.unwrap_or(base.antennas);
            let users = ov.users.clone().unwrap_or_else(|| (4..=n).collect());
            for k in users {
                let cfg = SystemConfig { users: k, ..base.clone() };
                arms.push(arm(
                    format!("K={k} no-red SLP"),
                    cfg.clone(),
                    PrecoderKind::Slp,
                    Redundancy::Rule(RedundancyRule::None),
                    ov,
                ));
                arms.push(arm(
                    format!("K={k} full-red ZF"),
                    cfg,
                    PrecoderKind::Zf,
                    Redundancy::Rule(RedundancyRule::Full),
                    ov,
                ));
            }
        }
        Preset::Exp2 => {
            let base = exp2_base();
            let sinrs = ov.sinr_db.clone().unwrap_or_else(|| vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0]);
            let pairs: Vec<(f64, f64)> = match (&ov.alphas, &ov.betas) {
                (None, None) => EXP2_PAIRS.to_vec(),
                (a, b) => EXP2_PAIRS
                    .iter()
                    .copied()
                    .filter(|(al, be)| {
                        a.as_ref().is_none_or(|v| v.iter().any(|x| (x - al).abs() < 1e-9))
                            && b.as_ref().is_none_or(|v| v.iter().any(|x| (x - be).abs() < 1e-9))
                    })
                    .collect(),
            };
            for constellation in [Constellation::Qpsk, Constellation::Psk8] {
                for &(alpha, beta) in &pairs {
                    for &g in &sinrs {
                        let cfg = SystemConfig {
                            alpha,
                            beta,
                            sinr_db: g,
                            constellation,
                            ..base.clone()
                        };
                        arms.push(arm(
                            format!("{constellation} alpha={alpha} beta={beta} gamma={g}dB SLP"),
                            cfg,
                            PrecoderKind::Slp,
                            Redundancy::Rule(RedundancyRule::HalfDelay),
                            ov,
                        ));
                    }
                }
            }
        }
        Preset::Exp3 => {
            let base = exp3_base();
            let betas = ov.betas.clone().unwrap_or_else(|| EXP3_BETAS.to_vec());
            for beta in betas {
                let m = ov.subcarriers.unwrap_or(base.subcarriers);
                let alphas = ov
                    .alphas
                    .clone()
                    .unwrap_or_else(|| alpha_grid(m, beta, base.rolloff, 0.05));
                for alpha in alphas {
                    let cfg = SystemConfig {
                        alpha,
                        beta,
                        ..base.clone()
                    };
                    let tag = format!("beta={beta} alpha={alpha:.4}");
                    arms.push(arm(
                        format!("{tag} quarter-delay SLP"),
                        cfg.clone(),
                        PrecoderKind::Slp,
                        Redundancy::Rule(RedundancyRule::QuarterDelay),
                        ov,
                    ));
                    arms.push(arm(
                        format!("{tag} half-delay SLP"),
                        cfg.clone(),
                        PrecoderKind::Slp,
                        Redundancy::Rule(RedundancyRule::HalfDelay),
                        ov,
                    ));
                    arms.push(arm(
                        format!("{tag} full-red ZF"),
                        cfg,
                        PrecoderKind::Zf,
                        Redundancy::Rule(RedundancyRule::Full),
                        ov,
                    ));
                }
            }
        }
        Preset::Custom => {
            return Err(Error::InvalidParameter(
                "the custom preset needs a base configuration and a sweep; use build_custom".into(),
            ))
        }
    }
    if let Some(only) = &ov.only {
        arms.retain(|a| only.iter().any(|frag| a.label.contains(frag.as_str())));
    }
    Ok(ExperimentSpec { preset, arms })
}

/// Custom experiment: one arm per sweep value on top of `base`.
pub fn build_custom(base: &SystemConfig, sweep: &SweepSpec, ov: &Overrides) -> Result<ExperimentSpec> {
    let mut arms = Vec::with_capacity(sweep.values.len());
    for &v in &sweep.values {
        let mut cfg = base.clone();
        apply_axis(&mut cfg, &sweep.axis, v)?;
        ov.scalar(&mut cfg);
        arms.push(Arm {
            label: format!("{}={v} {}", sweep.axis, cfg.precoder),
            config: cfg,
        });
    }
    Ok(ExperimentSpec {
        preset: Preset::Custom,
        arms,
    })
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_db: f64,
    pub precoder: PrecoderKind,
    pub ser: f64,
    pub sum_rate_bps: f64,
    pub power_w: f64,
    pub se_bps_hz: f64,
    pub ei_j_per_bit: f64,
    pub seed: u64,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "trial",
    "K",
    "N",
    "M",
    "R",
    "alpha",
    "beta",
    "gamma_db",
    "precoder",
    "ser",
    "sum_rate_bps",
    "power_w",
    "se_bps_hz",
    "ei_j_per_bit",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn from_samples(v: &[f64], seed: u64) -> Self {
        let (ci_low, ci_high) = stats::bootstrap_mean_ci(v, 0.95, 2000, seed);
        Estimate {
            mean: stats::mean(v),
            std_error: stats::std_error(v),
            ci_low,
            ci_high,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub label: String,
    pub precoder: PrecoderKind,
    pub users: usize,
    pub antennas: usize,
    pub subcarriers: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sinr_db: f64,
    pub trials: usize,
    pub failed_trials: usize,
    pub failures: Vec<String>,
    pub mean_redundancy: f64,
    pub mean_delay: f64,
    pub mean_order: f64,
    pub ser: Estimate,
    pub sum_rate: Estimate,
    pub power: Estimate,
    pub spectral_eff: Estimate,
    /// Mean power over mean spectral efficiency.
    pub energy_ineff: f64,
    pub qp_max_iter: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<ArmSummary>,
    pub run_hash: String,
    pub warnings: Vec<String>,
}

/// Hex SHA-256 of the serialized experiment specification, truncated to 40
/// characters.
pub fn run_hash(spec: &ExperimentSpec) -> Result<String> {
    let text = serde_json::to_string(spec)?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(hex::encode(digest)[..40].to_string())
}

/// Runs one trial of one arm. The physical channel depends only on the
/// arm's seed and the trial index, so arms share channel draws.
pub fn run_trial(cfg: &SystemConfig, trial: usize) -> Result<(StreamResult, u64)> {
    let channel_seed = mix_seed(cfg.seed, trial as u64);
    let phys = draw_channels(cfg.users, cfg.antennas, &cfg.path_profile(), channel_seed)?;
    let pulse = make_srrc(cfg.t_beta(), cfg.rolloff, cfg.pulse_span)?;
    let mut ch = effective_channel(&phys, &pulse, cfg.sampling_time(), cfg.threshold)?;
    if let DelaySpec::Fixed(d) = cfg.delay {
        ch.delay = d;
    }
    let stream_seed = mix_seed(channel_seed, 2);
    let res = run_stream(cfg, &ch, cfg.precoder, cfg.n_blocks, stream_seed)?;
    Ok((res, channel_seed))
}

fn summarize(arm: &Arm, results: &[std::result::Result<(StreamResult, u64), String>], index: usize) -> ArmSummary {
    let ok: Vec<&StreamResult> = results.iter().filter_map(|r| r.as_ref().ok().map(|(s, _)| s)).collect();
    let failures: Vec<String> = results.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    let pick = |f: &dyn Fn(&StreamResult) -> f64| -> Vec<f64> { ok.iter().map(|r| f(r)).collect() };
    let seed = mix_seed(arm.config.seed, 1_000_000 + index as u64);
    let power = Estimate::from_samples(&pick(&|r| r.avg_power), seed);
    let se = Estimate::from_samples(&pick(&|r| r.spectral_eff), seed + 1);
    let cfg = &arm.config;
    ArmSummary {
        label: arm.label.clone(),
        precoder: cfg.precoder,
        users: cfg.users,
        antennas: cfg.antennas,
        subcarriers: cfg.subcarriers,
        alpha: cfg.alpha,
        beta: cfg.beta,
        sinr_db: cfg.sinr_db,
        trials: ok.len(),
        failed_trials: failures.len(),
        failures: failures.into_iter().take(5).collect(),
        mean_redundancy: stats::mean(&pick(&|r| r.redundancy as f64)),
        mean_delay: stats::mean(&pick(&|r| r.delay as f64)),
        mean_order: stats::mean(&pick(&|r| r.order as f64)),
        ser: Estimate::from_samples(&pick(&|r| r.ser), seed + 2),
        sum_rate: Estimate::from_samples(&pick(&|r| r.sum_rate), seed + 3),
        power,
        spectral_eff: se,
        energy_ineff: if se.mean > 0.0 { power.mean / se.mean } else { f64::INFINITY },
        qp_max_iter: ok.iter().map(|r| r.qp_max_iter).sum(),
    }
}

/// Runs every arm over its trials in parallel. Results do not depend on the
/// number of worker threads.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let mut warnings = Vec::new();
    for arm in &spec.arms {
        let v = validate_config(&arm.config)?;
        warnings.extend(v.warnings.into_iter().map(|w| format!("{}: {w}", arm.label)));
    }
    let jobs: Vec<(usize, usize)> = spec
        .arms
        .iter()
        .enumerate()
        .flat_map(|(a, arm)| (0..arm.config.n_trials).map(move |t| (a, t)))
        .collect();
    let outcomes: Vec<std::result::Result<(StreamResult, u64), String>> = jobs
        .par_iter()
        .map(|&(a, t)| run_trial(&spec.arms[a].config, t).map_err(|e| e.to_string()))
        .collect();

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    let mut offset = 0;
    for (a, arm) in spec.arms.iter().enumerate() {
        let n = arm.config.n_trials;
        let slice = &outcomes[offset..offset + n];
        offset += n;
        for (t, out) in slice.iter().enumerate() {
            if let Ok((res, seed)) = out {
                let cfg = &arm.config;
                records.push(TrialRecord {
                    trial: t,
                    k: cfg.users,
                    n: cfg.antennas,
                    m: cfg.subcarriers,
                    r: res.redundancy,
                    alpha: cfg.alpha,
                    beta: cfg.beta,
                    gamma_db: cfg.sinr_db,
                    precoder: cfg.precoder,
                    ser: res.ser,
                    sum_rate_bps: res.sum_rate,
                    power_w: res.avg_power,
                    se_bps_hz: res.spectral_eff,
                    ei_j_per_bit: res.energy_ineff,
                    seed: *seed,
                });
            }
        }
        let summary = summarize(arm, slice, a);
        if summary.failed_trials > 0 {
            log::warn!("{}: {} trials failed", arm.label, summary.failed_trials);
        }
        summaries.push(summary);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        records,
        summaries,
        run_hash: run_hash(spec)?,
        warnings,
    })
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    run_hash: &'a str,
    preset: Preset,
    version: &'a str,
    warnings: &'a [String],
    arms: &'a [Arm],
    summaries: &'a [ArmSummary],
}

/// Writes `<preset>_<hash>.csv` and `<preset>_<hash>.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_{}", result.spec.preset, &result.run_hash[..12]);
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let mut writer = csv::Writer::from_path(&csv_path)?;
    if result.records.is_empty() {
        writer.write_record(CSV_COLUMNS)?;
    }
    for rec in &result.records {
        writer.serialize(rec)?;
    }
    writer.flush()?;
    let file = SummaryFile {
        run_hash: &result.run_hash,
        preset: result.spec.preset,
        version: env!("CARGO_PKG_VERSION"),
        warnings: &result.warnings,
        arms: &result.spec.arms,
        summaries: &result.summaries,
    };
    std::fs::write(&json_path, serde_json::to_string_pretty(&file)?)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicarrier::xi;

    #[test]
    fn exp2_pairs_sit_on_the_lossless_edge() {
        for (alpha, beta) in EXP2_PAIRS.into_iter().filter(|&p| p != (1.0, 1.0)) {
            let product = alpha * xi(16, beta);
            assert!((product - 0.8).abs() < 0.1, "{alpha} {beta} -> {product}");
        }
        let spec = build_preset(Preset::Exp2, &Overrides::default()).unwrap();
        for (alpha, beta) in EXP2_PAIRS {
            assert!(spec.arms.iter().any(|a| a.config.alpha == alpha && a.config.beta == beta));
        }
    }

    #[test]
    fn exp3_grids_start_at_alpha_min() {
        let spec = build_preset(Preset::Exp3, &Overrides::default()).unwrap();
        for beta in EXP3_BETAS {
            let a_min = alpha_min(32, beta, 0.25);
            let lowest = spec
                .arms
                .iter()
                .filter(|a| a.config.beta == beta)
                .map(|a| a.config.alpha)
                .fold(f64::INFINITY, f64::min);
            assert!((lowest - a_min).abs() < 1e-12);
            assert!(spec.arms.iter().filter(|a| a.config.beta == beta).all(|a| a.config.alpha <= 1.0));
        }
        let grid = alpha_grid(32, 1.0, 0.25, 0.05);
        assert_eq!(grid.len(), 5);
        for beta in EXP3_BETAS {
            let grid = alpha_grid(32, beta, 0.25, 0.05);
            assert!(grid.len() >= 2 && *grid.last().unwrap() == 1.0, "beta {beta}: {grid:?}");
        }
    }

    #[test]
    fn beta_override_filters_exp3() {
        let ov = Overrides {
            betas: Some(vec![0.9]),
            ..Default::default()
        };
        let spec = build_preset(Preset::Exp3, &ov).unwrap();
        assert!(!spec.arms.is_empty());
        assert!(spec.arms.iter().all(|a| a.config.beta == 0.9));
    }

    #[test]
    fn custom_redundancy_sweep() {
        let base = SystemConfig {
            delay: DelaySpec::Fixed(10),
            ..exp3_base()
        };
        let sweep = SweepSpec {
            axis: "redundancy".into(),
            values: (0..=5).map(f64::from).collect(),
            preset: Preset::Custom,
        };
        let spec = build_custom(&base, &sweep, &Overrides::default()).unwrap();
        assert_eq!(spec.arms.len(), 6);
        assert_eq!(spec.arms[5].config.redundancy, Redundancy::Fixed(5));
        let bad = SweepSpec {
            axis: "colour".into(),
            ..sweep
        };
        assert!(build_custom(&base, &bad, &Overrides::default()).is_err());
    }

    #[test]
    fn tiny_run_writes_schema() {
        let ov = Overrides {
            users: Some(vec![2]),
            antennas: Some(2),
            subcarriers: Some(4),
            n_trials: Some(2),
            n_blocks: Some(3),
            ..Default::default()
        };
        let mut spec = build_preset(Preset::Exp1, &ov).unwrap();
        for arm in &mut spec.arms {
            arm.config.n_paths = 3;
            arm.config.constellation = Constellation::Qpsk;
        }
        let res = run_experiment(&spec).unwrap();
        assert_eq!(res.records.len(), 4);
        let dir = tempfile::tempdir().unwrap();
        let (csv_path, json_path) = write_outputs(&res, dir.path()).unwrap();
        let text = std::fs::read_to_string(csv_path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
        assert_eq!(json["run_hash"].as_str().unwrap().len(), 40);
        // identical spec gives identical records
        let again = run_experiment(&spec).unwrap();
        assert_eq!(again.records, res.records);
    }
}
