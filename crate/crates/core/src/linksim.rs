//! Block-stream link simulation, transmit power metering and the figures of
//! merit (sum rate, power, spectral efficiency, energy inefficiency).

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::Cholesky;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{mix_seed, DiscreteChannelSet};
use crate::config::{NoiseKind, PrecoderKind, SystemConfig};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::interference::{build_effective, build_toeplitz};
use crate::linalg::{CMatrix, CVector, C64};
use crate::multicarrier::{modulate, FrftModulator, RedundancyPair};
use crate::precoder::{build_gamma, per_subcarrier_channels, slp_precode, zf_precode, SlpState};
use crate::pulse::{correlation_matrix, make_srrc, CorrelationMatrix, SampledPulse};
use crate::qpsolver::{QpStatus, SolverOptions};
use crate::theory::IbiIndexSets;

/// Nearest-point detection of `y / q`; ties go to the lowest index.
pub fn detect(y: &CVector, constellation: Constellation, q: f64) -> Vec<usize> {
    y.iter().map(|v| constellation.nearest(v / q)).collect()
}

/// Time-averaged transmit power of per-antenna block streams `tx[n][l]`,
/// including cross-block pulse overlap: sum over antennas of
/// `x^H C_f x / Z0`, divided by the stream duration.
pub fn stream_power(tx: &[Vec<CVector>], pulse: &SampledPulse, sampling_time: f64, impedance: f64) -> Result<f64> {
    let n_blocks = tx.first().map(|s| s.len()).unwrap_or(0);
    let block_len = tx.first().and_then(|s| s.first()).map(|b| b.len()).unwrap_or(0);
    if n_blocks == 0 || block_len == 0 {
        return Err(Error::InvalidParameter("power of an empty stream".into()));
    }
    let lags = (pulse.correlation_support() / sampling_time).floor() as usize;
    let corr: Vec<f64> = (0..=lags).map(|k| pulse.autocorrelation(k as f64 * sampling_time)).collect();
    let mut energy = 0.0;
    for stream in tx {
        if stream.len() != n_blocks || stream.iter().any(|b| b.len() != block_len) {
            return Err(Error::DimensionMismatch("ragged transmit stream".into()));
        }
        let x: Vec<C64> = stream.iter().flat_map(|b| b.iter().copied()).collect();
        for i in 0..x.len() {
            energy += corr[0] * x[i].norm_sqr();
            for k in 1..=lags.min(x.len() - 1 - i) {
                energy += 2.0 * corr[k] * (x[i].conj() * x[i + k]).re;
            }
        }
    }
    Ok(energy / impedance / (n_blocks as f64 * block_len as f64 * sampling_time))
}

/// Linear convolution of every antenna stream with its link, summed per
/// user. Output length is the stream length plus the channel order.
pub fn convolve_stream(ch: &DiscreteChannelSet, streams: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let len = streams.first().map(|s| s.len()).unwrap_or(0);
    (0..ch.users)
        .map(|k| {
            let mut y = vec![C64::new(0.0, 0.0); len + ch.order];
            for (n, x) in streams.iter().enumerate() {
                for (p, h) in ch.link(k, n).iter().enumerate() {
                    for (i, xi) in x.iter().enumerate() {
                        y[i + p] += h * xi;
                    }
                }
            }
            y
        })
        .collect()
}

/// Receiver noise: white `CN(0, sigma^2)` or coloured with covariance
/// `sigma^2 C_f`.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    pub variance: f64,
    /// Lower Cholesky factor of the normalized covariance when coloured.
    coloring: Option<CMatrix>,
}

impl NoiseModel {
    pub fn white(variance: f64) -> Self {
        NoiseModel {
            variance,
            coloring: None,
        }
    }

    pub fn colored(variance: f64, corr: &CorrelationMatrix) -> Result<Self> {
        let c = corr.entries.map(|v| C64::new(v, 0.0));
        let chol = Cholesky::new(c).ok_or_else(|| Error::NotPositiveDefinite("noise covariance".into()))?;
        Ok(NoiseModel {
            variance,
            coloring: Some(chol.l()),
        })
    }

    pub fn covariance(&self, len: usize) -> CMatrix {
        match &self.coloring {
            None => CMatrix::identity(len, len) * C64::new(self.variance, 0.0),
            Some(l) => l * l.adjoint() * C64::new(self.variance, 0.0),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, len: usize) -> CVector {
        let sd = (self.variance / 2.0).sqrt();
        let w = CVector::from_fn(len, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(sd * re, sd * im)
        });
        match &self.coloring {
            Some(l) if l.nrows() == len => l * w,
            _ => w,
        }
    }
}

/// Inputs of the figures of merit besides the error counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricParams {
    pub users: usize,
    pub subcarriers: usize,
    pub block_len: usize,
    pub bits_per_symbol: u32,
    pub sampling_time: f64,
    pub rolloff: f64,
    pub t_beta: f64,
    pub power: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorCounts {
    pub errors: Vec<usize>,
    pub symbols: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamResult {
    pub precoder: PrecoderKind,
    pub ser_per_user: Vec<f64>,
    pub ser: f64,
    pub symbol_errors: usize,
    pub symbols: usize,
    /// Effective sum rate, bit/s.
    pub sum_rate: f64,
    /// Time-averaged transmit power, W.
    pub avg_power: f64,
    /// Occupied bandwidth `2 (1 + rho) / T_beta`, Hz.
    pub bandwidth: f64,
    /// bit/s/Hz.
    pub spectral_eff: f64,
    /// J/bit (W per bit/s/Hz); infinite when nothing gets through.
    pub energy_ineff: f64,
    pub n_blocks: usize,
    pub warmup_excluded: usize,
    pub block_len: usize,
    pub redundancy: usize,
    pub delay: usize,
    pub order: usize,
    pub qp_max_iter: usize,
    pub qp_iterations_mean: f64,
}

pub fn metrics(counts: &ErrorCounts, params: &MetricParams, precoder: PrecoderKind) -> StreamResult {
    let symbol_errors: usize = counts.errors.iter().sum();
    let symbols: usize = counts.symbols.iter().sum();
    let ser = if symbols > 0 { symbol_errors as f64 / symbols as f64 } else { 0.0 };
    let ser_per_user = counts
        .errors
        .iter()
        .zip(&counts.symbols)
        .map(|(&e, &s)| if s > 0 { e as f64 / s as f64 } else { 0.0 })
        .collect();
    let sum_rate = params.users as f64 * (params.subcarriers as f64 / params.block_len as f64)
        * (params.bits_per_symbol as f64 / params.sampling_time)
        * (1.0 - ser);
    let bandwidth = 2.0 * (1.0 + params.rolloff) / params.t_beta;
    let spectral_eff = sum_rate / bandwidth;
    let energy_ineff = if spectral_eff > 0.0 {
        params.power / spectral_eff
    } else {
        f64::INFINITY
    };
    StreamResult {
        precoder,
        ser_per_user,
        ser,
        symbol_errors,
        symbols,
        sum_rate,
        avg_power: params.power,
        bandwidth,
        spectral_eff,
        energy_ineff,
        n_blocks: 0,
        warmup_excluded: 0,
        block_len: params.block_len,
        redundancy: params.block_len - params.subcarriers,
        delay: 0,
        order: 0,
        qp_max_iter: 0,
        qp_iterations_mean: 0.0,
    }
}

#[derive(Clone, Debug, Default)]
pub struct StreamOptions {
    /// Skip noise injection (the QoS scale still uses the configured variance).
    pub noiseless: bool,
    pub solver: SolverOptions,
}

/// Per-block record of one simulated stream.
#[derive(Clone, Debug, Default)]
pub struct StreamTrace {
    /// Symbols per block, indexed `k M + m`.
    pub symbols: Vec<CVector>,
    /// Precoded symbol-domain vectors per block, indexed `n M + m`.
    pub precoded: Vec<CVector>,
    /// Transmitted samples `tx[n][l]`.
    pub tx: Vec<Vec<CVector>>,
    /// Noiseless received samples per counted block, indexed `k M + m`
    /// (after the DFT for the zero-forcing chain).
    pub received: Vec<CVector>,
    pub detected: Vec<Vec<usize>>,
    /// Blocks entering the error count.
    pub counted: Range<usize>,
}

pub fn run_stream(
    cfg: &SystemConfig,
    ch: &DiscreteChannelSet,
    precoder: PrecoderKind,
    n_blocks: usize,
    seed: u64,
) -> Result<StreamResult> {
    Ok(simulate_stream(cfg, ch, precoder, n_blocks, seed, &StreamOptions::default())?.0)
}

/// Simulates `n_blocks` blocks and returns the metrics and the per-block
/// trace. The SLP chain precodes every block first (including the trailing
/// blocks whose backward IBI reaches the last counted block) and then
/// assembles the received blocks from the ISI and both IBI terms.
pub fn simulate_stream(
    cfg: &SystemConfig,
    ch: &DiscreteChannelSet,
    precoder: PrecoderKind,
    n_blocks: usize,
    seed: u64,
    opts: &StreamOptions,
) -> Result<(StreamResult, StreamTrace)> {
    if ch.users != cfg.users || ch.antennas != cfg.antennas {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}, configuration {}x{}",
            ch.users, ch.antennas, cfg.users, cfg.antennas
        )));
    }
    let pulse = make_srrc(cfg.t_beta(), cfg.rolloff, cfg.pulse_span)?;
    match precoder {
        PrecoderKind::Slp => simulate_slp(cfg, ch, &pulse, n_blocks, seed, opts),
        PrecoderKind::Zf => simulate_zf(cfg, ch, &pulse, n_blocks, seed, opts),
    }
}

fn draw_symbols(rng: &mut ChaCha8Rng, constellation: Constellation, len: usize) -> CVector {
    let points = constellation.points();
    CVector::from_fn(len, |_, _| points[rng.gen_range(0..points.len())])
}

fn noise_model(cfg: &SystemConfig, pulse: &SampledPulse) -> Result<NoiseModel> {
    match cfg.noise {
        NoiseKind::White => Ok(NoiseModel::white(cfg.noise_var)),
        NoiseKind::Colored => NoiseModel::colored(
            cfg.noise_var,
            &correlation_matrix(pulse, cfg.sampling_time(), cfg.subcarriers)?,
        ),
    }
}

fn resolve_warmup(cfg: &SystemConfig, default: usize, n_blocks: usize) -> Result<usize> {
    let warmup = cfg.warmup.unwrap_or(default);
    if warmup >= n_blocks {
        return Err(Error::InvalidParameter(format!(
            "warm-up of {warmup} blocks leaves none of {n_blocks} counted"
        )));
    }
    Ok(warmup)
}

fn count_errors(
    counts: &mut ErrorCounts,
    symbols: &CVector,
    detected: &[usize],
    constellation: Constellation,
    subcarriers: usize,
) {
    let points = constellation.points();
    for (i, &idx) in detected.iter().enumerate() {
        let k = i / subcarriers;
        counts.symbols[k] += 1;
        if (points[idx] - symbols[i]).norm() > 1e-9 {
            counts.errors[k] += 1;
        }
    }
}

fn simulate_slp(
    cfg: &SystemConfig,
    ch: &DiscreteChannelSet,
    pulse: &SampledPulse,
    n_blocks: usize,
    seed: u64,
    opts: &StreamOptions,
) -> Result<(StreamResult, StreamTrace)> {
    let (m, k_users, n_ant) = (cfg.subcarriers, cfg.users, cfg.antennas);
    let r = cfg.redundancy.resolve(ch.delay, ch.order);
    let red = RedundancyPair::new(m, r);
    let p = red.block_len();
    let ts = cfg.sampling_time();
    let split = ch.delay_split(p)?;
    let sets = IbiIndexSets::covering(ch.order, p, &split)?;
    let blocks = build_toeplitz(ch, p, &split, &sets)?;
    let modulator = FrftModulator::new(m, cfg.beta)?;
    let ops = build_effective(&blocks, &modulator, &red)?;
    let corr = correlation_matrix(pulse, ts, p)?;
    let gamma = build_gamma(&modulator, &red, &corr, n_ant)?;
    let warmup = resolve_warmup(cfg, sets.forward_depth(), n_blocks)?;
    let total = n_blocks + sets.backward_depth();
    let q = cfg.qos();

    let mut sym_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1));
    let noise = noise_model(cfg, pulse)?;
    let mut state = SlpState::new(
        sets.forward_depth(),
        n_ant * m,
        SlpState::uniform_qos(k_users, m, cfg.sinr_linear(), cfg.noise_var),
    );

    let mut trace = StreamTrace {
        tx: vec![Vec::with_capacity(total); n_ant],
        counted: warmup..n_blocks,
        ..Default::default()
    };
    let (mut max_iter, mut iter_sum) = (0, 0);
    for _ in 0..total {
        let s = draw_symbols(&mut sym_rng, cfg.constellation, k_users * m);
        let out = slp_precode(&ops, &mut state, &s, cfg.constellation, &gamma, &opts.solver)?;
        if out.solution.status == QpStatus::MaxIter {
            max_iter += 1;
        }
        iter_sum += out.solution.iterations;
        for n in 0..n_ant {
            let dn = out.d.rows(n * m, m).into_owned();
            trace.tx[n].push(modulate(&modulator, &red, &dn)?);
        }
        trace.symbols.push(s);
        trace.precoded.push(out.d);
    }

    let mut counts = ErrorCounts {
        errors: vec![0; k_users],
        symbols: vec![0; k_users],
    };
    for ell in warmup..n_blocks {
        let rx = blocks.received_block(&trace.tx, ell);
        let mut clean = CVector::zeros(k_users * m);
        let mut y = CVector::zeros(k_users * m);
        for (k, yk) in rx.iter().enumerate() {
            let kept = red.jam(yk)?;
            let noisy = if opts.noiseless {
                kept.clone()
            } else {
                &kept + noise.sample(&mut noise_rng, m)
            };
            clean.rows_mut(k * m, m).copy_from(&kept);
            y.rows_mut(k * m, m).copy_from(&noisy);
        }
        let det = detect(&y, cfg.constellation, q);
        count_errors(&mut counts, &trace.symbols[ell], &det, cfg.constellation, m);
        trace.received.push(clean);
        trace.detected.push(det);
    }

    let power = stream_power(&trace.tx, pulse, ts, cfg.impedance)?;
    let mut result = metrics(
        &counts,
        &MetricParams {
            users: k_users,
            subcarriers: m,
            block_len: p,
            bits_per_symbol: cfg.constellation.bits_per_symbol(),
            sampling_time: ts,
            rolloff: cfg.rolloff,
            t_beta: cfg.t_beta(),
            power,
        },
        PrecoderKind::Slp,
    );
    result.n_blocks = n_blocks;
    result.warmup_excluded = warmup;
    result.delay = ch.delay;
    result.order = ch.order;
    result.qp_max_iter = max_iter;
    result.qp_iterations_mean = iter_sum as f64 / total as f64;
    Ok((result, trace))
}

/// Unitary `M`-point inverse DFT matrix.
fn idft_matrix(m: usize) -> CMatrix {
    let s = 1.0 / (m as f64).sqrt();
    CMatrix::from_fn(m, m, |t, f| C64::from_polar(s, 2.0 * PI * (t * f) as f64 / m as f64))
}

/// Zero-forcing over cyclic-prefix multicarrier blocks: per-subcarrier
/// precoding, unitary IDFT, cyclic prefix of length `R`, linear convolution
/// of the whole stream, prefix removal and unitary DFT at each user.
fn simulate_zf(
    cfg: &SystemConfig,
    ch: &DiscreteChannelSet,
    pulse: &SampledPulse,
    n_blocks: usize,
    seed: u64,
    opts: &StreamOptions,
) -> Result<(StreamResult, StreamTrace)> {
    let (m, k_users, n_ant) = (cfg.subcarriers, cfg.users, cfg.antennas);
    let r = cfg.redundancy.resolve(ch.delay, ch.order);
    let p = m + r;
    let ts = cfg.sampling_time();
    let warmup = resolve_warmup(cfg, 0, n_blocks)?;
    let q = cfg.qos();
    let lambda = per_subcarrier_channels(ch, m);
    let idft = idft_matrix(m);
    let dft = idft.adjoint();

    let mut sym_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 1));
    let noise = noise_model(cfg, pulse)?;

    let mut trace = StreamTrace {
        tx: vec![Vec::with_capacity(n_blocks); n_ant],
        counted: warmup..n_blocks,
        ..Default::default()
    };
    for _ in 0..n_blocks {
        let s = draw_symbols(&mut sym_rng, cfg.constellation, k_users * m);
        let d = zf_precode(&lambda, &(&s * C64::new(q, 0.0)))?;
        for n in 0..n_ant {
            let u = &idft * d.rows(n * m, m);
            let x = CVector::from_fn(p, |t, _| u[(t + m - r % m) % m]);
            trace.tx[n].push(x);
        }
        trace.symbols.push(s);
        trace.precoded.push(d);
    }

    let streams: Vec<Vec<C64>> = trace
        .tx
        .iter()
        .map(|blocks| blocks.iter().flat_map(|b| b.iter().copied()).collect())
        .collect();
    let y_full = convolve_stream(ch, &streams);
    let mut counts = ErrorCounts {
        errors: vec![0; k_users],
        symbols: vec![0; k_users],
    };
    for ell in warmup..n_blocks {
        let mut clean = CVector::zeros(k_users * m);
        let mut y = CVector::zeros(k_users * m);
        for k in 0..k_users {
            let start = ell * p + r;
            let window = CVector::from_fn(m, |t, _| y_full[k][start + t]);
            let noisy = if opts.noiseless {
                window.clone()
            } else {
                &window + noise.sample(&mut noise_rng, m)
            };
            clean.rows_mut(k * m, m).copy_from(&(&dft * &window));
            y.rows_mut(k * m, m).copy_from(&(&dft * &noisy));
        }
        let det = detect(&y, cfg.constellation, q);
        count_errors(&mut counts, &trace.symbols[ell], &det, cfg.constellation, m);
        trace.received.push(clean);
        trace.detected.push(det);
    }

    let power = stream_power(&trace.tx, pulse, ts, cfg.impedance)?;
    let mut result = metrics(
        &counts,
        &MetricParams {
            users: k_users,
            subcarriers: m,
            block_len: p,
            bits_per_symbol: cfg.constellation.bits_per_symbol(),
            sampling_time: ts,
            rolloff: cfg.rolloff,
            t_beta: cfg.t_beta(),
            power,
        },
        PrecoderKind::Zf,
    );
    result.n_blocks = n_blocks;
    result.warmup_excluded = warmup;
    result.delay = ch.delay;
    result.order = ch.order;
    Ok((result, trace))
}

/// Sample statistics for Monte Carlo aggregates.
pub mod stats {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn mean(v: &[f64]) -> f64 {
        if v.is_empty() {
            return f64::NAN;
        }
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Standard error of the mean (sample standard deviation over `sqrt(n)`).
    pub fn std_error(v: &[f64]) -> f64 {
        if v.len() < 2 {
            return f64::NAN;
        }
        let mu = mean(v);
        let var = v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (var / v.len() as f64).sqrt()
    }

    /// Percentile bootstrap interval of the mean.
    pub fn bootstrap_mean_ci(v: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
        if v.is_empty() {
            return (f64::NAN, f64::NAN);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut means: Vec<f64> = (0..resamples.max(1))
            .map(|_| (0..v.len()).map(|_| v[rng.gen_range(0..v.len())]).sum::<f64>() / v.len() as f64)
            .collect();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tail = (1.0 - level) / 2.0;
        let pick = |f: f64| means[((f * (means.len() - 1) as f64).round() as usize).min(means.len() - 1)];
        (pick(tail), pick(1.0 - tail))
    }
}
