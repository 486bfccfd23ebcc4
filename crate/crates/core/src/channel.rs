//! Physical multipath channels and the effective discrete-time MU-MISO channel
//! seen through the transmit/receive pulse cascade.

use std::path::Path as FsPath;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pulse::SampledPulse;
use crate::theory::DelaySplit;

/// How path delays are placed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayModel {
    /// Independent uniform delays on `[0, tau_max]`, sorted.
    Uniform { tau_max: f64 },
    /// Tapped delay line: path `i` at `i * spacing`.
    Tapped { spacing: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathProfile {
    pub n_paths: usize,
    /// Exponential power-decay constant in seconds.
    pub tau_decay: f64,
    pub delays: DelayModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub delay: f64,
    pub gain: C64,
}

/// Baseband impulse response of one antenna-user link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalChannel {
    pub paths: Vec<Path>,
    pub tau_decay: f64,
    pub seed: u64,
}

/// `K x N` links, stored user-major (`k * N + n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalChannelSet {
    pub users: usize,
    pub antennas: usize,
    pub links: Vec<PhysicalChannel>,
}

impl PhysicalChannelSet {
    pub fn link(&self, k: usize, n: usize) -> &PhysicalChannel {
        &self.links[k * self.antennas + n]
    }
}

/// SplitMix64 finalizer used to derive independent per-link and per-trial
/// seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws i.i.d. Rayleigh links with an exponentially decaying power profile.
/// Variances are normalized so the expected link power is one.
pub fn draw_channels(
    users: usize,
    antennas: usize,
    profile: &PathProfile,
    seed: u64,
) -> Result<PhysicalChannelSet> {
    if users == 0 || antennas == 0 {
        return Err(Error::InvalidParameter("K and N must be >= 1".into()));
    }
    if profile.n_paths == 0 {
        return Err(Error::InvalidParameter("at least one path is required".into()));
    }
    if profile.tau_decay < 0.0 {
        return Err(Error::InvalidParameter("decay constant must be non-negative".into()));
    }
    let mut links = Vec::with_capacity(users * antennas);
    for link in 0..users * antennas {
        let link_seed = mix_seed(seed, link as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(link_seed);
        let mut delays: Vec<f64> = match profile.delays {
            DelayModel::Uniform { tau_max } => {
                let u = Uniform::new_inclusive(0.0, tau_max.max(0.0));
                (0..profile.n_paths).map(|_| u.sample(&mut rng)).collect()
            }
            DelayModel::Tapped { spacing } => {
                (0..profile.n_paths).map(|i| i as f64 * spacing).collect()
            }
        };
        delays.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let first = delays[0];
        let weights: Vec<f64> = delays
            .iter()
            .enumerate()
            .map(|(i, &tau)| {
                if profile.tau_decay > 0.0 {
                    (-(tau - first) / profile.tau_decay).exp()
                } else if i == 0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let paths = delays
            .iter()
            .zip(&weights)
            .map(|(&delay, &w)| {
                let sd = (w / total / 2.0).sqrt();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Path {
                    delay,
                    gain: C64::new(sd * re, sd * im),
                }
            })
            .collect();
        links.push(PhysicalChannel {
            paths,
            tau_decay: profile.tau_decay,
            seed: link_seed,
        });
    }
    Ok(PhysicalChannelSet {
        users,
        antennas,
        links,
    })
}

/// Tap-magnitude threshold defining the channel order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Threshold {
    Absolute(f64),
    /// Fraction of the largest tap magnitude across all links.
    RelativeToPeak(f64),
}

impl Threshold {
    fn resolve(&self, peak: f64) -> f64 {
        match *self {
            Threshold::Absolute(eps) => eps,
            Threshold::RelativeToPeak(frac) => frac * peak,
        }
    }
}

/// Effective discrete channels `h_{k,n}[0..=nu]` sampled at `T_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteChannelSet {
    pub users: usize,
    pub antennas: usize,
    /// User-major taps, all of length `order + 1`.
    pub taps: Vec<Vec<C64>>,
    pub order: usize,
    pub sampling_time: f64,
    /// Absolute threshold used to determine `order`.
    pub threshold: f64,
    /// Sample index (in units of `T_s`) that tap 0 corresponds to.
    pub offset: i64,
    /// Group delay `delta` used when building block operators.
    pub delay: usize,
}

impl DiscreteChannelSet {
    /// Builds a channel set from explicit taps, zero-padding to a common order.
    pub fn from_taps(users: usize, antennas: usize, taps: Vec<Vec<C64>>, sampling_time: f64) -> Result<Self> {
        if taps.len() != users * antennas || taps.iter().any(|t| t.is_empty()) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} non-empty tap vectors, got {}",
                users * antennas,
                taps.len()
            )));
        }
        let len = taps.iter().map(|t| t.len()).max().unwrap_or(1);
        let taps = taps
            .into_iter()
            .map(|mut t| {
                t.resize(len, C64::new(0.0, 0.0));
                t
            })
            .collect();
        Ok(DiscreteChannelSet {
            users,
            antennas,
            taps,
            order: len - 1,
            sampling_time,
            threshold: 0.0,
            offset: 0,
            delay: 0,
        })
    }

    pub fn link(&self, k: usize, n: usize) -> &[C64] {
        &self.taps[k * self.antennas + n]
    }

    /// Tap `p` of link `(k, n)`, zero outside `0..=order`.
    pub fn tap(&self, k: usize, n: usize, p: i64) -> C64 {
        if p < 0 || p as usize > self.order {
            C64::new(0.0, 0.0)
        } else {
            self.taps[k * self.antennas + n][p as usize]
        }
    }

    pub fn with_delay(mut self, delay: usize) -> Self {
        self.delay = delay;
        self
    }

    pub fn delay_split(&self, block_len: usize) -> Result<DelaySplit> {
        DelaySplit::new(self.delay, block_len)
    }

    /// Index of the tap with the largest power summed over all links.
    pub fn peak_index(&self) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for p in 0..=self.order {
            let power: f64 = self.taps.iter().map(|t| t[p].norm_sqr()).sum();
            if power > best.1 {
                best = (p, power);
            }
        }
        best.0
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            users: self.users,
            antennas: self.antennas,
            taps: (0..self.users)
                .map(|k| {
                    (0..self.antennas)
                        .map(|n| self.link(k, n).iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
            order: self.order,
            delay: self.delay,
            sampling_time: self.sampling_time,
            threshold: self.threshold,
            offset: self.offset,
        }
    }

    pub fn from_file(file: &ChannelFile) -> Result<Self> {
        let mut taps = Vec::with_capacity(file.users * file.antennas);
        for k in 0..file.users {
            for n in 0..file.antennas {
                let link = file
                    .taps
                    .get(k)
                    .and_then(|row| row.get(n))
                    .ok_or_else(|| Error::DimensionMismatch(format!("missing link ({k}, {n})")))?;
                if link.len() != file.order + 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "link ({k}, {n}) has {} taps, order is {}",
                        link.len(),
                        file.order
                    )));
                }
                taps.push(link.iter().map(|&[re, im]| C64::new(re, im)).collect());
            }
        }
        Ok(DiscreteChannelSet {
            users: file.users,
            antennas: file.antennas,
            taps,
            order: file.order,
            sampling_time: file.sampling_time,
            threshold: file.threshold,
            offset: file.offset,
            delay: file.delay,
        })
    }

    pub fn save_json(&self, path: impl AsRef<FsPath>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(&serde_json::from_str(&text)?)
    }
}

/// JSON document for replaying a channel set: taps as `[re, im]` pairs indexed
/// `[k][n][p]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub users: usize,
    pub antennas: usize,
    pub taps: Vec<Vec<Vec<[f64; 2]>>>,
    pub order: usize,
    pub delay: usize,
    pub sampling_time: f64,
    pub threshold: f64,
    pub offset: i64,
}

/// Samples `h_{k,n}[p] = sum_i c_i (f*f)(p T_s - tau_i)` and trims to the taps
/// above the threshold. The group delay defaults to the peak tap.
pub fn effective_channel(
    phys: &PhysicalChannelSet,
    pulse: &SampledPulse,
    sampling_time: f64,
    threshold: Threshold,
) -> Result<DiscreteChannelSet> {
    if !(sampling_time > 0.0) {
        return Err(Error::InvalidParameter("sampling time must be positive".into()));
    }
    let reach = pulse.correlation_support();
    let tau_min = phys
        .links
        .iter()
        .flat_map(|l| l.paths.iter().map(|p| p.delay))
        .fold(f64::INFINITY, f64::min);
    let tau_max = phys
        .links
        .iter()
        .flat_map(|l| l.paths.iter().map(|p| p.delay))
        .fold(f64::NEG_INFINITY, f64::max);
    let p_lo = ((tau_min - reach) / sampling_time).floor() as i64;
    let p_hi = ((tau_max + reach) / sampling_time).ceil() as i64;
    let span = (p_hi - p_lo + 1) as usize;
    let raw: Vec<Vec<C64>> = phys
        .links
        .iter()
        .map(|link| {
            (0..span)
                .map(|i| {
                    let t = (p_lo + i as i64) as f64 * sampling_time;
                    link.paths
                        .iter()
                        .map(|path| path.gain * pulse.autocorrelation(t - path.delay))
                        .sum()
                })
                .collect()
        })
        .collect();
    let peak = raw
        .iter()
        .flat_map(|v| v.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let eps = threshold.resolve(peak);
    let above = |i: usize| raw.iter().any(|v| v[i].norm() > eps);
    let first = (0..span).find(|&i| above(i)).ok_or(Error::EmptyChannel(eps))?;
    let last = (0..span).rev().find(|&i| above(i)).unwrap_or(first);
    let taps = raw.iter().map(|v| v[first..=last].to_vec()).collect();
    let mut set = DiscreteChannelSet {
        users: phys.users,
        antennas: phys.antennas,
        taps,
        order: last - first,
        sampling_time,
        threshold: eps,
        offset: p_lo + first as i64,
        delay: 0,
    };
    set.delay = set.peak_index();
    Ok(set)
}

/// Group delay at the tap of largest total power, split for block length `P`.
pub fn default_group_delay(ch: &DiscreteChannelSet, block_len: usize) -> Result<DelaySplit> {
    DelaySplit::new(ch.peak_index(), block_len)
}
