//! Closed-form results on packing, acceleration, redundancy and interblock
//! interference, as executable functions.

pub mod checks;

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multicarrier::xi;
use crate::pulse::SampledPulse;

/// Folded-spectrum floor separating lossless from lossy sampling.
pub const LOSSLESS_THRESHOLD: f64 = 1e-6;

/// Group delay decomposed as `delta = q P + r`, `0 <= r < P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySplit {
    pub delta: usize,
    pub q: usize,
    pub r: usize,
    pub block_len: usize,
}

impl DelaySplit {
    pub fn new(delta: usize, block_len: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        Ok(DelaySplit {
            delta,
            q: delta / block_len,
            r: delta % block_len,
            block_len,
        })
    }
}

/// Index sets of past (forward) and future (backward) blocks interfering with
/// the current received block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IbiIndexSets {
    pub forward: Vec<usize>,
    pub backward: Vec<usize>,
    /// `ceil(nu / P) + 2`.
    pub b: usize,
    /// Largest number of blocks (current one included) that may affect a
    /// received block: `b` or `b - 1`.
    pub max_blocks: usize,
}

impl IbiIndexSets {
    pub fn forward_depth(&self) -> usize {
        self.forward.last().copied().unwrap_or(0)
    }

    pub fn backward_depth(&self) -> usize {
        self.backward.last().copied().unwrap_or(0)
    }

    /// Index sets usable for any delay `delta <= nu + P - 1`, including the
    /// memoryless `nu = 0` case excluded by [`ibi_index_sets`]. For `delta < nu`
    /// this is exactly [`ibi_index_sets`].
    pub fn covering(order: usize, block_len: usize, split: &DelaySplit) -> Result<Self> {
        if split.delta < order {
            return ibi_index_sets(order, block_len, split);
        }
        if block_len == 0 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        let b = order.div_ceil(block_len) + 2;
        let reach = order + block_len - 1;
        let forward_len = if reach >= split.delta {
            (reach - split.delta) / block_len
        } else {
            0
        };
        let backward_len = split.delta.div_ceil(block_len);
        Ok(IbiIndexSets {
            forward: (1..=forward_len).collect(),
            backward: (1..=backward_len).collect(),
            b,
            max_blocks: 1 + forward_len + backward_len,
        })
    }
}

/// Error-free spectral efficiency in bit/s/Hz.
pub fn se0(
    subcarriers: usize,
    redundancy: usize,
    alpha: f64,
    beta: f64,
    bits_per_symbol: u32,
    code_rate: f64,
    rolloff: f64,
) -> f64 {
    let m = subcarriers as f64;
    m / (m + redundancy as f64) / (alpha * xi(subcarriers, beta)) * bits_per_symbol as f64 * code_rate
        / (2.0 * (1.0 + rolloff))
}

/// Exact-arithmetic counterpart of [`se0`].
pub fn se0_exact(
    subcarriers: usize,
    redundancy: usize,
    alpha: &BigRational,
    beta: &BigRational,
    bits_per_symbol: u32,
    code_rate: &BigRational,
    rolloff: &BigRational,
) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(subcarriers));
    let r = BigRational::from_integer(BigInt::from(redundancy));
    let one = BigRational::one();
    let xi = ((&m - &one) * beta + &one) / &m;
    let bits = BigRational::from_integer(BigInt::from(bits_per_symbol));
    let two = BigRational::from_integer(BigInt::from(2));
    &m / (&m + r) / (alpha * xi) * bits * code_rate / (two * (one + rolloff))
}

/// Guard length after changing the acceleration from `alpha_ref` to `alpha`:
/// `floor((alpha_ref / alpha) R_ref)`.
pub fn redundancy_scaling(r_ref: usize, alpha_ref: f64, alpha: f64) -> usize {
    let scaled = alpha_ref / alpha * r_ref as f64;
    // absorb rounding such as 0.3 / 0.1 * 3 = 8.999...
    (scaled * (1.0 + 1e-12)).floor() as usize
}

/// Exact-arithmetic counterpart of [`redundancy_scaling`].
pub fn redundancy_scaling_exact(r_ref: usize, alpha_ref: &BigRational, alpha: &BigRational) -> usize {
    let scaled = alpha_ref / alpha * BigRational::from_integer(BigInt::from(r_ref));
    scaled.floor().to_integer().to_usize().unwrap_or(0)
}

/// Smallest acceleration factor preserving information losslessness,
/// `1 / ((1 + rho) xi_M(beta))`. Values above 1 mean no acceleration is
/// lossless.
pub fn alpha_min(subcarriers: usize, beta: f64, rolloff: f64) -> f64 {
    1.0 / ((1.0 + rolloff) * xi(subcarriers, beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LosslessReport {
    pub lossless: bool,
    /// Minimum of the folded spectrum over the frequency grid.
    pub margin: f64,
}

/// Evaluates `sum_i |F(j (omega + 2 pi i) / T_s)|^2` (normalized by `T_beta`)
/// on `grid_points` frequencies in `[0, 2 pi)` and compares its minimum to
/// [`LOSSLESS_THRESHOLD`].
pub fn lossless_check(pulse: &SampledPulse, sampling_time: f64, grid_points: usize) -> LosslessReport {
    let grid_points = grid_points.max(2);
    let reach = (pulse.band_edge() * sampling_time / (2.0 * PI)).ceil() as i64 + 1;
    let mut margin = f64::INFINITY;
    for j in 0..grid_points {
        let omega = 2.0 * PI * j as f64 / grid_points as f64;
        let folded: f64 = (-reach..=reach)
            .map(|i| pulse.power_spectrum((omega + 2.0 * PI * i as f64) / sampling_time))
            .sum();
        margin = margin.min(folded);
    }
    LosslessReport {
        lossless: margin > LOSSLESS_THRESHOLD,
        margin,
    }
}

/// Forward/backward IBI index sets and the maximum number of interfering
/// blocks for a channel of order `order` and block length `block_len`.
pub fn ibi_index_sets(order: usize, block_len: usize, split: &DelaySplit) -> Result<IbiIndexSets> {
    if block_len == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    if split.delta >= order {
        return Err(Error::DelayOutOfRange {
            delta: split.delta,
            order,
        });
    }
    let b = order.div_ceil(block_len) + 2;
    // order = (b - 3) P + rho_nu + 1
    let rho_nu = order - (b - 3) * block_len - 1;
    let max_blocks = if split.r >= 1 && split.r <= rho_nu {
        b
    } else {
        b - 1
    };
    Ok(IbiIndexSets {
        forward: (1..=b - 2 - split.q).collect(),
        backward: (1..=split.q + 1).collect(),
        b,
        max_blocks,
    })
}

/// Shortest guard that removes all backward IBI: `ceil(delta / 2)`.
pub fn min_redundancy(split: &DelaySplit) -> usize {
    split.delta.div_ceil(2)
}

/// Whether more than half of each block carries data (`M > R`).
pub fn efficiency_check(subcarriers: usize, redundancy: usize) -> bool {
    subcarriers > redundancy
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IbiFreeEfficiency {
    pub redundancy: usize,
    pub block_len: usize,
    pub efficient: bool,
    /// Efficient transmission with the minimum IBI-free guard is possible,
    /// which requires `delta < P`.
    pub compatible: bool,
}

/// Combines [`min_redundancy`] and [`efficiency_check`]: backward-IBI-free
/// efficient transmission needs `2R >= delta` and `M > R`, hence `P > delta`.
pub fn ibi_free_efficiency(subcarriers: usize, delta: usize) -> IbiFreeEfficiency {
    let redundancy = delta.div_ceil(2);
    let block_len = subcarriers + redundancy;
    let efficient = efficiency_check(subcarriers, redundancy);
    IbiFreeEfficiency {
        redundancy,
        block_len,
        efficient,
        compatible: efficient && delta < block_len,
    }
}

/// Parses a decimal literal such as `0.79` into an exact rational.
pub fn rational_from_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    if denom.is_zero() {
        return None;
    }
    Some(BigRational::new(numer, denom))
}
