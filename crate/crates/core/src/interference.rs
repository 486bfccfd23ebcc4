//! Toeplitz ISI / IBI block matrices and the stacked effective operators seen
//! by the precoder after guard insertion and removal.

use std::collections::BTreeMap;

use crate::channel::DiscreteChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::multicarrier::{FrftModulator, RedundancyPair};
use crate::theory::{DelaySplit, IbiIndexSets};

/// Square Toeplitz matrix stored by its `2 size - 1` diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct Toeplitz {
    size: usize,
    /// `diag[r - c + size - 1]` is entry `(r, c)`.
    diag: Vec<C64>,
}

impl Toeplitz {
    pub fn from_diagonals(size: usize, diag: Vec<C64>) -> Result<Self> {
        if size == 0 || diag.len() != 2 * size - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonals for a {size}x{size} Toeplitz matrix",
                diag.len()
            )));
        }
        Ok(Toeplitz { size, diag })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.diag[r + self.size - 1 - c]
    }

    pub fn is_zero(&self) -> bool {
        self.diag.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_fn(self.size, self.size, |r, c| self.entry(r, c))
    }

    /// Dense `rows x cols` sub-block starting at `(r0, c0)`.
    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |r, c| self.entry(r0 + r, c0 + c))
    }

    pub fn matvec(&self, x: &CVector) -> CVector {
        CVector::from_fn(self.size, |r, _| (0..self.size).map(|c| self.entry(r, c) * x[c]).sum())
    }

    /// Adds `self * x` into `out`.
    pub fn matvec_acc(&self, x: &CVector, out: &mut CVector) {
        for r in 0..self.size {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..self.size {
                acc += self.entry(r, c) * x[c];
            }
            out[r] += acc;
        }
    }
}

/// Toeplitz block of link `(k, n)` with entries `h[p_r - p_c + shift]`.
pub fn toeplitz_block(ch: &DiscreteChannelSet, k: usize, n: usize, block_len: usize, shift: i64) -> Toeplitz {
    let p = block_len as i64;
    let diag = (0..2 * block_len - 1)
        .map(|i| ch.tap(k, n, i as i64 - (p - 1) + shift))
        .collect();
    Toeplitz {
        size: block_len,
        diag,
    }
}

/// ISI and IBI matrices of every link. `forward[b]` multiplies the block sent
/// `b` periods earlier, `backward[b]` the block sent `b` periods later.
#[derive(Clone, Debug)]
pub struct ToeplitzBlocks {
    pub users: usize,
    pub antennas: usize,
    pub block_len: usize,
    pub split: DelaySplit,
    pub sets: IbiIndexSets,
    pub isi: Vec<Toeplitz>,
    pub forward: BTreeMap<usize, Vec<Toeplitz>>,
    pub backward: BTreeMap<usize, Vec<Toeplitz>>,
}

impl ToeplitzBlocks {
    pub fn isi(&self, k: usize, n: usize) -> &Toeplitz {
        &self.isi[k * self.antennas + n]
    }

    pub fn forward(&self, b: usize, k: usize, n: usize) -> Option<&Toeplitz> {
        self.forward.get(&b).map(|v| &v[k * self.antennas + n])
    }

    pub fn backward(&self, b: usize, k: usize, n: usize) -> Option<&Toeplitz> {
        self.backward.get(&b).map(|v| &v[k * self.antennas + n])
    }

    /// Received block `ell` of every user from the per-antenna transmitted
    /// blocks `tx[n][ell]`; blocks outside the stream count as zero.
    pub fn received_block(&self, tx: &[Vec<CVector>], ell: usize) -> Vec<CVector> {
        let mut out = vec![CVector::zeros(self.block_len); self.users];
        for (k, y) in out.iter_mut().enumerate() {
            for (n, stream) in tx.iter().enumerate() {
                if let Some(x) = stream.get(ell) {
                    self.isi(k, n).matvec_acc(x, y);
                }
                for (&b, mats) in &self.forward {
                    if let Some(x) = ell.checked_sub(b).and_then(|i| stream.get(i)) {
                        mats[k * self.antennas + n].matvec_acc(x, y);
                    }
                }
                for (&b, mats) in &self.backward {
                    if let Some(x) = stream.get(ell + b) {
                        mats[k * self.antennas + n].matvec_acc(x, y);
                    }
                }
            }
        }
        out
    }
}

/// Builds the ISI, forward-IBI and backward-IBI matrices for the blocks in
/// `sets`.
pub fn build_toeplitz(
    ch: &DiscreteChannelSet,
    block_len: usize,
    split: &DelaySplit,
    sets: &IbiIndexSets,
) -> Result<ToeplitzBlocks> {
    if block_len == 0 || split.block_len != block_len {
        return Err(Error::DimensionMismatch(format!(
            "delay split for P = {}, requested P = {block_len}",
            split.block_len
        )));
    }
    let links = ch.users * ch.antennas;
    let delta = split.delta as i64;
    let p = block_len as i64;
    let per_link = |shift: i64| -> Vec<Toeplitz> {
        (0..links)
            .map(|i| toeplitz_block(ch, i / ch.antennas, i % ch.antennas, block_len, shift))
            .collect()
    };
    Ok(ToeplitzBlocks {
        users: ch.users,
        antennas: ch.antennas,
        block_len,
        split: *split,
        sets: sets.clone(),
        isi: per_link(delta),
        forward: sets.forward.iter().map(|&b| (b, per_link(delta + b as i64 * p))).collect(),
        backward: sets.backward.iter().map(|&b| (b, per_link(delta - b as i64 * p))).collect(),
    })
}

/// Stacked `KM x NM` maps from the per-antenna symbol-domain vectors of one
/// block to the received samples kept after guard removal.
#[derive(Clone, Debug)]
pub struct EffectiveOperators {
    pub users: usize,
    pub antennas: usize,
    pub subcarriers: usize,
    pub isi: CMatrix,
    pub forward: BTreeMap<usize, CMatrix>,
    /// Residual backward IBI; zero whenever the guard covers half the delay.
    pub backward: BTreeMap<usize, CMatrix>,
}

impl EffectiveOperators {
    pub fn backward_is_zero(&self) -> bool {
        self.backward.values().all(|m| m.iter().all(|z| *z == C64::new(0.0, 0.0)))
    }
}

fn stack(
    mats: &[Toeplitz],
    users: usize,
    antennas: usize,
    red: &RedundancyPair,
    synthesis: &CMatrix,
) -> CMatrix {
    let m = red.subcarriers();
    let g = red.guard_len();
    let mut out = CMatrix::zeros(users * m, antennas * m);
    for k in 0..users {
        for n in 0..antennas {
            // R H A keeps the first M rows and the last M columns.
            let block = mats[k * antennas + n].sub_block(0, g, m, m) * synthesis;
            out.view_mut((k * m, n * m), (m, m)).copy_from(&block);
        }
    }
    out
}

pub fn build_effective(
    blocks: &ToeplitzBlocks,
    modulator: &FrftModulator,
    red: &RedundancyPair,
) -> Result<EffectiveOperators> {
    if red.block_len() != blocks.block_len || red.subcarriers() != modulator.subcarriers() {
        return Err(Error::DimensionMismatch(format!(
            "blocks of length {}, guard pair {}+{}, modulator of {} subcarriers",
            blocks.block_len,
            red.subcarriers(),
            red.guard_len(),
            modulator.subcarriers()
        )));
    }
    let synthesis = modulator.synthesis();
    let (k, n) = (blocks.users, blocks.antennas);
    Ok(EffectiveOperators {
        users: k,
        antennas: n,
        subcarriers: red.subcarriers(),
        isi: stack(&blocks.isi, k, n, red, &synthesis),
        forward: blocks
            .forward
            .iter()
            .map(|(&b, mats)| (b, stack(mats, k, n, red, &synthesis)))
            .collect(),
        backward: blocks
            .backward
            .iter()
            .map(|(&b, mats)| (b, stack(mats, k, n, red, &synthesis)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::ibi_index_sets;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn memoryless_channel_is_scaled_identity() {
        let ch = DiscreteChannelSet::from_taps(1, 1, vec![vec![C64::new(0.4, -0.3)]], 1.0).unwrap();
        let split = DelaySplit::new(0, 3).unwrap();
        let sets = IbiIndexSets::covering(0, 3, &split).unwrap();
        let blocks = build_toeplitz(&ch, 3, &split, &sets).unwrap();
        let expected = CMatrix::identity(3, 3) * C64::new(0.4, -0.3);
        assert_eq!(blocks.isi(0, 0).to_dense(), expected);
        assert!(blocks.forward.is_empty() && blocks.backward.is_empty());
    }

    #[test]
    fn three_tap_example() {
        let (h0, h1, h2) = (c(1.0), c(2.0), c(3.0));
        let ch = DiscreteChannelSet::from_taps(1, 1, vec![vec![h0, h1, h2]], 1.0).unwrap();
        let split = DelaySplit::new(1, 2).unwrap();
        let sets = ibi_index_sets(2, 2, &split).unwrap();
        let blocks = build_toeplitz(&ch, 2, &split, &sets).unwrap();
        let z = c(0.0);
        assert_eq!(
            blocks.isi(0, 0).to_dense(),
            CMatrix::from_row_slice(2, 2, &[h1, h0, h2, h1])
        );
        assert_eq!(
            blocks.forward(1, 0, 0).unwrap().to_dense(),
            CMatrix::from_row_slice(2, 2, &[z, h2, z, z])
        );
        assert_eq!(
            blocks.backward(1, 0, 0).unwrap().to_dense(),
            CMatrix::from_row_slice(2, 2, &[z, z, h0, z])
        );
    }

    #[test]
    fn scalar_effective_operator() {
        let ch = DiscreteChannelSet::from_taps(1, 1, vec![vec![C64::new(0.7, 0.2)]], 1.0).unwrap();
        let split = DelaySplit::new(0, 1).unwrap();
        let sets = IbiIndexSets::covering(0, 1, &split).unwrap();
        let blocks = build_toeplitz(&ch, 1, &split, &sets).unwrap();
        let eff = build_effective(&blocks, &FrftModulator::new(1, 0.6).unwrap(), &RedundancyPair::new(1, 0)).unwrap();
        assert!((eff.isi[(0, 0)] - C64::new(0.7, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_guard() {
        let ch = DiscreteChannelSet::from_taps(1, 1, vec![vec![c(1.0), c(0.5)]], 1.0).unwrap();
        let split = DelaySplit::new(0, 4).unwrap();
        let sets = ibi_index_sets(1, 4, &split).unwrap();
        let blocks = build_toeplitz(&ch, 4, &split, &sets).unwrap();
        let res = build_effective(&blocks, &FrftModulator::new(4, 1.0).unwrap(), &RedundancyPair::new(4, 1));
        assert!(matches!(res, Err(Error::DimensionMismatch(_))));
    }
}
