//! Fractional-Fourier multicarrier modulation and zero-padding / zero-jamming
//! guard handling.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Bandwidth fraction `((M-1) beta + 1) / M` occupied by a block packed with
/// factor `beta`.
pub fn xi(subcarriers: usize, beta: f64) -> f64 {
    let m = subcarriers as f64;
    ((m - 1.0) * beta + 1.0) / m
}

/// Nyquist period of the pulse matched to the packed spectrum, `T_1 / xi`.
pub fn t_beta(t1: f64, subcarriers: usize, beta: f64) -> f64 {
    t1 / xi(subcarriers, beta)
}

/// Inverse fractional Fourier transform followed by the centering frequency
/// shift (which also carries the `1/sqrt(M)` window).
#[derive(Clone, Debug)]
pub struct FrftModulator {
    subcarriers: usize,
    packing: f64,
    /// `W_beta^H`, entry `(m, m')` equal to `exp(j 2 pi beta m m' / M)`.
    ifrft: CMatrix,
    /// Diagonal of `Sigma_beta`.
    shift: Vec<C64>,
}

impl FrftModulator {
    pub fn new(subcarriers: usize, packing: f64) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::InvalidParameter("at least one subcarrier is required".into()));
        }
        if !(packing > 0.0 && packing <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "packing factor must lie in (0, 1], got {packing}"
            )));
        }
        let m = subcarriers as f64;
        let ifrft = CMatrix::from_fn(subcarriers, subcarriers, |r, c| {
            C64::from_polar(1.0, 2.0 * PI * packing * (r * c) as f64 / m)
        });
        let shift = (0..subcarriers)
            .map(|k| C64::from_polar(1.0 / m.sqrt(), -PI * packing * (m - 1.0) / m * k as f64))
            .collect();
        Ok(FrftModulator {
            subcarriers,
            packing,
            ifrft,
            shift,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn packing(&self) -> f64 {
        self.packing
    }

    pub fn ifrft(&self) -> &CMatrix {
        &self.ifrft
    }

    pub fn shift_diagonal(&self) -> &[C64] {
        &self.shift
    }

    /// The `M x M` synthesis map `Sigma_beta W_beta^H`.
    pub fn synthesis(&self) -> CMatrix {
        let mut s = self.ifrft.clone();
        for (r, mut row) in s.row_iter_mut().enumerate() {
            row *= self.shift[r];
        }
        s
    }

    /// Condition number of the synthesis map; 1 at `beta = 1`.
    pub fn condition_number(&self) -> f64 {
        crate::linalg::condition_number(&self.synthesis())
    }
}

/// Guard of `R` zeros prepended at the transmitter (`A = [0; I_M]`) and the
/// trailing `R` samples discarded at the receiver (`R = [I_M, 0]`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RedundancyPair {
    subcarriers: usize,
    guard_len: usize,
}

impl RedundancyPair {
    pub fn new(subcarriers: usize, guard_len: usize) -> Self {
        RedundancyPair {
            subcarriers,
            guard_len,
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn guard_len(&self) -> usize {
        self.guard_len
    }

    /// Block length `P = M + R`.
    pub fn block_len(&self) -> usize {
        self.subcarriers + self.guard_len
    }

    /// Dense `P x M` padding matrix.
    pub fn add_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.block_len(), self.subcarriers, |r, c| {
            if r == c + self.guard_len {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Dense `M x P` jamming matrix.
    pub fn remove_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.subcarriers, self.block_len(), |r, c| {
            if r == c {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn pad(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.subcarriers {
            return Err(Error::DimensionMismatch(format!(
                "padding expects {} samples, got {}",
                self.subcarriers,
                v.len()
            )));
        }
        let mut out = CVector::zeros(self.block_len());
        out.rows_mut(self.guard_len, self.subcarriers).copy_from(v);
        Ok(out)
    }

    pub fn jam(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.block_len() {
            return Err(Error::DimensionMismatch(format!(
                "jamming expects {} samples, got {}",
                self.block_len(),
                v.len()
            )));
        }
        Ok(v.rows(0, self.subcarriers).into_owned())
    }
}

/// `x = A Sigma_beta W_beta^H d`.
pub fn modulate(modulator: &FrftModulator, red: &RedundancyPair, d: &CVector) -> Result<CVector> {
    if d.len() != modulator.subcarriers() || red.subcarriers() != modulator.subcarriers() {
        return Err(Error::DimensionMismatch(format!(
            "modulator of {} subcarriers, guard pair of {}, input of {}",
            modulator.subcarriers(),
            red.subcarriers(),
            d.len()
        )));
    }
    let mut y = modulator.ifrft() * d;
    for (v, s) in y.iter_mut().zip(modulator.shift_diagonal()) {
        *v *= s;
    }
    red.pad(&y)
}
