//! Unit-energy PSK/QAM alphabets and nearest-point detection.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constellation {
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "8psk")]
    Psk8,
    #[serde(rename = "16qam")]
    Qam16,
}

/// Amplitude levels of each 16-QAM axis, before the `1/sqrt(10)` scaling.
const QAM16_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Tolerance used when matching a symbol against the alphabet.
const MATCH_TOL: f64 = 1e-9;

impl Constellation {
    pub fn order(&self) -> usize {
        match self {
            Constellation::Qpsk => 4,
            Constellation::Psk8 => 8,
            Constellation::Qam16 => 16,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order().trailing_zeros()
    }

    pub fn is_psk(&self) -> bool {
        !matches!(self, Constellation::Qam16)
    }

    /// Points in index order. PSK points sit at `pi/M + 2 pi i / M`; 16-QAM
    /// points are row-major over the real then imaginary level.
    pub fn points(&self) -> Vec<C64> {
        match self {
            Constellation::Qpsk | Constellation::Psk8 => {
                let m = self.order() as f64;
                (0..self.order())
                    .map(|i| C64::from_polar(1.0, PI / m + 2.0 * PI * i as f64 / m))
                    .collect()
            }
            Constellation::Qam16 => {
                let s = 10f64.sqrt();
                QAM16_LEVELS
                    .iter()
                    .flat_map(|&re| QAM16_LEVELS.iter().map(move |&im| C64::new(re / s, im / s)))
                    .collect()
            }
        }
    }

    pub fn point(&self, index: usize) -> C64 {
        self.points()[index]
    }

    pub fn index_of(&self, symbol: C64) -> Result<usize> {
        self.points()
            .iter()
            .position(|p| (p - symbol).norm() < MATCH_TOL)
            .ok_or_else(|| Error::SymbolNotInConstellation(format!("{symbol}"), self.to_string()))
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest(&self, y: C64) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.points().iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constellation::Qpsk => "qpsk",
            Constellation::Psk8 => "8psk",
            Constellation::Qam16 => "16qam",
        })
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4psk" => Ok(Constellation::Qpsk),
            "8psk" => Ok(Constellation::Psk8),
            "16qam" => Ok(Constellation::Qam16),
            other => Err(Error::InvalidParameter(format!("unknown constellation '{other}'"))),
        }
    }
}
