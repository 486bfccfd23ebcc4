//! Multi-user MISO multicarrier downlink simulation with frequency-packed
//! faster-than-Nyquist signaling.
//!
//! The crate models a base station with `N` antennas serving `K` single-antenna
//! users over `M` subcarriers. Blocks are modulated by an inverse fractional
//! Fourier transform, padded with a configurable zero guard (zero padding at the
//! transmitter, zero jamming at the receiver), pulse shaped with a square-root
//! raised cosine and sent at a sampling time `T_s = alpha * T_1` that may be
//! shorter than the Nyquist period of the pulse.
//!
//! Two precoders are provided:
//!
//! * a per-subcarrier linear zero-forcing baseline operating on a cyclic-prefix
//!   multicarrier chain with full redundancy, and
//! * a space-time-frequency symbol-level precoder that minimizes the analog
//!   transmit energy subject to constructive-interference constraints, with the
//!   known interblock interference of past blocks folded into the constraints.
//!
//! The building blocks are organized bottom-up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`pulse`] | SRRC pulses, correlation matrices, block energy |
//! | [`multicarrier`] | IFrFT modulator, guard insertion/removal |
//! | [`theory`] | closed-form results (spectral efficiency, `alpha_min`, IBI counting) |
//! | [`channel`] | physical multipath draws and effective discrete channels |
//! | [`interference`] | Toeplitz ISI/IBI matrices and effective operators |
//! | [`qpsolver`] | dense primal-dual interior-point QP solver |
//! | [`constellation`] | PSK/QAM alphabets and nearest-point detection |
//! | [`precoder`] | zero-forcing and symbol-level precoders |
//! | [`linksim`] | block-stream simulation and figures of merit |
//! | [`config`] / [`experiment`] | scenario configuration, presets, sweeps and output |

pub mod channel;
pub mod config;
pub mod constellation;
pub mod error;
pub mod experiment;
pub mod interference;
pub mod linalg;
pub mod linksim;
pub mod multicarrier;
pub mod precoder;
pub mod pulse;
pub mod qpsolver;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};

pub use channel::{DiscreteChannelSet, PhysicalChannel};
pub use config::SystemConfig;
pub use constellation::Constellation;
pub use interference::{EffectiveOperators, ToeplitzBlocks};
pub use linksim::StreamResult;
pub use multicarrier::{FrftModulator, RedundancyPair};
pub use pulse::{CorrelationMatrix, SampledPulse};
pub use qpsolver::{QpProblem, QpSolution, QpStatus};
pub use theory::{DelaySplit, IbiIndexSets};
