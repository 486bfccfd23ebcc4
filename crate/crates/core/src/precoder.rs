//! Per-subcarrier zero-forcing baseline and the space-time-frequency
//! symbol-level precoder with constructive-interference constraints.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::channel::DiscreteChannelSet;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::interference::EffectiveOperators;
use crate::linalg::{hermitian_defect, unstack_real, CMatrix, CVector, C64};
use crate::multicarrier::{FrftModulator, RedundancyPair};
use crate::pulse::CorrelationMatrix;
use crate::qpsolver::{self, embed_complex, HalfPlane, QpSolution, QpStatus, SolverOptions};

/// `K x N` frequency responses `sum_p h[p] exp(-j 2 pi m p / M)` for each of
/// the `M` subcarriers.
pub fn per_subcarrier_channels(ch: &DiscreteChannelSet, subcarriers: usize) -> Vec<CMatrix> {
    let m_f = subcarriers as f64;
    (0..subcarriers)
        .map(|m| {
            CMatrix::from_fn(ch.users, ch.antennas, |k, n| {
                ch.link(k, n)
                    .iter()
                    .enumerate()
                    .map(|(p, h)| h * C64::from_polar(1.0, -2.0 * PI * (m * p) as f64 / m_f))
                    .sum()
            })
        })
        .collect()
}

/// Zero-forcing precoding `d(m) = H(m)^H (H(m) H(m)^H)^-1 s(m)` per
/// subcarrier. Symbols are indexed `k M + m`, the output `n M + m`.
/// Relative pivot floor of the per-subcarrier Gram matrices.
const RANK_TOL: f64 = 1e-12;

pub fn zf_precode(channels: &[CMatrix], symbols: &CVector) -> Result<CVector> {
    let m_total = channels.len();
    let (k_users, n_ant) = channels.first().map(|h| h.shape()).unwrap_or((0, 0));
    if symbols.len() != k_users * m_total {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols for {k_users} users and {m_total} subcarriers",
            symbols.len()
        )));
    }
    let mut d = CVector::zeros(n_ant * m_total);
    for (m, h) in channels.iter().enumerate() {
        let gram = h * h.adjoint();
        let scale = gram.diagonal().iter().fold(0.0f64, |a, z| a.max(z.re));
        let chol = Cholesky::new(gram).ok_or(Error::RankDeficient(m))?;
        // pivots below this are numerically zero
        let floor = RANK_TOL * scale.max(f64::MIN_POSITIVE);
        if chol.l_dirty().diagonal().iter().any(|z| z.re * z.re <= floor) {
            return Err(Error::RankDeficient(m));
        }
        let s_m = CVector::from_fn(k_users, |k, _| symbols[k * m_total + m]);
        let d_m = h.adjoint() * chol.solve(&s_m);
        if !d_m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::RankDeficient(m));
        }
        for n in 0..n_ant {
            d[n * m_total + m] = d_m[n];
        }
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QamClass {
    Inner,
    Edge,
    Corner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CiKind {
    Psk { order: usize },
    Qam { order: usize, class: QamClass },
}

/// Constructive-interference region of one scaled symbol: all `y` with
/// `Re(a y) >= beta` for every half-plane `(a, beta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CiRegion {
    pub symbol: C64,
    pub kind: CiKind,
    pub halfplanes: Vec<(C64, f64)>,
}

impl CiRegion {
    pub fn contains(&self, y: C64, tol: f64) -> bool {
        self.halfplanes.iter().all(|(a, beta)| (a * y).re >= beta - tol)
    }

    /// Splits the half-planes into pinned directions (opposite pairs, kept as
    /// one equality) and genuine inequalities.
    pub fn split_pinned(&self) -> (Vec<(C64, f64)>, Vec<(C64, f64)>) {
        let mut pinned = Vec::new();
        let mut free = Vec::new();
        let mut used = vec![false; self.halfplanes.len()];
        for i in 0..self.halfplanes.len() {
            if used[i] {
                continue;
            }
            let (a, beta) = self.halfplanes[i];
            let partner = (i + 1..self.halfplanes.len()).find(|&j| {
                let (b, gamma) = self.halfplanes[j];
                !used[j] && (a + b).norm() < 1e-12 && (beta + gamma).abs() < 1e-12
            });
            match partner {
                Some(j) => {
                    used[j] = true;
                    pinned.push((a, beta));
                }
                None => free.push((a, beta)),
            }
        }
        (pinned, free)
    }
}

/// CI region of `symbol` scaled by `q`. PSK regions are the cone with apex
/// `q s` bounded by lines parallel to the two decision boundaries. 16-QAM
/// inner levels are pinned to `q s`, outer levels may move outward.
pub fn ci_region(constellation: Constellation, symbol: C64, q: f64) -> Result<CiRegion> {
    constellation.index_of(symbol)?;
    match constellation {
        Constellation::Qpsk | Constellation::Psk8 => {
            let order = constellation.order();
            let phi = PI / order as f64;
            let rot = C64::from_polar(1.0, -symbol.arg());
            let halfplanes = vec![
                (rot * C64::new(phi.sin(), phi.cos()), q * phi.sin()),
                (rot * C64::new(phi.sin(), -phi.cos()), q * phi.sin()),
            ];
            Ok(CiRegion {
                symbol,
                kind: CiKind::Psk { order },
                halfplanes,
            })
        }
        Constellation::Qam16 => {
            let outer = 2.0 / 10f64.sqrt();
            let mut halfplanes = Vec::with_capacity(4);
            let mut relaxed = 0;
            // a = 1 picks the real part, a = -j the imaginary part
            for (axis, value) in [(C64::new(1.0, 0.0), symbol.re), (C64::new(0.0, -1.0), symbol.im)] {
                if value.abs() > outer {
                    halfplanes.push((axis * value.signum(), q * value.abs()));
                    relaxed += 1;
                } else {
                    halfplanes.push((axis, q * value));
                    halfplanes.push((-axis, -q * value));
                }
            }
            let class = match relaxed {
                0 => QamClass::Inner,
                1 => QamClass::Edge,
                _ => QamClass::Corner,
            };
            Ok(CiRegion {
                symbol,
                kind: CiKind::Qam { order: 16, class },
                halfplanes,
            })
        }
    }
}

/// CI regions for every entry of a stacked symbol vector.
pub fn ci_constraints(symbols: &CVector, qos: &[f64], constellation: Constellation) -> Result<Vec<CiRegion>> {
    if qos.len() != symbols.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} QoS values for {} symbols",
            qos.len(),
            symbols.len()
        )));
    }
    symbols
        .iter()
        .zip(qos)
        .map(|(&s, &q)| ci_region(constellation, s, q))
        .collect()
}

/// Block-diagonal energy matrix `I_N kron B` with
/// `B = W Sigma^* A' C_f A Sigma W^H`.
#[derive(Clone, Debug)]
pub struct Gamma {
    pub block: CMatrix,
    pub antennas: usize,
}

impl Gamma {
    pub fn dim(&self) -> usize {
        self.block.nrows() * self.antennas
    }

    pub fn to_dense(&self) -> CMatrix {
        let m = self.block.nrows();
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for n in 0..self.antennas {
            out.view_mut((n * m, n * m), (m, m)).copy_from(&self.block);
        }
        out
    }

    /// `d^H Gamma d`.
    pub fn quadratic_form(&self, d: &CVector) -> f64 {
        let m = self.block.nrows();
        (0..self.antennas)
            .map(|n| {
                let dn = d.rows(n * m, m);
                (dn.adjoint() * &self.block * dn)[(0, 0)].re
            })
            .sum()
    }
}

pub fn build_gamma(
    modulator: &FrftModulator,
    red: &RedundancyPair,
    corr: &CorrelationMatrix,
    antennas: usize,
) -> Result<Gamma> {
    let (m, g) = (red.subcarriers(), red.guard_len());
    if corr.size() != red.block_len() || modulator.subcarriers() != m {
        return Err(Error::DimensionMismatch(format!(
            "correlation of size {}, block length {}, modulator of {} subcarriers",
            corr.size(),
            red.block_len(),
            modulator.subcarriers()
        )));
    }
    let s = modulator.synthesis();
    let c = corr.entries.view((g, g), (m, m)).map(|v| C64::new(v, 0.0));
    let raw = s.adjoint() * c * &s;
    let defect = hermitian_defect(&raw);
    if defect > 1e-10 * raw.camax().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let block = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    if Cholesky::new(block.clone()).is_none() {
        return Err(Error::NotPositiveDefinite(
            "energy matrix; the pulse truncation is too short, increase the span".into(),
        ));
    }
    Ok(Gamma { block, antennas })
}

/// Precoder memory: the most recent precoded blocks (front = previous block)
/// and the per-symbol QoS scaling `q`.
#[derive(Clone, Debug)]
pub struct SlpState {
    pub depth: usize,
    pub history: VecDeque<CVector>,
    pub qos: Vec<f64>,
    pub blocks_done: usize,
}

impl SlpState {
    /// Cold start: all past blocks are zero.
    pub fn new(depth: usize, dim: usize, qos: Vec<f64>) -> Self {
        SlpState {
            depth,
            history: (0..depth).map(|_| CVector::zeros(dim)).collect(),
            qos,
            blocks_done: 0,
        }
    }

    /// `q_k = sqrt(gamma_k sigma^2)` replicated over `M` subcarriers.
    pub fn uniform_qos(users: usize, subcarriers: usize, sinr_linear: f64, noise_var: f64) -> Vec<f64> {
        vec![(sinr_linear * noise_var).sqrt(); users * subcarriers]
    }

    pub fn push(&mut self, d: CVector) {
        if self.depth > 0 {
            self.history.pop_back();
            self.history.push_front(d);
        }
        self.blocks_done += 1;
    }

    /// Known interference `sum_b H_f[b] d[l - b]` at the receivers.
    pub fn forward_ibi(&self, ops: &EffectiveOperators) -> CVector {
        let mut acc = CVector::zeros(ops.isi.nrows());
        for (&b, mat) in &ops.forward {
            if let Some(d) = self.history.get(b - 1) {
                acc += mat * d;
            }
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct SlpOutput {
    pub d: CVector,
    pub solution: QpSolution,
    /// `d^H Gamma d`.
    pub energy: f64,
}

/// Solves `min d^H Gamma d` s.t. `H_isi d + sum_b H_f[b] d[l-b]` lies in the CI
/// region of every symbol, then records `d` in the history.
pub fn slp_precode(
    ops: &EffectiveOperators,
    state: &mut SlpState,
    symbols: &CVector,
    constellation: Constellation,
    gamma: &Gamma,
    opts: &SolverOptions,
) -> Result<SlpOutput> {
    let rows = ops.isi.nrows();
    if symbols.len() != rows || gamma.dim() != ops.isi.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols, operator {}x{}, energy matrix of dimension {}",
            symbols.len(),
            rows,
            ops.isi.ncols(),
            gamma.dim()
        )));
    }
    let regions = ci_constraints(symbols, &state.qos, constellation)?;
    let ibi = state.forward_ibi(ops);
    let mut inequalities = Vec::with_capacity(2 * rows);
    let mut equalities = Vec::new();
    for (i, region) in regions.iter().enumerate() {
        let h_row = ops.isi.row(i);
        let (pinned, free) = region.split_pinned();
        // Re(a (h_i d + ibi_i)) >= beta  ->  Re(v^H d) >= beta - Re(a ibi_i)
        let make = |(a, beta): (C64, f64)| HalfPlane {
            a: CVector::from_iterator(h_row.len(), h_row.iter().map(|h| (a * h).conj())),
            beta: beta - (a * ibi[i]).re,
        };
        equalities.extend(pinned.into_iter().map(make));
        inequalities.extend(free.into_iter().map(make));
    }
    let problem = embed_complex(&gamma.to_dense(), &inequalities, &equalities)?;
    let solution = qpsolver::solve(&problem, opts)?;
    if solution.status == QpStatus::Infeasible {
        return Err(Error::QpFailure {
            status: solution.status,
            block: state.blocks_done,
        });
    }
    let d = unstack_real(&solution.x);
    let energy = gamma.quadratic_form(&d);
    state.push(d.clone());
    Ok(SlpOutput { d, solution, energy })
}

/// Least-squares point `H^+ (q s - ibi)` meeting every CI region on its apex;
/// used as a feasibility witness for full-row-rank operators.
pub fn apex_point(ops: &EffectiveOperators, state: &SlpState, symbols: &CVector) -> Result<CVector> {
    let target = CVector::from_fn(symbols.len(), |i, _| symbols[i] * state.qos[i]) - state.forward_ibi(ops);
    let h = &ops.isi;
    let chol = Cholesky::new(h * h.adjoint()).ok_or(Error::RankDeficient(0))?;
    Ok(h.adjoint() * chol.solve(&target))
}
