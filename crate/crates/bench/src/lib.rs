//! Shared fixtures for the kernel benchmarks.

use ftn_slp::channel::{draw_channels, effective_channel, mix_seed};
use ftn_slp::experiment::{exp1_base, exp3_base};
use ftn_slp::interference::{build_effective, build_toeplitz, ToeplitzBlocks};
use ftn_slp::precoder::{build_gamma, Gamma, SlpState};
use ftn_slp::pulse::{correlation_matrix, make_srrc};
use ftn_slp::theory::{alpha_min, IbiIndexSets};
use ftn_slp::{CVector, Constellation, DiscreteChannelSet, EffectiveOperators, FrftModulator, QpProblem, RedundancyPair, SystemConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Exp. 3 setting at `alpha_min` for `beta`, with a quarter-delay guard.
pub fn exp3_config(beta: f64) -> SystemConfig {
    let mut cfg = exp3_base();
    cfg.beta = beta;
    cfg.alpha = alpha_min(cfg.subcarriers, beta, cfg.rolloff).min(1.0);
    cfg.redundancy = ftn_slp::config::Redundancy::Rule(ftn_slp::config::RedundancyRule::QuarterDelay);
    cfg
}

/// Exp. 1 setting at desk scale with `users` users.
pub fn exp1_config(users: usize) -> SystemConfig {
    let mut cfg = exp1_base(16);
    cfg.users = users;
    cfg
}

/// Effective discrete channel of trial `trial` under `cfg`.
pub fn channel(cfg: &SystemConfig, trial: u64) -> DiscreteChannelSet {
    let phys = draw_channels(cfg.users, cfg.antennas, &cfg.path_profile(), mix_seed(cfg.seed, trial)).unwrap();
    let pulse = make_srrc(cfg.t_beta(), cfg.rolloff, cfg.pulse_span).unwrap();
    effective_channel(&phys, &pulse, cfg.sampling_time(), cfg.threshold).unwrap()
}

/// Everything the symbol-level precoder needs for one block.
pub struct SlpFixture {
    pub blocks: ToeplitzBlocks,
    pub ops: EffectiveOperators,
    pub gamma: Gamma,
    pub state: SlpState,
    pub symbols: CVector,
    pub constellation: Constellation,
}

pub fn slp_fixture(cfg: &SystemConfig, ch: &DiscreteChannelSet) -> SlpFixture {
    let m = cfg.subcarriers;
    let r = cfg.redundancy.resolve(ch.delay, ch.order);
    let red = RedundancyPair::new(m, r);
    let p = red.block_len();
    let split = ch.delay_split(p).unwrap();
    let sets = IbiIndexSets::covering(ch.order, p, &split).unwrap();
    let blocks = build_toeplitz(ch, p, &split, &sets).unwrap();
    let modulator = FrftModulator::new(m, cfg.beta).unwrap();
    let ops = build_effective(&blocks, &modulator, &red).unwrap();
    let pulse = make_srrc(cfg.t_beta(), cfg.rolloff, cfg.pulse_span).unwrap();
    let corr = correlation_matrix(&pulse, cfg.sampling_time(), p).unwrap();
    let gamma = build_gamma(&modulator, &red, &corr, cfg.antennas).unwrap();
    let state = SlpState::new(
        sets.forward_depth(),
        cfg.antennas * m,
        SlpState::uniform_qos(cfg.users, m, cfg.sinr_linear(), cfg.noise_var),
    );
    let points = cfg.constellation.points();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let symbols = CVector::from_fn(cfg.users * m, |_, _| points[rng.gen_range(0..points.len())]);
    SlpFixture {
        blocks,
        ops,
        gamma,
        state,
        symbols,
        constellation: cfg.constellation,
    }
}

/// Strictly convex QP with `n` variables and `m` inequalities and a strictly
/// feasible point.
pub fn random_qp(n: usize, m: usize, seed: u64) -> QpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |r: usize, c: usize| DMatrix::<f64>::from_fn(r, c, |_, _| rng.sample(StandardNormal));
    let a = gauss(n, n);
    let q = a.transpose() * &a + DMatrix::identity(n, n) * 0.5;
    let c = gauss(n, 1).column(0).into_owned();
    let g = gauss(m, n);
    let x0 = gauss(n, 1).column(0).into_owned();
    let h = &g * x0 + DVector::from_element(m, 0.5);
    QpProblem::new(q, c, g, h).unwrap()
}
