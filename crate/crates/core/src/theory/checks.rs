//! Executable property suite for the closed-form results, used by the
//! `check-theory` command.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    alpha_min, ibi_index_sets, lossless_check, min_redundancy, redundancy_scaling_exact, se0_exact,
    DelaySplit,
};
use crate::channel::DiscreteChannelSet;
use crate::interference::{build_effective, build_toeplitz, toeplitz_block};
use crate::linalg::C64;
use crate::multicarrier::{t_beta, xi, FrftModulator, RedundancyPair};
use crate::pulse::make_srrc;
use crate::theory::IbiIndexSets;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Blocks that actually interfere for a dense channel, found by testing
/// every Toeplitz matrix entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScannedBlocks {
    pub forward: Vec<usize>,
    pub backward: Vec<usize>,
}

impl ScannedBlocks {
    pub fn count(&self) -> usize {
        1 + self.forward.len() + self.backward.len()
    }
}

/// Scans link `(0, 0)` of `ch` for nonzero forward and backward IBI
/// matrices at the delay in `split`.
pub fn scan_interfering_blocks(ch: &DiscreteChannelSet, split: &DelaySplit) -> ScannedBlocks {
    let p = split.block_len;
    let depth = (ch.order + split.delta) / p + 2;
    let nonzero = |shift: i64| !toeplitz_block(ch, 0, 0, p, shift).is_zero();
    let delta = split.delta as i64;
    let p = p as i64;
    ScannedBlocks {
        forward: (1..=depth).filter(|&b| nonzero(delta + b as i64 * p)).collect(),
        backward: (1..=depth).filter(|&b| nonzero(delta - b as i64 * p)).collect(),
    }
}

fn dense_channel(order: usize) -> DiscreteChannelSet {
    DiscreteChannelSet::from_taps(1, 1, vec![vec![C64::new(1.0, 0.0); order + 1]], 1.0)
        .expect("non-empty taps")
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn check_alpha_min_table() -> CheckOutcome {
    let rows = [(0.80, 0.9923), (0.90, 0.8858)];
    let mut ok = true;
    let mut detail = String::new();
    for (beta, expected) in rows {
        let got = alpha_min(32, beta, 0.25);
        ok &= (got - expected).abs() <= 1e-3;
        detail += &format!("beta={beta}: {got:.5}; ");
    }
    for m in [1, 16, 32, 64, 1024] {
        ok &= alpha_min(m, 1.0, 0.25) == 0.8;
    }
    detail += "beta=1: 0.8 for all M";
    CheckOutcome::new("alpha_min table", ok, detail)
}

pub fn check_bandwidth_factor() -> CheckOutcome {
    let exact = (rational(15, 1) * rational(79, 100) + BigRational::one()) / rational(16, 1);
    let ok = exact == rational(803_125, 1_000_000) && (xi(16, 0.79) - 0.803125).abs() < 1e-15;
    CheckOutcome::new("bandwidth factor", ok, format!("xi(16, 0.79) = {exact} = {}", xi(16, 0.79)))
}

/// Exhaustive containment of the scanned interfering blocks in the index
/// sets, plus the exact block count.
pub fn check_ibi_containment(max_order: usize, max_block: usize) -> CheckOutcome {
    let mut cases = 0usize;
    let mut failures = Vec::new();
    for order in 1..=max_order {
        let ch = dense_channel(order);
        for p in 1..=max_block {
            for delta in 0..order {
                cases += 1;
                let split = DelaySplit::new(delta, p).expect("p >= 1");
                let sets = ibi_index_sets(order, p, &split).expect("delta < order");
                let scan = scan_interfering_blocks(&ch, &split);
                let contained = scan.forward.iter().all(|b| sets.forward.contains(b))
                    && scan.backward.iter().all(|b| sets.backward.contains(b));
                if !contained || scan.count() != sets.max_blocks {
                    failures.push(format!(
                        "nu={order} P={p} delta={delta}: scan {:?}/{:?} vs sets {:?}/{:?} max {}",
                        scan.forward, scan.backward, sets.forward, sets.backward, sets.max_blocks
                    ));
                }
            }
        }
    }
    let detail = match failures.first() {
        None => format!("{cases} cases"),
        Some(f) => format!("{} of {cases} cases fail, first: {f}", failures.len()),
    };
    CheckOutcome::new("IBI index sets", failures.is_empty(), detail)
}

/// Backward IBI vanishes with a guard of `ceil(delta/2)` and survives one
/// sample less, on random dense channels.
pub fn check_min_redundancy_tight(trials: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for t in 0..trials {
        let delta = rng.gen_range(1..=15usize);
        let order = delta + rng.gen_range(1..=10usize);
        let m = rng.gen_range(delta.max(2)..=delta + 12);
        let taps = (0..=order)
            .map(|_| C64::new(rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let ch = DiscreteChannelSet::from_taps(1, 1, vec![taps], 1.0)
            .expect("taps")
            .with_delay(delta);
        let r_min = min_redundancy(&DelaySplit::new(delta, 1).expect("P >= 1"));
        for (guard, expect_zero) in [(r_min, true), (r_min - 1, false)] {
            let red = RedundancyPair::new(m, guard);
            let p = red.block_len();
            let split = DelaySplit::new(delta, p).expect("P >= 1");
            let Ok(sets) = IbiIndexSets::covering(order, p, &split) else {
                failures.push(format!("trial {t}: no index sets"));
                continue;
            };
            let blocks = build_toeplitz(&ch, p, &split, &sets).expect("block length");
            let modulator = FrftModulator::new(m, 1.0).expect("modulator");
            let ops = build_effective(&blocks, &modulator, &red).expect("effective");
            if expect_zero {
                if !ops.backward_is_zero() {
                    failures.push(format!("trial {t}: delta={delta} R={guard} leaves backward IBI"));
                }
            } else {
                // entry (M-1, P-M) of the first backward block picks tap delta - 2R - 1 >= 0
                let witness = blocks.backward(1, 0, 0).map(|h| h.entry(m - 1, guard));
                if witness.is_none_or(|w| w == C64::new(0.0, 0.0)) || ops.backward_is_zero() {
                    failures.push(format!("trial {t}: delta={delta} R={guard} has no backward IBI"));
                }
            }
        }
    }
    let detail = match failures.first() {
        None => format!("{trials} channels"),
        Some(f) => format!("{} failures, first: {f}", failures.len()),
    };
    CheckOutcome::new("minimum redundancy tightness", failures.is_empty(), detail)
}

/// Random decimal in `(0, 1]` with two digits.
fn random_fraction(rng: &mut ChaCha8Rng, low: i64) -> BigRational {
    rational(rng.gen_range(low..=100), 100)
}

/// Strict monotonicity of the error-free spectral efficiency in the
/// acceleration and packing factors, and the relative-gain bound, in exact
/// arithmetic.
pub fn check_se0_monotonicity(tuples: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = BigRational::one();
    let rc = one.clone();
    let rho = rational(1, 4);
    let mut failures = Vec::new();
    for t in 0..tuples {
        let m = rng.gen_range(2..=128usize);
        let r_ref = rng.gen_range(0..=m);
        let bits = rng.gen_range(1..=6u32);
        let beta = random_fraction(&mut rng, 1);
        let mut a = random_fraction(&mut rng, 1);
        let mut a_ref = random_fraction(&mut rng, 1);
        while a == a_ref {
            a_ref = random_fraction(&mut rng, 1);
        }
        if a > a_ref {
            std::mem::swap(&mut a, &mut a_ref);
        }
        let r_a = redundancy_scaling_exact(r_ref, &a_ref, &a);
        let fast = se0_exact(m, r_a, &a, &beta, bits, &rc, &rho);
        let slow = se0_exact(m, r_ref, &a_ref, &beta, bits, &rc, &rho);
        if fast <= slow {
            failures.push(format!("tuple {t}: alpha {a} vs {a_ref} not increasing"));
        }
        let mf = BigRational::from_integer(BigInt::from(m));
        let bound = (&one - &a / &a_ref) * &mf / (&mf + BigRational::from_integer(BigInt::from(r_ref)));
        if (&fast - &slow) / &slow <= bound {
            failures.push(format!("tuple {t}: relative gain below bound"));
        }
        let mut b_lo = random_fraction(&mut rng, 1);
        let mut b_hi = random_fraction(&mut rng, 1);
        while b_lo == b_hi {
            b_hi = random_fraction(&mut rng, 1);
        }
        if b_lo > b_hi {
            std::mem::swap(&mut b_lo, &mut b_hi);
        }
        let packed = se0_exact(m, r_ref, &a, &b_lo, bits, &rc, &rho);
        let loose = se0_exact(m, r_ref, &a, &b_hi, bits, &rc, &rho);
        if packed <= loose || loose.is_zero() {
            failures.push(format!("tuple {t}: beta {b_lo} vs {b_hi} not increasing"));
        }
    }
    let detail = match failures.first() {
        None => format!("{tuples} tuples"),
        Some(f) => format!("{} failures, first: {f}", failures.len()),
    };
    CheckOutcome::new("SE0 monotonicity", failures.is_empty(), detail)
}

/// The folded-spectrum test switches sides within 2% of `alpha_min`.
pub fn check_lossless_boundary() -> CheckOutcome {
    let mut ok = true;
    let mut detail = String::new();
    for (m, beta) in [(32, 0.8), (32, 0.9), (16, 1.0), (16, 0.79)] {
        let t1 = 1.0;
        let pulse = make_srrc(t_beta(t1, m, beta), 0.25, 16).expect("pulse");
        let a = alpha_min(m, beta, 0.25);
        let above = lossless_check(&pulse, 1.02 * a * t1, 10_000);
        let below = lossless_check(&pulse, 0.98 * a * t1, 10_000);
        ok &= above.lossless && !below.lossless;
        detail += &format!("M={m} beta={beta}: margin {:.2e}/{:.2e}; ", above.margin, below.margin);
    }
    CheckOutcome::new("lossless boundary", ok, detail.trim_end_matches("; ").to_string())
}

/// Runs the whole suite.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_alpha_min_table(),
        check_bandwidth_factor(),
        check_ibi_containment(40, 12),
        check_min_redundancy_tight(50, seed),
        check_se0_monotonicity(200, seed),
        check_lossless_boundary(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_matches_example() {
        let ch = dense_channel(5);
        let scan = scan_interfering_blocks(&ch, &DelaySplit::new(2, 4).unwrap());
        assert_eq!(scan.forward, vec![1]);
        assert_eq!(scan.backward, vec![1]);
        let ch = dense_channel(24);
        let scan = scan_interfering_blocks(&ch, &DelaySplit::new(10, 20).unwrap());
        assert_eq!(scan.forward, vec![1]);
        assert_eq!(scan.count(), 3);
    }

    #[test]
    fn small_suite_passes() {
        for outcome in [
            check_alpha_min_table(),
            check_bandwidth_factor(),
            check_ibi_containment(12, 5),
            check_min_redundancy_tight(5, 3),
            check_se0_monotonicity(20, 3),
        ] {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }
}
