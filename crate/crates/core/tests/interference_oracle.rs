mod common;

use std::collections::BTreeSet;

use common::{brute_force, convolve, random_taps};
use ftn_slp::channel::DiscreteChannelSet;
use ftn_slp::interference::build_toeplitz;
use ftn_slp::theory::{ibi_index_sets, DelaySplit, IbiIndexSets};
use ftn_slp::CVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn index_sets_contain_brute_force_scan() {
    for order in 1..=40 {
        for p in 1..=12 {
            for delta in 0..order {
                let split = DelaySplit::new(delta, p).unwrap();
                let sets = ibi_index_sets(order, p, &split).unwrap();
                let fwd = brute_force(order, p, delta, 1);
                let bwd = brute_force(order, p, delta, -1);
                assert!(fwd.iter().all(|b| sets.forward.contains(b)), "nu {order} P {p} delta {delta}");
                assert!(bwd.iter().all(|b| sets.backward.contains(b)), "nu {order} P {p} delta {delta}");
                assert_eq!(1 + fwd.len() + bwd.len(), sets.max_blocks, "nu {order} P {p} delta {delta}");
            }
        }
    }
}

#[test]
fn worked_examples_match_scan() {
    assert_eq!(brute_force(5, 4, 2, 1), BTreeSet::from([1]));
    assert_eq!(brute_force(5, 4, 2, -1), BTreeSet::from([1]));
    assert_eq!(brute_force(24, 20, 10, 1), BTreeSet::from([1]));
    let s = ibi_index_sets(24, 20, &DelaySplit::new(10, 20).unwrap()).unwrap();
    assert_eq!(s.forward, vec![1, 2]);
}

#[test]
fn built_blocks_vanish_where_the_scan_says() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let order = rng.gen_range(1..30);
        let p = rng.gen_range(1..12);
        let delta = rng.gen_range(0..order);
        let ch = DiscreteChannelSet::from_taps(1, 1, random_taps(&mut rng, 1, order), 1.0).unwrap();
        let split = DelaySplit::new(delta, p).unwrap();
        let sets = ibi_index_sets(order, p, &split).unwrap();
        let blocks = build_toeplitz(&ch, p, &split, &sets).unwrap();
        let fwd = brute_force(order, p, delta, 1);
        for (&b, mats) in &blocks.forward {
            assert_eq!(!mats[0].is_zero(), fwd.contains(&b));
        }
        let bwd = brute_force(order, p, delta, -1);
        for (&b, mats) in &blocks.backward {
            assert_eq!(!mats[0].is_zero(), bwd.contains(&b));
        }
    }
}

#[test]
fn block_model_matches_direct_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let users = rng.gen_range(1..=3);
        let antennas = rng.gen_range(users..=4);
        let order = rng.gen_range(0..=30);
        let p = rng.gen_range(1..=16);
        let delta = rng.gen_range(0..=order);
        let n_blocks = rng.gen_range(2..=6);
        let taps = random_taps(&mut rng, users * antennas, order);
        let ch = DiscreteChannelSet::from_taps(users, antennas, taps.clone(), 1.0).unwrap();
        let split = DelaySplit::new(delta, p).unwrap();
        let sets = IbiIndexSets::covering(order, p, &split).unwrap();
        let blocks = build_toeplitz(&ch, p, &split, &sets).unwrap();

        let tx: Vec<Vec<CVector>> = (0..antennas)
            .map(|_| (0..n_blocks).map(|_| CVector::from_fn(p, |_, _| common::cn(&mut rng))).collect())
            .collect();
        let flat: Vec<Vec<C64>> = tx.iter().map(|s| s.iter().flat_map(|b| b.iter().copied()).collect()).collect();
        let y = convolve(&taps, users, antennas, &flat);
        for ell in 0..n_blocks {
            let got = blocks.received_block(&tx, ell);
            for k in 0..users {
                for i in 0..p {
                    let t = ell * p + delta + i;
                    let want = y[k].get(t).copied().unwrap_or_default();
                    assert!((got[k][i] - want).norm() < 1e-10, "trial {trial} block {ell} user {k} sample {i}");
                }
            }
        }
    }
}
