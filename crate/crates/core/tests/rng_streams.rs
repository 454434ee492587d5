use std::collections::HashSet;

use nested_mlmc::bench::cell_seed;
use nested_mlmc::rng::{mix_seed, philox4x32, replication_seed, PathStream, OUTER_SLOT};
use proptest::prelude::*;
use rand::RngCore;

fn first_word(seed: u64, level: u8, outer: u64, slot: u32) -> u64 {
    let s = PathStream::new(seed, level, outer);
    let mut r = if slot == OUTER_SLOT {
        s.outer_rng()
    } else {
        s.inner_rng(slot)
    };
    r.next_u64()
}

#[test]
fn slots_do_not_collide() {
    let mut seen = HashSet::new();
    for seed in [0u64, 1, u64::MAX] {
        for level in 1..=4u8 {
            for outer in [0u64, 1, 2, 1 << 32, (1 << 56) - 1] {
                for slot in [0u32, 1, 2, 63, OUTER_SLOT] {
                    assert!(
                        seen.insert(first_word(seed, level, outer, slot)),
                        "collision at {seed} {level} {outer} {slot}"
                    );
                }
            }
        }
    }
}

#[test]
fn replication_and_cell_seeds_are_distinct() {
    let mut seeds = HashSet::new();
    for group in 0..5u64 {
        for grid in 0..8u64 {
            let base = cell_seed(42, group, grid);
            for m in 0..64 {
                assert!(seeds.insert(replication_seed(base, m)));
            }
        }
    }
    assert_ne!(mix_seed(0), 0);
}

#[test]
fn philox_is_a_bijection_of_the_counter_sample() {
    let key = [0xdead_beef, 0x1234_5678];
    let mut seen = HashSet::new();
    for i in 0..10_000u32 {
        assert!(seen.insert(philox4x32([i, 0, 0, 0], key)));
    }
}

proptest! {
    #[test]
    fn streams_are_pure_functions_of_the_slot(
        seed in any::<u64>(), level in 1u8..=30, outer in 0u64..(1 << 56), slot in 0u32..1000
    ) {
        let a = first_word(seed, level, outer, slot);
        let b = first_word(seed, level, outer, slot);
        prop_assert_eq!(a, b);
        prop_assert_ne!(a, first_word(seed, level, outer, slot + 1));
    }

    #[test]
    fn uniforms_stay_in_the_unit_interval(seed in any::<u64>(), outer in 0u64..1000) {
        let mut r = PathStream::new(seed, 1, outer).inner_rng(0);
        for _ in 0..32 {
            let u = r.uniform();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}
