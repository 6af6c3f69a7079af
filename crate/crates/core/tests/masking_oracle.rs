// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ternpuf_core::apg::{mask_address, mask_addresses, ADDRESS_COUNT};
use ternpuf_core::{AddressList, CellState, Error, TernaryMap};

/// Walks a, a+1, ..., n-1, then 0, ..., a-1 and returns the first stable cell.
fn brute_force_mask(states: &[CellState], a: usize) -> Option<usize> {
    let upper = a..states.len();
    let lower = 0..a;
    upper.chain(lower).find(|&i| states[i] != CellState::Fuzzy)
}

fn random_states(rng: &mut ChaCha8Rng, n: usize) -> Vec<CellState> {
    let fuzzy_p: f64 = rng.gen();
    (0..n)
        .map(|_| {
            if rng.gen_bool(fuzzy_p) {
                CellState::Fuzzy
            } else if rng.gen() {
                CellState::Stable1
            } else {
                CellState::Stable0
            }
        })
        .collect()
}

#[test]
fn agrees_with_linear_scan_on_small_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3232);
    for _ in 0..2_000 {
        let states = random_states(&mut rng, 32);
        let map = TernaryMap::from_states(states.clone(), 2, [0; 16]).unwrap();
        for a in 0..32u16 {
            match brute_force_mask(&states, a as usize) {
                Some(want) => assert_eq!(mask_address(a, &map), Ok(want as u16)),
                None => assert_eq!(mask_address(a, &map), Err(Error::Unmaskable)),
            }
        }
    }
}

#[test]
fn wraps_past_the_top() {
    let mut states = vec![CellState::Stable1; 32];
    states[0] = CellState::Stable0;
    for s in &mut states[28..] {
        *s = CellState::Fuzzy;
    }
    let map = TernaryMap::from_states(states, 2, [0; 16]).unwrap();
    for a in 28..32 {
        assert_eq!(mask_address(a, &map), Ok(0));
    }
}

fn map_strategy() -> impl Strategy<Value = Vec<CellState>> {
    (1usize..=64).prop_flat_map(|n| {
        prop::collection::vec(
            prop_oneof![
                Just(CellState::Stable0),
                Just(CellState::Stable1),
                Just(CellState::Fuzzy)
            ],
            n,
        )
    })
}

proptest! {
    #[test]
    fn masked_lists_avoid_fuzzy_cells_and_are_idempotent(
        states in map_strategy(),
        raw in prop::collection::vec(any::<u16>(), ADDRESS_COUNT),
    ) {
        let n = states.len();
        let map = TernaryMap::from_states(states.clone(), 2, [0; 16]).unwrap();
        let mut addrs = [0u16; ADDRESS_COUNT];
        for (a, r) in addrs.iter_mut().zip(&raw) {
            *a = (*r as usize % n) as u16;
        }
        let list = AddressList::new(addrs);
        match mask_addresses(&list, &map) {
            Ok(masked) => {
                prop_assert!(masked.is_masked());
                for (&orig, &m) in list.addresses().iter().zip(masked.addresses()) {
                    prop_assert!(!states[m as usize].is_fuzzy());
                    if !states[orig as usize].is_fuzzy() {
                        prop_assert_eq!(orig, m);
                    }
                }
                let again = mask_addresses(&masked, &map).unwrap();
                prop_assert_eq!(again, masked);
            }
            Err(e) => {
                prop_assert_eq!(e, Error::Unmaskable);
                prop_assert!(states.iter().all(|s| s.is_fuzzy()));
            }
        }
    }
}
