//! Shared helpers for the acceptance suite: fixture loading and seeded
//! generation of random access structures. Mirrors the library's own test
//! helpers, which cannot be shared across crate boundaries.
#![allow(dead_code)]

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use shardplan::access::{
    structure_from_json, AccessStructure, ParticipantSet, RampAccessStructure, SetFamily, Structure,
};

/// Deterministic generator for a test, decoupled from sibling tests.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Loads a structure document from the workspace `fixtures/` directory.
pub fn load_structure(name: &str) -> Structure {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let (structure, _names) = structure_from_json(&text)
        .unwrap_or_else(|e| panic!("cannot parse {}: {e}", path.display()));
    structure
}

/// Loads a fixture known to hold a perfect structure.
pub fn perfect_fixture(name: &str) -> AccessStructure {
    match load_structure(name) {
        Structure::Perfect(s) => s,
        Structure::Ramp(_) => panic!("fixture {name} is a ramp structure"),
    }
}

/// Loads a fixture known to hold a ramp structure.
pub fn ramp_fixture(name: &str) -> RampAccessStructure {
    match load_structure(name) {
        Structure::Ramp(r) => r,
        Structure::Perfect(_) => panic!("fixture {name} is a perfect structure"),
    }
}

/// Draws a uniform-ish complete structure on `n` participants: a random
/// antichain of qualified minima, with everything else forbidden.
pub fn random_complete_structure(n: usize, rng: &mut ChaCha12Rng) -> AccessStructure {
    let mut masks: Vec<u32> = (1..1u32 << n).collect();
    masks.shuffle(rng);
    let mut chosen: Vec<ParticipantSet> = Vec::new();
    for &mask in &masks {
        let set = ParticipantSet::from_bits(n, mask);
        let incomparable = chosen.iter().all(|&c| !c.is_subset_of(set) && !set.is_subset_of(c));
        if incomparable && rng.gen_bool(0.4) {
            chosen.push(set);
        }
    }
    if chosen.is_empty() {
        chosen.push(ParticipantSet::full(n));
    }
    let qualified = SetFamily::new(n, chosen).expect("masks stay inside the universe");
    let forbidden: Vec<ParticipantSet> = (0..1u32 << n)
        .map(|mask| ParticipantSet::from_bits(n, mask))
        .filter(|&set| !qualified.contains_subset_of(set))
        .collect();
    let forbidden = SetFamily::new(n, forbidden).expect("masks stay inside the universe");
    AccessStructure::new(qualified, forbidden, true).expect("generator keeps a qualified set")
}

/// Draws a random fully specified monotone ramp structure with `l` levels:
/// starts from the flat-zero labeling with the full set pinned at `l`, then
/// repeatedly raises a random coalition and pushes the raise to supersets.
pub fn random_ramp_structure(n: usize, l: usize, rng: &mut ChaCha12Rng) -> RampAccessStructure {
    let size = 1usize << n;
    let mut level = vec![0usize; size];
    level[size - 1] = l;
    for _ in 0..2 * size {
        let mask = rng.gen_range(1..size);
        let target = rng.gen_range(0..=l);
        if target > level[mask] {
            for (sup, lev) in level.iter_mut().enumerate() {
                if sup & mask == mask {
                    *lev = (*lev).max(target);
                }
            }
        }
    }
    let mut families: Vec<Vec<ParticipantSet>> = vec![Vec::new(); l + 1];
    for (mask, &lev) in level.iter().enumerate() {
        families[lev].push(ParticipantSet::from_bits(n, mask as u32));
    }
    let families: Vec<SetFamily> = families
        .into_iter()
        .map(|members| SetFamily::new(n, members).expect("masks stay inside the universe"))
        .collect();
    RampAccessStructure::from_level_families(n, l, &families)
        .expect("exact level labeling is well formed")
}

/// Every complete structure on `n` participants: all monotone labelings of
/// the power set with the empty set forbidden and the full set qualified.
/// Feasible for `n <= 4` (18 structures at `n = 3`, 166 at `n = 4`).
pub fn enumerate_complete_structures(n: usize) -> Vec<AccessStructure> {
    let size = 1usize << n;
    let mut order: Vec<usize> = (1..size).collect();
    order.sort_by_key(|m| m.count_ones());

    fn dfs(
        order: &[usize],
        idx: usize,
        label: &mut Vec<bool>,
        n: usize,
        out: &mut Vec<AccessStructure>,
    ) {
        if idx == order.len() {
            if label[label.len() - 1] {
                out.push(structure_from_labels(n, label));
            }
            return;
        }
        let mask = order[idx];
        let forced = {
            // Scan the proper subsets for an already-qualified coalition.
            let mut sub = (mask - 1) & mask;
            loop {
                if sub != 0 && label[sub] {
                    break true;
                }
                if sub == 0 {
                    break false;
                }
                sub = (sub - 1) & mask;
            }
        };
        if forced {
            label[mask] = true;
            dfs(order, idx + 1, label, n, out);
        } else {
            label[mask] = false;
            dfs(order, idx + 1, label, n, out);
            label[mask] = true;
            dfs(order, idx + 1, label, n, out);
        }
        label[mask] = false;
    }

    fn structure_from_labels(n: usize, label: &[bool]) -> AccessStructure {
        let qualified: Vec<ParticipantSet> = label
            .iter()
            .enumerate()
            .filter(|&(_, &q)| q)
            .map(|(mask, _)| ParticipantSet::from_bits(n, mask as u32))
            .collect();
        let forbidden: Vec<ParticipantSet> = label
            .iter()
            .enumerate()
            .filter(|&(_, &q)| !q)
            .map(|(mask, _)| ParticipantSet::from_bits(n, mask as u32))
            .collect();
        let qualified = SetFamily::new(n, qualified).expect("in universe");
        let forbidden = SetFamily::new(n, forbidden).expect("in universe");
        AccessStructure::new(qualified, forbidden, true).expect("full set is qualified")
    }

    let mut label = vec![false; size];
    let mut out = Vec::new();
    dfs(&order, 0, &mut label, n, &mut out);
    out
}
