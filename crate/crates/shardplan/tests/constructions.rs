//! Construction-level invariants: the ideal-partition decision against an
//! independent search, level-stack recipes, and degenerate agreements
//! between the perfect and ramp constructions.

mod util;

use shardplan::access::{AccessStructure, ParticipantSet, RampAccessStructure, SetFamily};
use shardplan::ilp::SolveConfig;
use shardplan::maps::{
    construction2_ramp, cumulative_map, ideal_partition, modified_advantage_holds,
    modified_cumulative_map, ramp_cumulative_map, verify_perfect, IdealOutcome, LevelStrategy,
    Rate,
};
use util::{enumerate_complete_structures, random_complete_structure, random_ramp_structure, rng};

/// All ways of splitting `0..n` into nonempty blocks, as bitmask vectors,
/// enumerated through restricted growth strings.
fn partitions(n: usize) -> Vec<Vec<u32>> {
    fn grow(labels: &mut Vec<usize>, used: usize, n: usize, out: &mut Vec<Vec<u32>>) {
        if labels.len() == n {
            let mut blocks = vec![0u32; used];
            for (i, &b) in labels.iter().enumerate() {
                blocks[b] |= 1 << i;
            }
            out.push(blocks);
            return;
        }
        for b in 0..=used.min(labels.len()) {
            labels.push(b);
            grow(labels, used.max(b + 1), n, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), 0, n, &mut out);
    out
}

/// All sets built by choosing `t` of the `blocks` and one participant from
/// each chosen block, as sorted bitmasks.
fn one_per_block_selections(blocks: &[u32], t: usize) -> Vec<u32> {
    fn rec(blocks: &[u32], start: usize, left: usize, acc: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        if blocks.len() - start < left {
            return;
        }
        let mut member = blocks[start];
        while member != 0 {
            let bit = member & member.wrapping_neg();
            rec(blocks, start + 1, left - 1, acc | bit, out);
            member ^= bit;
        }
        rec(blocks, start + 1, left, acc, out);
    }
    let mut out = Vec::new();
    rec(blocks, 0, t, 0, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

/// Independent decision: does any (partition, threshold) pair expand to
/// exactly the structure's minimal qualified family?
fn has_product_form(s: &AccessStructure) -> bool {
    let mut qualified: Vec<u32> = s.qualified_min().iter().map(|a| a.bits()).collect();
    qualified.sort_unstable();
    partitions(s.n())
        .iter()
        .any(|blocks| (1..=blocks.len()).any(|t| one_per_block_selections(blocks, t) == qualified))
}

/// Expands the witness returned by the library and checks it reproduces
/// the structure on the nose.
fn witness_is_valid(s: &AccessStructure, partition: &[ParticipantSet], t: usize) -> bool {
    let blocks: Vec<u32> = partition.iter().map(|b| b.bits()).collect();
    let mut covered = 0u32;
    for &b in &blocks {
        if b == 0 || covered & b != 0 {
            return false;
        }
        covered |= b;
    }
    if covered != ParticipantSet::full(s.n()).bits() {
        return false;
    }
    let mut qualified: Vec<u32> = s.qualified_min().iter().map(|a| a.bits()).collect();
    qualified.sort_unstable();
    one_per_block_selections(&blocks, t) == qualified
}

/// The optimizer-backed ideal decision agrees with a direct search over
/// every partition and threshold, on every complete structure with up to
/// three participants and a sample of larger ones.
#[test]
fn ideal_partitions_match_a_direct_search() {
    let config = SolveConfig::default();
    let mut structures = Vec::new();
    for n in 1..=3 {
        structures.extend(enumerate_complete_structures(n));
    }
    let mut rng = rng(0xabcd);
    for _ in 0..40 {
        structures.push(random_complete_structure(4, &mut rng));
    }

    let mut ideal_seen = 0usize;
    for s in &structures {
        let expected = has_product_form(s);
        match ideal_partition(s, &config).unwrap() {
            IdealOutcome::Ideal { partition, t } => {
                ideal_seen += 1;
                assert!(expected, "claimed ideal, direct search disagrees: {s:?}");
                assert!(
                    witness_is_valid(s, &partition, t),
                    "witness does not expand to the structure: {partition:?} t={t}"
                );
            }
            IdealOutcome::NotIdeal { worst } => {
                assert!(!expected, "claimed not ideal, direct search found a partition: {s:?}");
                assert!(worst >= Rate::from_integer(1));
            }
        }
    }
    assert!(ideal_seen > 0, "no structure in the sweep was ideal");
}

/// The level-stack recipe produces one verifying perfect scheme per level,
/// in level order, and reports the concatenated rates.
#[test]
fn level_stack_recipes_verify_level_by_level() {
    let mut rng = rng(0xbeef);
    let config = SolveConfig::default();
    for trial in 0..25 {
        let n = 2 + (trial % 3);
        let l = 1 + (trial % 3);
        let r = random_ramp_structure(n, l, &mut rng);
        let recipe = construction2_ramp(&r, LevelStrategy::Cumulative, &config).unwrap();
        assert_eq!(recipe.levels().len(), l);

        let mut totals = vec![0usize; n];
        for (idx, level) in recipe.levels().iter().enumerate() {
            assert_eq!(level.level(), idx + 1);
            assert_eq!(level.structure(), &r.level_structure(idx + 1).unwrap());
            let report = verify_perfect(level.map(), level.structure());
            assert!(
                report.passed(),
                "n={n} l={l} trial={trial} level {}: {:?}",
                idx + 1,
                report.violations()
            );
            for (i, total) in totals.iter_mut().enumerate() {
                *total += level.map().assign(i).len();
            }
        }
        for (i, &total) in totals.iter().enumerate() {
            assert_eq!(
                recipe.rates().per_participant()[i],
                Rate::new(total as i64, l as i64),
                "n={n} l={l} trial={trial} participant {i}"
            );
        }
    }
}

/// The optimizing level strategies never do worse than stacking cumulative
/// maps, each on its own figure of merit.
#[test]
fn optimizing_level_strategies_dominate_cumulative_stacks() {
    let mut rng = rng(0xcafe);
    let config = SolveConfig::default();
    for trial in 0..15 {
        let n = 2 + (trial % 3);
        let l = 1 + (trial % 2);
        let r = random_ramp_structure(n, l, &mut rng);
        let stacked = construction2_ramp(&r, LevelStrategy::Cumulative, &config).unwrap();
        let avg = construction2_ramp(&r, LevelStrategy::IpAverage, &config).unwrap();
        let worst = construction2_ramp(&r, LevelStrategy::IpWorst, &config).unwrap();
        assert!(
            avg.rates().average() <= stacked.rates().average(),
            "n={n} l={l} trial={trial}: {} > {}",
            avg.rates().average(),
            stacked.rates().average()
        );
        assert!(
            worst.rates().worst() <= stacked.rates().worst(),
            "n={n} l={l} trial={trial}: {} > {}",
            worst.rates().worst(),
            stacked.rates().worst()
        );
    }
}

/// On single-level ramp structures the ramp construction degenerates to
/// the perfect cumulative map.
#[test]
fn single_level_ramp_construction_degenerates_to_cumulative() {
    let mut rng = rng(0xdead);
    for trial in 0..30 {
        let n = 1 + (trial % 5);
        let s = random_complete_structure(n, &mut rng);
        let r = RampAccessStructure::from_perfect(&s);
        assert_eq!(ramp_cumulative_map(&r).unwrap(), cumulative_map(&s), "trial={trial}");
    }
}

/// The advantage condition is decidable on anything complete, holds on all
/// non-unanimity thresholds, and the modified map verifies whenever it
/// exists.
#[test]
fn modified_cumulative_verifies_and_thresholds_satisfy_the_condition() {
    for n in 2..=7 {
        for k in 2..n {
            let s = AccessStructure::from_threshold(k, n).unwrap();
            assert!(modified_advantage_holds(&s), "({k},{n})");
        }
    }
    let mut rng = rng(0xfeed);
    for trial in 0..40 {
        let n = 2 + (trial % 4);
        let s = random_complete_structure(n, &mut rng);
        let _ = modified_advantage_holds(&s);
        if let Ok(map) = modified_cumulative_map(&s) {
            let report = verify_perfect(&map, &s);
            assert!(report.passed(), "n={n} trial={trial}: {:?}", report.violations());
        }
    }
}

/// Unanimity structures are ideal with one block per participant; the
/// direct search agrees and pins the witness shape.
#[test]
fn unanimity_is_ideal_with_singleton_blocks() {
    for n in 2..=5 {
        let s = AccessStructure::from_threshold(n, n).unwrap();
        assert!(has_product_form(&s));
        match ideal_partition(&s, &SolveConfig::default()).unwrap() {
            IdealOutcome::Ideal { partition, t } => {
                assert_eq!(t, n);
                let mut blocks: Vec<u32> = partition.iter().map(|b| b.bits()).collect();
                blocks.sort_unstable();
                let singletons: Vec<u32> = (0..n).map(|i| 1 << i).collect();
                assert_eq!(blocks, singletons);
            }
            IdealOutcome::NotIdeal { .. } => panic!("unanimity ({n},{n}) must be ideal"),
        }
    }
}

/// The path on four participants (qualified minima {0,1}, {1,2}, {2,3})
/// has no product form, so some participant must carry two primitives.
/// Note the path on three participants IS ideal here — blocks {0,2} and
/// {1} with threshold 2 expand to exactly its qualified minima — so four
/// is the smallest interesting case.
#[test]
fn the_four_participant_path_is_not_ideal() {
    let qualified = SetFamily::from_masks(4, &[0b0011, 0b0110, 0b1100]);
    let forbidden = SetFamily::from_masks(4, &[0b0101, 0b1001, 0b1010]);
    let s = AccessStructure::new(qualified, forbidden, true).unwrap();
    assert!(s.check_consistency().is_consistent());
    assert!(!has_product_form(&s));
    match ideal_partition(&s, &SolveConfig::default()).unwrap() {
        IdealOutcome::NotIdeal { worst } => {
            // A one-primitive-per-participant realization would force a
            // product form, so the worst load is the next integer up.
            assert_eq!(worst, Rate::from_integer(2));
        }
        IdealOutcome::Ideal { .. } => panic!("the path structure has no product form"),
    }
}
