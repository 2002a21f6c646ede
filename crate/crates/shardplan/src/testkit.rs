//! Shared fixtures for unit tests: the recurring example structures used
//! across the module test suites, plus terse constructors for coalitions
//! and families.

use crate::access::{AccessStructure, ParticipantSet, RampAccessStructure, SetFamily};

/// Coalition from indices; panics on bad input (tests only).
pub fn ps(n: usize, indices: &[usize]) -> ParticipantSet {
    ParticipantSet::from_indices(n, indices).expect("valid test coalition")
}

/// Family from index slices; panics on bad input (tests only).
pub fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
    SetFamily::new(n, sets.iter().map(|s| ps(n, s))).expect("valid test family")
}

/// Four-participant complete structure whose cumulative map needs a
/// (4,4)-threshold primitive: qualified minimal sets
/// {012, 03, 13, 23}, forbidden maximal sets {01, 02, 12, 3}.
pub fn gamma1() -> AccessStructure {
    AccessStructure::new(
        fam(4, &[&[0, 1, 2], &[0, 3], &[1, 3], &[2, 3]]),
        fam(4, &[&[0, 1], &[0, 2], &[1, 2], &[3]]),
        true,
    )
    .expect("valid fixture")
}

/// Five-participant complete structure with eight maximal forbidden sets;
/// the worked example where the modified cumulative construction loses to
/// the plain one on worst-case rate but wins on average.
pub fn gamma2() -> AccessStructure {
    AccessStructure::new(
        fam(
            5,
            &[
                &[0, 1, 2, 4],
                &[0, 1, 3],
                &[0, 2, 3],
                &[0, 3, 4],
                &[1, 2, 3],
                &[1, 3, 4],
                &[2, 3, 4],
            ],
        ),
        fam(
            5,
            &[&[0, 1, 2], &[0, 1, 4], &[0, 2, 4], &[1, 2, 4], &[0, 3], &[1, 3], &[2, 3], &[3, 4]],
        ),
        true,
    )
    .expect("valid fixture")
}

/// Six-participant complete structure used to exercise the optimizer on a
/// non-trivial instance (optimal average map uses eight primitive shares).
pub fn gamma3() -> AccessStructure {
    AccessStructure::new(
        fam(
            6,
            &[
                &[0, 2, 3, 4],
                &[0, 2, 4, 5],
                &[0, 3, 4, 5],
                &[2, 3, 4, 5],
                &[0, 1, 2],
                &[0, 1, 4],
                &[0, 1, 5],
                &[1, 2, 3],
                &[1, 2, 4],
                &[1, 2, 5],
                &[1, 3, 4],
                &[1, 3, 5],
                &[1, 4, 5],
            ],
        ),
        fam(
            6,
            &[
                &[0, 2, 3, 5],
                &[0, 1, 3],
                &[0, 2, 4],
                &[0, 3, 4],
                &[0, 4, 5],
                &[2, 3, 4],
                &[2, 4, 5],
                &[3, 4, 5],
                &[1, 2],
                &[1, 4],
                &[1, 5],
            ],
        ),
        true,
    )
    .expect("valid fixture")
}

/// Partially specified variant of [`gamma3`]: only some coalitions are
/// constrained, the rest are left open.
pub fn gamma3_sharp() -> AccessStructure {
    AccessStructure::new(
        fam(6, &[&[0, 3, 4, 5], &[0, 1, 4], &[0, 1, 5], &[1, 2, 5], &[1, 3, 5]]),
        fam(6, &[&[0, 2, 3, 5], &[0, 2, 4], &[0, 4, 5], &[2, 3, 4], &[3, 4, 5], &[1, 4]]),
        false,
    )
    .expect("valid fixture")
}

/// Four-participant, four-level complete ramp structure (levels 0..=3):
/// all pairs and below learn nothing, two designated triples sit at level 1,
/// the other two triples at level 2, and the full set recovers the secret.
pub fn gamma4_ramp() -> RampAccessStructure {
    let n = 4;
    let level0 = SetFamily::new(
        n,
        (0u32..16).filter(|m| m.count_ones() <= 2).map(|m| ParticipantSet::from_bits(n, m)),
    )
    .expect("valid fixture");
    let families = [
        level0,
        fam(n, &[&[0, 1, 3], &[1, 2, 3]]),
        fam(n, &[&[0, 1, 2], &[0, 2, 3]]),
        fam(n, &[&[0, 1, 2, 3]]),
    ];
    RampAccessStructure::from_level_families(n, 3, &families).expect("valid fixture")
}

/// Five-participant, five-level ramp structure that is deliberately
/// incomplete: coalitions {1,3} and {3,4} are unspecified. Its exact-level
/// optimization problem is infeasible while the relaxed one is not.
pub fn gamma5_ramp() -> RampAccessStructure {
    let n = 5;
    let families = [
        fam(n, &[&[], &[0], &[1], &[2], &[3], &[4], &[0, 3], &[1, 4], &[2, 4]]),
        fam(n, &[&[0, 1], &[1, 2], &[2, 3]]),
        fam(n, &[&[0, 2], &[0, 4], &[0, 1, 4], &[0, 3, 4], &[1, 2, 4], &[1, 3, 4], &[2, 3, 4]]),
        fam(
            n,
            &[
                &[0, 1, 2],
                &[0, 1, 3],
                &[0, 2, 3],
                &[0, 2, 4],
                &[1, 2, 3],
                &[0, 1, 2, 4],
                &[0, 2, 3, 4],
            ],
        ),
        fam(n, &[&[0, 1, 2, 3], &[0, 1, 3, 4], &[1, 2, 3, 4], &[0, 1, 2, 3, 4]]),
    ];
    RampAccessStructure::from_level_families(n, 4, &families).expect("valid fixture")
}
