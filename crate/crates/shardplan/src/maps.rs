//! Multiple assignment maps: the bridge between an access structure and a
//! threshold primitive.
//!
//! A map hands each participant a subset of the `m` primitive shares of a
//! `(t, m)`-threshold scheme (or `(t, L, m)`-ramp scheme); a coalition's
//! knowledge is determined solely by how many distinct primitives it holds.
//! This module provides the explicit constructions — the cumulative map,
//! the modified cumulative map with its advantage test, and the ramp
//! cumulative map — together with verifiers that check a map against a
//! structure, exact rational coding rates, and the per-level decomposition
//! that realizes a ramp structure by parallel perfect schemes.
//!
//! All rate arithmetic is exact: rates are rationals of share counts, and
//! verification compares integers. Primitive-share indices follow a fixed
//! canonical layout so that identical inputs always produce identical maps.

use std::fmt;

use num::rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{
    AccessError, AccessStructure, Multiset, ParticipantSet, RampAccessStructure, SetFamily,
};
use crate::ilp::{
    build_ip_avg, build_ip_worst, solution_to_map, solve, vector_from_map, IlpError, SolveConfig,
};

/// Exact rational coding rate.
pub type Rate = Rational64;

/// Errors produced by map construction and conversion.
#[derive(Debug, Error)]
pub enum MapError {
    /// Map parameters violate `1 <= L <= t <= m` or the universe range.
    #[error("map parameters out of range: {reason}")]
    BadParameters { reason: String },
    /// An assignment refers to a primitive share the map does not have.
    #[error("assignment references primitive share {index} but the map has only {m}")]
    ShareIndexOutOfRange { index: usize, m: usize },
    /// The assignment table does not match the universe size.
    #[error("assignment lists {found} participants, expected {expected}")]
    WrongParticipantCount { expected: usize, found: usize },
    /// Every primitive share must be held by someone.
    #[error("primitive share {index} is assigned to no participant")]
    UnassignedPrimitive { index: usize },
    /// An operation required a complete and consistent structure.
    #[error("structure does not meet the operation's requirements: {0}")]
    InconsistentStructure(String),
    /// An underlying structure operation failed.
    #[error(transparent)]
    Access(#[from] AccessError),
    /// The optimizer failed while building a map.
    #[error(transparent)]
    Optimizer(#[from] crate::ilp::IlpError),
    /// Malformed JSON input.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which compliance rules a ramp map is checked against.
///
/// `Exact` demands that every mid-level coalition learn precisely its
/// level's fraction of the secret; `Relaxed` lets it learn any smaller
/// fraction (the boundary levels are identical in both modes). Exact
/// compliance implies relaxed compliance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampMode {
    /// Mid-level coalitions hold exactly their entitled primitive count.
    Exact,
    /// Mid-level coalitions hold at most their entitled primitive count.
    Relaxed,
}

// ---------------------------------------------------------------------------
// Assignment maps
// ---------------------------------------------------------------------------

/// A multiple assignment map onto `(t, L, m)`-threshold primitives.
///
/// `assign[i]` lists the primitive-share indices (in `0..m`) handed to
/// participant `i`. Every primitive share is held by at least one
/// participant, and `1 <= L <= t <= m`. Perfect maps have `L = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentMap {
    n: u8,
    t: usize,
    l: usize,
    m: usize,
    assign: Vec<Vec<usize>>,
}

impl AssignmentMap {
    /// Builds a map, normalizing each assignment list (sorted, duplicate
    /// free) and checking the structural invariants.
    pub fn new(
        n: usize,
        t: usize,
        l: usize,
        m: usize,
        assign: Vec<Vec<usize>>,
    ) -> Result<Self, MapError> {
        if !(1..=crate::access::MAX_PARTICIPANTS).contains(&n) {
            return Err(MapError::BadParameters {
                reason: format!("universe of {n} participants unsupported"),
            });
        }
        if t == 0 || m < t || l == 0 || l > t {
            return Err(MapError::BadParameters {
                reason: format!("need 1 <= L <= t <= m, got t={t}, L={l}, m={m}"),
            });
        }
        if assign.len() != n {
            return Err(MapError::WrongParticipantCount { expected: n, found: assign.len() });
        }
        let mut assign: Vec<Vec<usize>> = assign;
        let mut held = vec![false; m];
        for list in &mut assign {
            list.sort_unstable();
            list.dedup();
            for &idx in list.iter() {
                if idx >= m {
                    return Err(MapError::ShareIndexOutOfRange { index: idx, m });
                }
                held[idx] = true;
            }
        }
        if let Some(index) = held.iter().position(|&h| !h) {
            return Err(MapError::UnassignedPrimitive { index });
        }
        Ok(AssignmentMap { n: n as u8, t, l, m, assign })
    }

    /// Universe size.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Threshold of the underlying primitive scheme.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Ramp parameter of the underlying primitive scheme (1 for perfect).
    pub fn levels(&self) -> usize {
        self.l
    }

    /// Number of primitive shares.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Primitive shares handed to participant `i`, ascending.
    pub fn assign(&self, i: usize) -> &[usize] {
        &self.assign[i]
    }

    /// The whole assignment table.
    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assign
    }

    /// The distinct primitive shares jointly held by a coalition.
    pub fn phi(&self, set: ParticipantSet) -> Vec<usize> {
        assert_eq!(set.n(), self.n(), "coalition universe differs from map");
        let mut held = vec![false; self.m];
        for i in set.iter() {
            for &idx in &self.assign[i] {
                held[idx] = true;
            }
        }
        (0..self.m).filter(|&i| held[i]).collect()
    }

    /// Number of distinct primitive shares jointly held by a coalition.
    pub fn phi_count(&self, set: ParticipantSet) -> usize {
        assert_eq!(set.n(), self.n(), "coalition universe differs from map");
        let mut held = vec![false; self.m];
        let mut count = 0;
        for i in set.iter() {
            for &idx in &self.assign[i] {
                if !held[idx] {
                    held[idx] = true;
                    count += 1;
                }
            }
        }
        count
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDocument {
    n: usize,
    t: usize,
    #[serde(rename = "L")]
    l: usize,
    m: usize,
    assign: Vec<Vec<usize>>,
}

/// Parses an assignment map from its JSON document form.
pub fn map_from_json(text: &str) -> Result<AssignmentMap, MapError> {
    let doc: MapDocument = serde_json::from_str(text)?;
    AssignmentMap::new(doc.n, doc.t, doc.l, doc.m, doc.assign)
}

/// Serializes an assignment map to its JSON document form.
pub fn map_to_json(map: &AssignmentMap) -> String {
    let doc = MapDocument {
        n: map.n(),
        t: map.t(),
        l: map.levels(),
        m: map.m(),
        assign: map.assign.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("plain document serializes")
}

// ---------------------------------------------------------------------------
// Coding rates
// ---------------------------------------------------------------------------

/// Exact coding rates of an assignment map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateReport {
    per_participant: Vec<Rate>,
    average: Rate,
    worst: Rate,
}

impl RateReport {
    /// Rate of each participant: primitive count over `L`.
    pub fn per_participant(&self) -> &[Rate] {
        &self.per_participant
    }

    /// Mean of the per-participant rates.
    pub fn average(&self) -> Rate {
        self.average
    }

    /// Maximum per-participant rate.
    pub fn worst(&self) -> Rate {
        self.worst
    }
}

/// Computes the exact coding rates of a map: participant `i` stores
/// `|assign(i)|` primitives, each worth a `1/L` fraction of the secret.
pub fn rates(map: &AssignmentMap) -> RateReport {
    let l = map.levels() as i64;
    let per: Vec<Rate> = (0..map.n()).map(|i| Rate::new(map.assign(i).len() as i64, l)).collect();
    let sum = per.iter().fold(Rate::from_integer(0), |acc, r| acc + r);
    let average = sum / Rate::from_integer(map.n() as i64);
    let worst = per.iter().copied().max().expect("at least one participant");
    RateReport { per_participant: per, average, worst }
}

// ---------------------------------------------------------------------------
// Cumulative constructions
// ---------------------------------------------------------------------------

/// The cumulative map: one primitive share per maximal forbidden set, with
/// participant `i` receiving exactly the shares of the forbidden sets it
/// does not belong to, over `(m, m)`-threshold primitives.
///
/// For a structure with no forbidden coalitions at all the construction has
/// nothing to enumerate; to keep the operation total we return the trivial
/// map handing the single share of a `(1, 1)`-threshold scheme to everyone.
///
/// # Panics
/// Panics if some maximal forbidden set is the whole universe (only
/// possible for inconsistent structures, which the construction does not
/// support).
pub fn cumulative_map(s: &AccessStructure) -> AssignmentMap {
    let n = s.n();
    let fam = s.forbidden_max();
    if fam.is_empty() {
        return AssignmentMap::new(n, 1, 1, 1, vec![vec![0]; n]).expect("trivial map is valid");
    }
    let m = fam.len();
    let assign: Vec<Vec<usize>> = (0..n)
        .map(|i| fam.iter().enumerate().filter(|(_, f)| !f.contains(i)).map(|(j, _)| j).collect())
        .collect();
    AssignmentMap::new(n, m, 1, m, assign)
        .expect("cumulative construction is valid for consistent structures")
}

fn require_complete_consistent(s: &AccessStructure) -> Result<(), MapError> {
    if !s.complete() {
        return Err(MapError::InconsistentStructure("structure must be complete".into()));
    }
    let report = s.check_consistency();
    if !report.is_consistent() {
        return Err(MapError::InconsistentStructure(format!(
            "structure has {} consistency violation(s)",
            report.violations().len()
        )));
    }
    Ok(())
}

/// The modified cumulative map. With `g` the size of the smallest minimal
/// qualified set, only the maximal forbidden sets of size at least `g` need
/// dedicated cover; each such set `G_j` contributes a block `U_j` of
/// `|G_j| - g + 1` extra primitive shares. Participant `i` receives its own
/// primitive share `W_i` plus every block whose forbidden set excludes it,
/// over `(g + ℓ, n + ℓ)`-threshold primitives where `ℓ` is the total block
/// length. On a threshold structure no block is needed and the map is the
/// ideal one-share-each assignment.
///
/// # Errors
/// [`MapError::InconsistentStructure`] unless the structure is complete
/// and consistent.
pub fn modified_cumulative_map(s: &AccessStructure) -> Result<AssignmentMap, MapError> {
    require_complete_consistent(s)?;
    let n = s.n();
    let g = s.qualified_min().iter().map(|a| a.len()).min().expect("qualified family is nonempty");
    let blocks: Vec<(ParticipantSet, usize)> =
        s.forbidden_max().iter().filter(|a| a.len() >= g).map(|a| (a, a.len() - g + 1)).collect();
    let extra: usize = blocks.iter().map(|&(_, len)| len).sum();
    let (t, m) = (g + extra, n + extra);
    let mut assign: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut start = n;
    for &(covered, len) in &blocks {
        for (i, list) in assign.iter_mut().enumerate() {
            if !covered.contains(i) {
                list.extend(start..start + len);
            }
        }
        start += len;
    }
    AssignmentMap::new(n, t, 1, m, assign)
}

/// Whether the modified cumulative map is guaranteed no worse than the
/// plain cumulative map on average rate: with `g`, blocks `G_0` and total
/// block length `ℓ` as in [`modified_cumulative_map`], tests
/// `|forbidden_max| >= ((n - g - 1)·ℓ + n + 2·|G_0|) / (n - g + 1)`.
/// The comparison is done in integers after multiplying through by the
/// (positive) denominator, so it is exact.
pub fn modified_advantage_holds(s: &AccessStructure) -> bool {
    let n = s.n() as i64;
    let g = s.qualified_min().iter().map(|a| a.len()).min().expect("qualified family is nonempty")
        as i64;
    let g0: i64 = s.forbidden_max().iter().filter(|a| a.len() as i64 >= g).count() as i64;
    let ell: i64 = s
        .forbidden_max()
        .iter()
        .filter(|a| a.len() as i64 >= g)
        .map(|a| a.len() as i64 - g + 1)
        .sum();
    let lhs = s.forbidden_max().len() as i64 * (n - g + 1);
    let rhs = (n - g - 1) * ell + n + 2 * g0;
    lhs >= rhs
}

/// Builds the covering multiset behind the ramp cumulative map: walking
/// `j = 1..=L`, every maximal representative of level `L - j` is added as
/// many times as needed for the multiset to contain at least `j` supersets
/// of it. Representatives are processed in canonical order, which fixes
/// the multiset and the share layout.
pub(crate) fn ramp_cover_multiset(r: &RampAccessStructure) -> Result<Multiset, MapError> {
    let min_max = r.min_max()?;
    let l = r.levels();
    let mut cover = Multiset::new(r.n());
    for j in 1..=l {
        for a in min_max[l - j].1.iter() {
            let have = cover.superset_count(a);
            if have < j {
                cover.add(a, j - have);
            }
        }
    }
    Ok(cover)
}

/// The ramp cumulative map: one primitive share per member `F_j` of the
/// covering multiset (duplicates included), with participant `i` receiving
/// the shares of the members it does not belong to, over `(m, L, m)`-ramp
/// primitives. With `L = 1` this is exactly the cumulative map. The result
/// satisfies the relaxed compliance rules, not necessarily the exact ones.
///
/// # Errors
/// [`AccessError::InconsistentRamp`] (wrapped) when the structure fails
/// its monotonicity check; [`MapError::BadParameters`] for degenerate
/// structures whose covering multiset is smaller than `L`.
pub fn ramp_cumulative_map(r: &RampAccessStructure) -> Result<AssignmentMap, MapError> {
    let cover = ramp_cover_multiset(r)?;
    let members = cover.expanded();
    let n = r.n();
    let m = members.len();
    let assign: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            members.iter().enumerate().filter(|(_, f)| !f.contains(i)).map(|(j, _)| j).collect()
        })
        .collect();
    AssignmentMap::new(n, m, r.levels(), m, assign)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// A single way in which a map fails to realize a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapViolation {
    /// The map does not even fit the structure (universe or level count).
    ShapeMismatch { reason: String },
    /// A coalition that must recover the secret holds too few primitives.
    QualifiedUndersupplied { set: ParticipantSet, holds: usize, needs: usize },
    /// A coalition that must learn nothing holds too many primitives.
    ForbiddenOversupplied { set: ParticipantSet, holds: usize, allows: usize },
    /// A mid-level coalition holds the wrong number of primitives for its
    /// level (`holds > target` in relaxed mode, `holds != target` in exact
    /// mode).
    LevelMismatch { set: ParticipantSet, level: usize, holds: usize, target: usize },
}

impl fmt::Display for MapViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapViolation::ShapeMismatch { reason } => write!(f, "shape mismatch: {reason}"),
            MapViolation::QualifiedUndersupplied { set, holds, needs } => {
                write!(f, "qualified coalition {set} holds {holds} primitives, needs {needs}")
            }
            MapViolation::ForbiddenOversupplied { set, holds, allows } => {
                write!(f, "forbidden coalition {set} holds {holds} primitives, allowed {allows}")
            }
            MapViolation::LevelMismatch { set, level, holds, target } => {
                write!(f, "level-{level} coalition {set} holds {holds} primitives, target {target}")
            }
        }
    }
}

/// Result of checking a map against a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    violations: Vec<MapViolation>,
}

impl VerifyReport {
    /// True when the map realizes the structure.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Every violation found, in deterministic order.
    pub fn violations(&self) -> &[MapViolation] {
        &self.violations
    }
}

/// Checks a perfect (`L = 1`) map against a structure: every minimal
/// qualified set must hold at least `t` distinct primitives and every
/// maximal forbidden set at most `t - 1`. Monotonicity of the closures
/// makes the representative checks sufficient for all coalitions.
pub fn verify_perfect(map: &AssignmentMap, s: &AccessStructure) -> VerifyReport {
    let mut violations = Vec::new();
    if map.levels() != 1 {
        violations.push(MapViolation::ShapeMismatch {
            reason: format!("perfect verification requires L = 1, map has L = {}", map.levels()),
        });
    }
    if map.n() != s.n() {
        violations.push(MapViolation::ShapeMismatch {
            reason: format!("map is over {} participants, structure over {}", map.n(), s.n()),
        });
    }
    if !violations.is_empty() {
        return VerifyReport { violations };
    }
    let t = map.t();
    for a in s.qualified_min().iter() {
        let holds = map.phi_count(a);
        if holds < t {
            violations.push(MapViolation::QualifiedUndersupplied { set: a, holds, needs: t });
        }
    }
    for a in s.forbidden_max().iter() {
        let holds = map.phi_count(a);
        if holds > t - 1 {
            violations.push(MapViolation::ForbiddenOversupplied { set: a, holds, allows: t - 1 });
        }
    }
    VerifyReport { violations }
}

/// Checks a ramp map against a ramp structure. Holding `w` of the
/// `(t, L, m)`-ramp primitives leaves a conditional-entropy fraction
/// `clamp((t - w) / L, 0, 1)` of the secret, so: minimal top-level sets
/// need at least `t` primitives, maximal level-0 sets at most `t - L`,
/// and a level-`j` representative (minimal or maximal) targets
/// `t - L + j` — exactly that many in [`RampMode::Exact`], at most that
/// many in [`RampMode::Relaxed`].
///
/// # Errors
/// [`AccessError::InconsistentRamp`] (wrapped) when the structure fails
/// its monotonicity check.
// The level loop below indexes `min_max` by the level number it also uses
// in arithmetic; an enumerate rewrite obscures that.
#[allow(clippy::needless_range_loop)]
pub fn verify_ramp(
    map: &AssignmentMap,
    r: &RampAccessStructure,
    mode: RampMode,
) -> Result<VerifyReport, MapError> {
    let min_max = r.min_max()?;
    let mut violations = Vec::new();
    if map.levels() != r.levels() {
        violations.push(MapViolation::ShapeMismatch {
            reason: format!("map has L = {}, structure has L = {}", map.levels(), r.levels()),
        });
    }
    if map.n() != r.n() {
        violations.push(MapViolation::ShapeMismatch {
            reason: format!("map is over {} participants, structure over {}", map.n(), r.n()),
        });
    }
    if !violations.is_empty() {
        return Ok(VerifyReport { violations });
    }
    let (t, l) = (map.t(), map.levels());
    for a in min_max[l].0.iter() {
        let holds = map.phi_count(a);
        if holds < t {
            violations.push(MapViolation::QualifiedUndersupplied { set: a, holds, needs: t });
        }
    }
    for a in min_max[0].1.iter() {
        let holds = map.phi_count(a);
        if holds > t - l {
            violations.push(MapViolation::ForbiddenOversupplied { set: a, holds, allows: t - l });
        }
    }
    for j in 1..l {
        let (mins, maxs) = &min_max[j];
        let mut reps: Vec<ParticipantSet> = mins.iter().chain(maxs.iter()).collect();
        reps.sort();
        reps.dedup();
        let target = t - l + j;
        for &a in &reps {
            let holds = map.phi_count(a);
            let bad = match mode {
                RampMode::Exact => holds != target,
                RampMode::Relaxed => holds > target,
            };
            if bad {
                violations.push(MapViolation::LevelMismatch { set: a, level: j, holds, target });
            }
        }
    }
    Ok(VerifyReport { violations })
}

// ---------------------------------------------------------------------------
// Ideal realizability
// ---------------------------------------------------------------------------

/// Verdict of [`ideal_partition`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealOutcome {
    /// The structure is exactly the sets picking one participant from `t`
    /// of the listed blocks; handing block `j` the single primitive `j` of
    /// a `(t, m)`-threshold scheme realizes it with every rate equal to 1.
    Ideal {
        /// Disjoint nonempty blocks covering every participant, ordered by
        /// their primitive-share index.
        partition: Vec<ParticipantSet>,
        /// Recovery threshold of the realizing scheme.
        t: usize,
    },
    /// No assignment map gives every participant exactly one primitive.
    /// Carries the provably minimal worst rate. Note the edge case: a
    /// structure with a vacuous participant can reach worst rate 1 and
    /// still not be ideal, because the vacuous participant ends up with
    /// no primitive at all rather than exactly one.
    NotIdeal {
        /// Minimum achievable worst coding rate.
        worst: Rate,
    },
}

/// All sets formed by choosing `t` of the blocks and one participant from
/// each chosen block.
fn product_expansion(n: usize, blocks: &[ParticipantSet], t: usize) -> SetFamily {
    fn pick(
        blocks: &[ParticipantSet],
        n: usize,
        start: usize,
        remaining: usize,
        chosen: &mut Vec<usize>,
        members: &mut Vec<ParticipantSet>,
    ) {
        if remaining == 0 {
            cartesian(blocks, chosen, 0, ParticipantSet::empty(n), members);
            return;
        }
        if blocks.len() - start < remaining {
            return;
        }
        chosen.push(start);
        pick(blocks, n, start + 1, remaining - 1, chosen, members);
        chosen.pop();
        pick(blocks, n, start + 1, remaining, chosen, members);
    }
    fn cartesian(
        blocks: &[ParticipantSet],
        chosen: &[usize],
        depth: usize,
        acc: ParticipantSet,
        members: &mut Vec<ParticipantSet>,
    ) {
        match chosen.get(depth) {
            None => members.push(acc),
            Some(&b) => {
                for i in blocks[b].iter() {
                    cartesian(blocks, chosen, depth + 1, acc.with(i), members);
                }
            }
        }
    }
    let mut members = Vec::new();
    pick(blocks, n, 0, t, &mut Vec::with_capacity(t), &mut members);
    SetFamily::new(n, members).expect("expansion stays inside the blocks' universe")
}

/// Decides whether a structure is realizable with every coding rate equal
/// to 1, and produces the witness partition when it is.
///
/// Minimizes the worst rate by integer programming. When the optimum is 1
/// and every participant holds exactly one primitive, the holder sets of
/// the primitives form a partition of the participants, and the structure
/// must equal the family of one-per-block selections across every choice
/// of `t` blocks; this is re-derived by direct expansion and checked
/// against the structure as a guard on the optimizer. Otherwise the
/// minimal worst rate is reported.
///
/// `config.incumbent`, when given, must be a feasible point of the
/// worst-rate program; when absent the cumulative map seeds the search.
///
/// # Errors
/// [`MapError::InconsistentStructure`] unless the structure is complete
/// and consistent; solver failures (budget exhaustion) propagate via
/// [`MapError::Optimizer`].
pub fn ideal_partition(
    s: &AccessStructure,
    config: &SolveConfig,
) -> Result<IdealOutcome, MapError> {
    require_complete_consistent(s)?;
    let ip = build_ip_worst(s)?;
    let mut cfg = config.clone();
    if cfg.incumbent.is_none() {
        cfg.incumbent = vector_from_map(&ip, &cumulative_map(s));
    }
    let sol = solve(&ip, &cfg);
    if !sol.is_optimal() {
        return Err(IlpError::NotOptimal { status: sol.status() }.into());
    }
    let map = solution_to_map(s, &sol)?;
    let all_single = (0..map.n()).all(|i| map.assign(i).len() == 1);
    if sol.objective() != 1 || !all_single {
        return Ok(IdealOutcome::NotIdeal { worst: Rate::new(sol.objective(), 1) });
    }
    let mut partition: Vec<ParticipantSet> = vec![ParticipantSet::empty(map.n()); map.m()];
    for i in 0..map.n() {
        partition[map.assign(i)[0]] = partition[map.assign(i)[0]].with(i);
    }
    assert!(
        partition.iter().all(|b| !b.is_empty()),
        "internal error: unheld primitive in a one-each optimal map",
    );
    let expansion = product_expansion(map.n(), &partition, map.t());
    assert!(
        expansion == *s.qualified_min(),
        "internal error: block selections disagree with the structure",
    );
    Ok(IdealOutcome::Ideal { partition, t: map.t() })
}

// ---------------------------------------------------------------------------
// Per-level realization of ramp structures
// ---------------------------------------------------------------------------

/// How each level's perfect structure is realized by
/// [`construction2_ramp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelStrategy {
    /// Cumulative map per level; no optimization.
    Cumulative,
    /// Average-rate-optimal map per level.
    IpAverage,
    /// Worst-rate-optimal map per level.
    IpWorst,
}

/// One level of a [`RampRecipe`]: the perfect structure separating "knows
/// at least `level` parts" from the rest, and the map realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRecipe {
    level: usize,
    structure: AccessStructure,
    map: AssignmentMap,
}

impl LevelRecipe {
    /// Level index in `1..=L`.
    pub fn level(&self) -> usize {
        self.level
    }

    /// The perfect structure realized at this level.
    pub fn structure(&self) -> &AccessStructure {
        &self.structure
    }

    /// Assignment map for this level's scheme.
    pub fn map(&self) -> &AssignmentMap {
        &self.map
    }
}

/// Result of [`construction2_ramp`]: one independent perfect scheme per
/// level, with each participant's combined share the concatenation of its
/// level shares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RampRecipe {
    levels: Vec<LevelRecipe>,
    rates: RateReport,
}

impl RampRecipe {
    /// Per-level structures and maps, in level order `1..=L`.
    pub fn levels(&self) -> &[LevelRecipe] {
        &self.levels
    }

    /// Combined rates: each participant's rate is the sum of its per-level
    /// primitive counts divided by the number of levels.
    pub fn rates(&self) -> &RateReport {
        &self.rates
    }
}

/// Realizes a ramp structure as a stack of `L` perfect schemes. The
/// secret splits into `L` parts; part `j` is shared under the perfect
/// structure whose qualified sets are those of level at least `j`, so a
/// level-`w` set recovers exactly parts `1..=w`. Each level's map is
/// built by the chosen strategy; `config` supplies the budget and
/// canonicalization settings for the optimizing strategies (each level
/// seeds its own search from its cumulative map — any caller-supplied
/// incumbent is ignored, since the per-level programs differ).
///
/// # Errors
/// Level extraction fails on inconsistent ramp structures; solver
/// failures propagate via [`MapError::Optimizer`].
pub fn construction2_ramp(
    r: &RampAccessStructure,
    strategy: LevelStrategy,
    config: &SolveConfig,
) -> Result<RampRecipe, MapError> {
    let l = r.levels();
    let mut levels = Vec::with_capacity(l);
    for j in 1..=l {
        let structure = r.level_structure(j)?;
        let map = match strategy {
            LevelStrategy::Cumulative => cumulative_map(&structure),
            LevelStrategy::IpAverage | LevelStrategy::IpWorst => {
                let ip = match strategy {
                    LevelStrategy::IpAverage => build_ip_avg(&structure)?,
                    _ => build_ip_worst(&structure)?,
                };
                let mut cfg = config.clone();
                cfg.incumbent = vector_from_map(&ip, &cumulative_map(&structure));
                let sol = solve(&ip, &cfg);
                if !sol.is_optimal() {
                    return Err(IlpError::NotOptimal { status: sol.status() }.into());
                }
                solution_to_map(&structure, &sol)?
            }
        };
        levels.push(LevelRecipe { level: j, structure, map });
    }
    let n = r.n();
    let per_participant: Vec<Rate> = (0..n)
        .map(|i| {
            let held: usize = levels.iter().map(|lr| lr.map.assign(i).len()).sum();
            Rate::new(held as i64, l as i64)
        })
        .collect();
    let average =
        per_participant.iter().fold(Rate::new(0, 1), |acc, r| acc + r) / Rate::new(n as i64, 1);
    let worst = per_participant.iter().copied().max().expect("at least one participant");
    Ok(RampRecipe { levels, rates: RateReport { per_participant, average, worst } })
}
