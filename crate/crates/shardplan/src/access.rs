//! Access structures: participant-set algebra, perfect and ramp access
//! structures, consistency checking and participant classification.
//!
//! A perfect access structure partitions the coalitions of a participant
//! universe into qualified and forbidden families; a ramp structure refines
//! this into `L + 1` ordered levels, where a coalition at level `j` learns a
//! `j/L` fraction of the secret. Both are stored in reduced form: the
//! qualified side by its minimal sets, the forbidden side by its maximal
//! sets, and ramp levels as a table over the subset lattice. Partially
//! specified ("incomplete") structures are first-class citizens; all checks
//! report on exactly the coalitions that were specified.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard upper bound on universe size for the set algebra (bitmask width).
pub const MAX_PARTICIPANTS: usize = 16;

/// Default cap for operations that enumerate all `2^n` coalitions.
///
/// Operations that walk the full subset lattice accept an explicit cap via
/// their `_with_cap` variants; the plain variants refuse universes larger
/// than this.
pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// Errors produced by structure construction, classification and parsing.
#[derive(Debug, Error)]
pub enum AccessError {
    /// A participant index was not in `0..n`.
    #[error("participant index {index} out of range for a universe of {n}")]
    ParticipantOutOfRange { index: usize, n: usize },
    /// Universe size outside the supported range `1..=16`.
    #[error("universe of {n} participants outside the supported range 1..={MAX_PARTICIPANTS}")]
    UnsupportedUniverse { n: usize },
    /// Two objects over different universes were combined.
    #[error("universe size mismatch: expected {expected} participants, found {found}")]
    UniverseMismatch { expected: usize, found: usize },
    /// Threshold parameters violate their admissible range.
    #[error("threshold parameters out of range: {reason}")]
    BadThreshold { reason: String },
    /// The qualified family of an access structure may not be empty.
    #[error("qualified family must contain at least one set")]
    EmptyQualifiedFamily,
    /// An operation would enumerate more coalitions than the cap allows.
    #[error(
        "operation enumerates all coalitions of {n} participants, above the cap of {cap}; \
         raise the cap to proceed"
    )]
    EnumerationCapExceeded { n: usize, cap: usize },
    /// A coalition was placed in two different ramp levels.
    #[error("coalition {set} assigned to both level {first} and level {second}")]
    AmbiguousLevel { set: String, first: usize, second: usize },
    /// A level index outside `0..=L`.
    #[error("level {level} out of range for a structure with levels 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    /// A ramp constructor received the wrong number of level families.
    #[error("expected {expected} level families (levels 0..={max}), found {found}")]
    WrongLevelCount { expected: usize, found: usize, max: usize },
    /// An operation that requires a monotone ramp structure was invoked on
    /// one that fails the monotonicity check.
    #[error("ramp structure fails the monotonicity check")]
    InconsistentRamp,
    /// A structure document was syntactically valid JSON but semantically bad.
    #[error("invalid structure document: {0}")]
    Document(String),
    /// The document was not valid JSON at all.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Participant sets
// ---------------------------------------------------------------------------

/// A subset of the participant universe, packed into a bitmask.
///
/// Participants are identified by 0-based indices `0..n`; bit `i` is set
/// exactly when participant `i` belongs to the coalition. The universe size
/// `n` travels with the set so complements and closures are well defined.
/// Sets order by ascending bitmask, which is the canonical ordering used
/// everywhere a family is enumerated.
///
/// ```
/// use shardplan::access::ParticipantSet;
///
/// let a = ParticipantSet::from_indices(4, &[0, 2]).unwrap();
/// let b = ParticipantSet::singleton(4, 2);
/// assert!(b.is_subset_of(a));
/// assert_eq!(a.complement().to_string(), "{1,3}");
/// ```
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticipantSet {
    n: u8,
    bits: u32,
}

impl ParticipantSet {
    /// The empty coalition over a universe of `n` participants.
    ///
    /// # Panics
    /// Panics if `n` is outside `1..=16`.
    pub fn empty(n: usize) -> Self {
        assert!(
            (1..=MAX_PARTICIPANTS).contains(&n),
            "universe size {n} outside 1..={MAX_PARTICIPANTS}"
        );
        ParticipantSet { n: n as u8, bits: 0 }
    }

    /// The full universe of `n` participants.
    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        s.bits = (1u32 << n) - 1;
        s
    }

    /// The coalition `{i}`.
    ///
    /// # Panics
    /// Panics if `i >= n`.
    pub fn singleton(n: usize, i: usize) -> Self {
        let mut s = Self::empty(n);
        assert!(i < n, "participant {i} out of range for universe of {n}");
        s.bits = 1 << i;
        s
    }

    /// Builds a coalition from raw mask bits.
    ///
    /// # Panics
    /// Panics if any bit at position `>= n` is set.
    pub fn from_bits(n: usize, bits: u32) -> Self {
        let mut s = Self::empty(n);
        assert!(bits >> n == 0, "mask {bits:#x} has bits outside a universe of {n}");
        s.bits = bits;
        s
    }

    /// Builds a coalition from participant indices, validating the range.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self, AccessError> {
        if !(1..=MAX_PARTICIPANTS).contains(&n) {
            return Err(AccessError::UnsupportedUniverse { n });
        }
        let mut bits = 0u32;
        for &i in indices {
            if i >= n {
                return Err(AccessError::ParticipantOutOfRange { index: i, n });
            }
            bits |= 1 << i;
        }
        Ok(ParticipantSet { n: n as u8, bits })
    }

    /// Universe size this coalition lives in.
    pub fn n(self) -> usize {
        self.n as usize
    }

    /// Raw bitmask.
    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Number of participants in the coalition.
    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// True when no participant belongs to the coalition.
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    /// True when participant `i` belongs to the coalition.
    pub fn contains(self, i: usize) -> bool {
        i < self.n as usize && self.bits >> i & 1 == 1
    }

    /// This coalition with participant `i` added.
    pub fn with(self, i: usize) -> Self {
        assert!(i < self.n as usize);
        ParticipantSet { n: self.n, bits: self.bits | 1 << i }
    }

    /// This coalition with participant `i` removed.
    pub fn without(self, i: usize) -> Self {
        assert!(i < self.n as usize);
        ParticipantSet { n: self.n, bits: self.bits & !(1 << i) }
    }

    fn same_universe(self, other: Self) {
        assert_eq!(self.n, other.n, "coalition universes differ");
    }

    /// Set union.
    pub fn union(self, other: Self) -> Self {
        self.same_universe(other);
        ParticipantSet { n: self.n, bits: self.bits | other.bits }
    }

    /// Set intersection.
    pub fn intersection(self, other: Self) -> Self {
        self.same_universe(other);
        ParticipantSet { n: self.n, bits: self.bits & other.bits }
    }

    /// Set difference `self \ other`.
    pub fn difference(self, other: Self) -> Self {
        self.same_universe(other);
        ParticipantSet { n: self.n, bits: self.bits & !other.bits }
    }

    /// Complement within the universe.
    pub fn complement(self) -> Self {
        ParticipantSet { n: self.n, bits: !self.bits & ((1 << self.n) - 1) }
    }

    /// True when every member of `self` is also in `other`.
    pub fn is_subset_of(self, other: Self) -> bool {
        self.same_universe(other);
        self.bits & !other.bits == 0
    }

    /// True when every member of `other` is also in `self`.
    pub fn is_superset_of(self, other: Self) -> bool {
        other.is_subset_of(self)
    }

    /// True when the coalitions share no participant.
    pub fn is_disjoint(self, other: Self) -> bool {
        self.same_universe(other);
        self.bits & other.bits == 0
    }

    /// Iterates member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n as usize).filter(move |i| bits >> i & 1 == 1)
    }

    /// Member indices in ascending order.
    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Display for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.n)
    }
}

/// Iterates every submask of `mask` (including `mask` itself and `0`),
/// in descending mask order.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut cur = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = cur;
        if cur == 0 {
            done = true;
        } else {
            cur = (cur - 1) & mask;
        }
        Some(out)
    })
}

// ---------------------------------------------------------------------------
// Set families
// ---------------------------------------------------------------------------

/// A duplicate-free family of coalitions over a common universe.
///
/// Members are kept sorted by ascending bitmask; that ordering is the
/// canonical one and is relied on wherever family members are indexed (the
/// ordering of primitive shares in the cumulative constructions, constraint
/// rows in the optimizer, and serialized output).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SetFamily {
    n: u8,
    members: Vec<ParticipantSet>,
}

impl SetFamily {
    /// The empty family over a universe of `n` participants.
    pub fn empty(n: usize) -> Self {
        assert!((1..=MAX_PARTICIPANTS).contains(&n));
        SetFamily { n: n as u8, members: Vec::new() }
    }

    /// Builds a family from coalitions, sorting and removing duplicates.
    ///
    /// # Errors
    /// [`AccessError::UniverseMismatch`] if any member lives in a universe
    /// other than `n`; [`AccessError::UnsupportedUniverse`] for a bad `n`.
    pub fn new(
        n: usize,
        members: impl IntoIterator<Item = ParticipantSet>,
    ) -> Result<Self, AccessError> {
        if !(1..=MAX_PARTICIPANTS).contains(&n) {
            return Err(AccessError::UnsupportedUniverse { n });
        }
        let mut v: Vec<ParticipantSet> = Vec::new();
        for m in members {
            if m.n() != n {
                return Err(AccessError::UniverseMismatch { expected: n, found: m.n() });
            }
            v.push(m);
        }
        v.sort();
        v.dedup();
        Ok(SetFamily { n: n as u8, members: v })
    }

    /// Builds a family from raw bitmasks (test and construction helper).
    ///
    /// # Panics
    /// Panics on masks outside the universe.
    pub fn from_masks(n: usize, masks: &[u32]) -> Self {
        let members = masks.iter().map(|&m| ParticipantSet::from_bits(n, m));
        Self::new(n, members).expect("masks already validated")
    }

    /// Universe size.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Number of member coalitions.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// True when the family has no members.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in canonical (ascending bitmask) order.
    pub fn members(&self) -> &[ParticipantSet] {
        &self.members
    }

    /// Iterates members in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = ParticipantSet> + '_ {
        self.members.iter().copied()
    }

    /// True when `set` is a member.
    pub fn contains(&self, set: ParticipantSet) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    /// True when some member is a subset of `set`.
    pub fn contains_subset_of(&self, set: ParticipantSet) -> bool {
        self.members.iter().any(|m| m.is_subset_of(set))
    }

    /// True when some member is a superset of `set`.
    pub fn contains_superset_of(&self, set: ParticipantSet) -> bool {
        self.members.iter().any(|m| m.is_superset_of(set))
    }

    /// True when no member properly contains another.
    pub fn is_antichain(&self) -> bool {
        self.members.iter().all(|&a| self.members.iter().all(|&b| a == b || !a.is_subset_of(b)))
    }
}

/// Members of `f` with no proper subset also in `f`.
pub fn minimal_sets(f: &SetFamily) -> SetFamily {
    let members: Vec<ParticipantSet> =
        f.iter().filter(|&a| f.iter().all(|b| b == a || !b.is_subset_of(a))).collect();
    SetFamily { n: f.n, members }
}

/// Members of `f` with no proper superset also in `f`.
pub fn maximal_sets(f: &SetFamily) -> SetFamily {
    let members: Vec<ParticipantSet> =
        f.iter().filter(|&a| f.iter().all(|b| b == a || !b.is_superset_of(a))).collect();
    SetFamily { n: f.n, members }
}

/// All supersets (within the universe) of members of `f`.
pub fn upward_closure(f: &SetFamily) -> SetFamily {
    let n = f.n();
    let members: Vec<ParticipantSet> = (0u32..1 << n)
        .map(|mask| ParticipantSet::from_bits(n, mask))
        .filter(|&s| f.contains_subset_of(s))
        .collect();
    SetFamily { n: f.n, members }
}

/// All subsets of members of `f`.
pub fn downward_closure(f: &SetFamily) -> SetFamily {
    let n = f.n();
    let members: Vec<ParticipantSet> = (0u32..1 << n)
        .map(|mask| ParticipantSet::from_bits(n, mask))
        .filter(|&s| f.contains_superset_of(s))
        .collect();
    SetFamily { n: f.n, members }
}

// ---------------------------------------------------------------------------
// Multisets of coalitions
// ---------------------------------------------------------------------------

/// A family of coalitions in which members may repeat.
///
/// Entries are kept sorted by coalition with positive multiplicities; the
/// expanded view lists repeated members adjacently, which fixes a canonical
/// ordering for constructions that index primitive shares by multiset
/// position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiset {
    n: u8,
    entries: Vec<(ParticipantSet, usize)>,
}

impl Multiset {
    /// The empty multiset over a universe of `n` participants.
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_PARTICIPANTS).contains(&n));
        Multiset { n: n as u8, entries: Vec::new() }
    }

    /// Universe size.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Adds `count` copies of `set`.
    ///
    /// # Panics
    /// Panics if `count` is zero or the universe differs.
    pub fn add(&mut self, set: ParticipantSet, count: usize) {
        assert!(count > 0, "multiplicity must be positive");
        assert_eq!(set.n(), self.n(), "coalition universes differ");
        match self.entries.binary_search_by_key(&set, |&(s, _)| s) {
            Ok(i) => self.entries[i].1 += count,
            Err(i) => self.entries.insert(i, (set, count)),
        }
    }

    /// Total number of members, multiplicities included.
    pub fn total(&self) -> usize {
        self.entries.iter().map(|&(_, c)| c).sum()
    }

    /// True when the multiset has no members.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of members that are supersets of `a`, counted with
    /// multiplicity.
    pub fn superset_count(&self, a: ParticipantSet) -> usize {
        self.entries.iter().filter(|&&(s, _)| s.is_superset_of(a)).map(|&(_, c)| c).sum()
    }

    /// Members in canonical order with duplicates listed adjacently.
    pub fn expanded(&self) -> Vec<ParticipantSet> {
        let mut out = Vec::with_capacity(self.total());
        for &(s, c) in &self.entries {
            out.extend(std::iter::repeat_n(s, c));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Perfect access structures
// ---------------------------------------------------------------------------

/// How a coalition relates to an access structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetClass {
    /// The coalition can recover the secret.
    Qualified,
    /// The coalition must learn nothing.
    Forbidden,
    /// The structure does not constrain this coalition.
    Unspecified,
}

/// Role a participant's share plays in a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShareClass {
    /// Adding the participant upgrades at least one coalition.
    Significant,
    /// Never upgrades a coalition, yet the participant alone already sits
    /// at a positive level — the share is forced into every distribution.
    Common,
    /// Never upgrades a coalition; the share can be realized empty.
    Vacuous,
}

/// Which stored family a consistency violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyRole {
    /// The minimal qualified family.
    QualifiedMin,
    /// The maximal forbidden family.
    ForbiddenMax,
}

/// A single defect found by [`AccessStructure::check_consistency`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyViolation {
    /// A minimal qualified set lies inside a maximal forbidden set, so some
    /// coalition would have to both recover the secret and learn nothing.
    QualifiedInsideForbidden { qualified: ParticipantSet, forbidden: ParticipantSet },
    /// A stored family contains a member inside another member.
    NotAntichain { role: FamilyRole, inner: ParticipantSet, outer: ParticipantSet },
    /// The structure claims to be complete but `witness` is neither
    /// qualified nor forbidden (first such coalition in canonical order).
    CoverageGap { witness: ParticipantSet },
}

/// Result of [`AccessStructure::check_consistency`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    violations: Vec<ConsistencyViolation>,
    covers_power_set: bool,
}

impl ConsistencyReport {
    /// True when no violation was found.
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }

    /// All defects found, in deterministic order.
    pub fn violations(&self) -> &[ConsistencyViolation] {
        &self.violations
    }

    /// Whether qualified and forbidden closures jointly cover every
    /// coalition, regardless of the declared `complete` flag.
    pub fn covers_power_set(&self) -> bool {
        self.covers_power_set
    }
}

/// A perfect access structure `{qualified, forbidden}` in reduced form.
///
/// The qualified family is stored by its minimal sets and the forbidden
/// family by its maximal sets; membership queries go through the respective
/// closures. `complete` records whether the two closures are declared to
/// cover the whole power set — incomplete structures constrain only the
/// coalitions inside the closures and leave the rest unspecified.
///
/// ```
/// use shardplan::access::AccessStructure;
///
/// let s = AccessStructure::from_threshold(2, 3).unwrap();
/// assert_eq!(s.qualified_min().len(), 3);
/// assert_eq!(s.forbidden_max().len(), 3);
/// assert!(s.check_consistency().is_consistent());
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessStructure {
    n: u8,
    qualified_min: SetFamily,
    forbidden_max: SetFamily,
    complete: bool,
}

impl AccessStructure {
    /// Builds a structure from (possibly unreduced) qualified and forbidden
    /// families, reducing both. The `complete` flag is the caller's claim
    /// that the closures cover the power set; it is verified by
    /// [`check_consistency`](Self::check_consistency), not here, so that
    /// defective inputs can be constructed and then reported on.
    ///
    /// # Errors
    /// [`AccessError::UniverseMismatch`] if the families disagree on `n`,
    /// [`AccessError::EmptyQualifiedFamily`] if no coalition is qualified.
    pub fn new(
        qualified: SetFamily,
        forbidden: SetFamily,
        complete: bool,
    ) -> Result<Self, AccessError> {
        if qualified.n() != forbidden.n() {
            return Err(AccessError::UniverseMismatch {
                expected: qualified.n(),
                found: forbidden.n(),
            });
        }
        let qualified_min = minimal_sets(&qualified);
        let forbidden_max = maximal_sets(&forbidden);
        if qualified_min.is_empty() {
            return Err(AccessError::EmptyQualifiedFamily);
        }
        Ok(AccessStructure { n: qualified.n, qualified_min, forbidden_max, complete })
    }

    /// The complete structure in which any `k` of `n` participants are
    /// qualified and any fewer are forbidden.
    ///
    /// # Errors
    /// [`AccessError::BadThreshold`] unless `1 <= k <= n`.
    pub fn from_threshold(k: usize, n: usize) -> Result<Self, AccessError> {
        if !(1..=MAX_PARTICIPANTS).contains(&n) {
            return Err(AccessError::UnsupportedUniverse { n });
        }
        if k == 0 || k > n {
            return Err(AccessError::BadThreshold {
                reason: format!("need 1 <= k <= n, got k={k}, n={n}"),
            });
        }
        let of_size = |c: usize| -> SetFamily {
            let members: Vec<ParticipantSet> = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == c)
                .map(|m| ParticipantSet::from_bits(n, m))
                .collect();
            SetFamily { n: n as u8, members }
        };
        Self::new(of_size(k), of_size(k - 1), true)
    }

    /// Universe size.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// The full participant universe.
    pub fn universe(&self) -> ParticipantSet {
        ParticipantSet::full(self.n())
    }

    /// Minimal qualified sets, in canonical order.
    pub fn qualified_min(&self) -> &SetFamily {
        &self.qualified_min
    }

    /// Maximal forbidden sets, in canonical order.
    pub fn forbidden_max(&self) -> &SetFamily {
        &self.forbidden_max
    }

    /// Whether the structure claims to specify every coalition.
    pub fn complete(&self) -> bool {
        self.complete
    }

    /// True when `set` contains a minimal qualified set.
    pub fn is_qualified(&self, set: ParticipantSet) -> bool {
        self.qualified_min.contains_subset_of(set)
    }

    /// True when `set` lies inside a maximal forbidden set.
    pub fn is_forbidden(&self, set: ParticipantSet) -> bool {
        self.forbidden_max.contains_superset_of(set)
    }

    /// Classifies a coalition. For inconsistent structures in which a
    /// coalition is both qualified and forbidden, qualified wins; run
    /// [`check_consistency`](Self::check_consistency) to detect that case.
    pub fn classify_set(&self, set: ParticipantSet) -> SetClass {
        if self.is_qualified(set) {
            SetClass::Qualified
        } else if self.is_forbidden(set) {
            SetClass::Forbidden
        } else {
            SetClass::Unspecified
        }
    }

    /// Verifies the structural invariants and returns every defect found:
    /// both stored families must be antichains, no minimal qualified set may
    /// lie inside a maximal forbidden set (for incomplete structures this is
    /// exactly the condition for a consistent completion to exist), and a
    /// structure declared complete must leave no coalition unspecified.
    pub fn check_consistency(&self) -> ConsistencyReport {
        let mut violations = Vec::new();
        for (role, fam) in [
            (FamilyRole::QualifiedMin, &self.qualified_min),
            (FamilyRole::ForbiddenMax, &self.forbidden_max),
        ] {
            for &a in fam.members() {
                for &b in fam.members() {
                    if a != b && a.is_subset_of(b) {
                        violations.push(ConsistencyViolation::NotAntichain {
                            role,
                            inner: a,
                            outer: b,
                        });
                    }
                }
            }
        }
        for &q in self.qualified_min.members() {
            for &f in self.forbidden_max.members() {
                if q.is_subset_of(f) {
                    violations.push(ConsistencyViolation::QualifiedInsideForbidden {
                        qualified: q,
                        forbidden: f,
                    });
                }
            }
        }
        let mut gap = None;
        for mask in 0u32..1 << self.n {
            let set = ParticipantSet::from_bits(self.n(), mask);
            if !self.is_qualified(set) && !self.is_forbidden(set) {
                gap = Some(set);
                break;
            }
        }
        if self.complete {
            if let Some(witness) = gap {
                violations.push(ConsistencyViolation::CoverageGap { witness });
            }
        }
        ConsistencyReport { violations, covers_power_set: gap.is_none() }
    }

    /// Classifies every participant as significant or vacuous under the
    /// default enumeration cap.
    pub fn classify_participants(&self) -> Result<Vec<ShareClass>, AccessError> {
        self.classify_participants_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    /// Classifies every participant, walking all coalitions of the
    /// complement universe. Participant `i` is significant when some
    /// forbidden coalition becomes qualified once `i` joins it; otherwise
    /// the share can be realized empty and is vacuous.
    ///
    /// # Errors
    /// [`AccessError::EnumerationCapExceeded`] when `n > cap`.
    pub fn classify_participants_with_cap(
        &self,
        cap: usize,
    ) -> Result<Vec<ShareClass>, AccessError> {
        let n = self.n();
        if n > cap {
            return Err(AccessError::EnumerationCapExceeded { n, cap });
        }
        Ok((0..n)
            .map(|i| {
                let rest = self.universe().without(i);
                let significant = submasks(rest.bits()).any(|mask| {
                    let a = ParticipantSet::from_bits(n, mask);
                    self.is_qualified(a.with(i)) && self.is_forbidden(a)
                });
                if significant {
                    ShareClass::Significant
                } else {
                    ShareClass::Vacuous
                }
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Ramp access structures
// ---------------------------------------------------------------------------

/// Per-level input bounds for [`RampAccessStructure::from_min_max`].
///
/// A level given as `(min, max)` contains every coalition `S` with
/// `m ⊆ S ⊆ M` for some `m` in `min` and some `M` in `max`. A missing
/// `min` defaults to `{∅}` and a missing `max` to `{V}`, but a level with
/// neither bound is empty (no coalition is specified at that level).
#[derive(Clone, Debug, Default)]
pub struct LevelBounds {
    /// Lower representatives of the level, if any.
    pub min: Option<SetFamily>,
    /// Upper representatives of the level, if any.
    pub max: Option<SetFamily>,
}

/// A monotonicity defect found by [`RampAccessStructure::check`]: a
/// coalition whose level drops when participants are added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RampViolation {
    /// The smaller coalition.
    pub subset: ParticipantSet,
    /// Its (larger) level.
    pub subset_level: usize,
    /// The containing coalition.
    pub superset: ParticipantSet,
    /// Its (smaller) level.
    pub superset_level: usize,
}

/// Result of [`RampAccessStructure::check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RampReport {
    violations: Vec<RampViolation>,
    specified: usize,
    universe: usize,
}

impl RampReport {
    /// True when every cumulative level family is monotone, i.e. a scheme
    /// with these levels exists.
    pub fn is_constructible(&self) -> bool {
        self.violations.is_empty()
    }

    /// All monotonicity defects, each with a witness pair.
    pub fn violations(&self) -> &[RampViolation] {
        &self.violations
    }

    /// Number of coalitions assigned a level.
    pub fn specified(&self) -> usize {
        self.specified
    }

    /// True when every coalition is assigned a level.
    pub fn fully_specified(&self) -> bool {
        self.specified == self.universe
    }
}

/// A ramp access structure with levels `0..=L` over `n` participants.
///
/// Level `L` coalitions recover the secret, level `0` coalitions learn
/// nothing, and a level-`j` coalition learns a `j/L` fraction. The structure
/// stores the level of every specified coalition in a table over the subset
/// lattice; coalitions without a level are unspecified, making partially
/// specified structures first-class. Levels are pairwise disjoint by
/// construction.
#[derive(Clone, Debug)]
pub struct RampAccessStructure {
    n: u8,
    l: u8,
    level_of: Vec<Option<u8>>,
    from_representatives: bool,
}

impl PartialEq for RampAccessStructure {
    fn eq(&self, other: &Self) -> bool {
        // The input-representation flag is provenance, not substance.
        self.n == other.n && self.l == other.l && self.level_of == other.level_of
    }
}

impl Eq for RampAccessStructure {}

impl RampAccessStructure {
    fn blank(n: usize, l: usize) -> Result<Self, AccessError> {
        if !(1..=MAX_PARTICIPANTS).contains(&n) {
            return Err(AccessError::UnsupportedUniverse { n });
        }
        if l == 0 || l > u8::MAX as usize {
            return Err(AccessError::BadThreshold {
                reason: format!("level count L must be at least 1, got {l}"),
            });
        }
        Ok(RampAccessStructure {
            n: n as u8,
            l: l as u8,
            level_of: vec![None; 1 << n],
            from_representatives: false,
        })
    }

    /// Builds a structure from exact level families: `families[j]` lists
    /// precisely the coalitions at level `j`.
    ///
    /// # Errors
    /// [`AccessError::WrongLevelCount`] unless exactly `l + 1` families are
    /// given; [`AccessError::AmbiguousLevel`] if a coalition appears in two
    /// families; universe errors as usual.
    pub fn from_level_families(
        n: usize,
        l: usize,
        families: &[SetFamily],
    ) -> Result<Self, AccessError> {
        let mut s = Self::blank(n, l)?;
        if families.len() != l + 1 {
            return Err(AccessError::WrongLevelCount {
                expected: l + 1,
                found: families.len(),
                max: l,
            });
        }
        for (j, fam) in families.iter().enumerate() {
            if fam.n() != n {
                return Err(AccessError::UniverseMismatch { expected: n, found: fam.n() });
            }
            for set in fam.iter() {
                s.assign_level(set, j)?;
            }
        }
        Ok(s)
    }

    /// Builds a structure from per-level lower/upper representatives; see
    /// [`LevelBounds`] for the interval semantics. `bounds[j]` describes
    /// level `j`.
    pub fn from_min_max(n: usize, l: usize, bounds: &[LevelBounds]) -> Result<Self, AccessError> {
        let mut s = Self::blank(n, l)?;
        if bounds.len() != l + 1 {
            return Err(AccessError::WrongLevelCount {
                expected: l + 1,
                found: bounds.len(),
                max: l,
            });
        }
        let empty = SetFamily::empty(n);
        let floor = SetFamily::new(n, [ParticipantSet::empty(n)])?;
        let ceil = SetFamily::new(n, [ParticipantSet::full(n)])?;
        for (j, b) in bounds.iter().enumerate() {
            for f in b.min.iter().chain(b.max.iter()) {
                if f.n() != n {
                    return Err(AccessError::UniverseMismatch { expected: n, found: f.n() });
                }
            }
            let (min, max) = match (&b.min, &b.max) {
                (None, None) => (&empty, &empty),
                (Some(min), None) => (min, &ceil),
                (None, Some(max)) => (&floor, max),
                (Some(min), Some(max)) => (min, max),
            };
            for mask in 0u32..1 << n {
                let set = ParticipantSet::from_bits(n, mask);
                if min.contains_subset_of(set) && max.contains_superset_of(set) {
                    s.assign_level(set, j)?;
                }
            }
        }
        s.from_representatives = true;
        Ok(s)
    }

    /// The complete `(k, l, n)`-threshold ramp structure: coalitions of at
    /// most `k - l` participants are at level 0, coalitions of at least `k`
    /// at level `l`, and sizes in between climb one level per participant.
    ///
    /// # Errors
    /// [`AccessError::BadThreshold`] unless `1 <= l <= k <= n`.
    pub fn from_threshold(k: usize, l: usize, n: usize) -> Result<Self, AccessError> {
        if !(1..=MAX_PARTICIPANTS).contains(&n) {
            return Err(AccessError::UnsupportedUniverse { n });
        }
        if l == 0 || l > k || k > n {
            return Err(AccessError::BadThreshold {
                reason: format!("need 1 <= L <= k <= n, got k={k}, L={l}, n={n}"),
            });
        }
        let mut s = Self::blank(n, l)?;
        for mask in 0u32..1 << n {
            let size = mask.count_ones() as usize;
            let level = if size <= k - l { 0 } else { (size - (k - l)).min(l) };
            s.level_of[mask as usize] = Some(level as u8);
        }
        Ok(s)
    }

    /// Lifts a perfect structure to a two-level ramp: qualified coalitions
    /// to level 1, forbidden coalitions to level 0, everything else left
    /// unspecified.
    pub fn from_perfect(s: &AccessStructure) -> Self {
        let n = s.n();
        let mut r = Self::blank(n, 1).expect("universe already validated");
        for mask in 0u32..1 << n {
            let set = ParticipantSet::from_bits(n, mask);
            r.level_of[mask as usize] = match s.classify_set(set) {
                SetClass::Qualified => Some(1),
                SetClass::Forbidden => Some(0),
                SetClass::Unspecified => None,
            };
        }
        r
    }

    fn assign_level(&mut self, set: ParticipantSet, level: usize) -> Result<(), AccessError> {
        if level > self.l as usize {
            return Err(AccessError::LevelOutOfRange { level, max: self.l as usize });
        }
        let slot = &mut self.level_of[set.bits() as usize];
        match *slot {
            Some(prev) if prev as usize != level => Err(AccessError::AmbiguousLevel {
                set: set.to_string(),
                first: prev as usize,
                second: level,
            }),
            _ => {
                *slot = Some(level as u8);
                Ok(())
            }
        }
    }

    /// Universe size.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// The level count parameter `L` (levels run `0..=L`).
    pub fn levels(&self) -> usize {
        self.l as usize
    }

    /// Whether the structure was built from min/max representatives rather
    /// than exact level families.
    pub fn from_representative_input(&self) -> bool {
        self.from_representatives
    }

    /// The level of a coalition, or `None` when unspecified.
    pub fn level_of(&self, set: ParticipantSet) -> Option<usize> {
        assert_eq!(set.n(), self.n(), "coalition universes differ");
        self.level_of[set.bits() as usize].map(|l| l as usize)
    }

    /// True when every coalition has a level.
    pub fn fully_specified(&self) -> bool {
        self.level_of.iter().all(Option::is_some)
    }

    /// The exact family of coalitions at level `j`.
    ///
    /// # Panics
    /// Panics if `j > L`.
    pub fn level_family(&self, j: usize) -> SetFamily {
        assert!(j <= self.l as usize, "level {j} out of range");
        let members: Vec<ParticipantSet> = (0u32..1 << self.n)
            .filter(|&m| self.level_of[m as usize] == Some(j as u8))
            .map(|m| ParticipantSet::from_bits(self.n(), m))
            .collect();
        SetFamily { n: self.n, members }
    }

    /// Checks that the structure admits a scheme: along any chain of
    /// coalitions, levels must not decrease as participants are added. Each
    /// cumulative level family is monotone exactly when no specified
    /// coalition has a specified subset at a strictly larger level, so one
    /// sweep of the subset lattice checks every level at once.
    pub fn check(&self) -> RampReport {
        let n = self.n();
        let size = 1usize << n;
        // best[mask]: highest-level specified subset of mask seen so far,
        // as (level, witness bits).
        let mut best: Vec<Option<(u8, u32)>> = vec![None; size];
        let mut violations = Vec::new();
        let mut specified = 0;
        for mask in 0..size {
            let mut cur: Option<(u8, u32)> = None;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    let sub = best[mask & !(1 << i)];
                    cur = match (cur, sub) {
                        (None, s) => s,
                        (c, None) => c,
                        (Some((cl, cw)), Some((sl, sw))) => {
                            if sl > cl {
                                Some((sl, sw))
                            } else {
                                Some((cl, cw))
                            }
                        }
                    };
                }
            }
            if let Some(level) = self.level_of[mask] {
                specified += 1;
                if let Some((sub_level, witness)) = cur {
                    if sub_level > level {
                        violations.push(RampViolation {
                            subset: ParticipantSet::from_bits(n, witness),
                            subset_level: sub_level as usize,
                            superset: ParticipantSet::from_bits(n, mask as u32),
                            superset_level: level as usize,
                        });
                    }
                }
                if cur.is_none_or(|(cl, _)| level > cl) {
                    cur = Some((level, mask as u32));
                }
            }
            best[mask] = cur;
        }
        RampReport { violations, specified, universe: size }
    }

    /// Per-level minimal and maximal representatives `(A_j^-, A_j^+)`:
    /// a level-`j` coalition is minimal when removing any participant
    /// leaves every level `>= j`, and maximal when adding any participant
    /// leaves every level `<= j`.
    ///
    /// # Errors
    /// [`AccessError::InconsistentRamp`] unless [`check`](Self::check)
    /// passes.
    pub fn min_max(&self) -> Result<Vec<(SetFamily, SetFamily)>, AccessError> {
        if !self.check().is_constructible() {
            return Err(AccessError::InconsistentRamp);
        }
        let n = self.n();
        let at_least =
            |mask: u32, j: u8| -> bool { self.level_of[mask as usize].is_some_and(|l| l >= j) };
        let at_most =
            |mask: u32, j: u8| -> bool { self.level_of[mask as usize].is_some_and(|l| l <= j) };
        let mut out = Vec::with_capacity(self.l as usize + 1);
        for j in 0..=self.l {
            let mut mins = Vec::new();
            let mut maxs = Vec::new();
            for mask in 0u32..1 << n {
                if self.level_of[mask as usize] != Some(j) {
                    continue;
                }
                let set = ParticipantSet::from_bits(n, mask);
                if set.iter().all(|i| !at_least(mask & !(1 << i), j)) {
                    mins.push(set);
                }
                if (0..n).all(|i| mask >> i & 1 == 1 || !at_most(mask | 1 << i, j)) {
                    maxs.push(set);
                }
            }
            out.push((
                SetFamily { n: self.n, members: mins },
                SetFamily { n: self.n, members: maxs },
            ));
        }
        Ok(out)
    }

    /// The complete perfect structure whose qualified family is every
    /// coalition at level `j` or above, and whose forbidden family is
    /// everything else (unspecified coalitions included). This is the
    /// per-level decomposition used to realize a ramp structure by `L`
    /// parallel perfect schemes.
    ///
    /// # Errors
    /// [`AccessError::LevelOutOfRange`] unless `1 <= j <= L`;
    /// [`AccessError::InconsistentRamp`] unless the structure is monotone;
    /// [`AccessError::EmptyQualifiedFamily`] when no coalition reaches
    /// level `j`.
    pub fn level_structure(&self, j: usize) -> Result<AccessStructure, AccessError> {
        if j == 0 || j > self.l as usize {
            return Err(AccessError::LevelOutOfRange { level: j, max: self.l as usize });
        }
        if !self.check().is_constructible() {
            return Err(AccessError::InconsistentRamp);
        }
        let n = self.n();
        let qualified =
            |mask: u32| -> bool { self.level_of[mask as usize].is_some_and(|l| l as usize >= j) };
        // The qualified side is upward-monotone once the check passes, so
        // minimality reduces to single-participant removals (and dually for
        // the forbidden side).
        let mut mins = Vec::new();
        let mut maxs = Vec::new();
        for mask in 0u32..1 << n {
            let set = ParticipantSet::from_bits(n, mask);
            if qualified(mask) {
                if set.iter().all(|i| !qualified(mask & !(1 << i))) {
                    mins.push(set);
                }
            } else if (0..n).all(|i| mask >> i & 1 == 1 || qualified(mask | 1 << i)) {
                maxs.push(set);
            }
        }
        AccessStructure::new(
            SetFamily { n: self.n, members: mins },
            SetFamily { n: self.n, members: maxs },
            true,
        )
    }

    /// Classifies every participant as significant, common or vacuous under
    /// the default enumeration cap.
    pub fn classify_participants(&self) -> Result<Vec<ShareClass>, AccessError> {
        self.classify_participants_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    /// Classifies every participant. Participant `i` is significant when
    /// joining some specified coalition raises its level; otherwise the
    /// singleton `{i}` decides: level 0 (or unspecified) makes the share
    /// vacuous, a positive level makes it common — the share carries
    /// secret-dependent data yet never upgrades anyone.
    ///
    /// # Errors
    /// [`AccessError::EnumerationCapExceeded`] when `n > cap`.
    pub fn classify_participants_with_cap(
        &self,
        cap: usize,
    ) -> Result<Vec<ShareClass>, AccessError> {
        let n = self.n();
        if n > cap {
            return Err(AccessError::EnumerationCapExceeded { n, cap });
        }
        Ok((0..n)
            .map(|i| {
                let rest = ParticipantSet::full(n).without(i);
                let significant = submasks(rest.bits()).any(|mask| {
                    match (self.level_of[mask as usize], self.level_of[(mask | 1 << i) as usize]) {
                        (Some(lo), Some(hi)) => hi > lo,
                        _ => false,
                    }
                });
                if significant {
                    ShareClass::Significant
                } else {
                    match self.level_of[1 << i] {
                        Some(l) if l > 0 => ShareClass::Common,
                        // An unspecified singleton imposes no constraint, so
                        // the share can be realized empty: vacuous.
                        _ => ShareClass::Vacuous,
                    }
                }
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// JSON structure documents
// ---------------------------------------------------------------------------

/// Either kind of access structure, as carried by a structure document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    /// A two-family perfect structure.
    Perfect(AccessStructure),
    /// A leveled ramp structure.
    Ramp(RampAccessStructure),
}

impl Structure {
    /// Universe size.
    pub fn n(&self) -> usize {
        match self {
            Structure::Perfect(s) => s.n(),
            Structure::Ramp(s) => s.n(),
        }
    }

    /// `"perfect"` or `"ramp"`.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Structure::Perfect(_) => "perfect",
            Structure::Ramp(_) => "ramp",
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDocument {
    n: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complete: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qualified_min: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    forbidden_max: Option<Vec<Vec<usize>>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<BTreeMap<String, LevelDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

fn family_from_indices(n: usize, sets: &[Vec<usize>]) -> Result<SetFamily, AccessError> {
    let members = sets
        .iter()
        .map(|idx| ParticipantSet::from_indices(n, idx))
        .collect::<Result<Vec<_>, _>>()?;
    SetFamily::new(n, members)
}

fn family_to_indices(f: &SetFamily) -> Vec<Vec<usize>> {
    f.iter().map(|s| s.indices()).collect()
}

/// Parses a JSON structure document into a structure plus optional
/// participant names.
///
/// Perfect documents carry `qualified_min` / `forbidden_max` index arrays
/// and an optional `complete` flag (computed from coverage when absent).
/// Ramp documents carry `L` and a `levels` object keyed by level index,
/// each level holding `min` / `max` representative arrays with the interval
/// semantics of [`LevelBounds`].
pub fn structure_from_json(text: &str) -> Result<(Structure, Option<Vec<String>>), AccessError> {
    let doc: StructureDocument = serde_json::from_str(text)?;
    if let Some(names) = &doc.names {
        if names.len() != doc.n {
            return Err(AccessError::Document(format!(
                "names array has {} entries for {} participants",
                names.len(),
                doc.n
            )));
        }
    }
    let structure = match doc.kind.as_str() {
        "perfect" => {
            if doc.levels.is_some() || doc.l.is_some() {
                return Err(AccessError::Document(
                    "perfect documents must not carry ramp fields (L, levels)".into(),
                ));
            }
            let qualified = doc.qualified_min.as_ref().ok_or_else(|| {
                AccessError::Document("perfect documents require qualified_min".into())
            })?;
            let forbidden = doc.forbidden_max.as_ref().ok_or_else(|| {
                AccessError::Document("perfect documents require forbidden_max".into())
            })?;
            let mut s = AccessStructure::new(
                family_from_indices(doc.n, qualified)?,
                family_from_indices(doc.n, forbidden)?,
                doc.complete.unwrap_or(false),
            )?;
            if doc.complete.is_none() {
                s.complete = s.check_consistency().covers_power_set();
            }
            Structure::Perfect(s)
        }
        "ramp" => {
            if doc.qualified_min.is_some() || doc.forbidden_max.is_some() {
                return Err(AccessError::Document(
                    "ramp documents must not carry perfect fields \
                     (qualified_min, forbidden_max)"
                        .into(),
                ));
            }
            let l =
                doc.l.ok_or_else(|| AccessError::Document("ramp documents require L".into()))?;
            let levels = doc
                .levels
                .as_ref()
                .ok_or_else(|| AccessError::Document("ramp documents require levels".into()))?;
            if l == 0 {
                return Err(AccessError::Document("L must be at least 1".into()));
            }
            let mut bounds = vec![LevelBounds::default(); l + 1];
            for (key, level_doc) in levels {
                let j: usize = key.parse().map_err(|_| {
                    AccessError::Document(format!("level key {key:?} is not an integer"))
                })?;
                if j > l {
                    return Err(AccessError::LevelOutOfRange { level: j, max: l });
                }
                bounds[j] = LevelBounds {
                    min: level_doc
                        .min
                        .as_ref()
                        .map(|sets| family_from_indices(doc.n, sets))
                        .transpose()?,
                    max: level_doc
                        .max
                        .as_ref()
                        .map(|sets| family_from_indices(doc.n, sets))
                        .transpose()?,
                };
            }
            let s = RampAccessStructure::from_min_max(doc.n, l, &bounds)?;
            if let Some(claimed) = doc.complete {
                if claimed != s.fully_specified() {
                    return Err(AccessError::Document(format!(
                        "document claims complete={claimed} but the levels specify \
                         {} of {} coalitions",
                        s.check().specified(),
                        1usize << doc.n
                    )));
                }
            }
            Structure::Ramp(s)
        }
        other => {
            return Err(AccessError::Document(format!(
                "unknown structure kind {other:?} (expected \"perfect\" or \"ramp\")"
            )));
        }
    };
    Ok((structure, doc.names))
}

/// Serializes a structure (plus optional participant names) to the JSON
/// document format accepted by [`structure_from_json`].
///
/// Ramp structures are emitted through their per-level min/max
/// representatives; when the exact level families cannot be recovered from
/// those representatives (possible for some partially specified structures)
/// this returns a [`AccessError::Document`] error rather than silently
/// changing the structure.
pub fn structure_to_json(
    structure: &Structure,
    names: Option<&[String]>,
) -> Result<String, AccessError> {
    if let Some(names) = names {
        if names.len() != structure.n() {
            return Err(AccessError::Document(format!(
                "names array has {} entries for {} participants",
                names.len(),
                structure.n()
            )));
        }
    }
    let doc = match structure {
        Structure::Perfect(s) => StructureDocument {
            n: s.n(),
            kind: "perfect".into(),
            complete: Some(s.complete()),
            qualified_min: Some(family_to_indices(s.qualified_min())),
            forbidden_max: Some(family_to_indices(s.forbidden_max())),
            l: None,
            levels: None,
            names: names.map(<[String]>::to_vec),
        },
        Structure::Ramp(s) => {
            let min_max = s.min_max()?;
            let mut levels = BTreeMap::new();
            let mut bounds = vec![LevelBounds::default(); s.levels() + 1];
            for (j, (min, max)) in min_max.iter().enumerate() {
                if min.is_empty() {
                    continue; // empty level: omit the key entirely
                }
                levels.insert(
                    j.to_string(),
                    LevelDocument {
                        min: Some(family_to_indices(min)),
                        max: Some(family_to_indices(max)),
                    },
                );
                bounds[j] = LevelBounds { min: Some(min.clone()), max: Some(max.clone()) };
            }
            let readback =
                RampAccessStructure::from_min_max(s.n(), s.levels(), &bounds).map_err(|e| {
                    AccessError::Document(format!(
                        "level families are not representable by min/max intervals: {e}"
                    ))
                })?;
            if readback != *s {
                return Err(AccessError::Document(
                    "level families are not representable by min/max intervals: \
                     an unspecified coalition falls inside a level's interval"
                        .into(),
                ));
            }
            StructureDocument {
                n: s.n(),
                kind: "ramp".into(),
                complete: Some(s.fully_specified()),
                qualified_min: None,
                forbidden_max: None,
                l: Some(s.levels()),
                levels: Some(levels),
                names: names.map(<[String]>::to_vec),
            }
        }
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}
