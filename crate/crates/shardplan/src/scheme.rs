//! End-to-end distribution engine: executable secret sharing on top of
//! an assignment map.
//!
//! The optimization layers decide *who holds which primitive share*;
//! this module actually splits secrets. [`distribute`] encodes a byte
//! secret into field elements, runs the threshold (or ramp) split with
//! the map's `(t, L, m)` parameters, and routes primitive share `j` to
//! every participant whose assignment contains `j` — the same primitive
//! may travel to several participants, which is the whole point of
//! multiple assignment. [`reconstruct`] pools the distinct primitives a
//! coalition presents and either decodes the secret or refuses with the
//! exact shortfall. Refusal is advisory, not a security boundary: a
//! coalition holding `t` primitives can always decode on its own; the
//! engine merely declines to mislead under-threshold callers.
//!
//! [`verify_perfect_scheme`] and [`verify_ramp_scheme`] layer two
//! independent checks: the combinatorial map verifier, and — when the
//! parameters fit the budget — an instantiation over a tiny field whose
//! secrecy is *measured* with the brute-force entropy oracle rather than
//! argued from the same counting the combinatorial route already did.

use std::collections::{BTreeMap, HashSet};

use num::rational::Rational64;
use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::access::{AccessError, AccessStructure, ParticipantSet, RampAccessStructure};
use crate::crypto::{
    entropy_oracle, is_prime, ramp_reconstruct, ramp_split, CryptoError, FieldElement,
    OracleParams, PrimitiveShare,
};
use crate::maps::{
    map_to_json, verify_perfect, verify_ramp, AssignmentMap, MapError, RampMode, VerifyReport,
};

/// First four bytes of every serialized share bundle.
pub const BUNDLE_MAGIC: [u8; 4] = *b"SPLB";

/// Version tag of the bundle wire format.
pub const BUNDLE_VERSION: u16 = 1;

/// Errors for distribution, reconstruction and bundle (de)serialization.
#[derive(Debug, Error)]
pub enum SchemeError {
    /// Distribution requires a nonempty secret.
    #[error("cannot distribute an empty secret")]
    EmptySecret,
    /// The field cannot hold even one byte per element.
    #[error("field GF({p}) is too small to encode bytes (need p > 256)")]
    FieldTooSmall { p: u64 },
    /// A bundle does not belong to the reconstruction attempt.
    #[error("bundle rejected: {reason}")]
    BadBundle { reason: String },
    /// Bundles contradict each other.
    #[error("bundles disagree: {reason}")]
    InconsistentBundles { reason: String },
    /// A serialized bundle could not be decoded.
    #[error("malformed bundle: {reason}")]
    MalformedBundle { reason: String },
    /// The reconstructed symbol stream is not a valid secret encoding.
    #[error("corrupted secret encoding: {reason}")]
    BadEncoding { reason: String },
    /// Error from the finite-field layer.
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    /// Error from the assignment-map layer.
    #[error(transparent)]
    Map(#[from] MapError),
    /// Error from the access-structure layer.
    #[error(transparent)]
    Access(#[from] AccessError),
}

// ---------------------------------------------------------------------------
// Secret <-> field-element encoding
// ---------------------------------------------------------------------------

/// Largest number of whole bytes a residue of GF(`modulus`) can hold,
/// i.e. the largest `k` with `256^k <= modulus`.
fn byte_capacity(modulus: u64) -> usize {
    let mut k = 0;
    let mut bound = 256u128;
    while bound <= modulus as u128 {
        k += 1;
        bound *= 256;
    }
    k
}

/// Encodes a byte secret as field elements in blocks of `l` symbols.
///
/// Wire form of the padded stream: an 8-byte big-endian length, the
/// secret bytes, a `0x80` end marker, then zero bytes until the stream
/// splits evenly into `k`-byte symbols forming whole `l`-symbol blocks
/// (`k` = [`byte_capacity`], so every symbol is a valid residue).
fn encode_secret(secret: &[u8], modulus: u64, l: usize) -> Result<Vec<FieldElement>, SchemeError> {
    let k = byte_capacity(modulus);
    if k == 0 {
        return Err(SchemeError::FieldTooSmall { p: modulus });
    }
    let mut stream = Vec::with_capacity(secret.len() + 9 + k * l);
    stream.extend_from_slice(&(secret.len() as u64).to_be_bytes());
    stream.extend_from_slice(secret);
    stream.push(0x80);
    while stream.len() % (k * l) != 0 {
        stream.push(0);
    }
    Ok(stream
        .chunks_exact(k)
        .map(|chunk| {
            let mut bytes = [0u8; 8];
            bytes[8 - k..].copy_from_slice(chunk);
            FieldElement::raw(u64::from_be_bytes(bytes), modulus)
        })
        .collect())
}

/// Inverse of [`encode_secret`]; strict about padding so corrupted
/// payloads fail instead of decoding to garbage silently.
fn decode_secret(symbols: &[FieldElement], modulus: u64) -> Result<Vec<u8>, SchemeError> {
    let k = byte_capacity(modulus);
    if k == 0 {
        return Err(SchemeError::FieldTooSmall { p: modulus });
    }
    let cap = 1u128 << (8 * k);
    let mut bytes = Vec::with_capacity(symbols.len() * k);
    for symbol in symbols {
        if (symbol.value() as u128) >= cap {
            return Err(SchemeError::BadEncoding {
                reason: format!("symbol {} does not fit {k} bytes", symbol.value()),
            });
        }
        bytes.extend_from_slice(&symbol.value().to_be_bytes()[8 - k..]);
    }
    if bytes.len() < 8 {
        return Err(SchemeError::BadEncoding { reason: "missing length prefix".to_string() });
    }
    let declared = u64::from_be_bytes(bytes[..8].try_into().unwrap());
    let len = usize::try_from(declared).map_err(|_| SchemeError::BadEncoding {
        reason: format!("declared length {declared} overflows"),
    })?;
    let tail = bytes.len().checked_sub(8 + len).ok_or_else(|| SchemeError::BadEncoding {
        reason: format!("declared length {len} exceeds the {} decoded bytes", bytes.len()),
    })?;
    if tail == 0 || bytes[8 + len] != 0x80 || bytes[8 + len + 1..].iter().any(|&b| b != 0) {
        return Err(SchemeError::BadEncoding { reason: "bad padding".to_string() });
    }
    Ok(bytes[8..8 + len].to_vec())
}

// ---------------------------------------------------------------------------
// Bundles and their wire form
// ---------------------------------------------------------------------------

/// Parameters every bundle of one distribution run carries, binding the
/// shares to their field, shape and assignment map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeHeader {
    modulus: u64,
    t: usize,
    l: usize,
    m: usize,
    blocks: usize,
    map_digest: [u8; 32],
}

impl SchemeHeader {
    /// Field size the secret was split over.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Recovery threshold.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Ramp parameter (1 for perfect maps).
    pub fn levels(&self) -> usize {
        self.l
    }

    /// Number of primitive shares in the run.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Symbols per share payload (one per `l`-symbol secret block).
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// SHA-256 of the assignment map's canonical JSON form.
    pub fn map_digest(&self) -> &[u8; 32] {
        &self.map_digest
    }
}

/// SHA-256 digest of a map's canonical JSON document; bundles carry it
/// so shares cannot be replayed against a different map.
pub fn map_digest(map: &AssignmentMap) -> [u8; 32] {
    Sha256::digest(map_to_json(map).as_bytes()).into()
}

/// Everything one participant receives from a distribution run: their
/// index, the scheme header, and exactly the primitive shares their
/// assignment names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareBundle {
    participant: usize,
    header: SchemeHeader,
    shares: Vec<PrimitiveShare>,
}

impl ShareBundle {
    /// The participant this bundle belongs to (`0..n`).
    pub fn participant(&self) -> usize {
        self.participant
    }

    /// The run parameters.
    pub fn header(&self) -> &SchemeHeader {
        &self.header
    }

    /// The primitive shares, ascending by evaluation point.
    pub fn shares(&self) -> &[PrimitiveShare] {
        &self.shares
    }

    /// Serializes the bundle: magic, version, header fields as big-endian
    /// integers, the map digest, then the share records in the primitive
    /// wire form.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&BUNDLE_MAGIC);
        out.extend_from_slice(&BUNDLE_VERSION.to_be_bytes());
        out.extend_from_slice(&self.header.modulus.to_be_bytes());
        for field in [self.header.t, self.header.l, self.header.m, self.header.blocks] {
            out.extend_from_slice(&(field as u64).to_be_bytes());
        }
        out.extend_from_slice(&self.header.map_digest);
        out.extend_from_slice(&(self.participant as u64).to_be_bytes());
        out.extend_from_slice(&(self.shares.len() as u64).to_be_bytes());
        for share in &self.shares {
            share.encode_into(&mut out);
        }
        out
    }

    /// Inverse of [`ShareBundle::to_bytes`]; rejects anything it would
    /// not have produced itself, including trailing bytes.
    pub fn from_bytes(input: &[u8]) -> Result<ShareBundle, SchemeError> {
        let malformed = |reason: &str| SchemeError::MalformedBundle { reason: reason.to_string() };
        let mut pos = 0usize;
        if take(input, &mut pos, 4)? != BUNDLE_MAGIC {
            return Err(malformed("bad magic"));
        }
        let version = u16::from_be_bytes(take(input, &mut pos, 2)?.try_into().unwrap());
        if version != BUNDLE_VERSION {
            return Err(SchemeError::MalformedBundle {
                reason: format!("unsupported version {version}"),
            });
        }
        let modulus = take_u64(input, &mut pos)?;
        if !is_prime(modulus) {
            return Err(CryptoError::NotPrime { p: modulus }.into());
        }
        let t = take_usize(input, &mut pos)?;
        let l = take_usize(input, &mut pos)?;
        let m = take_usize(input, &mut pos)?;
        let blocks = take_usize(input, &mut pos)?;
        if l < 1 || l > t || t > m || m as u64 >= modulus || blocks == 0 {
            return Err(malformed("parameters violate 1 <= L <= t <= m < p, blocks >= 1"));
        }
        let map_digest: [u8; 32] = take(input, &mut pos, 32)?.try_into().unwrap();
        let participant = take_usize(input, &mut pos)?;
        let count = take_usize(input, &mut pos)?;
        if count > m {
            return Err(malformed("more shares than the scheme has primitives"));
        }
        let mut shares = Vec::with_capacity(count);
        let mut last = 0u64;
        for _ in 0..count {
            let share = PrimitiveShare::decode_from(input, &mut pos, modulus, blocks)?;
            if share.index() <= last || share.index() > m as u64 {
                return Err(malformed("share indices must ascend within 1..=m"));
            }
            last = share.index();
            shares.push(share);
        }
        if pos != input.len() {
            return Err(malformed("trailing bytes"));
        }
        Ok(ShareBundle {
            participant,
            header: SchemeHeader { modulus, t, l, m, blocks, map_digest },
            shares,
        })
    }
}

fn take<'a>(input: &'a [u8], pos: &mut usize, len: usize) -> Result<&'a [u8], SchemeError> {
    let end = pos
        .checked_add(len)
        .filter(|&e| e <= input.len())
        .ok_or_else(|| SchemeError::MalformedBundle { reason: "truncated".to_string() })?;
    let out = &input[*pos..end];
    *pos = end;
    Ok(out)
}

fn take_u64(input: &[u8], pos: &mut usize) -> Result<u64, SchemeError> {
    Ok(u64::from_be_bytes(take(input, pos, 8)?.try_into().unwrap()))
}

fn take_usize(input: &[u8], pos: &mut usize) -> Result<usize, SchemeError> {
    usize::try_from(take_u64(input, pos)?)
        .map_err(|_| SchemeError::MalformedBundle { reason: "field overflows usize".to_string() })
}

// ---------------------------------------------------------------------------
// Distribution and reconstruction
// ---------------------------------------------------------------------------

/// Splits `secret` according to `map` over GF(`modulus`) and packages
/// one bundle per participant.
///
/// The caller is expected to have verified the map against its access
/// structure first — this routine enforces the map's internal shape and
/// the field preconditions (`m < p`, bytes fit), but whether the *right*
/// coalitions can reconstruct is exactly what the map verifier decides.
pub fn distribute<R: Rng + ?Sized>(
    secret: &[u8],
    map: &AssignmentMap,
    modulus: u64,
    rng: &mut R,
) -> Result<Vec<ShareBundle>, SchemeError> {
    if secret.is_empty() {
        return Err(SchemeError::EmptySecret);
    }
    if !is_prime(modulus) {
        return Err(CryptoError::NotPrime { p: modulus }.into());
    }
    let symbols = encode_secret(secret, modulus, map.levels())?;
    let primitives = ramp_split(&symbols, map.t(), map.levels(), map.m(), rng)?;
    let header = SchemeHeader {
        modulus,
        t: map.t(),
        l: map.levels(),
        m: map.m(),
        blocks: symbols.len() / map.levels(),
        map_digest: map_digest(map),
    };
    Ok((0..map.n())
        .map(|i| ShareBundle {
            participant: i,
            header: header.clone(),
            shares: map.assign(i).iter().map(|&id| primitives[id].clone()).collect(),
        })
        .collect())
}

/// Outcome of a reconstruction attempt: either the secret, or an honest
/// refusal naming how many distinct primitives the coalition pooled
/// against how many the threshold demands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reconstruction {
    /// The coalition met the threshold; here is the secret.
    Secret(Vec<u8>),
    /// The coalition fell short; nothing is decoded.
    Refusal { held: usize, needed: usize },
}

/// Pools the presented bundles and reconstructs the secret if the
/// coalition holds at least `t` distinct primitives.
///
/// Every bundle must carry the header of one common distribution run
/// whose digest matches `map`, and must contain exactly the shares
/// `map.assign` names for its participant; the same primitive presented
/// twice (via two participants) must agree bit for bit.
pub fn reconstruct(
    bundles: &[ShareBundle],
    map: &AssignmentMap,
) -> Result<Reconstruction, SchemeError> {
    let Some(first) = bundles.first() else {
        return Ok(Reconstruction::Refusal { held: 0, needed: map.t() });
    };
    let digest = map_digest(map);
    let header = &first.header;
    if header.map_digest != digest {
        return Err(SchemeError::BadBundle {
            reason: "bundle was distributed under a different map".to_string(),
        });
    }
    if header.t != map.t() || header.l != map.levels() || header.m != map.m() {
        return Err(SchemeError::BadBundle {
            reason: "header shape disagrees with the map".to_string(),
        });
    }

    let mut pool: BTreeMap<u64, &PrimitiveShare> = BTreeMap::new();
    for bundle in bundles {
        if bundle.header != *header {
            return Err(SchemeError::InconsistentBundles {
                reason: format!("participant {} carries a different header", bundle.participant),
            });
        }
        if bundle.participant >= map.n() {
            return Err(SchemeError::BadBundle {
                reason: format!(
                    "participant {} outside the map's universe of {}",
                    bundle.participant,
                    map.n()
                ),
            });
        }
        let expected: Vec<u64> =
            map.assign(bundle.participant).iter().map(|&id| id as u64 + 1).collect();
        let carried: Vec<u64> = bundle.shares.iter().map(|s| s.index()).collect();
        if expected != carried {
            return Err(SchemeError::BadBundle {
                reason: format!(
                    "participant {} carries shares {carried:?}, map assigns {expected:?}",
                    bundle.participant
                ),
            });
        }
        for share in &bundle.shares {
            if let Some(existing) = pool.insert(share.index(), share) {
                if existing != share {
                    return Err(SchemeError::InconsistentBundles {
                        reason: format!("two payloads for primitive {}", share.index()),
                    });
                }
            }
        }
    }

    let held = pool.len();
    if held < header.t {
        return Ok(Reconstruction::Refusal { held, needed: header.t });
    }
    let shares: Vec<PrimitiveShare> = pool.into_values().cloned().collect();
    let symbols = ramp_reconstruct(&shares, header.t, header.l)?;
    Ok(Reconstruction::Secret(decode_secret(&symbols, header.modulus)?))
}

// ---------------------------------------------------------------------------
// Layered verification
// ---------------------------------------------------------------------------

/// What the entropy oracle should find for one coalition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyTarget {
    /// The measured ratio must equal this value.
    Exactly(Rational64),
    /// The measured ratio must be at least this value (relaxed middle
    /// levels: leaking *less* than the exact ladder is acceptable).
    AtLeast(Rational64),
}

/// One measured coalition: which set, which level of the structure it
/// represents, what was demanded and what the oracle found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntropyCheck {
    set: ParticipantSet,
    level: usize,
    target: EntropyTarget,
    measured: Rational64,
}

impl EntropyCheck {
    /// The coalition measured.
    pub fn set(&self) -> ParticipantSet {
        self.set
    }

    /// The structure level the coalition represents (perfect maps:
    /// qualified is level 1, forbidden level 0).
    pub fn level(&self) -> usize {
        self.level
    }

    /// The demanded relation.
    pub fn target(&self) -> EntropyTarget {
        self.target
    }

    /// The exact ratio `H(S|coalition) / H(S)` the oracle measured.
    pub fn measured(&self) -> Rational64 {
        self.measured
    }

    /// Whether the measurement satisfies the target.
    pub fn passed(&self) -> bool {
        match self.target {
            EntropyTarget::Exactly(x) => self.measured == x,
            EntropyTarget::AtLeast(x) => self.measured >= x,
        }
    }
}

/// The oracle layer of a scheme verification: the tiny field used and
/// every representative measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntropyReport {
    modulus: u64,
    checks: Vec<EntropyCheck>,
}

impl EntropyReport {
    /// The tiny prime the scheme was instantiated over.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Every representative measurement, in level order.
    pub fn checks(&self) -> &[EntropyCheck] {
        &self.checks
    }

    /// Whether every measurement met its target.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(EntropyCheck::passed)
    }
}

/// Combined report of the combinatorial and oracle verification layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeReport {
    combinatorial: VerifyReport,
    entropy: Option<EntropyReport>,
}

impl SchemeReport {
    /// The assignment-map verifier's findings.
    pub fn combinatorial(&self) -> &VerifyReport {
        &self.combinatorial
    }

    /// The oracle layer, present when the parameters fit the budget.
    pub fn entropy(&self) -> Option<&EntropyReport> {
        self.entropy.as_ref()
    }

    /// Whether both layers (and at minimum the combinatorial one) passed.
    pub fn passed(&self) -> bool {
        self.combinatorial.passed() && self.entropy.as_ref().is_none_or(EntropyReport::passed)
    }
}

/// Verifies a perfect map against its structure, combinatorially and —
/// when `p^t` fits `oracle_budget` for the smallest usable prime — by
/// measuring an actual instantiation: every minimal qualified coalition
/// must show ratio exactly 0, every maximal forbidden one exactly 1.
pub fn verify_perfect_scheme(
    map: &AssignmentMap,
    s: &AccessStructure,
    oracle_budget: u128,
) -> SchemeReport {
    let combinatorial = verify_perfect(map, s);
    let mut plans = Vec::new();
    if map.n() == s.n() && map.levels() == 1 {
        let zero = Rational64::new(0, 1);
        let one = Rational64::new(1, 1);
        for set in s.forbidden_max().iter() {
            plans.push((set, 0, EntropyTarget::Exactly(one)));
        }
        for set in s.qualified_min().iter() {
            plans.push((set, 1, EntropyTarget::Exactly(zero)));
        }
    }
    SchemeReport { combinatorial, entropy: measure(map, &plans, oracle_budget) }
}

/// Verifies a ramp map against its structure the same way. Exact mode
/// demands the precise entropy ladder `(L - j) / L` at every specified
/// level; relaxed mode demands it only at the extremes and accepts extra
/// secrecy (a higher ratio) at middle levels.
pub fn verify_ramp_scheme(
    map: &AssignmentMap,
    r: &RampAccessStructure,
    mode: RampMode,
    oracle_budget: u128,
) -> Result<SchemeReport, SchemeError> {
    let combinatorial = verify_ramp(map, r, mode)?;
    let mut plans = Vec::new();
    if map.n() == r.n() && map.levels() == r.levels() {
        let levels = r.levels();
        let mut seen = HashSet::new();
        for (j, (mins, maxs)) in r.min_max()?.iter().enumerate() {
            let ladder = Rational64::new((levels - j) as i64, levels as i64);
            let target = if mode == RampMode::Relaxed && j != 0 && j != levels {
                EntropyTarget::AtLeast(ladder)
            } else {
                EntropyTarget::Exactly(ladder)
            };
            for set in mins.iter().chain(maxs.iter()) {
                if seen.insert((j, set.bits())) {
                    plans.push((set, j, target));
                }
            }
        }
    }
    Ok(SchemeReport { combinatorial, entropy: measure(map, &plans, oracle_budget) })
}

/// Runs the oracle layer: instantiates the map's `(t, L, m)` over the
/// smallest prime exceeding `m` and measures every planned coalition.
/// Returns `None` when the enumeration would blow the budget.
fn measure(
    map: &AssignmentMap,
    plans: &[(ParticipantSet, usize, EntropyTarget)],
    oracle_budget: u128,
) -> Option<EntropyReport> {
    let modulus = (map.m() as u64 + 1..).find(|&c| is_prime(c)).expect("primes are unbounded");
    if (modulus as u128).saturating_pow(map.t() as u32) > oracle_budget {
        return None;
    }
    let mut params = OracleParams::ramp(modulus, map.t(), map.levels(), map.m());
    params.budget = oracle_budget;
    let checks = plans
        .iter()
        .map(|&(set, level, target)| {
            let subset: Vec<u64> = map.phi(set).iter().map(|&id| id as u64 + 1).collect();
            let measured = entropy_oracle(params, &subset)
                .expect("oracle parameters are valid by construction");
            EntropyCheck { set, level, target, measured }
        })
        .collect();
    Some(EntropyReport { modulus, checks })
}
