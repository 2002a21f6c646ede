//! Finite-field primitives behind every executable scheme.
//!
//! An assignment map only says *how many* primitive shares each
//! participant holds; this module supplies the primitives themselves. A
//! `(t, m)`-threshold split hides each secret symbol as the constant term
//! of a random degree-`t − 1` polynomial and hands out evaluations at the
//! points `1..=m`, so any `t` shares interpolate the symbol and fewer
//! reveal nothing. The `(t, l, m)`-ramp variant packs `l` secret symbols
//! into the `l` lowest coefficients of one polynomial, trading graceful
//! leakage (one coefficient's worth per share beyond `t − l`) for shares
//! that are `l` times smaller than the secret block.
//!
//! Because "reveal nothing" is a claim about distributions, not outputs,
//! the module also ships a brute-force entropy oracle: for fields small
//! enough to enumerate every polynomial, it measures the exact
//! conditional entropy of the secret given any subset of shares, as a
//! rational multiple of the secret's entropy. Tests and the scheme-level
//! verifier use it to check secrecy claims instead of trusting them.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num::rational::Rational64;
use rand::Rng;
use thiserror::Error;

/// Default production modulus: the Mersenne prime `2^31 − 1`.
///
/// Large enough for millions of evaluation points, small enough that all
/// arithmetic stays inside `u64`/`u128` built-ins.
pub const DEFAULT_MODULUS: u64 = (1 << 31) - 1;

/// Default ceiling on the number of coefficient vectors the entropy
/// oracle will enumerate (`p^t` grows quickly).
pub const DEFAULT_ORACLE_BUDGET: u128 = 10_000_000;

/// Errors for field construction, splitting, reconstruction and the
/// entropy oracle.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    /// The requested modulus is not a prime number.
    #[error("modulus {p} is not prime")]
    NotPrime { p: u64 },
    /// Scheme parameters violate `1 ≤ l ≤ t ≤ m < p` or the secret does
    /// not fit them.
    #[error("bad parameters: {reason}")]
    BadParameters { reason: String },
    /// Elements of two different fields were mixed in one operation.
    #[error("mixed moduli {a} and {b}")]
    MixedModuli { a: u64, b: u64 },
    /// Two shares carry the same evaluation point.
    #[error("duplicate share index {index}")]
    DuplicateIndex { index: u64 },
    /// Shares presented together have payloads of different lengths.
    #[error("share payloads have mismatched lengths")]
    RaggedPayloads,
    /// A serialized share record could not be decoded.
    #[error("malformed share record: {reason}")]
    MalformedShare { reason: String },
    /// The oracle would have to enumerate more polynomials than allowed.
    #[error("entropy oracle needs {states} enumerations, budget is {budget}")]
    BudgetExceeded { states: u128, budget: u128 },
}

// ---------------------------------------------------------------------------
// Field arithmetic
// ---------------------------------------------------------------------------

/// Deterministic trial-division primality check.
///
/// Adequate for the moduli this crate uses (at most a few billion); not
/// meant for arbitrary 64-bit inputs.
pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A residue modulo a prime `p`.
///
/// The invariant `0 ≤ value < p`, `p` prime is established once in
/// [`FieldElement::new`] and preserved by every operation. Arithmetic
/// between elements of different fields is a programming error and
/// panics; fallible entry points validate moduli before any arithmetic
/// runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    /// Builds the residue of `value` in GF(`modulus`).
    ///
    /// `value` is reduced, so any `u64` is accepted; the modulus must be
    /// prime.
    pub fn new(value: u64, modulus: u64) -> Result<FieldElement, CryptoError> {
        if !is_prime(modulus) {
            return Err(CryptoError::NotPrime { p: modulus });
        }
        Ok(FieldElement { value: value % modulus, modulus })
    }

    /// Internal constructor for values already known to be reduced
    /// residues of a prime modulus.
    pub(crate) fn raw(value: u64, modulus: u64) -> FieldElement {
        debug_assert!(value < modulus);
        FieldElement { value, modulus }
    }

    /// The canonical representative in `0..modulus`.
    pub fn value(self) -> u64 {
        self.value
    }

    /// The field size `p`.
    pub fn modulus(self) -> u64 {
        self.modulus
    }

    /// Whether this is the additive identity.
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check_same_field(self, rhs: FieldElement) {
        assert_eq!(
            self.modulus, rhs.modulus,
            "arithmetic across fields GF({}) and GF({})",
            self.modulus, rhs.modulus
        );
    }

    /// The multiplicative inverse, via the extended Euclidean algorithm.
    ///
    /// Panics on zero: callers only invert products of differences of
    /// distinct evaluation points, which are never zero.
    pub fn inv(self) -> FieldElement {
        assert!(self.value != 0, "inverse of zero in GF({})", self.modulus);
        let (mut r0, mut r1) = (self.modulus as i128, self.value as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime, so the gcd is 1");
        FieldElement::raw(s0.rem_euclid(self.modulus as i128) as u64, self.modulus)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        // Both summands are below 2^63, so the u64 sum cannot overflow
        // for any prime this crate accepts; use u128 to stay safe even
        // for pathological moduli.
        let sum = (self.value as u128 + rhs.value as u128) % self.modulus as u128;
        FieldElement::raw(sum as u64, self.modulus)
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: FieldElement) -> FieldElement {
        self + (-rhs)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        let value = if self.value == 0 { 0 } else { self.modulus - self.value };
        FieldElement::raw(value, self.modulus)
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        let prod = (self.value as u128 * rhs.value as u128) % self.modulus as u128;
        FieldElement::raw(prod as u64, self.modulus)
    }
}

// ---------------------------------------------------------------------------
// Primitive shares and their wire form
// ---------------------------------------------------------------------------

/// One evaluation-point share of a split secret.
///
/// `index` is the evaluation point (`1..=m`; the point `0` is reserved
/// for the secret) and `payload` holds one field element per secret
/// symbol (perfect scheme) or per block of `l` symbols (ramp scheme).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveShare {
    index: u64,
    payload: Vec<FieldElement>,
}

impl PrimitiveShare {
    /// Assembles a share from parts. Consistency with a particular
    /// scheme (index range, payload shape) is checked where the share is
    /// consumed, not here.
    pub fn new(index: u64, payload: Vec<FieldElement>) -> PrimitiveShare {
        PrimitiveShare { index, payload }
    }

    /// The evaluation point this share was produced at.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// The share values, one per secret symbol or block.
    pub fn payload(&self) -> &[FieldElement] {
        &self.payload
    }

    /// Appends the wire form of this share: the index as an LEB128
    /// varint followed by each payload residue as a fixed-width
    /// big-endian integer (width determined by the modulus).
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        write_varint(out, self.index);
        for element in &self.payload {
            let width = residue_width(element.modulus());
            out.extend_from_slice(&element.value().to_be_bytes()[8 - width..]);
        }
    }

    /// Reads one share record (written by [`PrimitiveShare::encode_into`])
    /// from `input` starting at `*pos`, advancing `*pos` past it. The
    /// caller supplies the field and payload shape, which the wire form
    /// deliberately does not repeat per share.
    pub fn decode_from(
        input: &[u8],
        pos: &mut usize,
        modulus: u64,
        symbols: usize,
    ) -> Result<PrimitiveShare, CryptoError> {
        if !is_prime(modulus) {
            return Err(CryptoError::NotPrime { p: modulus });
        }
        let index = read_varint(input, pos)?;
        let width = residue_width(modulus);
        let mut payload = Vec::with_capacity(symbols);
        for _ in 0..symbols {
            let end = pos.checked_add(width).filter(|&e| e <= input.len()).ok_or_else(|| {
                CryptoError::MalformedShare { reason: "truncated payload".to_string() }
            })?;
            let mut bytes = [0u8; 8];
            bytes[8 - width..].copy_from_slice(&input[*pos..end]);
            *pos = end;
            let value = u64::from_be_bytes(bytes);
            if value >= modulus {
                return Err(CryptoError::MalformedShare {
                    reason: format!("residue {value} out of range for GF({modulus})"),
                });
            }
            payload.push(FieldElement::raw(value, modulus));
        }
        Ok(PrimitiveShare { index, payload })
    }
}

/// Number of bytes needed to hold any residue of GF(`modulus`).
pub fn residue_width(modulus: u64) -> usize {
    let bit_len = 64 - (modulus - 1).leading_zeros() as usize;
    bit_len.max(1).div_ceil(8)
}

fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_varint(input: &[u8], pos: &mut usize) -> Result<u64, CryptoError> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = *input.get(*pos).ok_or_else(|| CryptoError::MalformedShare {
            reason: "truncated varint".to_string(),
        })?;
        *pos += 1;
        if shift >= 64 || (shift == 63 && byte > 1) {
            return Err(CryptoError::MalformedShare { reason: "varint overflow".to_string() });
        }
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

// ---------------------------------------------------------------------------
// Threshold and ramp splitting
// ---------------------------------------------------------------------------

/// Splits a secret into `m` shares, any `t` of which reconstruct it and
/// any `t − 1` of which are statistically independent of it.
///
/// Each secret symbol becomes the constant term of its own polynomial of
/// degree `t − 1` with uniformly random higher coefficients; share `j`
/// carries the evaluations at the point `j`.
///
/// Requires `1 ≤ t ≤ m < p` and a nonempty secret over a single field.
pub fn shamir_split<R: Rng + ?Sized>(
    secret: &[FieldElement],
    t: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<PrimitiveShare>, CryptoError> {
    ramp_split(secret, t, 1, m, rng)
}

/// Inverse of [`shamir_split`]: Lagrange-interpolates each symbol's
/// polynomial at `0` from the first `t` of the presented shares.
///
/// All presented shares must come from one field, carry distinct indices
/// in `1..p`, and have payloads of one common length; at least `t` are
/// required.
pub fn shamir_reconstruct(
    shares: &[PrimitiveShare],
    t: usize,
) -> Result<Vec<FieldElement>, CryptoError> {
    ramp_reconstruct(shares, t, 1)
}

/// Splits a secret of `l`-symbol blocks into `m` ramp shares.
///
/// Each block's `l` symbols become the coefficients `a_0..a_{l−1}` of one
/// degree-`t − 1` polynomial, with `a_l..a_{t−1}` uniformly random; share
/// `j` carries one evaluation per block, so every share is `l` times
/// smaller than the secret block it protects. Any `t` shares recover the
/// block, `t − l` or fewer reveal nothing, and each share in between
/// removes one symbol's worth of uncertainty.
///
/// Requires `1 ≤ l ≤ t ≤ m < p` and a nonempty secret whose length is a
/// multiple of `l`, all over a single field.
pub fn ramp_split<R: Rng + ?Sized>(
    secret: &[FieldElement],
    t: usize,
    l: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<PrimitiveShare>, CryptoError> {
    let first = *secret
        .first()
        .ok_or_else(|| CryptoError::BadParameters { reason: "empty secret".to_string() })?;
    let p = first.modulus();
    for symbol in secret {
        if symbol.modulus() != p {
            return Err(CryptoError::MixedModuli { a: p, b: symbol.modulus() });
        }
    }
    check_scheme_shape(p, t, l, m)?;
    if !secret.len().is_multiple_of(l) {
        return Err(CryptoError::BadParameters {
            reason: format!("secret length {} is not a multiple of l = {l}", secret.len()),
        });
    }

    let blocks = secret.len() / l;
    let mut payloads = vec![Vec::with_capacity(blocks); m];
    let mut coeffs = Vec::with_capacity(t);
    for block in secret.chunks_exact(l) {
        coeffs.clear();
        coeffs.extend_from_slice(block);
        while coeffs.len() < t {
            coeffs.push(FieldElement::raw(rng.gen_range(0..p), p));
        }
        for (j, payload) in payloads.iter_mut().enumerate() {
            let x = FieldElement::raw(j as u64 + 1, p);
            payload.push(eval_poly(&coeffs, x));
        }
    }
    Ok(payloads
        .into_iter()
        .enumerate()
        .map(|(j, payload)| PrimitiveShare { index: j as u64 + 1, payload })
        .collect())
}

/// Inverse of [`ramp_split`]: interpolates each block's full polynomial
/// from the first `t` of the presented shares and reads back the
/// coefficients `a_0..a_{l−1}`.
pub fn ramp_reconstruct(
    shares: &[PrimitiveShare],
    t: usize,
    l: usize,
) -> Result<Vec<FieldElement>, CryptoError> {
    if l < 1 || l > t {
        return Err(CryptoError::BadParameters {
            reason: format!("need 1 ≤ l ≤ t, got l = {l}, t = {t}"),
        });
    }
    if shares.len() < t {
        return Err(CryptoError::BadParameters {
            reason: format!("need at least t = {t} shares, got {}", shares.len()),
        });
    }
    let (p, blocks) = validate_share_batch(shares)?;
    let points: Vec<FieldElement> =
        shares[..t].iter().map(|s| FieldElement::raw(s.index, p)).collect();

    let mut secret = Vec::with_capacity(blocks * l);
    for b in 0..blocks {
        let values: Vec<FieldElement> = shares[..t].iter().map(|s| s.payload[b]).collect();
        let coeffs = interpolate_coefficients(&points, &values);
        secret.extend_from_slice(&coeffs[..l]);
    }
    Ok(secret)
}

/// Shared parameter gate for the splitting routines: `1 ≤ l ≤ t ≤ m < p`.
fn check_scheme_shape(p: u64, t: usize, l: usize, m: usize) -> Result<(), CryptoError> {
    if l < 1 || l > t || t > m {
        return Err(CryptoError::BadParameters {
            reason: format!("need 1 ≤ l ≤ t ≤ m, got l = {l}, t = {t}, m = {m}"),
        });
    }
    if m as u64 >= p {
        return Err(CryptoError::BadParameters {
            reason: format!("m = {m} shares need m < p = {p} evaluation points"),
        });
    }
    Ok(())
}

/// Checks that a batch of shares belongs to one scheme instance: single
/// field, distinct in-range indices, uniform payload length. Returns the
/// common modulus and payload length.
fn validate_share_batch(shares: &[PrimitiveShare]) -> Result<(u64, usize), CryptoError> {
    let first = shares
        .first()
        .ok_or_else(|| CryptoError::BadParameters { reason: "no shares presented".to_string() })?;
    let p = first.payload.first().map(|e| e.modulus());
    let blocks = first.payload.len();
    let mut seen = HashMap::new();
    for share in shares {
        if share.payload.len() != blocks {
            return Err(CryptoError::RaggedPayloads);
        }
        for element in &share.payload {
            if Some(element.modulus()) != p {
                return Err(CryptoError::MixedModuli {
                    a: p.unwrap_or(element.modulus()),
                    b: element.modulus(),
                });
            }
        }
        if seen.insert(share.index, ()).is_some() {
            return Err(CryptoError::DuplicateIndex { index: share.index });
        }
    }
    let p = p.ok_or_else(|| CryptoError::BadParameters {
        reason: "shares carry empty payloads".to_string(),
    })?;
    for share in shares {
        if share.index == 0 || share.index >= p {
            return Err(CryptoError::BadParameters {
                reason: format!("share index {} outside 1..{p}", share.index),
            });
        }
    }
    Ok((p, blocks))
}

/// Horner evaluation of the polynomial with ascending coefficients.
fn eval_poly(coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    let mut acc = FieldElement::raw(0, x.modulus());
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Full Lagrange interpolation in coefficient form: returns the unique
/// polynomial of degree below `points.len()` through the given points,
/// as ascending coefficients.
fn interpolate_coefficients(points: &[FieldElement], values: &[FieldElement]) -> Vec<FieldElement> {
    let t = points.len();
    let p = points[0].modulus();
    let zero = FieldElement::raw(0, p);
    let one = FieldElement::raw(1, p);

    // master(x) = ∏_j (x − x_j), ascending coefficients, degree t.
    let mut master = vec![zero; t + 1];
    master[0] = one;
    for (deg, &x) in points.iter().enumerate() {
        master[deg + 1] = master[deg];
        for i in (1..=deg).rev() {
            master[i] = master[i - 1] - master[i] * x;
        }
        master[0] = -(master[0] * x);
    }

    let mut coeffs = vec![zero; t];
    let mut basis = vec![zero; t];
    for (j, (&xj, &yj)) in points.iter().zip(values).enumerate() {
        // Synthetic division: basis(x) = master(x) / (x − x_j).
        basis[t - 1] = master[t];
        for i in (0..t - 1).rev() {
            basis[i] = master[i + 1] + xj * basis[i + 1];
        }
        let mut denom = one;
        for (k, &xk) in points.iter().enumerate() {
            if k != j {
                denom = denom * (xj - xk);
            }
        }
        let scale = yj * denom.inv();
        for (c, &b) in coeffs.iter_mut().zip(basis.iter()) {
            *c = *c + scale * b;
        }
    }
    coeffs
}

// ---------------------------------------------------------------------------
// Entropy oracle
// ---------------------------------------------------------------------------

/// Scheme family the entropy oracle enumerates: one polynomial block of
/// the `(t, l, m)`-ramp construction over GF(`modulus`) (`l = 1` is the
/// perfect threshold scheme).
#[derive(Clone, Copy, Debug)]
pub struct OracleParams {
    /// Field size; every coefficient ranges over `0..modulus`.
    pub modulus: u64,
    /// Recovery threshold (the polynomials have degree `t − 1`).
    pub t: usize,
    /// Secret symbols per block; the remaining `t − l` coefficients are
    /// the randomness.
    pub l: usize,
    /// Number of shares handed out (evaluation points `1..=m`).
    pub m: usize,
    /// Enumeration ceiling; the oracle refuses if `modulus^t` exceeds it.
    pub budget: u128,
}

impl OracleParams {
    /// Parameters for the perfect `(t, m)`-threshold scheme.
    pub fn perfect(modulus: u64, t: usize, m: usize) -> OracleParams {
        OracleParams::ramp(modulus, t, 1, m)
    }

    /// Parameters for the `(t, l, m)`-ramp scheme.
    pub fn ramp(modulus: u64, t: usize, l: usize, m: usize) -> OracleParams {
        OracleParams { modulus, t, l, m, budget: DEFAULT_ORACLE_BUDGET }
    }
}

/// Measures, by exhaustive enumeration, how much of the secret a set of
/// shares leaves unknown: the exact ratio `H(S | shares at `subset`) /
/// H(S)` with entropies in base `modulus`, so the result is an exact
/// rational between `0` (the subset reconstructs) and `1` (the subset
/// learns nothing).
///
/// The oracle walks all `modulus^t` coefficient vectors — the uniform
/// joint distribution of (secret block, randomness) — tallies the joint
/// distribution of the observed share values against the secret, and
/// computes the conditional entropy from the tallies. It is an
/// independent check on the splitting routines' secrecy claims: it knows
/// the polynomial family but shares no code with the verdicts it is
/// asked to confirm.
pub fn entropy_oracle(params: OracleParams, subset: &[u64]) -> Result<Rational64, CryptoError> {
    let OracleParams { modulus: p, t, l, m, budget } = params;
    if !is_prime(p) {
        return Err(CryptoError::NotPrime { p });
    }
    check_scheme_shape(p, t, l, m)?;
    let mut seen = HashMap::new();
    for &index in subset {
        if index == 0 || index > m as u64 {
            return Err(CryptoError::BadParameters {
                reason: format!("subset index {index} outside 1..={m}"),
            });
        }
        if seen.insert(index, ()).is_some() {
            return Err(CryptoError::DuplicateIndex { index });
        }
    }
    let states = (p as u128).saturating_pow(t as u32);
    if states > budget {
        return Err(CryptoError::BudgetExceeded { states, budget });
    }

    // counts[(observed share values, secret block)] over all coefficient
    // vectors, both packed base p.
    let mut counts: HashMap<(u128, u128), u64> = HashMap::new();
    let mut digits = vec![0u64; t];
    loop {
        let mut secret_key = 0u128;
        for &d in digits[..l].iter().rev() {
            secret_key = secret_key * p as u128 + d as u128;
        }
        let mut observed_key = 0u128;
        for &x in subset {
            let mut acc = 0u64;
            for &c in digits.iter().rev() {
                acc = ((acc as u128 * x as u128 + c as u128) % p as u128) as u64;
            }
            observed_key = observed_key * p as u128 + acc as u128;
        }
        *counts.entry((observed_key, secret_key)).or_insert(0) += 1;

        let mut i = 0;
        while i < t {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == t {
            break;
        }
    }

    let mut observed_totals: HashMap<u128, u64> = HashMap::new();
    for (&(observed, _), &c) in &counts {
        *observed_totals.entry(observed).or_insert(0) += c;
    }

    // H(S | A) = Σ_{a,s} P(a, s) · log_p( P(a) / P(a, s) ). The
    // construction is linear over GF(p), so every conditional
    // distribution is uniform on a coset and each log is an exact
    // integer; the asserts below would only fire on a non-linear scheme.
    let mut weighted_logs: u128 = 0;
    for (&(observed, _), &c) in &counts {
        let total = observed_totals[&observed];
        assert_eq!(total % c, 0, "conditional share distribution is not field-uniform");
        let ratio = total / c;
        let mut power = 0u32;
        let mut rest = ratio;
        while rest.is_multiple_of(p) {
            rest /= p;
            power += 1;
        }
        assert_eq!(rest, 1, "conditional share distribution is not field-uniform");
        weighted_logs += c as u128 * power as u128;
    }

    let numerator = i64::try_from(weighted_logs).expect("entropy tally exceeds i64");
    let denominator = i64::try_from(states * l as u128).expect("entropy tally exceeds i64");
    Ok(Rational64::new(numerator, denominator))
}
