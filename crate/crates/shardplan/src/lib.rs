//! Secret-sharing scheme design toolkit.
//!
//! `shardplan` models general and ramp access structures, builds multiple
//! assignment maps onto threshold primitives — the classical cumulative
//! constructions as well as exact integer-programming optima — and executes
//! the resulting schemes over a prime field with end-to-end split and
//! reconstruct.
//!
//! The crate is organized bottom-up:
//!
//! - [`access`]: participant-set algebra, perfect and ramp access
//!   structures, consistency checks, participant classification.
//! - [`maps`]: multiple assignment maps, the explicit constructions
//!   (cumulative, modified cumulative, ramp cumulative, per-level
//!   decomposition), verifiers and coding rates.
//! - [`ilp`]: integer programs whose optima are rate-optimal assignment
//!   maps, plus an exact rational branch-and-bound solver.
//! - [`crypto`]: Shamir and ramp threshold primitives over a prime field,
//!   with a brute-force entropy oracle for small-field validation.
//! - [`scheme`]: the distribution engine marrying a map with the field
//!   primitives, share bundles and their serialization.
//!
//! All set/rate computations are exact: coalitions are bitmasks, rates are
//! rationals, and the solver's relaxations are solved in exact rational
//! arithmetic. No floating point participates in any decision.

pub mod access;
pub mod crypto;
pub mod ilp;
pub mod maps;
pub mod scheme;

#[cfg(test)]
pub(crate) mod testkit;
