//! Integer programs over access structures and their exact solver.
//!
//! The share-assignment problem — pick how many primitive shares to hand
//! to every coalition pattern so that qualified sets recover the secret
//! and forbidden sets learn nothing — is an integer program with one
//! variable per nonempty participant subset `p` (the count `x_p` of
//! primitives held by exactly the members of `p`), a recovery threshold
//! `t`, and, for worst-rate problems, a bound variable `M`. This module
//! builds the average-rate and worst-rate programs for perfect and ramp
//! structures, solves them with a deterministic exact branch-and-bound
//! (linear relaxations in arbitrary-precision rational arithmetic, so
//! "optimal" and "infeasible" are proofs, not approximations), and turns
//! optimal vectors back into assignment maps.
//!
//! Determinism: identical programs always produce identical solutions.
//! Among multiple optima the solver returns the one minimizing the tuple
//! (objective, `t`, lexicographic `x`), computed by a second bounded
//! search over the optimal face.

// Tableau and constraint-row loops below index several parallel arrays by
// the same row/column/level number; iterator rewrites obscure that.
#![allow(clippy::needless_range_loop)]

use std::collections::HashMap;
use std::fmt::Write as _;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::access::{
    AccessError, AccessStructure, ParticipantSet, RampAccessStructure, ShareClass,
    DEFAULT_ENUMERATION_CAP,
};
use crate::maps::{cumulative_map, AssignmentMap, RampMode};

/// Default limit on branch-and-bound nodes (linear relaxations solved).
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Errors produced by program construction and solution conversion.
#[derive(Debug, Error)]
pub enum IlpError {
    /// The program violates a structural invariant.
    #[error("malformed program: {reason}")]
    BadModel { reason: String },
    /// A builder was given a structure it cannot encode.
    #[error("structure does not meet the builder's requirements: {0}")]
    InconsistentStructure(String),
    /// A solution vector cannot be turned into an assignment map.
    #[error("solution cannot be converted to a map: {reason}")]
    BadSolution { reason: String },
    /// An operation needed an optimal solution but the solver returned
    /// something weaker.
    #[error("no optimal solution available (solver status: {status:?})")]
    NotOptimal { status: SolveStatus },
    /// The optimizer and the combinatorial classifier disagree.
    #[error("optimizer and set-based classifier disagree on participant {index}")]
    ClassificationMismatch { index: usize },
    /// An underlying structure operation failed.
    #[error(transparent)]
    Access(#[from] AccessError),
}

/// What a program variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    /// Upper bound on every participant's primitive count (worst-rate
    /// programs only).
    WorstBound,
    /// The recovery threshold `t` of the primitive scheme.
    Threshold,
    /// `x_p`: number of primitives held by exactly the coalition `p`.
    Atom(ParticipantSet),
}

/// Constraint sense. Only `≥` and `=` appear in these programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Left-hand side at least the right-hand side.
    Ge,
    /// Left-hand side exactly the right-hand side.
    Eq,
}

/// One labeled row of a program: `coeffs · y  (≥|=)  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    label: String,
    coeffs: Vec<i64>,
    relation: Relation,
    rhs: i64,
}

impl LinearConstraint {
    /// Builds a row. Width is validated when the program is assembled.
    pub fn new(label: impl Into<String>, coeffs: Vec<i64>, relation: Relation, rhs: i64) -> Self {
        LinearConstraint { label: label.into(), coeffs, relation, rhs }
    }

    /// Human-readable name of the row, used in the text dump.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Coefficients, aligned with the program's variable layout.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Constraint sense.
    pub fn relation(&self) -> Relation {
        self.relation
    }

    /// Right-hand side.
    pub fn rhs(&self) -> i64 {
        self.rhs
    }
}

/// An integer program over nonnegative integer variables.
///
/// The variable layout is `[M?] [t?] x_p …` with the `x_p` slots in
/// ascending order of the subset bitmask `p`. All coefficients are exact
/// integers and the objective coefficients are nonnegative (the solver
/// relies on the objective being bounded below over the nonnegative
/// orthant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLinearProgram {
    roles: Vec<VarRole>,
    objective: Vec<i64>,
    constraints: Vec<LinearConstraint>,
}

impl IntegerLinearProgram {
    /// Assembles and validates a program.
    pub fn new(
        roles: Vec<VarRole>,
        objective: Vec<i64>,
        constraints: Vec<LinearConstraint>,
    ) -> Result<Self, IlpError> {
        if roles.is_empty() {
            return Err(IlpError::BadModel { reason: "program has no variables".into() });
        }
        if objective.len() != roles.len() {
            return Err(IlpError::BadModel {
                reason: format!(
                    "objective has {} coefficients for {} variables",
                    objective.len(),
                    roles.len()
                ),
            });
        }
        if objective.iter().any(|&c| c < 0) {
            return Err(IlpError::BadModel {
                reason: "objective coefficients must be nonnegative".into(),
            });
        }
        let mut thresholds = 0;
        let mut worsts = 0;
        let mut prev_atom: Option<ParticipantSet> = None;
        for role in &roles {
            match role {
                VarRole::Threshold => thresholds += 1,
                VarRole::WorstBound => worsts += 1,
                VarRole::Atom(p) => {
                    if p.is_empty() {
                        return Err(IlpError::BadModel {
                            reason: "atom variable for the empty coalition".into(),
                        });
                    }
                    if let Some(prev) = prev_atom {
                        if prev >= *p {
                            return Err(IlpError::BadModel {
                                reason: "atom variables must be strictly ascending".into(),
                            });
                        }
                    }
                    prev_atom = Some(*p);
                }
            }
        }
        if thresholds > 1 || worsts > 1 {
            return Err(IlpError::BadModel {
                reason: "duplicate threshold or bound variable".into(),
            });
        }
        for c in &constraints {
            if c.coeffs.len() != roles.len() {
                return Err(IlpError::BadModel {
                    reason: format!(
                        "row '{}' has {} coefficients for {} variables",
                        c.label,
                        c.coeffs.len(),
                        roles.len()
                    ),
                });
            }
        }
        Ok(IntegerLinearProgram { roles, objective, constraints })
    }

    /// Number of variables.
    pub fn var_count(&self) -> usize {
        self.roles.len()
    }

    /// Role of every variable, in layout order.
    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    /// Objective coefficients.
    pub fn objective(&self) -> &[i64] {
        &self.objective
    }

    /// All rows, in deterministic build order.
    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// Slot of the threshold variable, if present.
    pub fn threshold_slot(&self) -> Option<usize> {
        self.roles.iter().position(|r| matches!(r, VarRole::Threshold))
    }

    /// Slot of the worst-rate bound variable, if present.
    pub fn worst_slot(&self) -> Option<usize> {
        self.roles.iter().position(|r| matches!(r, VarRole::WorstBound))
    }

    /// Atom slots in ascending subset order.
    pub fn atom_slots(&self) -> impl Iterator<Item = (usize, ParticipantSet)> + '_ {
        self.roles.iter().enumerate().filter_map(|(slot, role)| match role {
            VarRole::Atom(p) => Some((slot, *p)),
            _ => None,
        })
    }

    /// Appends the row forcing the threshold to equal the total number of
    /// primitive shares (`t = Σ x_p`), which pins the primitive scheme to
    /// the all-or-nothing `(m, m)` form.
    pub fn require_threshold_equals_share_count(&mut self) -> Result<(), IlpError> {
        let Some(t_slot) = self.threshold_slot() else {
            return Err(IlpError::BadModel {
                reason: "program has no threshold variable to pin".into(),
            });
        };
        let mut coeffs = vec![0i64; self.roles.len()];
        coeffs[t_slot] = 1;
        for (slot, _) in self.atom_slots().collect::<Vec<_>>() {
            coeffs[slot] = -1;
        }
        self.constraints.push(LinearConstraint::new(
            "shares equal threshold",
            coeffs,
            Relation::Eq,
            0,
        ));
        Ok(())
    }

    /// Exact objective value of an integer point.
    pub fn evaluate_objective(&self, values: &[i64]) -> i64 {
        assert_eq!(values.len(), self.roles.len(), "value vector width mismatch");
        let total: i128 =
            self.objective.iter().zip(values).map(|(&c, &v)| i128::from(c) * i128::from(v)).sum();
        i64::try_from(total).expect("objective value fits in 64 bits")
    }

    /// Whether an integer point satisfies every row and nonnegativity.
    pub fn is_feasible_point(&self, values: &[i64]) -> bool {
        if values.len() != self.roles.len() || values.iter().any(|&v| v < 0) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: i128 =
                c.coeffs.iter().zip(values).map(|(&a, &v)| i128::from(a) * i128::from(v)).sum();
            match c.relation {
                Relation::Ge => lhs >= i128::from(c.rhs),
                Relation::Eq => lhs == i128::from(c.rhs),
            }
        })
    }

    fn var_name(&self, slot: usize) -> String {
        match self.roles[slot] {
            VarRole::WorstBound => "M".into(),
            VarRole::Threshold => "t".into(),
            VarRole::Atom(p) => format!("x{}", p.bits()),
        }
    }

    /// Renders the program as human-readable text: objective, labeled
    /// rows, and a legend mapping each `x_p` name to its coalition.
    pub fn lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str("minimize: ");
        push_expr(&mut out, &self.objective, &|s| self.var_name(s));
        out.push_str(";\nsubject to:\n");
        for c in &self.constraints {
            let _ = write!(out, "  {}: ", c.label);
            push_expr(&mut out, &c.coeffs, &|s| self.var_name(s));
            let op = match c.relation {
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {op} {};", c.rhs);
        }
        out.push_str("bounds: all variables are nonnegative integers;\nlegend:\n");
        for (slot, role) in self.roles.iter().enumerate() {
            match role {
                VarRole::WorstBound => {
                    out.push_str("  M = worst per-participant primitive count\n")
                }
                VarRole::Threshold => out.push_str("  t = recovery threshold\n"),
                VarRole::Atom(p) => {
                    let _ = writeln!(
                        out,
                        "  {} = primitives held exactly by {}",
                        self.var_name(slot),
                        p
                    );
                }
            }
        }
        out
    }
}

fn push_expr(out: &mut String, coeffs: &[i64], name: &dyn Fn(usize) -> String) {
    let mut first = true;
    for (slot, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mag = c.abs();
        if first {
            if c < 0 {
                out.push_str("- ");
            }
            first = false;
        } else if c < 0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(&name(slot));
    }
    if first {
        out.push('0');
    }
}

// ---------------------------------------------------------------------------
// Program builders
// ---------------------------------------------------------------------------

/// Which coding rate a program minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IpObjective {
    /// Minimize the total primitive count weighted by holders (average rate).
    Average,
    /// Minimize the largest per-participant primitive count (worst rate).
    Worst,
}

fn check_perfect_input(s: &AccessStructure) -> Result<(), IlpError> {
    if s.n() > DEFAULT_ENUMERATION_CAP {
        return Err(
            AccessError::EnumerationCapExceeded { n: s.n(), cap: DEFAULT_ENUMERATION_CAP }.into()
        );
    }
    let report = s.check_consistency();
    if !report.is_consistent() {
        return Err(IlpError::InconsistentStructure(format!(
            "structure has {} consistency violation(s)",
            report.violations().len()
        )));
    }
    Ok(())
}

/// Atom list for perfect programs: every nonempty coalition except, for
/// two or more participants, the full universe (a primitive handed to
/// everyone never separates a qualified set from a forbidden one, so its
/// count may be fixed to zero; with a single participant the full
/// universe is the only coalition and must stay).
fn perfect_atoms(n: usize) -> Vec<ParticipantSet> {
    let full = (1u32 << n) - 1;
    let top = if n == 1 { full } else { full - 1 };
    (1..=top).map(|bits| ParticipantSet::from_bits(n, bits)).collect()
}

fn ramp_atoms(n: usize) -> Vec<ParticipantSet> {
    let full = (1u32 << n) - 1;
    (1..=full).map(|bits| ParticipantSet::from_bits(n, bits)).collect()
}

struct RowBuilder {
    atoms: Vec<ParticipantSet>,
    t_slot: usize,
    m_slot: Option<usize>,
    width: usize,
}

impl RowBuilder {
    /// Row `|Φ(A)| - t ≥ rhs` (or `=` for equality targets): counts every
    /// atom intersecting `A`.
    fn supply(
        &self,
        label: String,
        a: ParticipantSet,
        relation: Relation,
        rhs: i64,
    ) -> LinearConstraint {
        let mut coeffs = vec![0i64; self.width];
        coeffs[self.t_slot] = -1;
        for (k, p) in self.atoms.iter().enumerate() {
            if !p.is_disjoint(a) {
                coeffs[self.first_atom_slot() + k] = 1;
            }
        }
        LinearConstraint::new(label, coeffs, relation, rhs)
    }

    /// Row `t - |Φ(A)| ≥ rhs` (or `=`).
    fn deficit(
        &self,
        label: String,
        a: ParticipantSet,
        relation: Relation,
        rhs: i64,
    ) -> LinearConstraint {
        let mut c = self.supply(label, a, relation, -rhs);
        for v in c.coeffs.iter_mut() {
            *v = -*v;
        }
        c.rhs = rhs;
        c
    }

    /// Row `M - Σ_{p ∋ i} x_p ≥ 0`: the bound variable dominates
    /// participant `i`'s primitive count.
    fn load(&self, i: usize) -> LinearConstraint {
        let mut coeffs = vec![0i64; self.width];
        coeffs[self.m_slot.expect("load rows need a bound variable")] = 1;
        for (k, p) in self.atoms.iter().enumerate() {
            if p.contains(i) {
                coeffs[self.first_atom_slot() + k] = -1;
            }
        }
        LinearConstraint::new(format!("load V{i}"), coeffs, Relation::Ge, 0)
    }

    fn first_atom_slot(&self) -> usize {
        self.m_slot.map_or(0, |_| 1) + 1
    }

    fn roles(&self) -> Vec<VarRole> {
        let mut roles = Vec::with_capacity(self.width);
        if self.m_slot.is_some() {
            roles.push(VarRole::WorstBound);
        }
        roles.push(VarRole::Threshold);
        roles.extend(self.atoms.iter().map(|&p| VarRole::Atom(p)));
        roles
    }

    fn objective(&self, objective: IpObjective) -> Vec<i64> {
        let mut obj = vec![0i64; self.width];
        match objective {
            IpObjective::Worst => {
                obj[self.m_slot.expect("worst objective needs a bound variable")] = 1
            }
            IpObjective::Average => {
                for (k, p) in self.atoms.iter().enumerate() {
                    obj[self.first_atom_slot() + k] = p.len() as i64;
                }
            }
        }
        obj
    }
}

fn perfect_builder(s: &AccessStructure, objective: IpObjective) -> RowBuilder {
    let atoms = perfect_atoms(s.n());
    let m_slot = match objective {
        IpObjective::Average => None,
        IpObjective::Worst => Some(0),
    };
    let width = atoms.len() + 1 + usize::from(m_slot.is_some());
    RowBuilder { atoms, t_slot: usize::from(m_slot.is_some()), m_slot, width }
}

fn build_perfect(
    s: &AccessStructure,
    objective: IpObjective,
) -> Result<IntegerLinearProgram, IlpError> {
    check_perfect_input(s)?;
    let rb = perfect_builder(s, objective);
    let mut rows = Vec::new();
    for a in s.qualified_min().iter() {
        rows.push(rb.supply(format!("qualified {a}"), a, Relation::Ge, 0));
    }
    for a in s.forbidden_max().iter() {
        rows.push(rb.deficit(format!("forbidden {a}"), a, Relation::Ge, 1));
    }
    if objective == IpObjective::Worst {
        for i in 0..s.n() {
            rows.push(rb.load(i));
        }
    }
    IntegerLinearProgram::new(rb.roles(), rb.objective(objective), rows)
}

/// Builds the average-rate program for a perfect structure: minimize
/// `Σ |p| · x_p` subject to `|Φ(A)| ≥ t` for every minimal qualified set
/// and `|Φ(A)| ≤ t - 1` for every maximal forbidden set.
///
/// # Errors
/// Enumeration cap exceeded, or the structure is inconsistent.
pub fn build_ip_avg(s: &AccessStructure) -> Result<IntegerLinearProgram, IlpError> {
    build_perfect(s, IpObjective::Average)
}

/// Builds the worst-rate program for a perfect structure: minimize `M`
/// subject to the same supply/deficit rows plus `M ≥ Σ_{p ∋ i} x_p` for
/// every participant.
///
/// # Errors
/// As [`build_ip_avg`].
pub fn build_ip_worst(s: &AccessStructure) -> Result<IntegerLinearProgram, IlpError> {
    build_perfect(s, IpObjective::Worst)
}

/// Builds the ramp program. Boundary rows require `|Φ(A)| ≥ t` for the
/// minimal fully-qualified sets and `|Φ(A)| ≤ t - L` for the maximal
/// level-0 sets; each intermediate level-`j` representative targets
/// `t - L + j` primitives (exactly in [`RampMode::Exact`], at most in
/// [`RampMode::Relaxed`]). A `t ≥ L` row keeps the primitive scheme
/// well-formed, and the all-participants atom is retained because ramp
/// maps can profit from primitives handed to everyone. The worst-rate
/// objective is the natural extension of the perfect one (the
/// per-participant bound rows are added verbatim).
///
/// # Errors
/// Enumeration cap exceeded; monotonicity check fails.
pub fn build_ip_ramp(
    r: &RampAccessStructure,
    mode: RampMode,
    objective: IpObjective,
) -> Result<IntegerLinearProgram, IlpError> {
    if r.n() > DEFAULT_ENUMERATION_CAP {
        return Err(
            AccessError::EnumerationCapExceeded { n: r.n(), cap: DEFAULT_ENUMERATION_CAP }.into()
        );
    }
    let min_max = r.min_max().map_err(IlpError::Access)?;
    let l = r.levels();
    let atoms = ramp_atoms(r.n());
    let m_slot = match objective {
        IpObjective::Average => None,
        IpObjective::Worst => Some(0),
    };
    let width = atoms.len() + 1 + usize::from(m_slot.is_some());
    let rb = RowBuilder { atoms, t_slot: usize::from(m_slot.is_some()), m_slot, width };

    let mut rows = Vec::new();
    for a in min_max[l].0.iter() {
        rows.push(rb.supply(format!("qualified {a}"), a, Relation::Ge, 0));
    }
    for a in min_max[0].1.iter() {
        rows.push(rb.deficit(format!("forbidden {a}"), a, Relation::Ge, l as i64));
    }
    for j in 1..l {
        let mut reps: Vec<ParticipantSet> =
            min_max[j].0.iter().chain(min_max[j].1.iter()).collect();
        reps.sort();
        reps.dedup();
        let gap = (l - j) as i64;
        for a in reps {
            let relation = match mode {
                RampMode::Exact => Relation::Eq,
                RampMode::Relaxed => Relation::Ge,
            };
            rows.push(rb.deficit(format!("level {j} {a}"), a, relation, gap));
        }
    }
    let mut floor = vec![0i64; width];
    floor[rb.t_slot] = 1;
    rows.push(LinearConstraint::new("threshold floor", floor, Relation::Ge, l as i64));
    if objective == IpObjective::Worst {
        for i in 0..r.n() {
            rows.push(rb.load(i));
        }
    }
    IntegerLinearProgram::new(rb.roles(), rb.objective(objective), rows)
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

/// Outcome class of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// A provably optimal integer solution was found.
    Optimal,
    /// The program has no integer solution (proved via the relaxation).
    Infeasible,
    /// The node budget ran out before a proof either way.
    BudgetExceeded,
}

/// Solver configuration.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Maximum number of linear relaxations to solve across all phases.
    pub node_budget: u64,
    /// Run the canonicalization pass that picks, among all optima, the one
    /// minimizing (objective, `t`, lexicographic `x`). Disabling it keeps
    /// the result deterministic but unspecified among optima.
    pub canonical: bool,
    /// Known feasible integer point used as the initial incumbent, aligned
    /// with the program's variable layout.
    pub incumbent: Option<Vec<i64>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { node_budget: DEFAULT_NODE_BUDGET, canonical: true, incumbent: None }
    }
}

/// Result of a solve. `values` and `objective` describe the proven
/// optimum when the status is [`SolveStatus::Optimal`]; on
/// [`SolveStatus::BudgetExceeded`] they hold the best point found so far
/// (possibly none), and they are empty/zero on infeasibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpSolution {
    status: SolveStatus,
    values: Vec<i64>,
    objective: i64,
    node_count: u64,
    roles: Vec<VarRole>,
}

impl IpSolution {
    /// Outcome class.
    pub fn status(&self) -> SolveStatus {
        self.status
    }

    /// Convenience: status is [`SolveStatus::Optimal`].
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Variable values, aligned with [`IpSolution::roles`].
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Objective value of [`IpSolution::values`].
    pub fn objective(&self) -> i64 {
        self.objective
    }

    /// Linear relaxations solved.
    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    /// Roles of the solved program, in layout order.
    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    /// Value of the threshold variable, if the program had one.
    pub fn threshold(&self) -> Option<i64> {
        self.roles
            .iter()
            .position(|r| matches!(r, VarRole::Threshold))
            .and_then(|slot| self.values.get(slot).copied())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColStatus {
    Basic(usize),
    AtLo,
    AtUp,
}

enum LpOutcome {
    Infeasible,
    Optimal { values: Vec<BigRational>, objective: BigRational },
}

/// Bounded-variable two-phase simplex over exact rationals. Pricing is
/// steepest-coefficient with a sticky switch to Bland's rule after a run
/// of non-improving iterations, which keeps the method both fast in
/// practice and provably terminating.
struct Simplex {
    rows: usize,
    cols: usize,
    tab: Vec<Vec<BigRational>>,
    beta: Vec<BigRational>,
    lo: Vec<BigRational>,
    hi: Vec<Option<BigRational>>,
    cost: Vec<BigRational>,
    status: Vec<ColStatus>,
    basis: Vec<usize>,
}

impl Simplex {
    fn bound_value(&self, j: usize) -> BigRational {
        match self.status[j] {
            ColStatus::AtLo => self.lo[j].clone(),
            ColStatus::AtUp => self.hi[j].clone().expect("AtUp implies finite bound"),
            ColStatus::Basic(_) => unreachable!("bound value of a basic column"),
        }
    }

    fn basic_values(&self) -> Vec<BigRational> {
        let mut xb = self.beta.clone();
        for j in 0..self.cols {
            if matches!(self.status[j], ColStatus::Basic(_)) {
                continue;
            }
            let val = self.bound_value(j);
            if val.is_zero() {
                continue;
            }
            for r in 0..self.rows {
                if !self.tab[r][j].is_zero() {
                    let delta = &self.tab[r][j] * &val;
                    xb[r] = &xb[r] - &delta;
                }
            }
        }
        xb
    }

    fn reduced_costs(&self) -> Vec<BigRational> {
        let mut d = self.cost.clone();
        for r in 0..self.rows {
            let y = self.cost[self.basis[r]].clone();
            if y.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                if !self.tab[r][j].is_zero() {
                    let delta = &y * &self.tab[r][j];
                    d[j] = &d[j] - &delta;
                }
            }
        }
        d
    }

    fn objective_value(&self, xb: &[BigRational]) -> BigRational {
        let mut z = BigRational::zero();
        for j in 0..self.cols {
            if self.cost[j].is_zero() {
                continue;
            }
            let val = match self.status[j] {
                ColStatus::Basic(r) => xb[r].clone(),
                _ => self.bound_value(j),
            };
            z += &self.cost[j] * &val;
        }
        z
    }

    /// Runs the active phase to optimality. Returns the final objective.
    fn optimize(&mut self) -> BigRational {
        let mut bland = false;
        let mut stall = 0u32;
        let mut prev_obj: Option<BigRational> = None;
        for _ in 0..1_000_000u32 {
            let xb = self.basic_values();
            let obj = self.objective_value(&xb);
            match &prev_obj {
                Some(p) if obj < *p => {
                    stall = 0;
                    bland = false;
                }
                Some(_) => {
                    stall += 1;
                    if stall > 30 {
                        bland = true;
                    }
                }
                None => {}
            }
            prev_obj = Some(obj);
            let d = self.reduced_costs();
            let mut entering: Option<usize> = None;
            let mut best_mag = BigRational::zero();
            for j in 0..self.cols {
                let eligible = match self.status[j] {
                    ColStatus::AtLo => d[j].is_negative(),
                    ColStatus::AtUp => d[j].is_positive(),
                    ColStatus::Basic(_) => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                let mag = d[j].abs();
                if entering.is_none() || mag > best_mag {
                    entering = Some(j);
                    best_mag = mag;
                }
            }
            let Some(j) = entering else {
                return prev_obj.expect("objective computed");
            };
            let sigma: i64 = if self.status[j] == ColStatus::AtLo { 1 } else { -1 };

            // Ratio test: the entering variable moves by Δ ≥ 0 from its
            // bound; every basic variable must stay inside its own bounds
            // and the entering variable inside its span.
            let mut best: Option<BigRational> = self.hi[j].as_ref().map(|h| h - &self.lo[j]);
            let mut blocker: Option<usize> = None; // row index; None = bound flip
            let mut blocker_col = j;
            for r in 0..self.rows {
                let alpha = &self.tab[r][j];
                if alpha.is_zero() {
                    continue;
                }
                let effect = if sigma > 0 { alpha.clone() } else { -alpha.clone() };
                let b_col = self.basis[r];
                let cand = if effect.is_positive() {
                    Some((&xb[r] - &self.lo[b_col]) / &effect)
                } else {
                    self.hi[b_col].as_ref().map(|h| (h - &xb[r]) / &(-&effect))
                };
                if let Some(cand) = cand {
                    let replace = match &best {
                        None => true,
                        Some(cur) => {
                            cand < *cur
                                || (cand == *cur && blocker.is_some() && b_col < blocker_col)
                                || (cand == *cur && blocker.is_none() && b_col < blocker_col)
                        }
                    };
                    if replace {
                        best = Some(cand);
                        blocker = Some(r);
                        blocker_col = b_col;
                    }
                }
            }
            let delta = best.expect("bounded objective admits no unbounded ray");
            match blocker {
                None => {
                    // Bound flip.
                    self.status[j] = if sigma > 0 { ColStatus::AtUp } else { ColStatus::AtLo };
                }
                Some(r) => {
                    let entering_value = if sigma > 0 {
                        &self.lo[j] + &delta
                    } else {
                        self.hi[j].clone().expect("AtUp implies finite bound") - &delta
                    };
                    let effect_sign = if sigma > 0 {
                        self.tab[r][j].is_positive()
                    } else {
                        self.tab[r][j].is_negative()
                    };
                    let leaving = self.basis[r];
                    self.pivot(r, j);
                    self.status[leaving] =
                        if effect_sign { ColStatus::AtLo } else { ColStatus::AtUp };
                    self.status[j] = ColStatus::Basic(r);
                    self.basis[r] = j;
                    let _ = entering_value; // value re-derived from beta next loop
                }
            }
        }
        panic!("internal error: simplex failed to terminate");
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.tab[r][j].clone();
        if !piv.is_one() {
            for c in 0..self.cols {
                if !self.tab[r][c].is_zero() {
                    self.tab[r][c] = &self.tab[r][c] / &piv;
                }
            }
            self.beta[r] = &self.beta[r] / &piv;
        }
        for rr in 0..self.rows {
            if rr == r || self.tab[rr][j].is_zero() {
                continue;
            }
            let f = self.tab[rr][j].clone();
            for c in 0..self.cols {
                if !self.tab[r][c].is_zero() {
                    let delta = &f * &self.tab[r][c];
                    self.tab[rr][c] = &self.tab[rr][c] - &delta;
                }
            }
            let delta = &f * &self.beta[r];
            self.beta[rr] = &self.beta[rr] - &delta;
        }
    }
}

struct LpInstance<'a> {
    coeffs: &'a [Vec<i64>],
    relations: &'a [Relation],
    rhs: &'a [i64],
    cost: &'a [BigRational],
    lo: &'a [i64],
    hi: &'a [Option<i64>],
}

fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn solve_lp(inst: &LpInstance<'_>) -> LpOutcome {
    let ns = inst.cost.len();
    let rows = inst.coeffs.len();
    let ge_rows: Vec<usize> = (0..rows).filter(|&r| inst.relations[r] == Relation::Ge).collect();
    let n_slack = ge_rows.len();
    let cols = ns + n_slack + rows;
    let slack_of: HashMap<usize, usize> =
        ge_rows.iter().enumerate().map(|(k, &r)| (r, ns + k)).collect();

    let mut tab = vec![vec![BigRational::zero(); cols]; rows];
    let mut beta = vec![BigRational::zero(); rows];
    let mut lo = vec![BigRational::zero(); cols];
    let mut hi: Vec<Option<BigRational>> = vec![None; cols];
    for j in 0..ns {
        lo[j] = big(inst.lo[j]);
        hi[j] = inst.hi[j].map(big);
    }
    let mut status = vec![ColStatus::AtLo; cols];
    let mut basis = vec![0usize; rows];

    for r in 0..rows {
        // Structural part plus slack, then the residual at the starting
        // point (all structural and slack columns at lower bound) decides
        // the artificial column's orientation.
        let mut resid = big(inst.rhs[r]);
        for j in 0..ns {
            if inst.coeffs[r][j] != 0 {
                tab[r][j] = big(inst.coeffs[r][j]);
                if inst.lo[j] != 0 {
                    resid -= big(inst.coeffs[r][j]) * big(inst.lo[j]);
                }
            }
        }
        if let Some(&s) = slack_of.get(&r) {
            tab[r][s] = -BigRational::one();
        }
        let art = ns + n_slack + r;
        let flip = resid.is_negative();
        tab[r][art] = BigRational::one();
        hi[art] = Some(resid.abs());
        if flip {
            for c in 0..cols {
                if !tab[r][c].is_zero() && c != art {
                    tab[r][c] = -tab[r][c].clone();
                }
            }
            beta[r] = -big(inst.rhs[r]);
        } else {
            beta[r] = big(inst.rhs[r]);
        }
        status[art] = ColStatus::Basic(r);
        basis[r] = art;
    }

    // Phase 1: drive the artificial columns to zero.
    let mut cost = vec![BigRational::zero(); cols];
    for r in 0..rows {
        cost[ns + n_slack + r] = BigRational::one();
    }
    let mut sx = Simplex { rows, cols, tab, beta, lo, hi, cost, status, basis };
    let phase1 = sx.optimize();
    if !phase1.is_zero() {
        return LpOutcome::Infeasible;
    }

    // Phase 2: pin artificials at zero and optimize the real objective.
    for r in 0..rows {
        sx.hi[ns + n_slack + r] = Some(BigRational::zero());
    }
    for j in 0..cols {
        sx.cost[j] = if j < ns { inst.cost[j].clone() } else { BigRational::zero() };
    }
    let objective = sx.optimize();
    let xb = sx.basic_values();
    let values: Vec<BigRational> = (0..ns)
        .map(|j| match sx.status[j] {
            ColStatus::Basic(r) => xb[r].clone(),
            _ => sx.bound_value(j),
        })
        .collect();
    LpOutcome::Optimal { values, objective }
}

struct BranchSearch {
    coeffs: Vec<Vec<i64>>,
    relations: Vec<Relation>,
    rhs: Vec<i64>,
    cost: Vec<BigRational>,
    lo: Vec<i64>,
    hi: Vec<Option<i64>>,
    order: Vec<usize>,
    budget: u64,
    nodes: u64,
    aborted: bool,
    incumbent: Option<(Vec<i64>, BigInt)>,
}

impl BranchSearch {
    fn dfs(&mut self) {
        if self.nodes >= self.budget {
            self.aborted = true;
            return;
        }
        self.nodes += 1;
        let outcome = solve_lp(&LpInstance {
            coeffs: &self.coeffs,
            relations: &self.relations,
            rhs: &self.rhs,
            cost: &self.cost,
            lo: &self.lo,
            hi: &self.hi,
        });
        let LpOutcome::Optimal { values, objective } = outcome else {
            return;
        };
        if let Some((_, inc)) = &self.incumbent {
            if objective.ceil().to_integer() >= *inc {
                return;
            }
        }
        let fractional = self.order.iter().copied().find(|&slot| !values[slot].is_integer());
        match fractional {
            None => {
                let ints: Vec<i64> = values
                    .iter()
                    .map(|v| v.to_integer().to_i64().expect("solution value fits in 64 bits"))
                    .collect();
                debug_assert!(objective.is_integer());
                self.incumbent = Some((ints, objective.to_integer()));
            }
            Some(slot) => {
                let down = values[slot]
                    .floor()
                    .to_integer()
                    .to_i64()
                    .expect("branch point fits in 64 bits");
                let saved_hi = self.hi[slot];
                self.hi[slot] = Some(match saved_hi {
                    Some(h) => h.min(down),
                    None => down,
                });
                if self.lo[slot] <= self.hi[slot].unwrap() {
                    self.dfs();
                }
                self.hi[slot] = saved_hi;
                if self.aborted {
                    return;
                }
                let saved_lo = self.lo[slot];
                self.lo[slot] = saved_lo.max(down + 1);
                if self.hi[slot].is_none_or(|h| self.lo[slot] <= h) {
                    self.dfs();
                }
                self.lo[slot] = saved_lo;
            }
        }
    }
}

fn branch_order(ip: &IntegerLinearProgram, lexicographic: bool) -> Vec<usize> {
    let mut order = Vec::with_capacity(ip.var_count());
    if let Some(t) = ip.threshold_slot() {
        order.push(t);
    }
    let mut atoms: Vec<(usize, ParticipantSet)> = ip.atom_slots().collect();
    if !lexicographic {
        atoms.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.1.cmp(&b.1)));
    }
    order.extend(atoms.iter().map(|&(slot, _)| slot));
    if let Some(m) = ip.worst_slot() {
        order.push(m);
    }
    order
}

/// Upper bounds implied by a known bound `z` on the optimal objective:
/// every atom count is at most `z` (each atom either carries objective
/// weight at least one, or is dominated by the bound variable `M = z`),
/// and the threshold/bound slots are capped by the largest value any
/// optimal point can need given those atom counts.
fn slot_bounds(ip: &IntegerLinearProgram, z: i64) -> Vec<Option<i64>> {
    let n_atoms = ip.atom_slots().count() as i128;
    let max_rhs = ip.constraints().iter().map(|c| i128::from(c.rhs().abs())).max().unwrap_or(0);
    let cap = (n_atoms * i128::from(z.max(0)) + max_rhs + 1).min(i128::from(i64::MAX / 4)) as i64;
    ip.roles()
        .iter()
        .map(|role| match role {
            VarRole::Atom(_) => Some(z.max(0)),
            VarRole::Threshold | VarRole::WorstBound => Some(cap),
        })
        .collect()
}

fn rational_cost(ip: &IntegerLinearProgram) -> Vec<BigRational> {
    ip.objective().iter().map(|&c| big(c)).collect()
}

fn base_rows(ip: &IntegerLinearProgram) -> (Vec<Vec<i64>>, Vec<Relation>, Vec<i64>) {
    let coeffs = ip.constraints().iter().map(|c| c.coeffs().to_vec()).collect();
    let relations = ip.constraints().iter().map(|c| c.relation()).collect();
    let rhs = ip.constraints().iter().map(|c| c.rhs()).collect();
    (coeffs, relations, rhs)
}

/// Canonicalization: among all integer points with the proven optimal
/// objective, find the one minimizing `t`, then the `x_p` vector
/// lexicographically (ascending subset order). Encoded as one weighted
/// search over the optimal face: with every variable boxed, nested-radix
/// weights make the weighted order agree with the lexicographic one.
fn canonical_pass(
    ip: &IntegerLinearProgram,
    z_star: i64,
    start: Vec<i64>,
    budget: u64,
) -> (Vec<i64>, u64, bool) {
    let (mut coeffs, mut relations, mut rhs) = base_rows(ip);
    coeffs.push(ip.objective().to_vec());
    relations.push(Relation::Eq);
    rhs.push(z_star);

    let hi = slot_bounds(ip, z_star);
    let mut lex: Vec<usize> = Vec::new();
    if let Some(t) = ip.threshold_slot() {
        lex.push(t);
    }
    lex.extend(ip.atom_slots().map(|(slot, _)| slot));

    let mut weight = vec![BigInt::from(0); ip.var_count()];
    let mut acc = BigInt::from(1);
    for &slot in lex.iter().rev() {
        weight[slot] = acc.clone();
        let span = BigInt::from(hi[slot].expect("boxed variable") + 1);
        acc *= span;
    }
    let cost: Vec<BigRational> =
        weight.iter().map(|w| BigRational::from_integer(w.clone())).collect();

    let weighted_of = |vals: &[i64]| -> BigInt {
        vals.iter().zip(&weight).map(|(&v, w)| w * BigInt::from(v)).sum()
    };
    let start_score = weighted_of(&start);

    let mut search = BranchSearch {
        coeffs,
        relations,
        rhs,
        cost,
        lo: vec![0; ip.var_count()],
        hi,
        order: branch_order(ip, true),
        budget,
        nodes: 0,
        aborted: false,
        incumbent: Some((start, start_score)),
    };
    search.dfs();
    let (values, _) = search.incumbent.expect("seeded incumbent persists");
    (values, search.nodes, search.aborted)
}

/// Solves a program to proven optimality.
///
/// The search is a depth-first branch-and-bound over exact rational
/// relaxations: branch on the first fractional variable (threshold first,
/// then atoms by descending coalition size), lower branch first, pruning
/// any node whose relaxation cannot beat the incumbent. When no incumbent
/// is supplied, feasibility is first established on the unbounded
/// relaxation and the variable box is grown geometrically until the
/// optimum is trapped, so the answer is still a proof. A final pass picks
/// the canonical optimum (see [`SolveConfig::canonical`]).
///
/// # Panics
/// Panics if `config.incumbent` is present but malformed (wrong width or
/// infeasible): incumbents seed pruning, so a bad one would corrupt the
/// result.
pub fn solve(ip: &IntegerLinearProgram, config: &SolveConfig) -> IpSolution {
    let mut nodes: u64 = 0;
    let roles = ip.roles().to_vec();
    let finish = |status: SolveStatus, values: Vec<i64>, objective: i64, nodes: u64| IpSolution {
        status,
        values,
        objective,
        node_count: nodes,
        roles: roles.clone(),
    };

    if let Some(inc) = &config.incumbent {
        assert_eq!(inc.len(), ip.var_count(), "incumbent width mismatch");
        assert!(ip.is_feasible_point(inc), "incumbent must be feasible");
    }

    let (coeffs, relations, rhs) = base_rows(ip);
    let cost = rational_cost(ip);
    let order = branch_order(ip, false);

    let mut incumbent: Option<(Vec<i64>, BigInt)> =
        config.incumbent.as_ref().map(|v| (v.clone(), BigInt::from(ip.evaluate_objective(v))));

    if incumbent.is_none() {
        // Establish feasibility and a first bound on the unboxed relaxation.
        if nodes >= config.node_budget {
            return finish(SolveStatus::BudgetExceeded, Vec::new(), 0, nodes);
        }
        nodes += 1;
        let root = solve_lp(&LpInstance {
            coeffs: &coeffs,
            relations: &relations,
            rhs: &rhs,
            cost: &cost,
            lo: &vec![0; ip.var_count()],
            hi: &vec![None; ip.var_count()],
        });
        let LpOutcome::Optimal { objective, .. } = root else {
            return finish(SolveStatus::Infeasible, Vec::new(), 0, nodes);
        };
        // Grow the box until the optimum is provably inside: any integer
        // point with objective at most `b` fits in the box built from `b`,
        // so an exhausted box proves the optimum (if any) exceeds `b`.
        let mut b = objective.ceil().to_integer().to_i64().unwrap_or(i64::MAX / 8).max(1);
        loop {
            let mut search = BranchSearch {
                coeffs: coeffs.clone(),
                relations: relations.clone(),
                rhs: rhs.clone(),
                cost: cost.clone(),
                lo: vec![0; ip.var_count()],
                hi: slot_bounds(ip, b),
                order: order.clone(),
                budget: config.node_budget,
                nodes,
                aborted: false,
                incumbent: incumbent.take(),
            };
            search.dfs();
            nodes = search.nodes;
            incumbent = search.incumbent;
            if search.aborted {
                return match incumbent {
                    Some((vals, obj)) => {
                        let obj = obj.to_i64().expect("objective fits in 64 bits");
                        finish(SolveStatus::BudgetExceeded, vals, obj, nodes)
                    }
                    None => finish(SolveStatus::BudgetExceeded, Vec::new(), 0, nodes),
                };
            }
            match &incumbent {
                Some((_, obj)) if *obj <= BigInt::from(b) => break,
                _ => {
                    if b > i64::MAX / 8 {
                        return finish(SolveStatus::BudgetExceeded, Vec::new(), 0, nodes);
                    }
                    b = b.saturating_mul(2);
                }
            }
        }
    } else {
        let z0 = incumbent
            .as_ref()
            .map(|(_, obj)| obj.to_i64().expect("objective fits in 64 bits"))
            .unwrap();
        let mut search = BranchSearch {
            coeffs: coeffs.clone(),
            relations: relations.clone(),
            rhs: rhs.clone(),
            cost: cost.clone(),
            lo: vec![0; ip.var_count()],
            hi: slot_bounds(ip, z0),
            order,
            budget: config.node_budget,
            nodes,
            aborted: false,
            incumbent: incumbent.take(),
        };
        search.dfs();
        nodes = search.nodes;
        incumbent = search.incumbent;
        if search.aborted {
            let (vals, obj) = incumbent.expect("seeded incumbent persists");
            let obj = obj.to_i64().expect("objective fits in 64 bits");
            return finish(SolveStatus::BudgetExceeded, vals, obj, nodes);
        }
    }

    let (mut values, obj) = incumbent.expect("feasible program yields an incumbent");
    let z_star = obj.to_i64().expect("objective fits in 64 bits");
    if config.canonical {
        let remaining = config.node_budget.saturating_sub(nodes);
        let (canon, extra, aborted) = canonical_pass(ip, z_star, values.clone(), remaining);
        nodes += extra;
        if aborted {
            return finish(SolveStatus::BudgetExceeded, canon, z_star, nodes);
        }
        values = canon;
    }
    finish(SolveStatus::Optimal, values, z_star, nodes)
}

// ---------------------------------------------------------------------------
// Solution conversion
// ---------------------------------------------------------------------------

fn assemble_map(n: usize, l: usize, sol: &IpSolution) -> Result<AssignmentMap, IlpError> {
    if !sol.is_optimal() {
        return Err(IlpError::NotOptimal { status: sol.status() });
    }
    let t = sol.threshold().ok_or_else(|| IlpError::BadSolution {
        reason: "program has no threshold variable".into(),
    })?;
    if t <= 0 {
        return Err(IlpError::BadSolution {
            reason: format!("threshold {t} admits no primitive scheme"),
        });
    }
    let mut assign: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cursor = 0usize;
    for (slot, role) in sol.roles().iter().enumerate() {
        let VarRole::Atom(p) = role else { continue };
        if p.n() != n {
            return Err(IlpError::BadSolution {
                reason: format!(
                    "atom {} is over a {}-participant universe, expected {}",
                    p,
                    p.n(),
                    n
                ),
            });
        }
        let count = sol.values()[slot];
        if count < 0 {
            return Err(IlpError::BadSolution { reason: "negative primitive count".into() });
        }
        let block: Vec<usize> = (cursor..cursor + count as usize).collect();
        cursor += count as usize;
        for i in p.iter() {
            assign[i].extend(block.iter().copied());
        }
    }
    AssignmentMap::new(n, t as usize, l, cursor, assign)
        .map_err(|e| IlpError::BadSolution { reason: e.to_string() })
}

/// Converts an optimal vector of a perfect program back into its
/// assignment map: the first `x_p` primitive indices form the block of the
/// smallest atom, and each participant collects the blocks of the atoms
/// containing it.
///
/// # Errors
/// [`IlpError::NotOptimal`] when the solution is not optimal;
/// [`IlpError::BadSolution`] for vectors describing no usable scheme
/// (zero threshold, no shares).
pub fn solution_to_map(s: &AccessStructure, sol: &IpSolution) -> Result<AssignmentMap, IlpError> {
    assemble_map(s.n(), 1, sol)
}

/// Ramp counterpart of [`solution_to_map`].
pub fn solution_to_ramp_map(
    r: &RampAccessStructure,
    sol: &IpSolution,
) -> Result<AssignmentMap, IlpError> {
    assemble_map(r.n(), r.levels(), sol)
}

/// Expresses an assignment map as a point of a program's variable space:
/// `x_p` counts the primitives whose holder set is exactly `p`, the
/// threshold slot carries the map's threshold, and the bound slot the
/// largest per-participant count. Returns `None` when the map does not
/// fit the program (different universe, or a primitive whose holder set
/// has no atom — e.g. a share handed to everyone in a program that
/// dropped the full-universe atom).
pub fn vector_from_map(ip: &IntegerLinearProgram, map: &AssignmentMap) -> Option<Vec<i64>> {
    let mut holder_count: HashMap<u32, i64> = HashMap::new();
    for j in 0..map.m() {
        let mut bits = 0u32;
        for i in 0..map.n() {
            if map.assign(i).binary_search(&j).is_ok() {
                bits |= 1 << i;
            }
        }
        *holder_count.entry(bits).or_insert(0) += 1;
    }
    let mut used: i64 = 0;
    let mut values = vec![0i64; ip.var_count()];
    for (slot, role) in ip.roles().iter().enumerate() {
        match role {
            VarRole::Threshold => values[slot] = map.t() as i64,
            VarRole::WorstBound => {
                values[slot] = (0..map.n()).map(|i| map.assign(i).len() as i64).max().unwrap_or(0)
            }
            VarRole::Atom(p) => {
                if p.n() != map.n() {
                    return None;
                }
                let c = holder_count.get(&p.bits()).copied().unwrap_or(0);
                values[slot] = c;
                used += c;
            }
        }
    }
    if used != map.m() as i64 {
        return None; // some holder set has no atom in this program
    }
    Some(values)
}

/// Classifies participants by solving the average-rate program: a
/// participant is vacuous exactly when the optimal map hands it nothing.
/// The verdict is cross-checked against the set-based classifier; for
/// complete structures the two always agree, while for incomplete ones a
/// genuine disagreement is possible (the optimizer works on one concrete
/// completion) and is reported as an error rather than silently resolved.
///
/// # Errors
/// Builder errors; [`IlpError::NotOptimal`] when the budget runs out;
/// [`IlpError::ClassificationMismatch`] on cross-check failure.
pub fn classify_by_ip(
    s: &AccessStructure,
    config: &SolveConfig,
) -> Result<Vec<ShareClass>, IlpError> {
    let ip = build_ip_avg(s)?;
    let mut cfg = config.clone();
    if cfg.incumbent.is_none() {
        cfg.incumbent = vector_from_map(&ip, &cumulative_map(s));
    }
    let sol = solve(&ip, &cfg);
    if !sol.is_optimal() {
        return Err(IlpError::NotOptimal { status: sol.status() });
    }
    let map = solution_to_map(s, &sol)?;
    let from_sets = s.classify_participants()?;
    for (i, class) in from_sets.iter().enumerate() {
        let ip_vacuous = map.assign(i).is_empty();
        let sets_vacuous = *class == ShareClass::Vacuous;
        if ip_vacuous != sets_vacuous {
            return Err(IlpError::ClassificationMismatch { index: i });
        }
    }
    Ok(from_sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{
        modified_cumulative_map, ramp_cumulative_map, rates, verify_perfect, verify_ramp, Rate,
    };
    use crate::testkit::{gamma1, gamma2, gamma3, gamma3_sharp, gamma4_ramp, gamma5_ramp, ps};

    fn quick() -> SolveConfig {
        SolveConfig::default()
    }

    #[test]
    fn average_program_shape_for_gamma1() {
        let ip = build_ip_avg(&gamma1()).unwrap();
        assert_eq!(ip.atom_slots().count(), 14); // all nonempty subsets except the full one
        assert_eq!(ip.var_count(), 15);
        assert_eq!(ip.constraints().len(), 8); // 4 qualified + 4 forbidden
                                               // Objective weights each atom by its size.
        let obj = ip.objective();
        for (slot, p) in ip.atom_slots() {
            assert_eq!(obj[slot], p.len() as i64);
        }
        assert_eq!(obj[ip.threshold_slot().unwrap()], 0);
        // Supply row for {0,3}: -t plus every atom meeting {0,3}.
        let row = &ip.constraints()[1];
        assert_eq!(row.label(), "qualified {0,3}");
        assert_eq!(row.relation(), Relation::Ge);
        assert_eq!(row.rhs(), 0);
        assert_eq!(row.coeffs()[ip.threshold_slot().unwrap()], -1);
        for (slot, p) in ip.atom_slots() {
            let expected = i64::from(!p.is_disjoint(ps(4, &[0, 3])));
            assert_eq!(row.coeffs()[slot], expected, "atom {p}");
        }
    }

    #[test]
    fn single_participant_program_keeps_its_only_atom() {
        let s = AccessStructure::from_threshold(1, 1).unwrap();
        let ip = build_ip_avg(&s).unwrap();
        assert_eq!(ip.atom_slots().count(), 1);
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 1);
        assert_eq!(sol.threshold(), Some(1));
    }

    #[test]
    fn gamma1_average_optimum() {
        let s = gamma1();
        let ip = build_ip_avg(&s).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 5);
        assert_eq!(sol.threshold(), Some(3));
        let map = solution_to_map(&s, &sol).unwrap();
        assert!(verify_perfect(&map, &s).passed());
        assert_eq!(map.m(), 5);
        let r = rates(&map);
        assert_eq!(r.average(), Rate::new(5, 4));
        assert_eq!(r.worst(), Rate::new(2, 1));
    }

    #[test]
    fn gamma1_worst_optimum() {
        let s = gamma1();
        let ip = build_ip_worst(&s).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 2);
        let map = solution_to_map(&s, &sol).unwrap();
        assert!(verify_perfect(&map, &s).passed());
        let r = rates(&map);
        assert_eq!(r.worst(), Rate::new(2, 1));
    }

    #[test]
    fn gamma2_average_optimum() {
        let s = gamma2();
        let ip = build_ip_avg(&s).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 6);
        assert_eq!(sol.threshold(), Some(4));
        let map = solution_to_map(&s, &sol).unwrap();
        assert!(verify_perfect(&map, &s).passed());
        assert_eq!(map.m(), 6);
        let r = rates(&map);
        assert_eq!(r.average(), Rate::new(6, 5));
        assert_eq!(r.worst(), Rate::new(2, 1));
    }

    // The six-participant structure admits a map with total share count
    // 11: one primitive each to participants 0, 2, 3, 5, two to 4, three
    // to 1, and one handed jointly to {2,5}, over a threshold of 6. Every
    // minimal qualified set then meets exactly 6 primitives and every
    // maximal forbidden set at most 5 (checked by hand across all 24
    // covering constraints), so 11 is feasible and the search certifies
    // it optimal.
    #[test]
    fn gamma3_average_optimum() {
        let s = gamma3();
        let ip = build_ip_avg(&s).unwrap();
        let mut cfg = quick();
        cfg.incumbent = vector_from_map(&ip, &modified_cumulative_map(&s).unwrap());
        let sol = solve(&ip, &cfg);
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 11);
        assert_eq!(sol.threshold(), Some(6));
        let map = solution_to_map(&s, &sol).unwrap();
        assert!(verify_perfect(&map, &s).passed());
        assert_eq!(rates(&map).average(), Rate::new(11, 6));
    }

    // The average-optimal map above already has worst load 3, and the
    // bound search proves no map does better.
    #[test]
    fn gamma3_worst_optimum() {
        let s = gamma3();
        let ip = build_ip_worst(&s).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 3);
        let map = solution_to_map(&s, &sol).unwrap();
        assert!(verify_perfect(&map, &s).passed());
        assert_eq!(rates(&map).worst(), Rate::new(3, 1));
    }

    #[test]
    fn incomplete_structure_average_optimum() {
        let s = gamma3_sharp();
        let ip = build_ip_avg(&s).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 7);
        assert_eq!(sol.threshold(), Some(4));
        let map = solution_to_map(&s, &sol).unwrap();
        assert!(verify_perfect(&map, &s).passed());
        let r = rates(&map);
        assert_eq!(r.average(), Rate::new(7, 6));
        assert_eq!(r.worst(), Rate::new(2, 1));
    }

    #[test]
    fn thresholds_are_ideal_for_worst_rate() {
        for (k, n) in [(2, 3), (3, 5), (1, 4)] {
            let s = AccessStructure::from_threshold(k, n).unwrap();
            let ip = build_ip_worst(&s).unwrap();
            let sol = solve(&ip, &quick());
            assert!(sol.is_optimal(), "({k},{n})");
            assert_eq!(sol.objective(), 1, "({k},{n})");
        }
    }

    #[test]
    fn ramp_exact_gamma4_optimum() {
        let r = gamma4_ramp();
        let ip = build_ip_ramp(&r, RampMode::Exact, IpObjective::Average).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 8);
        assert_eq!(sol.threshold(), Some(7));
        let map = solution_to_ramp_map(&r, &sol).unwrap();
        assert_eq!(map.m(), 7);
        assert!(verify_ramp(&map, &r, RampMode::Exact).unwrap().passed());
        let rep = rates(&map);
        assert_eq!(rep.average(), Rate::new(2, 3));
        assert_eq!(rep.worst(), Rate::new(2, 3));
    }

    #[test]
    fn ramp_exact_gamma5_is_infeasible() {
        let r = gamma5_ramp();
        let ip = build_ip_ramp(&r, RampMode::Exact, IpObjective::Average).unwrap();
        let sol = solve(&ip, &quick());
        assert_eq!(sol.status(), SolveStatus::Infeasible);
    }

    #[test]
    fn ramp_relaxed_gamma5_optimum() {
        let r = gamma5_ramp();
        let ip = build_ip_ramp(&r, RampMode::Relaxed, IpObjective::Average).unwrap();
        let mut cfg = quick();
        cfg.incumbent = vector_from_map(&ip, &ramp_cumulative_map(&r).unwrap());
        let sol = solve(&ip, &cfg);
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 10);
        let map = solution_to_ramp_map(&r, &sol).unwrap();
        assert!(verify_ramp(&map, &r, RampMode::Relaxed).unwrap().passed());
        assert_eq!(rates(&map).average(), Rate::new(1, 2));
    }

    #[test]
    fn ramp_worst_gamma4_optimum() {
        let r = gamma4_ramp();
        let ip = build_ip_ramp(&r, RampMode::Exact, IpObjective::Worst).unwrap();
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 2);
        let map = solution_to_ramp_map(&r, &sol).unwrap();
        assert!(verify_ramp(&map, &r, RampMode::Exact).unwrap().passed());
        assert_eq!(rates(&map).worst(), Rate::new(2, 3));
    }

    #[test]
    fn pinning_share_count_to_threshold_recovers_the_cumulative_map() {
        let s = gamma1();
        let mut ip = build_ip_avg(&s).unwrap();
        ip.require_threshold_equals_share_count().unwrap();
        let mut cfg = quick();
        cfg.incumbent = vector_from_map(&ip, &cumulative_map(&s));
        let sol = solve(&ip, &cfg);
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 9);
        let map = solution_to_map(&s, &sol).unwrap();
        assert_eq!(map.m(), s.forbidden_max().len());
        assert_eq!(map.t(), map.m());
        // Same holder sets as the cumulative map, up to share renumbering.
        let holders = |m: &AssignmentMap| {
            let mut hs: Vec<u32> = (0..m.m())
                .map(|j| {
                    (0..m.n())
                        .filter(|&i| m.assign(i).binary_search(&j).is_ok())
                        .fold(0u32, |acc, i| acc | 1 << i)
                })
                .collect();
            hs.sort_unstable();
            hs
        };
        assert_eq!(holders(&map), holders(&cumulative_map(&s)));
    }

    #[test]
    fn cumulative_vectors_are_feasible_points() {
        for s in [gamma1(), gamma2(), gamma3_sharp()] {
            let ip = build_ip_avg(&s).unwrap();
            let v = vector_from_map(&ip, &cumulative_map(&s)).unwrap();
            assert!(ip.is_feasible_point(&v));
            let ip = build_ip_worst(&s).unwrap();
            let v = vector_from_map(&ip, &cumulative_map(&s)).unwrap();
            assert!(ip.is_feasible_point(&v));
        }
    }

    #[test]
    fn everyone_share_is_inexpressible_in_perfect_programs() {
        // The cumulative map of a (1,n)-threshold hands one primitive to
        // everyone; perfect programs drop that atom.
        let s = AccessStructure::from_threshold(1, 3).unwrap();
        let ip = build_ip_avg(&s).unwrap();
        assert!(vector_from_map(&ip, &cumulative_map(&s)).is_none());
        let sol = solve(&ip, &quick());
        assert!(sol.is_optimal());
        assert_eq!(sol.objective(), 3); // one primitive per participant
    }

    #[test]
    fn infeasible_toy_program() {
        let roles = vec![VarRole::Threshold];
        let rows = vec![
            LinearConstraint::new("at least one", vec![1], Relation::Ge, 1),
            LinearConstraint::new("at most zero", vec![-1], Relation::Ge, 0),
        ];
        let ip = IntegerLinearProgram::new(roles, vec![1], rows).unwrap();
        let sol = solve(&ip, &quick());
        assert_eq!(sol.status(), SolveStatus::Infeasible);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let ip = build_ip_avg(&gamma1()).unwrap();
        let cfg = SolveConfig { node_budget: 0, ..SolveConfig::default() };
        let sol = solve(&ip, &cfg);
        assert_eq!(sol.status(), SolveStatus::BudgetExceeded);
    }

    #[test]
    fn solver_is_deterministic() {
        let ip = build_ip_avg(&gamma2()).unwrap();
        let a = solve(&ip, &quick());
        let b = solve(&ip, &quick());
        assert_eq!(a, b);
    }

    #[test]
    fn classification_by_optimization_matches_set_classifier() {
        assert_eq!(classify_by_ip(&gamma1(), &quick()).unwrap(), vec![ShareClass::Significant; 4]);
        // Dictatorship: only participant 0 matters.
        let s = AccessStructure::new(
            crate::testkit::fam(2, &[&[0]]),
            crate::testkit::fam(2, &[&[1]]),
            true,
        )
        .unwrap();
        assert_eq!(
            classify_by_ip(&s, &quick()).unwrap(),
            vec![ShareClass::Significant, ShareClass::Vacuous]
        );
    }

    #[test]
    fn malformed_programs_are_rejected() {
        assert!(IntegerLinearProgram::new(vec![], vec![], vec![]).is_err());
        assert!(IntegerLinearProgram::new(vec![VarRole::Threshold], vec![1, 2], vec![]).is_err());
        assert!(IntegerLinearProgram::new(vec![VarRole::Threshold], vec![-1], vec![]).is_err());
        let out_of_order = vec![VarRole::Atom(ps(2, &[1])), VarRole::Atom(ps(2, &[0]))];
        assert!(IntegerLinearProgram::new(out_of_order, vec![1, 1], vec![]).is_err());
        let bad_row = vec![LinearConstraint::new("short", vec![1], Relation::Ge, 0)];
        assert!(IntegerLinearProgram::new(
            vec![VarRole::Threshold, VarRole::Atom(ps(2, &[0]))],
            vec![0, 1],
            bad_row
        )
        .is_err());
    }

    #[test]
    fn zero_threshold_solutions_do_not_become_maps() {
        let s = AccessStructure::from_threshold(2, 2).unwrap();
        let sol = IpSolution {
            status: SolveStatus::Optimal,
            values: vec![0, 0, 0],
            objective: 0,
            node_count: 0,
            roles: vec![VarRole::Threshold, VarRole::Atom(ps(2, &[0])), VarRole::Atom(ps(2, &[1]))],
        };
        assert!(matches!(solution_to_map(&s, &sol), Err(IlpError::BadSolution { .. })));
    }

    #[test]
    fn text_dump_is_stable() {
        let s = AccessStructure::from_threshold(2, 2).unwrap();
        let ip = build_ip_avg(&s).unwrap();
        let text = ip.lp_text();
        assert_eq!(
            text,
            "minimize: x1 + x2;\n\
             subject to:\n\
             \u{20} qualified {0,1}: - t + x1 + x2 >= 0;\n\
             \u{20} forbidden {0}: t - x1 >= 1;\n\
             \u{20} forbidden {1}: t - x2 >= 1;\n\
             bounds: all variables are nonnegative integers;\n\
             legend:\n\
             \u{20} t = recovery threshold\n\
             \u{20} x1 = primitives held exactly by {0}\n\
             \u{20} x2 = primitives held exactly by {1}\n"
        );
    }
}
