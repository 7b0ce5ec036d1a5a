//! Equivalence and order in the free algebras, decided by fuel-bounded
//! search.
//!
//! The congruence is generated by five oriented rules:
//!
//! | rule              | forward direction            |
//! |-------------------|------------------------------|
//! | `LeftDistrib`     | `a(bc) → (ab)(ac)`           |
//! | `ComposeAssoc`    | `a∘(b∘c) → (a∘b)∘c`          |
//! | `ComposeApply`    | `(a∘b)c → a(bc)`             |
//! | `ApplyCompose`    | `a(b∘c) → ab ∘ ac`           |
//! | `ComposeShuffle`  | `a∘b → ab ∘ a`               |
//!
//! For `∘`-free terms only `LeftDistrib` is ever needed: equivalent terms
//! always share a common *expansion* (the rewriting is confluent), and
//! `u <_L v` holds exactly when some expansion of `v` carries an expansion of
//! `u` on its left spine. That spine witness can sit far beyond any
//! practical frontier, so order between such terms is decided by comparing
//! generator-division forms instead, with the expansion search supplying
//! step-replayable certificates for equalities. Terms with `∘` search the
//! full rule set in both directions. In both cases, disagreeing evaluations
//! in a finite table certify inequivalence (the tables satisfy every rule,
//! so they are quotients).
//!
//! Positive answers come with replayable certificates ([`RewriteStep`]
//! sequences); searches that run out of fuel report it as an ordinary value.

mod prenormal;
mod search;

use thiserror::Error;

use crate::table::{TableError, TableStore};
use crate::term::{Branch, Term, TermError, TermNode, TermPath};

pub use prenormal::DivisionTree;
pub use search::Engine;

/// Bounds shared by every search in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteConfig {
    /// Total number of search nodes a single call may generate.
    pub fuel: u64,
    /// Largest table level used for residue separation.
    pub max_level: u8,
    /// Terms above this leaf count are never enqueued.
    pub size_cap: u64,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        RewriteConfig { fuel: 100_000, max_level: 20, size_cap: 1_000_000 }
    }
}

impl RewriteConfig {
    pub fn with_fuel(fuel: u64) -> Self {
        RewriteConfig { fuel, ..Self::default() }
    }
}

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("terms must be built from one shared generator")]
    MultipleGenerators,
    #[error("invalid rewrite position: {detail}")]
    InvalidPosition { detail: String },
    #[error("divisor exceeds the dividend (compare returned greater)")]
    NotDominated,
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Term(#[from] TermError),
}

fn invalid(detail: impl Into<String>) -> RewriteError {
    RewriteError::InvalidPosition { detail: detail.into() }
}

/// The five rewrite rules; see the module docs for orientations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    LeftDistrib,
    ComposeAssoc,
    ComposeApply,
    ApplyCompose,
    ComposeShuffle,
}

impl RuleKind {
    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::LeftDistrib => "left-distributive",
            RuleKind::ComposeAssoc => "compose-associativity",
            RuleKind::ComposeApply => "compose-apply",
            RuleKind::ApplyCompose => "apply-compose",
            RuleKind::ComposeShuffle => "compose-shuffle",
        }
    }
}

/// One rewrite at one position; `forward: false` applies the rule right to
/// left. Certificates are lists of these.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub path: TermPath,
    pub rule: RuleKind,
    pub forward: bool,
}

/// Which operation joins the final entry of a representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LastOp {
    Apply,
    Compose,
}

/// Try `rule` (in the given direction) at the root of `s`.
pub(crate) fn rewrite_at(s: &Term, rule: RuleKind, forward: bool) -> Option<Term> {
    match (rule, forward) {
        (RuleKind::LeftDistrib, true) => {
            let (a, rest) = s.as_apply()?;
            let (b, c) = rest.as_apply()?;
            Some(Term::apply(&Term::apply(a, b), &Term::apply(a, c)))
        }
        (RuleKind::LeftDistrib, false) => {
            let (l, r) = s.as_apply()?;
            let (a, b) = l.as_apply()?;
            let (a2, c) = r.as_apply()?;
            (a == a2).then(|| Term::apply(a, &Term::apply(b, c)))
        }
        (RuleKind::ComposeAssoc, true) => {
            let (a, rest) = s.as_compose()?;
            let (b, c) = rest.as_compose()?;
            Some(Term::compose(&Term::compose(a, b), c))
        }
        (RuleKind::ComposeAssoc, false) => {
            let (l, c) = s.as_compose()?;
            let (a, b) = l.as_compose()?;
            Some(Term::compose(a, &Term::compose(b, c)))
        }
        (RuleKind::ComposeApply, true) => {
            let (l, c) = s.as_apply()?;
            let (a, b) = l.as_compose()?;
            Some(Term::apply(a, &Term::apply(b, c)))
        }
        (RuleKind::ComposeApply, false) => {
            let (a, rest) = s.as_apply()?;
            let (b, c) = rest.as_apply()?;
            Some(Term::apply(&Term::compose(a, b), c))
        }
        (RuleKind::ApplyCompose, true) => {
            let (a, rest) = s.as_apply()?;
            let (b, c) = rest.as_compose()?;
            Some(Term::compose(&Term::apply(a, b), &Term::apply(a, c)))
        }
        (RuleKind::ApplyCompose, false) => {
            let (l, r) = s.as_compose()?;
            let (a, b) = l.as_apply()?;
            let (a2, c) = r.as_apply()?;
            (a == a2).then(|| Term::apply(a, &Term::compose(b, c)))
        }
        (RuleKind::ComposeShuffle, true) => {
            let (a, b) = s.as_compose()?;
            Some(Term::compose(&Term::apply(a, b), a))
        }
        (RuleKind::ComposeShuffle, false) => {
            let (l, a2) = s.as_compose()?;
            let (a, b) = l.as_apply()?;
            (a == a2).then(|| Term::compose(a, b))
        }
    }
}

/// Apply one step, failing if the pattern does not match at the path.
pub fn apply_step(w: &Term, step: &RewriteStep) -> Result<Term, RewriteError> {
    let sub = w
        .subterm(&step.path)
        .ok_or_else(|| invalid("path leads outside the term"))?;
    let replaced = rewrite_at(sub, step.rule, step.forward).ok_or_else(|| {
        invalid(format!(
            "{} ({}) does not match at the given position",
            step.rule.name(),
            if step.forward { "forward" } else { "backward" }
        ))
    })?;
    Ok(w.with_subterm(&step.path, replaced).expect("path was just resolved"))
}

/// One left-distributive expansion: the node at `position` must have the
/// shape `a(bc)` and becomes `(ab)(ac)`.
pub fn expand_once(w: &Term, position: &[Branch]) -> Result<Term, RewriteError> {
    apply_step(
        w,
        &RewriteStep { path: position.to_vec(), rule: RuleKind::LeftDistrib, forward: true },
    )
}

/// Replay a step list; `None` if some step fails to match.
pub fn replay(w: &Term, steps: &[RewriteStep]) -> Option<Term> {
    let mut t = w.clone();
    for step in steps {
        t = apply_step(&t, step).ok()?;
    }
    Some(t)
}

/// Rebuild `head · t_1 · … · t_{n-1} ∗ t_n` (left-associated, `∗` = last_op).
pub fn remultiply(head: &Term, tail: &[Term], last_op: LastOp) -> Term {
    match tail.split_last() {
        None => head.clone(),
        Some((last, front)) => {
            let mut acc = head.clone();
            for t in front {
                acc = Term::apply(&acc, t);
            }
            match last_op {
                LastOp::Apply => Term::apply(&acc, last),
                LastOp::Compose => Term::compose(&acc, last),
            }
        }
    }
}

/// Result of an equivalence decision.
#[derive(Debug, Clone)]
pub enum Equivalence {
    Equivalent(EquivalenceCertificate),
    /// The first table level whose residues disagree; tables are quotients,
    /// so this soundly certifies inequivalence.
    Inequivalent { witness_level: u8, left_residue: u32, right_residue: u32 },
    Exhausted { fuel_spent: u64 },
}

/// A common term reachable from both inputs by replaying the step lists.
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    pub common: Term,
    pub left_steps: Vec<RewriteStep>,
    pub right_steps: Vec<RewriteStep>,
}

/// Purely structural re-check of an equivalence certificate.
pub fn check_equivalence_certificate(
    u: &Term,
    v: &Term,
    cert: &EquivalenceCertificate,
) -> bool {
    replay(u, &cert.left_steps).as_ref() == Some(&cert.common)
        && replay(v, &cert.right_steps).as_ref() == Some(&cert.common)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderRelation {
    Less,
    Equal,
    Greater,
}

impl OrderRelation {
    pub fn reversed(self) -> OrderRelation {
        match self {
            OrderRelation::Less => OrderRelation::Greater,
            OrderRelation::Greater => OrderRelation::Less,
            OrderRelation::Equal => OrderRelation::Equal,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OrderRelation::Less => "less",
            OrderRelation::Equal => "equal",
            OrderRelation::Greater => "greater",
        }
    }
}

/// Evidence attached to an order verdict.
#[derive(Debug, Clone)]
pub enum OrderCertificate {
    /// For `equal`: a term reachable from both inputs.
    CommonTerm { common: Term, left_steps: Vec<RewriteStep>, right_steps: Vec<RewriteStep> },
    /// For `less`/`greater`: `witness` is reachable from the larger input via
    /// `larger_steps`, equals `head · tail…` rebuilt with `last_op`, and
    /// `head` meets the smaller input at a common term (`head_steps` from the
    /// head, `smaller_steps` from the input) — so something equivalent to the
    /// smaller input occurs leftmost in a representation of the larger. When
    /// the head is reached literally, `head_steps` is empty and
    /// `smaller_steps` leads all the way to it.
    Representation {
        witness: Term,
        head: Term,
        tail: Vec<Term>,
        last_op: LastOp,
        larger_steps: Vec<RewriteStep>,
        smaller_steps: Vec<RewriteStep>,
        head_steps: Vec<RewriteStep>,
    },
    /// For verdicts derived by comparing division forms: the two forms.
    DivisionForms { left: DivisionTree, right: DivisionTree },
    /// For strict verdicts from aligned decompositions: each input rewrites
    /// (by its step list) to the product of its sequence, both sequences
    /// carry the same literal head `divisor`, and the verdict is the
    /// lexicographic comparison of the tails. Uniqueness of the divisor's
    /// prenormal decomposition makes the first differing entry decisive.
    AlignedForms {
        divisor: Term,
        left: PrenormalSequence,
        left_steps: Vec<RewriteStep>,
        right: PrenormalSequence,
        right_steps: Vec<RewriteStep>,
    },
}

#[derive(Debug, Clone)]
pub struct OrderVerdict {
    pub relation: OrderRelation,
    pub certificate: OrderCertificate,
}

/// Fuel accounting for an undecided comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FuelSpent {
    pub left_nodes: u64,
    pub right_nodes: u64,
    pub levels_tried: u8,
}

#[derive(Debug, Clone)]
pub enum CompareOutcome {
    Decided(OrderVerdict),
    Exhausted { fuel: FuelSpent },
}

impl CompareOutcome {
    pub fn relation(&self) -> Option<OrderRelation> {
        match self {
            CompareOutcome::Decided(v) => Some(v.relation),
            CompareOutcome::Exhausted { .. } => None,
        }
    }
}

/// Structural re-check of an order verdict for inputs `u`, `v` (in that
/// order). `CommonTerm` and `Representation` certificates replay their step
/// lists; `DivisionForms` certificates are checked by confirming the roots
/// label the inputs and re-running the deterministic form comparison. (That
/// the trees themselves divide their labels is the engine's construction;
/// tests cross-check it by re-multiplying trees and testing equivalence.)
/// `AlignedForms` certificates replay both inputs onto their sequence
/// products and confirm the shared literal head; the entry-order claims
/// behind the verdict are the engine's own decisions, which tests
/// cross-check by re-running the comparison on decisive entry pairs.
pub fn check_order_certificate(u: &Term, v: &Term, verdict: &OrderVerdict) -> bool {
    match (&verdict.certificate, verdict.relation) {
        (OrderCertificate::CommonTerm { common, left_steps, right_steps }, OrderRelation::Equal) => {
            replay(u, left_steps).as_ref() == Some(common)
                && replay(v, right_steps).as_ref() == Some(common)
        }
        (
            OrderCertificate::Representation {
                witness,
                head,
                tail,
                last_op,
                larger_steps,
                smaller_steps,
                head_steps,
            },
            rel @ (OrderRelation::Less | OrderRelation::Greater),
        ) => {
            let (smaller, larger) = match rel {
                OrderRelation::Less => (u, v),
                _ => (v, u),
            };
            let meet = match (replay(smaller, smaller_steps), replay(head, head_steps)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            replay(larger, larger_steps).as_ref() == Some(witness)
                && &remultiply(head, tail, *last_op) == witness
                && meet
        }
        (OrderCertificate::DivisionForms { left, right }, rel) => {
            &left.label == u && &right.label == v && prenormal::compare_forms(left, right) == rel
        }
        (
            OrderCertificate::AlignedForms { divisor, left, left_steps, right, right_steps },
            OrderRelation::Less | OrderRelation::Greater,
        ) => {
            &left.head == divisor
                && &right.head == divisor
                && replay(u, left_steps).as_ref() == Some(&left.product())
                && replay(v, right_steps).as_ref() == Some(&right.product())
        }
        _ => false,
    }
}

/// A representation `v ≡ u_0 u_1 ⋯ u_{n-1} ∗ u_n` with `head = u_0` and
/// `tail = u_1 … u_n`, satisfying the domination side conditions
/// `u_{i+2} ≤_L u_0 u_1 ⋯ u_i` (and, when `∗` is `∘` with `n ≥ 2`, strict
/// domination `u_n <_L u_0 ⋯ u_{n-2}`).
#[derive(Debug, Clone)]
pub struct PrenormalSequence {
    pub head: Term,
    pub tail: Vec<Term>,
    pub last_op: LastOp,
}

impl PrenormalSequence {
    /// The entries `u_0, …, u_n`.
    pub fn entries(&self) -> Vec<Term> {
        let mut out = Vec::with_capacity(1 + self.tail.len());
        out.push(self.head.clone());
        out.extend(self.tail.iter().cloned());
        out
    }

    /// Rebuild the represented term.
    pub fn product(&self) -> Term {
        remultiply(&self.head, &self.tail, self.last_op)
    }
}

#[derive(Debug, Clone)]
pub enum PrenormalOutcome {
    Decomposed(PrenormalSequence),
    Exhausted { fuel_spent: u64 },
}

#[derive(Debug, Clone)]
pub enum DivisionOutcome {
    Tree(DivisionTree),
    Exhausted { fuel_spent: u64 },
}

/// Which rules a search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MoveSet {
    /// `LeftDistrib` forward only — the confluent expansion rewriting.
    ExpandOnly,
    /// `LeftDistrib` in both directions (for `∘`-free inputs whose
    /// representations need contraction).
    LdBoth,
    /// Every rule, both directions.
    SigmaAll,
}

impl MoveSet {
    fn rules(self) -> &'static [(RuleKind, bool)] {
        match self {
            MoveSet::ExpandOnly => &[(RuleKind::LeftDistrib, true)],
            MoveSet::LdBoth => &[(RuleKind::LeftDistrib, true), (RuleKind::LeftDistrib, false)],
            MoveSet::SigmaAll => &[
                (RuleKind::LeftDistrib, true),
                (RuleKind::LeftDistrib, false),
                (RuleKind::ComposeAssoc, true),
                (RuleKind::ComposeAssoc, false),
                (RuleKind::ComposeApply, true),
                (RuleKind::ComposeApply, false),
                (RuleKind::ApplyCompose, true),
                (RuleKind::ApplyCompose, false),
                (RuleKind::ComposeShuffle, true),
                (RuleKind::ComposeShuffle, false),
            ],
        }
    }
}

/// All one-step successors of `t` under the move set, deterministic order
/// (preorder position, then rule order).
pub(crate) fn successors(t: &Term, moves: MoveSet) -> Vec<(RewriteStep, Term)> {
    let mut out = Vec::new();
    let mut stack: Vec<(TermPath, &Term)> = vec![(Vec::new(), t)];
    while let Some((path, sub)) = stack.pop() {
        for &(rule, forward) in moves.rules() {
            if let Some(replaced) = rewrite_at(sub, rule, forward) {
                let step = RewriteStep { path: path.clone(), rule, forward };
                let rewritten =
                    t.with_subterm(&path, replaced).expect("enumerated path is valid");
                out.push((step, rewritten));
            }
        }
        if let TermNode::Apply(l, r) | TermNode::Compose(l, r) = sub.node() {
            let mut lp = path.clone();
            lp.push(Branch::Left);
            let mut rp = path;
            rp.push(Branch::Right);
            // push right first so the left child is processed first
            stack.push((rp, r));
            stack.push((lp, l));
        }
    }
    out
}

/// One way of reading a term as `head · t_1 ⋯ t_{n-1} ∗ t_n`.
#[derive(Debug, Clone)]
pub(crate) struct Representation {
    pub head: Term,
    pub tail: Vec<Term>,
    pub last_op: LastOp,
}

/// Every representation of `w` as `head · u_1 ⋯ ∗ u_n` with `n ≥ 1`:
/// splits of the left spine (for `·`-rooted terms) or of the left operand's
/// spine plus the composed tail (for `∘`-rooted terms). Leaves have none.
pub(crate) fn representations(w: &Term) -> Vec<Representation> {
    fn spine_splits(t: &Term) -> Vec<(Term, Vec<Term>)> {
        let mut out = Vec::new();
        let mut rights: Vec<Term> = Vec::new();
        let mut cur = t;
        loop {
            out.push((cur.clone(), rights.iter().rev().cloned().collect()));
            match cur.as_apply() {
                Some((l, r)) => {
                    rights.push(r.clone());
                    cur = l;
                }
                None => break,
            }
        }
        out
    }
    let (left, final_entry, last_op) = match w.node() {
        TermNode::Leaf(_) => return Vec::new(),
        TermNode::Apply(l, r) => (l, r, LastOp::Apply),
        TermNode::Compose(l, r) => (l, r, LastOp::Compose),
    };
    spine_splits(left)
        .into_iter()
        .map(|(head, mut tail)| {
            tail.push(final_entry.clone());
            Representation { head, tail, last_op }
        })
        .collect()
}

fn shared_single_generator(u: &Term, v: &Term) -> Result<(), RewriteError> {
    let mut gens = u.generators();
    gens.extend(v.generators());
    if gens.len() == 1 {
        Ok(())
    } else {
        Err(RewriteError::MultipleGenerators)
    }
}

/// Decide `u ≡ v`: breadth-first search for a common term (dovetailed from
/// both sides) interleaved with residue separation in tables of increasing
/// level. Both inputs must share one generator.
pub fn decide_equiv(
    store: &TableStore,
    u: &Term,
    v: &Term,
    cfg: &RewriteConfig,
) -> Result<Equivalence, RewriteError> {
    shared_single_generator(u, v)?;
    Ok(Engine::new(store, *cfg).decide_equiv(u, v))
}

/// Decide the linear order: dovetails the equivalence search with searches
/// for a representation of either input carrying the other leftmost.
pub fn compare(
    store: &TableStore,
    u: &Term,
    v: &Term,
    cfg: &RewriteConfig,
) -> Result<CompareOutcome, RewriteError> {
    shared_single_generator(u, v)?;
    Ok(Engine::new(store, *cfg).compare(u, v))
}

/// The `u`-prenormal sequence of `v` (requires `u ≤_L v`).
pub fn prenormal_decompose(
    store: &TableStore,
    u: &Term,
    v: &Term,
    cfg: &RewriteConfig,
) -> Result<PrenormalOutcome, RewriteError> {
    shared_single_generator(u, v)?;
    Engine::new(store, *cfg).prenormal(u, v)
}

/// The division tree of `v` by `u`: recursive prenormal decomposition until
/// every label is `≤_L u`.
pub fn division_tree(
    store: &TableStore,
    u: &Term,
    v: &Term,
    cfg: &RewriteConfig,
) -> Result<DivisionOutcome, RewriteError> {
    shared_single_generator(u, v)?;
    Engine::new(store, *cfg).division_tree(u, v)
}

/// Compare by computing both generator-division forms and ordering them
/// lexicographically; agrees with [`compare`] whenever both decide.
pub fn lex_compare_xdivision(
    store: &TableStore,
    u: &Term,
    v: &Term,
    cfg: &RewriteConfig,
) -> Result<CompareOutcome, RewriteError> {
    shared_single_generator(u, v)?;
    Engine::new(store, *cfg).lex_compare(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn expand_once_examples() {
        assert_eq!(expand_once(&t("x(xx)"), &[]).unwrap(), t("(xx)(xx)"));
        assert_eq!(expand_once(&t("(xx)(xx)"), &[]).unwrap(), t("((xx)x)((xx)x)"));
        assert!(expand_once(&t("x"), &[]).is_err());
        assert!(expand_once(&t("(xx)x"), &[]).is_err());
        let deep = expand_once(&t("x(x(xx))"), &[Branch::Right]).unwrap();
        assert_eq!(deep, t("x((xx)(xx))"));
        assert!(expand_once(&t("x"), &[Branch::Left]).is_err());
    }

    #[test]
    fn every_rule_roundtrips_through_its_inverse() {
        let samples = [
            (RuleKind::LeftDistrib, t("x(xx)")),
            (RuleKind::ComposeAssoc, t("x∘(x∘x)")),
            (RuleKind::ComposeApply, t("(x∘x)x")),
            (RuleKind::ApplyCompose, t("x(x∘x)")),
            (RuleKind::ComposeShuffle, t("x∘x")),
        ];
        for (rule, term) in samples {
            let fwd = RewriteStep { path: vec![], rule, forward: true };
            let bwd = RewriteStep { path: vec![], rule, forward: false };
            let there = apply_step(&term, &fwd).unwrap();
            let back = apply_step(&there, &bwd).unwrap();
            assert_eq!(back, term, "{} roundtrip", rule.name());
        }
    }

    #[test]
    fn rule_orientations_match_the_laws() {
        assert_eq!(apply_step(&t("(x∘x)x"), &RewriteStep { path: vec![], rule: RuleKind::ComposeApply, forward: true }).unwrap(), t("x(xx)"));
        assert_eq!(apply_step(&t("x(x∘x)"), &RewriteStep { path: vec![], rule: RuleKind::ApplyCompose, forward: true }).unwrap(), t("xx∘xx"));
        assert_eq!(apply_step(&t("x∘x"), &RewriteStep { path: vec![], rule: RuleKind::ComposeShuffle, forward: true }).unwrap(), t("xx∘x"));
    }

    #[test]
    fn guarded_contractions_require_matching_operands() {
        // (yx)(xx) is not an instance of (ab)(ac): the left parts y and x differ
        let bad = RewriteStep { path: vec![], rule: RuleKind::LeftDistrib, forward: false };
        assert!(apply_step(&t("(yx)(xx)"), &bad).is_err());
        assert!(apply_step(&t("(xy)(xx)"), &bad).is_ok());
        assert!(apply_step(&t("(xx)(xx)"), &bad).is_ok());
        let shuffle_back =
            RewriteStep { path: vec![], rule: RuleKind::ComposeShuffle, forward: false };
        assert!(apply_step(&t("xy∘x"), &shuffle_back).is_ok());
        assert!(apply_step(&t("xy∘y"), &shuffle_back).is_err());
    }

    #[test]
    fn successor_enumeration_finds_all_positions() {
        let term = t("(x(xx))(x(xx))");
        let succ = successors(&term, MoveSet::ExpandOnly);
        // redexes: root, left factor, right factor
        assert_eq!(succ.len(), 3);
        for (step, result) in &succ {
            assert_eq!(apply_step(&term, step).unwrap(), *result);
        }
    }

    #[test]
    fn representations_enumerate_spine_splits() {
        let reps = representations(&t("xxx"));
        assert_eq!(reps.len(), 2);
        assert_eq!(reps[0].head, t("xx"));
        assert_eq!(reps[0].tail, vec![t("x")]);
        assert_eq!(reps[1].head, t("x"));
        assert_eq!(reps[1].tail, vec![t("x"), t("x")]);
        assert!(representations(&t("x")).is_empty());

        let reps = representations(&t("xx∘x"));
        assert_eq!(reps.len(), 2);
        assert!(matches!(reps[0].last_op, LastOp::Compose));
        assert_eq!(reps[0].head, t("xx"));
        assert_eq!(reps[1].head, t("x"));
        assert_eq!(reps[1].tail, vec![t("x"), t("x")]);
    }

    #[test]
    fn remultiply_inverts_representations() {
        for s in ["xxx", "x(xx)x", "xx∘x", "(xx)x∘xx"] {
            let term = t(s);
            for rep in representations(&term) {
                assert_eq!(remultiply(&rep.head, &rep.tail, rep.last_op), term, "{s}");
            }
        }
    }
}
