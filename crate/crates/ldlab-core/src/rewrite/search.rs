//! The dovetailed dual search behind equivalence and order decisions.
//!
//! Both inputs grow a breadth-first set of terms reachable under the active
//! move set. Three kinds of evidence end the search:
//!
//! * a term appearing in both sets — the inputs are equivalent;
//! * a term in one set whose left spine carries a member of the other set —
//!   the other input divides it, deciding strict order;
//! * disagreeing residues in a finite table — the inputs are inequivalent.
//!
//! The third check runs on a level ladder interleaved with the set growth,
//! so negative answers do not wait for the positive search to give up.

use std::cell::{Cell, RefCell};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::table::TableStore;
use crate::term::{Branch, Term};

use super::{
    representations, rewrite_at, successors, CompareOutcome, Equivalence,
    EquivalenceCertificate, FuelSpent, MoveSet, OrderCertificate, OrderRelation, OrderVerdict,
    Representation, RewriteConfig, RewriteStep, RuleKind,
};

/// How many residue levels should have been tried after generating a given
/// number of search nodes. Cheap levels run up front; expensive ones are
/// deferred until the positive search has had a fair chance.
const LEVEL_SCHEDULE: &[(u64, u8)] = &[
    (0, 8),
    (100, 9),
    (300, 10),
    (1_000, 11),
    (3_000, 12),
    (10_000, 13),
    (30_000, 14),
    (60_000, 15),
    (100_000, 16),
    (150_000, 17),
    (250_000, 18),
    (400_000, 19),
    (600_000, 20),
];

fn levels_due(generated: u64) -> u8 {
    let mut due = 0;
    for &(at, k) in LEVEL_SCHEDULE {
        if generated >= at {
            due = k;
        } else {
            break;
        }
    }
    due
}

/// Decision procedures sharing one fuel budget and memo tables.
///
/// The free functions in [`crate::rewrite`] build a fresh engine per call;
/// construct one directly to share memoized residues, equivalences, and
/// order relations across many queries against the same store.
///
/// Every verdict is sound for arbitrary terms; the single-generator
/// precondition enforced by the free functions only affects how often
/// searches decide rather than exhaust.
pub struct Engine<'s> {
    store: &'s TableStore,
    cfg: RewriteConfig,
    fuel_used: Cell<u64>,
    /// Temporary ceiling below `cfg.fuel`, used to ration fuel between
    /// complementary strategies inside one decision.
    fuel_cap: Cell<u64>,
    /// Nesting depth of the aligned-forms route, whose entry comparisons
    /// recurse into `compare`; at the cap the route declines and the
    /// representation search takes over.
    route_depth: Cell<u32>,
    /// Levels above this failed to load and are never retried.
    level_cap: Cell<u8>,
    residues: RefCell<HashMap<(Term, u8), u32>>,
    equiv_memo: RefCell<HashMap<(Term, Term), bool>>,
    order_memo: RefCell<HashMap<(Term, Term), OrderRelation>>,
    expand_memo: RefCell<HashMap<(Term, Term), Option<Vec<RewriteStep>>>>,
}

/// Recursion bound for directed expansion probes; far above the nesting of
/// any term a bounded search can produce, it only guards against degenerate
/// hand-built inputs.
const PROBE_DEPTH_CAP: u32 = 2_000;

/// Recursion bound for the aligned-forms route. Zero-cost recursion steps
/// strictly shrink the pair, and fuel bounds the rest, so the cap only backs
/// up those arguments against surprises.
const ROUTE_DEPTH_CAP: u32 = 64;

impl<'s> Engine<'s> {
    pub fn new(store: &'s TableStore, cfg: RewriteConfig) -> Self {
        Engine {
            store,
            cfg,
            fuel_used: Cell::new(0),
            fuel_cap: Cell::new(u64::MAX),
            route_depth: Cell::new(0),
            level_cap: Cell::new(u8::MAX),
            residues: RefCell::new(HashMap::new()),
            equiv_memo: RefCell::new(HashMap::new()),
            order_memo: RefCell::new(HashMap::new()),
            expand_memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &RewriteConfig {
        &self.cfg
    }

    /// Total nodes generated by every search on this engine so far.
    pub fn fuel_used(&self) -> u64 {
        self.fuel_used.get()
    }

    pub(crate) fn try_spend(&self) -> bool {
        let used = self.fuel_used.get();
        if used >= self.cfg.fuel.min(self.fuel_cap.get()) {
            return false;
        }
        self.fuel_used.set(used + 1);
        true
    }

    /// Fuel still available under the configured budget.
    pub(super) fn remaining_fuel(&self) -> u64 {
        self.cfg.fuel.saturating_sub(self.fuel_used.get())
    }

    /// Run `f` with at most `slice` additional fuel, then lift the ceiling
    /// again, so a strategy that exhausts its ration leaves the rest of the
    /// budget for the strategies after it.
    pub(super) fn with_fuel_slice<T>(&self, slice: u64, f: impl FnOnce() -> T) -> T {
        let prev = self.fuel_cap.get();
        let cap = self.fuel_used.get().saturating_add(slice).min(prev);
        self.fuel_cap.set(cap);
        let out = f();
        self.fuel_cap.set(prev);
        out
    }

    /// Evaluate `t` in the level-`k` table with every generator sent to 1;
    /// `None` when the level is out of bounds or failed to build.
    fn residue(&self, t: &Term, k: u8) -> Option<u32> {
        if k == 0 || k > self.cfg.max_level || k > self.level_cap.get() {
            return None;
        }
        let key = (t.clone(), k);
        if let Some(&r) = self.residues.borrow().get(&key) {
            return Some(r);
        }
        let table = match self.store.get(k) {
            Ok(table) => table,
            Err(_) => {
                self.level_cap.set(k - 1);
                return None;
            }
        };
        let r = table.residue(t).ok()?;
        self.residues.borrow_mut().insert(key, r);
        Some(r)
    }

    fn pair_key(u: &Term, v: &Term) -> ((Term, Term), bool) {
        if u <= v {
            ((u.clone(), v.clone()), false)
        } else {
            ((v.clone(), u.clone()), true)
        }
    }

    fn remember(&self, u: &Term, v: &Term, relation: Option<OrderRelation>, equivalent: bool) {
        let (key, flipped) = Self::pair_key(u, v);
        if let Some(rel) = relation {
            let stored = if flipped { rel.reversed() } else { rel };
            self.order_memo.borrow_mut().insert(key.clone(), stored);
        }
        self.equiv_memo.borrow_mut().insert(key, equivalent);
    }

    /// Decide `u ≡ v` with a certificate or a separating table level.
    pub fn decide_equiv(&self, u: &Term, v: &Term) -> Equivalence {
        if u == v {
            return Equivalence::Equivalent(EquivalenceCertificate {
                common: u.clone(),
                left_steps: Vec::new(),
                right_steps: Vec::new(),
            });
        }
        let moves = if u.is_application_term() && v.is_application_term() {
            MoveSet::ExpandOnly
        } else {
            MoveSet::SigmaAll
        };
        let mut search = DualSearch::new(self, moves, false, u.clone(), v.clone());
        match search.run() {
            RunResult::Found(Found::Common { common, left_steps, right_steps }) => {
                self.remember(u, v, Some(OrderRelation::Equal), true);
                Equivalence::Equivalent(EquivalenceCertificate { common, left_steps, right_steps })
            }
            RunResult::Found(Found::Separated { level, left, right }) => {
                self.remember(u, v, None, false);
                Equivalence::Inequivalent {
                    witness_level: level,
                    left_residue: left,
                    right_residue: right,
                }
            }
            RunResult::Found(Found::Rep { .. }) => {
                unreachable!("order tracking is disabled for equivalence searches")
            }
            RunResult::Exhausted | RunResult::Saturated => {
                Equivalence::Exhausted { fuel_spent: self.fuel_used.get() }
            }
        }
    }

    /// Semi-decide equivalence, consulting the memo first.
    pub(crate) fn equivalent(&self, u: &Term, v: &Term) -> Option<bool> {
        if u == v {
            return Some(true);
        }
        let (key, _) = Self::pair_key(u, v);
        if let Some(&b) = self.equiv_memo.borrow().get(&key) {
            return Some(b);
        }
        match self.decide_equiv(u, v) {
            Equivalence::Equivalent(_) => Some(true),
            Equivalence::Inequivalent { .. } => Some(false),
            Equivalence::Exhausted { .. } => None,
        }
    }

    /// Decide the order relation between `u` and `v` with a certificate.
    ///
    /// Two complementary semi-deciders split the fuel budget. Aligned
    /// decompositions run first on rationed fuel: every condition-valid
    /// split along a term's left spine is a prenormal sequence of the term
    /// by its own literal head, so pairing it with the other input's
    /// sequence by that same divisor puts the pair in division form, where
    /// the tails' first differing entry decides. The divisor adapting to
    /// the inputs is what handles pairs whose least order witness sits
    /// astronomically deep in the expansion sets — including pairs whose
    /// generator-division forms are themselves intractable. A verdict of
    /// `equal` is re-certified by the expansion search, whose common-term
    /// certificates replay by plain steps. Whatever the aligned route
    /// leaves undecided falls to the representation search on the remaining
    /// fuel: it decides pairs with shallow witnesses even when neither
    /// side's spine offers a usable divisor.
    pub fn compare(&self, u: &Term, v: &Term) -> CompareOutcome {
        if u == v {
            return CompareOutcome::Decided(OrderVerdict {
                relation: OrderRelation::Equal,
                certificate: OrderCertificate::CommonTerm {
                    common: u.clone(),
                    left_steps: Vec::new(),
                    right_steps: Vec::new(),
                },
            });
        }
        let both_apply = u.is_application_term() && v.is_application_term();
        if both_apply && self.route_depth.get() < ROUTE_DEPTH_CAP {
            self.route_depth.set(self.route_depth.get() + 1);
            let routed = self.aligned_forms(u, v);
            self.route_depth.set(self.route_depth.get() - 1);
            match routed {
                Some((relation, certificate)) if relation != OrderRelation::Equal => {
                    self.remember(u, v, Some(relation), false);
                    return CompareOutcome::Decided(OrderVerdict { relation, certificate });
                }
                Some((_, _)) => {
                    // Equal forms: produce a common-expansion certificate;
                    // exhaustion here stays an exhaustion.
                    let mut meet =
                        DualSearch::new(self, MoveSet::ExpandOnly, false, u.clone(), v.clone());
                    return match meet.run() {
                        RunResult::Found(Found::Common { common, left_steps, right_steps }) => {
                            self.remember(u, v, Some(OrderRelation::Equal), true);
                            CompareOutcome::Decided(OrderVerdict {
                                relation: OrderRelation::Equal,
                                certificate: OrderCertificate::CommonTerm {
                                    common,
                                    left_steps,
                                    right_steps,
                                },
                            })
                        }
                        RunResult::Found(found) => {
                            debug_assert!(
                                !matches!(found, Found::Separated { .. }),
                                "aligned forms equal but residues separate"
                            );
                            CompareOutcome::Exhausted {
                                fuel: FuelSpent {
                                    left_nodes: meet.sides[0].generated,
                                    right_nodes: meet.sides[1].generated,
                                    levels_tried: meet.levels_tried,
                                },
                            }
                        }
                        RunResult::Exhausted | RunResult::Saturated => CompareOutcome::Exhausted {
                            fuel: FuelSpent {
                                left_nodes: meet.sides[0].generated,
                                right_nodes: meet.sides[1].generated,
                                levels_tried: meet.levels_tried,
                            },
                        },
                    };
                }
                // Neither head divides the other side within its ration:
                // fall back to the direct representation search below.
                None => {}
            }
        }
        let moves = if both_apply { MoveSet::ExpandOnly } else { MoveSet::SigmaAll };
        let mut search = DualSearch::new(self, moves, true, u.clone(), v.clone());
        match search.run() {
            RunResult::Found(Found::Common { common, left_steps, right_steps }) => {
                self.remember(u, v, Some(OrderRelation::Equal), true);
                CompareOutcome::Decided(OrderVerdict {
                    relation: OrderRelation::Equal,
                    certificate: OrderCertificate::CommonTerm { common, left_steps, right_steps },
                })
            }
            RunResult::Found(Found::Rep {
                larger,
                witness,
                rep,
                larger_steps,
                smaller_steps,
                head_steps,
            }) => {
                let relation =
                    if larger == 1 { OrderRelation::Less } else { OrderRelation::Greater };
                self.remember(u, v, Some(relation), false);
                CompareOutcome::Decided(OrderVerdict {
                    relation,
                    certificate: OrderCertificate::Representation {
                        witness,
                        head: rep.head,
                        tail: rep.tail,
                        last_op: rep.last_op,
                        larger_steps,
                        smaller_steps,
                        head_steps,
                    },
                })
            }
            RunResult::Found(Found::Separated { .. }) => {
                unreachable!("residue separation is disabled under order tracking")
            }
            RunResult::Exhausted | RunResult::Saturated => CompareOutcome::Exhausted {
                fuel: FuelSpent {
                    left_nodes: search.sides[0].generated,
                    right_nodes: search.sides[1].generated,
                    levels_tried: search.levels_tried,
                },
            },
        }
    }

    /// Directed probe for an expansion path `from →* target` under forward
    /// `LeftDistrib` only: decompose apply-against-apply, else take one root
    /// expansion and retry. A `Some` answer is a genuine step list, so the
    /// probe is a sound accelerator for meet detection. It is *not*
    /// complete: a path may need an expansion inside the right child before
    /// the root fires (for example `x(x(xx)) → x((xx)(xx)) → (x(xx))(x(xx))`
    /// is reachable, but neither by decomposition — `x` never expands — nor
    /// root-first, since `xx` is rigid). The enclosing breadth-first search
    /// retains completeness; a probe miss merely declines the shortcut.
    ///
    /// `None` means no root-first path, or the probe hit its depth bound;
    /// depth-bounded failures are not memoized.
    ///
    /// Probes spend no fuel: fuel counts search nodes, and a probe is
    /// bookkeeping on a node already paid for, like the representation
    /// indexing next to it. Its work is bounded on its own — expansions
    /// strictly grow, so the size guard cuts every branch, and the memo
    /// collapses repeated subproblems across probes.
    pub(crate) fn expand_to(&self, from: &Term, target: &Term) -> Option<Vec<RewriteStep>> {
        let mut aborted = false;
        self.expand_to_inner(from, target, 0, &mut aborted)
    }

    fn expand_to_inner(
        &self,
        from: &Term,
        target: &Term,
        depth: u32,
        aborted: &mut bool,
    ) -> Option<Vec<RewriteStep>> {
        if from == target {
            return Some(Vec::new());
        }
        // expansions strictly grow, so anything at or above the target size
        // other than the target itself is a dead end
        if from.size() >= target.size() {
            return None;
        }
        let key = (from.clone(), target.clone());
        if let Some(hit) = self.expand_memo.borrow().get(&key) {
            return hit.clone();
        }
        if depth > PROBE_DEPTH_CAP {
            *aborted = true;
            return None;
        }
        let mut local_abort = false;
        let result = self.expand_to_body(from, target, depth, &mut local_abort);
        if result.is_some() || !local_abort {
            self.expand_memo.borrow_mut().insert(key, result.clone());
        }
        if local_abort {
            *aborted = true;
        }
        result
    }

    fn expand_to_body(
        &self,
        from: &Term,
        target: &Term,
        depth: u32,
        aborted: &mut bool,
    ) -> Option<Vec<RewriteStep>> {
        // decompose: expand the left child to the target's left child and
        // the right to the right
        if let (Some((fl, fr)), Some((tl, tr))) = (from.as_apply(), target.as_apply()) {
            if let Some(left) = self.expand_to_inner(fl, tl, depth + 1, aborted) {
                if let Some(right) = self.expand_to_inner(fr, tr, depth + 1, aborted) {
                    let mut steps = Vec::with_capacity(left.len() + right.len());
                    for mut step in left {
                        step.path.insert(0, Branch::Left);
                        steps.push(step);
                    }
                    for mut step in right {
                        step.path.insert(0, Branch::Right);
                        steps.push(step);
                    }
                    return Some(steps);
                }
            }
        }
        // otherwise the path must start with a root expansion
        let rooted = rewrite_at(from, RuleKind::LeftDistrib, true)?;
        if rooted.size() > target.size() {
            return None;
        }
        let rest = self.expand_to_inner(&rooted, target, depth + 1, aborted)?;
        let mut steps = Vec::with_capacity(1 + rest.len());
        steps.push(RewriteStep { path: Vec::new(), rule: RuleKind::LeftDistrib, forward: true });
        steps.extend(rest);
        Some(steps)
    }

    /// Semi-decide the order relation, consulting the memo first.
    pub(crate) fn relation(&self, u: &Term, v: &Term) -> Option<OrderRelation> {
        if u == v {
            return Some(OrderRelation::Equal);
        }
        let (key, flipped) = Self::pair_key(u, v);
        if let Some(&r) = self.order_memo.borrow().get(&key) {
            return Some(if flipped { r.reversed() } else { r });
        }
        match self.compare(u, v) {
            CompareOutcome::Decided(verdict) => Some(verdict.relation),
            CompareOutcome::Exhausted { .. } => None,
        }
    }
}

struct Node {
    term: Term,
    parent: Option<(usize, RewriteStep)>,
}

struct Side {
    nodes: Vec<Node>,
    index: HashMap<Term, usize>,
    /// Frontier ordered smallest term first (insertion order on ties).
    queue: BinaryHeap<Reverse<(u64, usize)>>,
    /// head term → slot in `head_data`, first occurrence kept
    heads: HashMap<Term, usize>,
    head_data: Vec<(usize, Representation)>,
    generated: u64,
}

impl Side {
    fn new() -> Self {
        Side {
            nodes: Vec::new(),
            index: HashMap::new(),
            queue: BinaryHeap::new(),
            heads: HashMap::new(),
            head_data: Vec::new(),
            generated: 0,
        }
    }

    fn frontier_size(&self) -> Option<u64> {
        self.queue.peek().map(|Reverse((size, _))| *size)
    }

    fn path_to(&self, mut idx: usize) -> Vec<RewriteStep> {
        let mut steps = Vec::new();
        while let Some((parent, step)) = &self.nodes[idx].parent {
            steps.push(step.clone());
            idx = *parent;
        }
        steps.reverse();
        steps
    }
}

enum Found {
    /// A term reachable from both inputs, with the two step lists.
    Common { common: Term, left_steps: Vec<RewriteStep>, right_steps: Vec<RewriteStep> },
    /// Side `larger`'s input reaches `witness` (via `larger_steps`), which
    /// splits as `rep`, whose head meets the other input at a common term:
    /// `head_steps` from the head, `smaller_steps` from the input. A
    /// literally reached head carries empty `head_steps`.
    Rep {
        larger: usize,
        witness: Term,
        rep: Representation,
        larger_steps: Vec<RewriteStep>,
        smaller_steps: Vec<RewriteStep>,
        head_steps: Vec<RewriteStep>,
    },
    Separated { level: u8, left: u32, right: u32 },
}

enum RunResult {
    Found(Found),
    Exhausted,
    Saturated,
}

/// Residue levels screening candidate heads for equivalence with the
/// opposite input. Level 8 alone leaves one coincidence in ~256 random
/// pairs; three spread levels make surviving non-equivalent heads rare
/// enough that the confirmation search's budget is spent on real matches.
const HEAD_FILTER_LEVELS: [u8; 3] = [4, 6, 8];

/// Fuel ration for confirming one residue-matched head. Heads that pass the
/// filter and truly match meet their input quickly — both sit in one class
/// whose members the main search has already been generating.
const HEAD_CONFIRM_NODES: u64 = 16_384;

struct DualSearch<'e, 's> {
    eng: &'e Engine<'s>,
    moves: MoveSet,
    track_order: bool,
    /// Directed expansion probes; enabled exactly for the confluent
    /// expansion-only move set.
    probes: bool,
    inputs: [Term; 2],
    sides: [Side; 2],
    /// Heads already residue-matched and sent to a confirmation search,
    /// successful or not; never retried.
    tried_heads: HashSet<Term>,
    next_level: u16,
    levels_tried: u8,
    generated: u64,
}

impl<'e, 's> DualSearch<'e, 's> {
    fn new(eng: &'e Engine<'s>, moves: MoveSet, track_order: bool, u: Term, v: Term) -> Self {
        DualSearch {
            eng,
            moves,
            track_order,
            probes: moves == MoveSet::ExpandOnly,
            inputs: [u, v],
            sides: [Side::new(), Side::new()],
            tried_heads: HashSet::new(),
            next_level: 1,
            levels_tried: 0,
            generated: 0,
        }
    }

    /// Necessary condition for `head ≡ inputs[other]`: equal residues on
    /// every filter level. Memoized residues make repeat heads one hash
    /// lookup per level. An unavailable level fails closed.
    fn head_residues_match(&self, head: &Term, other: usize) -> bool {
        HEAD_FILTER_LEVELS.iter().all(|&k| {
            match (self.eng.residue(head, k), self.eng.residue(&self.inputs[other], k)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            }
        })
    }

    fn make_common(
        &self,
        side: usize,
        common: Term,
        this_steps: Vec<RewriteStep>,
        other_steps: Vec<RewriteStep>,
    ) -> Found {
        let (left_steps, right_steps) =
            if side == 0 { (this_steps, other_steps) } else { (other_steps, this_steps) };
        Found::Common { common, left_steps, right_steps }
    }

    /// Add `term` to a side and run the meet checks. Duplicates are ignored.
    fn insert(
        &mut self,
        side: usize,
        term: Term,
        parent: Option<(usize, RewriteStep)>,
    ) -> Option<Found> {
        if self.sides[side].index.contains_key(&term) {
            return None;
        }
        let other = 1 - side;
        let idx = self.sides[side].nodes.len();
        self.sides[side].nodes.push(Node { term: term.clone(), parent });
        self.sides[side].index.insert(term.clone(), idx);
        // structural meet with the other side's set
        if let Some(&other_idx) = self.sides[other].index.get(&term) {
            let this_steps = self.sides[side].path_to(idx);
            let other_steps = self.sides[other].path_to(other_idx);
            return Some(self.make_common(side, term, this_steps, other_steps));
        }
        // directed meet: does the other input expand straight to this term?
        if self.probes {
            if let Some(other_steps) = self.eng.expand_to(&self.inputs[other], &term) {
                let this_steps = self.sides[side].path_to(idx);
                return Some(self.make_common(side, term, this_steps, other_steps));
            }
        }
        if self.track_order {
            let reps = representations(&term);
            for rep in &reps {
                if let Some(&smaller_idx) = self.sides[other].index.get(&rep.head) {
                    return Some(Found::Rep {
                        larger: side,
                        witness: term.clone(),
                        rep: rep.clone(),
                        larger_steps: self.sides[side].path_to(idx),
                        smaller_steps: self.sides[other].path_to(smaller_idx),
                        head_steps: Vec::new(),
                    });
                }
                if self.probes {
                    if let Some(smaller_steps) = self.eng.expand_to(&self.inputs[other], &rep.head)
                    {
                        return Some(Found::Rep {
                            larger: side,
                            witness: term.clone(),
                            rep: rep.clone(),
                            larger_steps: self.sides[side].path_to(idx),
                            smaller_steps,
                            head_steps: Vec::new(),
                        });
                    }
                }
                // Heads the other input only meets through contractions leave
                // no literal trace in its expansion set; residue agreement on
                // a few levels flags them, and a rationed equivalence search
                // confirms or clears the match. One attempt per distinct head.
                if self.head_residues_match(&rep.head, other)
                    && self.tried_heads.insert(rep.head.clone())
                {
                    let slice = HEAD_CONFIRM_NODES.min(self.eng.remaining_fuel());
                    let confirmed = self.eng.with_fuel_slice(slice, || {
                        self.eng.decide_equiv(&rep.head, &self.inputs[other])
                    });
                    if let Equivalence::Equivalent(cert) = confirmed {
                        return Some(Found::Rep {
                            larger: side,
                            witness: term.clone(),
                            rep: rep.clone(),
                            larger_steps: self.sides[side].path_to(idx),
                            smaller_steps: cert.right_steps,
                            head_steps: cert.left_steps,
                        });
                    }
                }
            }
            for rep in reps {
                let slot = self.sides[side].head_data.len();
                let key = rep.head.clone();
                self.sides[side].head_data.push((idx, rep));
                self.sides[side].heads.entry(key).or_insert(slot);
            }
            if let Some(&slot) = self.sides[other].heads.get(&term) {
                let (owner, rep) = self.sides[other].head_data[slot].clone();
                return Some(Found::Rep {
                    larger: other,
                    witness: self.sides[other].nodes[owner].term.clone(),
                    rep,
                    larger_steps: self.sides[other].path_to(owner),
                    smaller_steps: self.sides[side].path_to(idx),
                    head_steps: Vec::new(),
                });
            }
        }
        let size = self.sides[side].nodes[idx].term.size();
        self.sides[side].queue.push(Reverse((size, idx)));
        None
    }

    /// Try residue separation on every level up to `upto` not yet tried.
    /// Disabled while tracking order (residues cannot order inputs, only
    /// distinguish them).
    fn scan_levels(&mut self, upto: u8) -> Option<Found> {
        if self.track_order {
            return None;
        }
        let upto = u16::from(upto.min(self.eng.cfg.max_level));
        while self.next_level <= upto {
            let k = self.next_level as u8;
            let (a, b) = match (
                self.eng.residue(&self.inputs[0], k),
                self.eng.residue(&self.inputs[1], k),
            ) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    self.next_level = u16::MAX;
                    return None;
                }
            };
            self.next_level += 1;
            self.levels_tried = self.levels_tried.max(k);
            if a != b {
                return Some(Found::Separated { level: k, left: a, right: b });
            }
        }
        None
    }

    fn run(&mut self) -> RunResult {
        let u = self.inputs[0].clone();
        let v = self.inputs[1].clone();
        if let Some(found) = self.insert(0, u, None) {
            return RunResult::Found(found);
        }
        if let Some(found) = self.insert(1, v, None) {
            return RunResult::Found(found);
        }
        loop {
            if let Some(found) = self.scan_levels(levels_due(self.generated)) {
                return RunResult::Found(found);
            }
            // smallest frontier term first, across both sides: once one
            // side's unexplored terms outgrow the other's, the budget flows
            // to the side that still has small ground to cover
            let side = match (self.sides[0].frontier_size(), self.sides[1].frontier_size()) {
                (Some(a), Some(b)) => {
                    if a <= b {
                        0
                    } else {
                        1
                    }
                }
                (Some(_), None) => 0,
                (None, Some(_)) => 1,
                (None, None) => {
                    // both sides saturated: finish the level ladder, then stop
                    if let Some(found) = self.scan_levels(self.eng.cfg.max_level) {
                        return RunResult::Found(found);
                    }
                    return RunResult::Saturated;
                }
            };
            let Reverse((_, node_idx)) =
                self.sides[side].queue.pop().expect("queue checked non-empty");
            let term = self.sides[side].nodes[node_idx].term.clone();
            for (step, succ) in successors(&term, self.moves) {
                if succ.size() > self.eng.cfg.size_cap {
                    continue;
                }
                if self.sides[side].index.contains_key(&succ) {
                    continue;
                }
                if !self.eng.try_spend() {
                    if let Some(found) = self.scan_levels(self.eng.cfg.max_level) {
                        return RunResult::Found(found);
                    }
                    return RunResult::Exhausted;
                }
                self.sides[side].generated += 1;
                self.generated += 1;
                if let Some(found) = self.insert(side, succ, Some((node_idx, step))) {
                    return RunResult::Found(found);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{
        check_equivalence_certificate, check_order_certificate, compare, decide_equiv,
        CompareOutcome, Equivalence, OrderRelation, RewriteConfig, RewriteError,
    };
    use crate::table::TableStore;
    use crate::term::{parse_term, Term};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn store() -> TableStore {
        TableStore::in_memory()
    }

    fn cfg() -> RewriteConfig {
        RewriteConfig::default()
    }

    #[test]
    fn equivalent_application_terms_meet_with_certificates() {
        let s = store();
        let pairs = [
            ("x(xx)", "(xx)(xx)"),
            ("x(x(xx))", "(xx)((xx)(xx))"),
            ("(xx)(xx)", "((xx)x)((xx)x)"),
        ];
        for (a, b) in pairs {
            let (u, v) = (t(a), t(b));
            match decide_equiv(&s, &u, &v, &cfg()).unwrap() {
                Equivalence::Equivalent(cert) => {
                    assert!(check_equivalence_certificate(&u, &v, &cert), "{a} ≡ {b}");
                }
                other => panic!("expected {a} ≡ {b}, got {other:?}"),
            }
        }
    }

    #[test]
    fn inequivalent_terms_separate_at_the_first_possible_level() {
        let s = store();
        match decide_equiv(&s, &t("x"), &t("xx"), &cfg()).unwrap() {
            Equivalence::Inequivalent { witness_level, left_residue, right_residue } => {
                assert_eq!(witness_level, 1);
                assert_eq!(left_residue, 1);
                assert_eq!(right_residue, 0);
            }
            other => panic!("expected inequivalent, got {other:?}"),
        }
        // x∘x evaluates like x at level 1 and only separates at level 2
        match decide_equiv(&s, &t("x∘x"), &t("x"), &cfg()).unwrap() {
            Equivalence::Inequivalent { witness_level, left_residue, right_residue } => {
                assert_eq!(witness_level, 2);
                assert_eq!(left_residue, 3);
                assert_eq!(right_residue, 1);
            }
            other => panic!("expected inequivalent, got {other:?}"),
        }
    }

    #[test]
    fn composition_terms_meet_through_the_shuffle_rule() {
        let s = store();
        let (u, v) = (t("x∘x"), t("xx∘x"));
        match decide_equiv(&s, &u, &v, &cfg()).unwrap() {
            Equivalence::Equivalent(cert) => {
                assert!(check_equivalence_certificate(&u, &v, &cert));
            }
            other => panic!("expected x∘x ≡ xx∘x, got {other:?}"),
        }
    }

    #[test]
    fn mixed_generator_inputs_are_rejected() {
        let s = store();
        assert!(matches!(
            decide_equiv(&s, &t("x"), &t("yy"), &cfg()),
            Err(RewriteError::MultipleGenerators)
        ));
        assert!(matches!(
            compare(&s, &t("xy"), &t("xx"), &cfg()),
            Err(RewriteError::MultipleGenerators)
        ));
    }

    fn relation_of(a: &str, b: &str) -> OrderRelation {
        let s = store();
        let (u, v) = (t(a), t(b));
        match compare(&s, &u, &v, &cfg()).unwrap() {
            CompareOutcome::Decided(verdict) => {
                assert!(
                    check_order_certificate(&u, &v, &verdict),
                    "certificate check for {a} vs {b}"
                );
                verdict.relation
            }
            CompareOutcome::Exhausted { fuel } => {
                panic!("compare({a}, {b}) exhausted: {fuel:?}")
            }
        }
    }

    #[test]
    fn order_worked_examples() {
        assert_eq!(relation_of("x", "xx"), OrderRelation::Less);
        assert_eq!(relation_of("xx", "x"), OrderRelation::Greater);
        assert_eq!(relation_of("xx", "x∘x"), OrderRelation::Less);
        assert_eq!(relation_of("(xx)x", "x∘x"), OrderRelation::Less);
        assert_eq!(relation_of("x∘x", "xx∘x"), OrderRelation::Equal);
        assert_eq!(relation_of("x(xx)", "(xx)(xx)"), OrderRelation::Equal);
        assert_eq!(relation_of("(xx)x", "x(xx)"), OrderRelation::Less);
        assert_eq!(relation_of("x(xx)", "(xx)x"), OrderRelation::Greater);
        assert_eq!(relation_of("xx", "(xx)x"), OrderRelation::Less);
    }

    #[test]
    fn deep_spine_witnesses_are_decided_through_division_forms() {
        // The least expansion of x(x(xxx)) exposing x(xxxx) on its left
        // spine has eighteen leaves and sits hundreds of thousands of nodes
        // into the breadth-first frontier; the division route must decide
        // the pair within default fuel regardless.
        assert_eq!(relation_of("x(x(xxx))", "x(xxxx)"), OrderRelation::Greater);
        assert_eq!(relation_of("x(xxxx)", "x(x(xxx))"), OrderRelation::Less);
    }

    #[test]
    fn order_certificates_replay_structurally() {
        let s = store();
        let (u, v) = (t("xx"), t("x∘x"));
        match compare(&s, &u, &v, &cfg()).unwrap() {
            CompareOutcome::Decided(verdict) => {
                assert_eq!(verdict.relation, OrderRelation::Less);
                assert!(check_order_certificate(&u, &v, &verdict));
            }
            other => panic!("expected decision, got {other:?}"),
        }
    }

    #[test]
    fn fuel_exhaustion_is_reported_not_hidden() {
        let s = store();
        // equivalent pair, but zero fuel forbids any search step; the pair
        // must not be root-first reachable, or the free directed probe on
        // the seed terms would decide it without spending at all
        let tiny = RewriteConfig { fuel: 0, ..RewriteConfig::default() };
        match decide_equiv(&s, &t("x(x(xx))"), &t("(x(xx))(x(xx))"), &tiny).unwrap() {
            Equivalence::Exhausted { .. } => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
        // inequivalent pairs still separate through the table ladder
        match decide_equiv(&s, &t("x"), &t("xx"), &tiny).unwrap() {
            Equivalence::Inequivalent { witness_level: 1, .. } => {}
            other => panic!("expected level-1 separation, got {other:?}"),
        }
    }

    #[test]
    fn structural_equality_short_circuits() {
        let s = store();
        let term = t("x(x(x(x(xx))))");
        match decide_equiv(&s, &term, &term, &RewriteConfig { fuel: 0, ..cfg() }).unwrap() {
            Equivalence::Equivalent(cert) => {
                assert_eq!(cert.common, term);
                assert!(cert.left_steps.is_empty() && cert.right_steps.is_empty());
            }
            other => panic!("expected trivial equivalence, got {other:?}"),
        }
    }
}

#[cfg(test)]
mod probe {
    use super::super::{Equivalence, RewriteConfig};
    use crate::table::TableStore;
    use crate::term::{iterate, parse_term};

    #[test]
    #[ignore]
    fn probe_iterate_identities() {
        let s = TableStore::in_memory();
        let cfg = RewriteConfig { fuel: 5_000_000, ..RewriteConfig::default() };
        for w_str in ["x", "xx"] {
            let w = parse_term(w_str).unwrap();
            for n in 0..=3u32 {
                for i in 0..=n {
                    let u = crate::term::Term::apply(
                        &iterate(&w, i, u64::MAX).unwrap(),
                        &iterate(&w, n, u64::MAX).unwrap(),
                    );
                    let v = iterate(&w, n + 1, u64::MAX).unwrap();
                    let t0 = std::time::Instant::now();
                    let eng = super::Engine::new(&s, cfg);
                    let res = eng.decide_equiv(&u, &v);
                    let label = match &res {
                        Equivalence::Equivalent(c) => {
                            assert!(super::super::check_equivalence_certificate(&u, &v, c));
                            format!("equivalent ({}+{} steps)", c.left_steps.len(), c.right_steps.len())
                        }
                        Equivalence::Inequivalent { witness_level, .. } => {
                            format!("INEQUIVALENT?! level {witness_level}")
                        }
                        Equivalence::Exhausted { fuel_spent } => {
                            format!("EXHAUSTED after {fuel_spent}")
                        }
                    };
                    println!(
                        "w={w_str} i={i} n={n}: {label}, fuel={}, {:?}",
                        eng.fuel_used(),
                        t0.elapsed()
                    );
                }
            }
        }
    }
}
