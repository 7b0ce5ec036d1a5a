//! Prenormal decomposition, division trees, and the lexicographic
//! comparison of generator-division forms.
//!
//! A `u`-prenormal sequence writes `v` as `u_0 u_1 ⋯ u_{n-1} ∗ u_n` with
//! `u_0 ≡ u` and every later entry dominated by the product of the entries
//! two before it: `u_{i+2} ≤_L u_0 u_1 ⋯ u_i`. When `∗` is `∘` and `n ≥ 2`,
//! the final entry must be strictly below `u_0 ⋯ u_{n-2}` (for `n ≤ 1` the
//! condition is vacuous). Dividing recursively by a fixed term until every
//! label sits at or below it yields the division tree; with the generator
//! itself as divisor the resulting forms order terms lexicographically.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::term::Term;

use super::search::Engine;
use super::{
    remultiply, representations, successors, CompareOutcome, DivisionOutcome, FuelSpent, LastOp,
    MoveSet, OrderCertificate, OrderRelation, OrderVerdict, PrenormalOutcome, PrenormalSequence,
    Representation, RewriteError, RewriteStep,
};

/// Result of recursively dividing by a fixed term: each internal node's
/// children are the entries of its label's prenormal sequence, and every
/// leaf label sits at or below the divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionTree {
    pub label: Term,
    /// Operation joining the final child; `None` on leaves.
    pub last_op: Option<LastOp>,
    pub children: Vec<DivisionTree>,
}

impl DivisionTree {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(DivisionTree::node_count).sum::<usize>()
    }

    /// Rebuild a term from the children, bottom up. The result is equivalent
    /// to (not necessarily identical with) the label.
    pub fn remultiplied(&self) -> Term {
        if self.children.is_empty() {
            return self.label.clone();
        }
        let parts: Vec<Term> = self.children.iter().map(DivisionTree::remultiplied).collect();
        remultiply(&parts[0], &parts[1..], self.last_op.expect("internal node has an operation"))
    }
}

/// Maximum division-tree depth; a guard against runaway recursion, far above
/// anything reachable within the fuel budgets.
const MAX_DIVISION_DEPTH: u32 = 64;

impl<'s> Engine<'s> {
    /// Find the `u`-prenormal sequence of `v`. Requires `u ≤_L v`; when
    /// `u ≡ v` the sequence is the single entry `v` with an empty tail.
    pub fn prenormal(&self, u: &Term, v: &Term) -> Result<PrenormalOutcome, RewriteError> {
        match self.relation(u, v) {
            None => return Ok(PrenormalOutcome::Exhausted { fuel_spent: self.fuel_used() }),
            Some(OrderRelation::Greater) => return Err(RewriteError::NotDominated),
            Some(OrderRelation::Equal) => {
                return Ok(PrenormalOutcome::Decomposed(PrenormalSequence {
                    head: v.clone(),
                    tail: Vec::new(),
                    last_op: LastOp::Apply,
                }));
            }
            Some(OrderRelation::Less) => {}
        }
        // Search v's class smallest members first. Contractions are required
        // here: the winning representation may live on a smaller member.
        let moves =
            if v.is_application_term() { MoveSet::LdBoth } else { MoveSet::SigmaAll };
        let mut seen: HashSet<Term> = HashSet::new();
        let mut members: Vec<Term> = vec![v.clone()];
        let mut queue: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
        seen.insert(v.clone());
        queue.push(Reverse((v.size(), 0)));
        while let Some(Reverse((_, at))) = queue.pop() {
            let w = members[at].clone();
            for rep in representations(&w) {
                if self.valid_prenormal(u, &rep) == Some(true) {
                    return Ok(PrenormalOutcome::Decomposed(PrenormalSequence {
                        head: rep.head,
                        tail: rep.tail,
                        last_op: rep.last_op,
                    }));
                }
            }
            for (_, succ) in successors(&w, moves) {
                if succ.size() > self.config().size_cap || seen.contains(&succ) {
                    continue;
                }
                if !self.try_spend() {
                    return Ok(PrenormalOutcome::Exhausted { fuel_spent: self.fuel_used() });
                }
                seen.insert(succ.clone());
                let idx = members.len();
                let size = succ.size();
                members.push(succ);
                queue.push(Reverse((size, idx)));
            }
        }
        Ok(PrenormalOutcome::Exhausted { fuel_spent: self.fuel_used() })
    }

    /// Check the prenormal side conditions; `None` when a nested decision
    /// exhausted its fuel.
    fn valid_prenormal(&self, u: &Term, rep: &Representation) -> Option<bool> {
        if !self.equivalent(&rep.head, u)? {
            return Some(false);
        }
        self.prenormal_conditions(rep)
    }

    /// The entry-domination side conditions alone, head unchecked.
    fn prenormal_conditions(&self, rep: &Representation) -> Option<bool> {
        let n = rep.tail.len();
        if n >= 2 {
            // prefix products u_0, u_0 u_1, …, left-associated
            let mut prods: Vec<Term> = Vec::with_capacity(n - 1);
            let mut acc = rep.head.clone();
            prods.push(acc.clone());
            for entry in &rep.tail[..n - 2] {
                acc = Term::apply(&acc, entry);
                prods.push(acc.clone());
            }
            // entries u_2 … u_n against prods u_0, u_0 u_1, …
            for i in 0..=(n - 2) {
                let entry = &rep.tail[i + 1];
                let rel = self.relation(entry, &prods[i])?;
                if rel == OrderRelation::Greater {
                    return Some(false);
                }
                if i == n - 2 && rep.last_op == LastOp::Compose && rel != OrderRelation::Less {
                    return Some(false);
                }
            }
        }
        Some(true)
    }

    /// Divide `v` by `u` recursively until every label is `≤_L u`.
    pub fn division_tree(&self, u: &Term, v: &Term) -> Result<DivisionOutcome, RewriteError> {
        match self.division_node(u, v, 0)? {
            Some(tree) => Ok(DivisionOutcome::Tree(tree)),
            None => Ok(DivisionOutcome::Exhausted { fuel_spent: self.fuel_used() }),
        }
    }

    fn division_node(
        &self,
        u: &Term,
        v: &Term,
        depth: u32,
    ) -> Result<Option<DivisionTree>, RewriteError> {
        if depth > MAX_DIVISION_DEPTH {
            return Ok(None);
        }
        match self.relation(v, u) {
            None => return Ok(None),
            Some(OrderRelation::Less | OrderRelation::Equal) => {
                return Ok(Some(DivisionTree {
                    label: v.clone(),
                    last_op: None,
                    children: Vec::new(),
                }));
            }
            Some(OrderRelation::Greater) => {}
        }
        let seq = match self.prenormal(u, v)? {
            PrenormalOutcome::Decomposed(seq) => seq,
            PrenormalOutcome::Exhausted { .. } => return Ok(None),
        };
        let mut children = Vec::with_capacity(1 + seq.tail.len());
        for entry in seq.entries() {
            match self.division_node(u, &entry, depth + 1)? {
                Some(child) => children.push(child),
                None => return Ok(None),
            }
        }
        Ok(Some(DivisionTree { label: v.clone(), last_op: Some(seq.last_op), children }))
    }

    /// Compare by building both generator-division forms and ordering them
    /// lexicographically.
    pub fn lex_compare(&self, u: &Term, v: &Term) -> Result<CompareOutcome, RewriteError> {
        let mut gens = u.generators();
        gens.extend(v.generators());
        if gens.len() != 1 {
            return Err(RewriteError::MultipleGenerators);
        }
        let divisor = Term::leaf(gens.into_iter().next().expect("one generator"));
        let before = self.fuel_used();
        let left = match self.division_tree(&divisor, u)? {
            DivisionOutcome::Tree(tree) => tree,
            DivisionOutcome::Exhausted { .. } => {
                return Ok(CompareOutcome::Exhausted {
                    fuel: FuelSpent {
                        left_nodes: self.fuel_used() - before,
                        right_nodes: 0,
                        levels_tried: 0,
                    },
                });
            }
        };
        let mid = self.fuel_used();
        let right = match self.division_tree(&divisor, v)? {
            DivisionOutcome::Tree(tree) => tree,
            DivisionOutcome::Exhausted { .. } => {
                return Ok(CompareOutcome::Exhausted {
                    fuel: FuelSpent {
                        left_nodes: mid - before,
                        right_nodes: self.fuel_used() - mid,
                        levels_tried: 0,
                    },
                });
            }
        };
        let relation = compare_forms(&left, &right);
        Ok(CompareOutcome::Decided(OrderVerdict {
            relation,
            certificate: OrderCertificate::DivisionForms { left, right },
        }))
    }

    /// Order by aligned decompositions. Every split of a term along its left
    /// spine whose side conditions hold is a prenormal sequence of the term
    /// with the head read off literally; pairing it with the other input's
    /// sequence by the same divisor puts both in division form, where
    /// uniqueness of the decomposition makes the lexicographic tail
    /// comparison decide.
    ///
    /// Splits sharing a literal head decide with both sequences already in
    /// hand. For the rest, each split's head is tried as a divisor and the
    /// other input's class is searched for a matching sequence, in sweeps of
    /// fixed size — a shallow tier over every divisor, then a deeper one —
    /// larger divisors first since their sequences sit closer to the
    /// surface. The tiers are flat rather than shares of the remaining
    /// budget: a divisor absent from the other side's reachable
    /// representations would otherwise swallow fuel the representation
    /// search needs. `None` when no trial completes, leaving the budget's
    /// remainder to the caller's fallback.
    pub(super) fn aligned_forms(
        &self,
        u: &Term,
        v: &Term,
    ) -> Option<(OrderRelation, OrderCertificate)> {
        // Collecting the splits and comparing shared-head tails recurse only
        // on strict subterm pairs, but ration them anyway so one stubborn
        // entry decision cannot starve the search trials below.
        let shared = self.with_fuel_slice(self.remaining_fuel() / 4, || {
            let u_splits = self.valid_splits(u);
            let v_splits = self.valid_splits(v);
            for su in &u_splits {
                for sv in &v_splits {
                    if su.head != sv.head {
                        continue;
                    }
                    if let Some(rel) =
                        self.lex_tails(&su.tail, su.last_op, &sv.tail, sv.last_op)
                    {
                        return Err((rel, su.clone(), sv.clone()));
                    }
                }
            }
            Ok((u_splits, v_splits))
        });
        let (u_splits, v_splits) = match shared {
            Err((rel, left, right)) => {
                let divisor = left.head.clone();
                return Some((
                    rel,
                    OrderCertificate::AlignedForms {
                        divisor,
                        left,
                        left_steps: Vec::new(),
                        right,
                        right_steps: Vec::new(),
                    },
                ));
            }
            Ok(splits) => splits,
        };

        let mut trials: Vec<(bool, &PrenormalSequence)> = u_splits
            .iter()
            .map(|s| (false, s))
            .chain(v_splits.iter().map(|s| (true, s)))
            .collect();
        trials.sort_by(|a, b| b.1.head.size().cmp(&a.1.head.size()));

        const SWEEP_TIERS: [u64; 2] = [256, 4096];
        for tier in SWEEP_TIERS {
            for &(flip, own) in &trials {
                let q = if flip { u } else { v };
                let ration = tier.min(self.remaining_fuel());
                if ration == 0 {
                    continue;
                }
                let found = self.with_fuel_slice(ration, || {
                    let (seq, steps) = self.prenormal_aligned(&own.head, q)?;
                    let rel =
                        self.lex_tails(&own.tail, own.last_op, &seq.tail, seq.last_op)?;
                    Some((seq, steps, rel))
                });
                let (seq, steps, rel) = match found {
                    Some(hit) => hit,
                    None => continue,
                };
                let relation = if flip { rel.reversed() } else { rel };
                let (left, left_steps, right, right_steps) = if flip {
                    (seq, steps, own.clone(), Vec::new())
                } else {
                    (own.clone(), Vec::new(), seq, steps)
                };
                let divisor = left.head.clone();
                return Some((
                    relation,
                    OrderCertificate::AlignedForms { divisor, left, left_steps, right, right_steps },
                ));
            }
        }
        None
    }

    /// The splits of `t` along its left spine whose side conditions hold:
    /// each is a prenormal sequence for `t` itself, head taken literally.
    fn valid_splits(&self, t: &Term) -> Vec<PrenormalSequence> {
        representations(t)
            .into_iter()
            .filter(|rep| self.prenormal_conditions(rep) == Some(true))
            .map(|rep| PrenormalSequence { head: rep.head, tail: rep.tail, last_op: rep.last_op })
            .collect()
    }

    /// Find the `d`-prenormal sequence of `q` among representations whose
    /// head is literally `d`, with the rewrite steps from `q` to the
    /// representative product. A class member equal to `d` itself yields the
    /// empty sequence. Restricting heads to structural equality costs only
    /// search depth: whenever some sequence exists, a representative built
    /// from `d` itself lies in the class.
    ///
    /// Members are explored smallest first rather than nearest first: a
    /// prenormal product is typically among the smallest members carrying
    /// the divisor as a literal head, while the class ball by step distance
    /// blows up with terms far larger than the target.
    fn prenormal_aligned(
        &self,
        d: &Term,
        q: &Term,
    ) -> Option<(PrenormalSequence, Vec<RewriteStep>)> {
        let moves = if q.is_application_term() { MoveSet::LdBoth } else { MoveSet::SigmaAll };
        let mut nodes: Vec<(Term, Option<(usize, RewriteStep)>)> = vec![(q.clone(), None)];
        let mut index: HashMap<Term, usize> = HashMap::new();
        index.insert(q.clone(), 0);
        let mut queue: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
        queue.push(Reverse((q.size(), 0)));
        let path_to = |nodes: &[(Term, Option<(usize, RewriteStep)>)], mut idx: usize| {
            let mut steps = Vec::new();
            while let Some((parent, step)) = &nodes[idx].1 {
                steps.push(step.clone());
                idx = *parent;
            }
            steps.reverse();
            steps
        };
        while let Some(Reverse((_, at))) = queue.pop() {
            let w = nodes[at].0.clone();
            if &w == d {
                let seq =
                    PrenormalSequence { head: w, tail: Vec::new(), last_op: LastOp::Apply };
                return Some((seq, path_to(&nodes, at)));
            }
            for rep in representations(&w) {
                if &rep.head != d {
                    continue;
                }
                if self.prenormal_conditions(&rep) == Some(true) {
                    let seq = PrenormalSequence {
                        head: rep.head,
                        tail: rep.tail,
                        last_op: rep.last_op,
                    };
                    return Some((seq, path_to(&nodes, at)));
                }
            }
            for (step, succ) in successors(&w, moves) {
                if succ.size() > self.config().size_cap || index.contains_key(&succ) {
                    continue;
                }
                if !self.try_spend() {
                    return None;
                }
                let idx = nodes.len();
                let size = succ.size();
                nodes.push((succ.clone(), Some((at, step))));
                index.insert(succ, idx);
                queue.push(Reverse((size, idx)));
            }
        }
        None
    }

    /// Lexicographic comparison of two sequences sharing a divisor: entries
    /// are compared by recursive order decisions, then a strict prefix ends
    /// below its extension when it ends in `·` (the extension multiplies the
    /// prefix's product from the right) and above it when it ends in `∘`;
    /// at equal length, `·` sorts below `∘`. `None` when an entry decision
    /// exhausts its fuel.
    fn lex_tails(
        &self,
        a: &[Term],
        a_op: LastOp,
        b: &[Term],
        b_op: LastOp,
    ) -> Option<OrderRelation> {
        for (ea, eb) in a.iter().zip(b) {
            match self.relation(ea, eb)? {
                OrderRelation::Equal => continue,
                strict => return Some(strict),
            }
        }
        Some(match a.len().cmp(&b.len()) {
            std::cmp::Ordering::Equal => match (a_op, b_op) {
                (LastOp::Apply, LastOp::Compose) => OrderRelation::Less,
                (LastOp::Compose, LastOp::Apply) => OrderRelation::Greater,
                _ => OrderRelation::Equal,
            },
            std::cmp::Ordering::Less => {
                if a_op == LastOp::Apply {
                    OrderRelation::Less
                } else {
                    OrderRelation::Greater
                }
            }
            std::cmp::Ordering::Greater => {
                if b_op == LastOp::Apply {
                    OrderRelation::Greater
                } else {
                    OrderRelation::Less
                }
            }
        })
    }
}

/// Lexicographic order on division forms. Children are compared index by
/// index; when one list is a prefix of the other, ending with `·` sorts
/// below continuing, which sorts below ending with `∘`; at equal length and
/// entries, `·` sorts below `∘`.
pub(crate) fn compare_forms(a: &DivisionTree, b: &DivisionTree) -> OrderRelation {
    use OrderRelation::*;
    match (a.is_leaf(), b.is_leaf()) {
        (true, true) => Equal,
        (true, false) => Less,
        (false, true) => Greater,
        (false, false) => {
            for (ca, cb) in a.children.iter().zip(&b.children) {
                let rel = compare_forms(ca, cb);
                if rel != Equal {
                    return rel;
                }
            }
            let op_a = a.last_op.expect("internal node has an operation");
            let op_b = b.last_op.expect("internal node has an operation");
            match a.children.len().cmp(&b.children.len()) {
                std::cmp::Ordering::Equal => match (op_a, op_b) {
                    (LastOp::Apply, LastOp::Compose) => Less,
                    (LastOp::Compose, LastOp::Apply) => Greater,
                    _ => Equal,
                },
                std::cmp::Ordering::Less => {
                    if op_a == LastOp::Apply {
                        Less
                    } else {
                        Greater
                    }
                }
                std::cmp::Ordering::Greater => {
                    if op_b == LastOp::Apply {
                        Greater
                    } else {
                        Less
                    }
                }
            }
        }
    }
}
