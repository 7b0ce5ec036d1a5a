//! Term syntax for the free algebras: generators combined with the binary
//! application `·` (juxtaposition) and composition `∘`.
//!
//! Text syntax accepted by [`parse_term`]:
//!
//! | form            | meaning                                   |
//! |-----------------|-------------------------------------------|
//! | `x`, `y`, `z`   | generators 0, 1, 2                        |
//! | `x0`, `x1`, ... | generator by index                        |
//! | `s t` / `s*t`   | application `s·t`, left-associative       |
//! | `s o t` / `s∘t` | composition, lowest precedence, right-assoc |
//! | `( ... )`       | grouping                                  |
//!
//! So `xxx` is `(xx)x` and `x o x x` is `x ∘ (xx)`.
//!
//! Terms are immutable and share structure through [`Arc`], which keeps the
//! iterates `w^(n)` (whose leaf counts double with `n`) cheap to build and
//! evaluate. Equality, hashing and ordering are structural.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

/// Generator index; 0 renders as `x`, 1 as `y`, 2 as `z`, others as `x<n>`.
pub type Generator = u32;

/// Default ceiling on term sizes (leaf counts) produced by term-building
/// operations such as [`iterate`] and [`sigma_decompose`].
pub const DEFAULT_SIZE_CAP: u64 = 1_000_000;

/// One step into a binary node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Left,
    Right,
}

/// A node position: the list of branches from the root.
pub type TermPath = Vec<Branch>;

/// Tree node behind a [`Term`].
#[derive(Debug)]
pub enum TermNode {
    Leaf(Generator),
    Apply(Term, Term),
    Compose(Term, Term),
}

/// An immutable, structurally shared term.
///
/// Hash and size are computed once at construction, so search indexes pay
/// constant time per lookup instead of re-walking shared trees.
#[derive(Clone)]
pub struct Term(Arc<Inner>);

struct Inner {
    node: TermNode,
    hash: u64,
    size: u64,
}

fn mix_hash(tag: u64, l: u64, r: u64) -> u64 {
    let mut z = tag
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(l.rotate_left(17))
        .wrapping_add(r.rotate_left(43) ^ 0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn dummy_leaf() -> Term {
    static DUMMY: OnceLock<Term> = OnceLock::new();
    DUMMY.get_or_init(|| Term::leaf(0)).clone()
}

fn take_children(node: &mut TermNode, out: &mut Vec<Term>) {
    if let TermNode::Apply(l, r) | TermNode::Compose(l, r) = node {
        out.push(std::mem::replace(l, dummy_leaf()));
        out.push(std::mem::replace(r, dummy_leaf()));
    }
}

// Left spines produced by parsing can be thousands of nodes deep; the derived
// recursive drop would overflow the stack there, so tear down iteratively.
impl Drop for Inner {
    fn drop(&mut self) {
        let mut stack = Vec::new();
        take_children(&mut self.node, &mut stack);
        while let Some(t) = stack.pop() {
            if let Some(mut inner) = Arc::into_inner(t.0) {
                take_children(&mut inner.node, &mut stack);
            }
        }
    }
}

impl Term {
    pub fn leaf(g: Generator) -> Term {
        Term(Arc::new(Inner {
            node: TermNode::Leaf(g),
            hash: mix_hash(0, u64::from(g), 0),
            size: 1,
        }))
    }

    /// The application `l · r`.
    pub fn apply(l: &Term, r: &Term) -> Term {
        Term(Arc::new(Inner {
            node: TermNode::Apply(l.clone(), r.clone()),
            hash: mix_hash(1, l.0.hash, r.0.hash),
            size: l.0.size.saturating_add(r.0.size),
        }))
    }

    /// The composition `l ∘ r`.
    pub fn compose(l: &Term, r: &Term) -> Term {
        Term(Arc::new(Inner {
            node: TermNode::Compose(l.clone(), r.clone()),
            hash: mix_hash(2, l.0.hash, r.0.hash),
            size: l.0.size.saturating_add(r.0.size),
        }))
    }

    pub fn node(&self) -> &TermNode {
        &self.0.node
    }

    pub fn leaf_value(&self) -> Option<Generator> {
        match self.node() {
            TermNode::Leaf(g) => Some(*g),
            _ => None,
        }
    }

    pub fn as_apply(&self) -> Option<(&Term, &Term)> {
        match self.node() {
            TermNode::Apply(l, r) => Some((l, r)),
            _ => None,
        }
    }

    pub fn as_compose(&self) -> Option<(&Term, &Term)> {
        match self.node() {
            TermNode::Compose(l, r) => Some((l, r)),
            _ => None,
        }
    }

    fn ptr(&self) -> *const Inner {
        Arc::as_ptr(&self.0)
    }

    /// Number of leaves, counting shared subtrees by multiplicity (so the
    /// size of `w^(n)` is `2^n · size(w)` even though memory stays linear).
    /// Saturates at `u64::MAX`.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    /// Distinct generators occurring in the term.
    pub fn generators(&self) -> BTreeSet<Generator> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.ptr()) {
                continue;
            }
            match t.node() {
                TermNode::Leaf(g) => {
                    out.insert(*g);
                }
                TermNode::Apply(l, r) | TermNode::Compose(l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        out
    }

    /// `Some(g)` when every leaf is the single generator `g`.
    pub fn single_generator(&self) -> Option<Generator> {
        let gens = self.generators();
        if gens.len() == 1 {
            gens.into_iter().next()
        } else {
            None
        }
    }

    /// True when the term is application-only (no `∘` anywhere).
    pub fn is_application_term(&self) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.ptr()) {
                continue;
            }
            match t.node() {
                TermNode::Compose(..) => return false,
                TermNode::Apply(l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
                TermNode::Leaf(_) => {}
            }
        }
        true
    }

    /// The subterm at `path`, if the path exists.
    pub fn subterm(&self, path: &[Branch]) -> Option<&Term> {
        let mut cur = self;
        for b in path {
            cur = match (cur.node(), b) {
                (TermNode::Apply(l, _) | TermNode::Compose(l, _), Branch::Left) => l,
                (TermNode::Apply(_, r) | TermNode::Compose(_, r), Branch::Right) => r,
                (TermNode::Leaf(_), _) => return None,
            };
        }
        Some(cur)
    }

    /// Rebuild the term with the subterm at `path` replaced.
    pub fn with_subterm(&self, path: &[Branch], replacement: Term) -> Option<Term> {
        let mut spine: Vec<&Term> = Vec::with_capacity(path.len());
        let mut cur = self;
        for b in path {
            spine.push(cur);
            cur = match (cur.node(), b) {
                (TermNode::Apply(l, _) | TermNode::Compose(l, _), Branch::Left) => l,
                (TermNode::Apply(_, r) | TermNode::Compose(_, r), Branch::Right) => r,
                (TermNode::Leaf(_), _) => return None,
            };
        }
        let mut acc = replacement;
        for (parent, b) in spine.into_iter().zip(path).rev() {
            acc = match (parent.node(), b) {
                (TermNode::Apply(_, r), Branch::Left) => Term::apply(&acc, r),
                (TermNode::Apply(l, _), Branch::Right) => Term::apply(l, &acc),
                (TermNode::Compose(_, r), Branch::Left) => Term::compose(&acc, r),
                (TermNode::Compose(l, _), Branch::Right) => Term::compose(l, &acc),
                (TermNode::Leaf(_), _) => unreachable!(),
            };
        }
        Some(acc)
    }

    /// Nodes along the chain of left children, starting at the term itself.
    pub fn left_spine(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut cur = self;
        while let Some((l, _)) = cur.as_apply() {
            out.push(l);
            cur = l;
        }
        out
    }
}

/// Pointer-memoized bottom-up fold; iterative, so safe on deep spines and
/// linear on shared structure.
pub(crate) fn fold<T: Clone>(
    t: &Term,
    mut leaf: impl FnMut(Generator) -> T,
    mut branch: impl FnMut(&TermNode, &T, &T) -> T,
) -> T {
    let mut memo: HashMap<*const Inner, T> = HashMap::new();
    let mut stack: Vec<&Term> = vec![t];
    while let Some(&cur) = stack.last() {
        let key = cur.ptr();
        if memo.contains_key(&key) {
            stack.pop();
            continue;
        }
        match cur.node() {
            TermNode::Leaf(g) => {
                let v = leaf(*g);
                memo.insert(key, v);
                stack.pop();
            }
            TermNode::Apply(l, r) | TermNode::Compose(l, r) => {
                match (memo.contains_key(&l.ptr()), memo.contains_key(&r.ptr())) {
                    (true, true) => {
                        let v = branch(cur.node(), &memo[&l.ptr()], &memo[&r.ptr()]);
                        memo.insert(key, v);
                        stack.pop();
                    }
                    (lk, rk) => {
                        if !rk {
                            stack.push(r);
                        }
                        if !lk {
                            stack.push(l);
                        }
                    }
                }
            }
        }
    }
    memo[&t.ptr()].clone()
}

fn node_rank(n: &TermNode) -> u8 {
    match n {
        TermNode::Leaf(_) => 0,
        TermNode::Apply(..) => 1,
        TermNode::Compose(..) => 2,
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if Arc::ptr_eq(&a.0, &b.0) {
                continue;
            }
            if a.0.hash != b.0.hash || a.0.size != b.0.size {
                return false;
            }
            match (a.node(), b.node()) {
                (TermNode::Leaf(g), TermNode::Leaf(h)) => {
                    if g != h {
                        return false;
                    }
                }
                (TermNode::Apply(al, ar), TermNode::Apply(bl, br))
                | (TermNode::Compose(al, ar), TermNode::Compose(bl, br)) => {
                    stack.push((ar, br));
                    stack.push((al, bl));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// Lexicographic on the preorder node stream; used only to give frontier sets
// and memo keys a deterministic order, not as the algebra's order.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if Arc::ptr_eq(&a.0, &b.0) {
                continue;
            }
            let (na, nb) = (a.node(), b.node());
            match node_rank(na).cmp(&node_rank(nb)) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match (na, nb) {
                (TermNode::Leaf(g), TermNode::Leaf(h)) => match g.cmp(h) {
                    Ordering::Equal => {}
                    ord => return ord,
                },
                (TermNode::Apply(al, ar), TermNode::Apply(bl, br))
                | (TermNode::Compose(al, ar), TermNode::Compose(bl, br)) => {
                    stack.push((ar, br));
                    stack.push((al, bl));
                }
                _ => unreachable!("ranks equal"),
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_term(self, RenderStyle::Compact))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

impl FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn parse_err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError { position, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Gen(Generator),
    Star,
    Circ,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '(' => {
                it.next();
                out.push((Tok::LParen, pos));
            }
            ')' => {
                it.next();
                out.push((Tok::RParen, pos));
            }
            '*' => {
                it.next();
                out.push((Tok::Star, pos));
            }
            'o' | '∘' => {
                it.next();
                out.push((Tok::Circ, pos));
            }
            'y' => {
                it.next();
                out.push((Tok::Gen(1), pos));
            }
            'z' => {
                it.next();
                out.push((Tok::Gen(2), pos));
            }
            'x' => {
                it.next();
                let mut digits = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                let g = if digits.is_empty() {
                    0
                } else {
                    digits
                        .parse::<u32>()
                        .map_err(|_| parse_err(pos, "generator index too large"))?
                };
                out.push((Tok::Gen(g), pos));
            }
            other => return Err(parse_err(pos, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

const MAX_PARSE_DEPTH: usize = 2_000;

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|&(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_PARSE_DEPTH {
            Err(parse_err(self.here(), "expression too deeply nested"))
        } else {
            Ok(())
        }
    }

    fn compose_expr(&mut self) -> Result<Term, ParseError> {
        self.enter()?;
        let lhs = self.apply_expr()?;
        let t = if self.peek() == Some(Tok::Circ) {
            self.bump();
            let rhs = self.compose_expr()?;
            Term::compose(&lhs, &rhs)
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(t)
    }

    fn apply_expr(&mut self) -> Result<Term, ParseError> {
        let mut t = self.primary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.primary()?;
                    t = Term::apply(&t, &rhs);
                }
                Some(Tok::Gen(_)) | Some(Tok::LParen) => {
                    let rhs = self.primary()?;
                    t = Term::apply(&t, &rhs);
                }
                _ => return Ok(t),
            }
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        self.enter()?;
        let here = self.here();
        let t = match self.bump() {
            Some(Tok::Gen(g)) => Term::leaf(g),
            Some(Tok::LParen) => {
                let inner = self.compose_expr()?;
                match self.bump() {
                    Some(Tok::RParen) => inner,
                    _ => return Err(parse_err(self.here(), "expected ')'")),
                }
            }
            Some(tok) => return Err(parse_err(here, format!("unexpected token {tok:?}"))),
            None => return Err(parse_err(here, "unexpected end of input")),
        };
        self.depth -= 1;
        Ok(t)
    }
}

/// Parse the term syntax described in the module docs.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(parse_err(0, "empty term"));
    }
    let mut p = Parser { toks, pos: 0, end: text.len(), depth: 0 };
    let t = p.compose_expr()?;
    if p.pos < p.toks.len() {
        return Err(parse_err(p.here(), "unexpected trailing input"));
    }
    Ok(t)
}

/// How [`render_term`] parenthesizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderStyle {
    /// Minimal parentheses given the grammar's conventions.
    Compact,
    /// Parentheses around every internal node.
    FullParens,
}

fn generator_name(g: Generator) -> String {
    match g {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        n => format!("x{n}"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RenderPos {
    Root,
    ApplyLeft,
    ApplyRight,
    ComposeLeft,
    ComposeRight,
}

/// Render to text; the result reparses to a structurally identical term.
pub fn render_term(t: &Term, style: RenderStyle) -> String {
    enum Work<'a> {
        Node(&'a Term, RenderPos),
        Lit(&'static str),
    }
    let mut out = String::new();
    let mut stack = vec![Work::Node(t, RenderPos::Root)];
    while let Some(w) = stack.pop() {
        match w {
            Work::Lit(s) => out.push_str(s),
            Work::Node(t, pos) => {
                let parens = match (t.node(), style) {
                    (TermNode::Leaf(_), _) => false,
                    (_, RenderStyle::FullParens) => true,
                    (TermNode::Apply(..), _) => pos == RenderPos::ApplyRight,
                    (TermNode::Compose(..), _) => matches!(
                        pos,
                        RenderPos::ApplyLeft | RenderPos::ApplyRight | RenderPos::ComposeLeft
                    ),
                };
                if parens {
                    stack.push(Work::Lit(")"));
                }
                match t.node() {
                    TermNode::Leaf(g) => out.push_str(&generator_name(*g)),
                    TermNode::Apply(l, r) => {
                        stack.push(Work::Node(r, RenderPos::ApplyRight));
                        stack.push(Work::Node(l, RenderPos::ApplyLeft));
                    }
                    TermNode::Compose(l, r) => {
                        stack.push(Work::Node(r, RenderPos::ComposeRight));
                        stack.push(Work::Lit("∘"));
                        stack.push(Work::Node(l, RenderPos::ComposeLeft));
                    }
                }
                if parens {
                    out.push('(');
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("term size {size} exceeds the cap of {cap} leaves")]
    SizeCapExceeded { size: u64, cap: u64 },
}

/// `w^(n)`: `w^(0) = w`, `w^(i+1) = w^(i) w^(i)`. Structure sharing keeps
/// memory linear in `n` even though the leaf count is `2^n · size(w)`.
pub fn iterate(w: &Term, n: u32, cap: u64) -> Result<Term, TermError> {
    let factor = if n >= 63 { u64::MAX } else { 1u64 << n };
    let size = w.size().saturating_mul(factor);
    if size > cap {
        return Err(TermError::SizeCapExceeded { size, cap });
    }
    let mut t = w.clone();
    for _ in 0..n {
        t = Term::apply(&t, &t);
    }
    Ok(t)
}

/// The two-generator iterates `I_0 = k, I_1 = j, I_{n+2} = I_{n+1} I_n`
/// (with `j` = generator 0 rendered `x`, `k` = generator 1 rendered `y`).
pub fn iterate_pair(n: u32, cap: u64) -> Result<Term, TermError> {
    let mut prev = Term::leaf(1);
    let mut cur = Term::leaf(0);
    let (mut sp, mut sc) = (1u64, 1u64);
    if n == 0 {
        return Ok(prev);
    }
    for _ in 1..n {
        let next = Term::apply(&cur, &prev);
        let sn = sc.saturating_add(sp);
        if sn > cap {
            return Err(TermError::SizeCapExceeded { size: sn, cap });
        }
        prev = cur;
        cur = next;
        sp = sc;
        sc = sn;
    }
    Ok(cur)
}

/// A term rewritten as a composition of application-only factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaDecomposition {
    /// The factors `w_1, …, w_m`, each free of `∘`.
    pub factors: Vec<Term>,
}

impl SigmaDecomposition {
    /// The composition length `c(w)`; an invariant of the Σ-equivalence class.
    pub fn composition_length(&self) -> usize {
        self.factors.len()
    }

    /// Rebuild `w_1 ∘ (w_2 ∘ (… ∘ w_m))` — a term Σ-equivalent to the input.
    pub fn recompose(&self) -> Term {
        let mut it = self.factors.iter().rev();
        let mut acc = it.next().expect("decomposition is never empty").clone();
        for f in it {
            acc = Term::compose(f, &acc);
        }
        acc
    }
}

/// Composition length `c(w)` without materializing the factors:
/// `c(g) = 1`, `c(s·t) = c(t)`, `c(s∘t) = c(s) + c(t)`.
pub fn composition_length(t: &Term) -> u64 {
    fold(t, |_| 1u64, |node, l, r| match node {
        TermNode::Apply(..) => *r,
        TermNode::Compose(..) => l.saturating_add(*r),
        TermNode::Leaf(_) => unreachable!(),
    })
}

/// Push every `∘` to the top by the rewrites `(a∘b)c → a(bc)` and
/// `a(b∘c) → ab ∘ ac` (applied exhaustively, innermost first), then flatten
/// associativity: the result is the factor list of `w = w_1 ∘ … ∘ w_m`.
pub fn sigma_decompose(w: &Term, cap: u64) -> Result<SigmaDecomposition, TermError> {
    // Applying the factor lists directly: factors(s·t) maps each factor t_i of
    // t to s_1(s_2(…(s_m t_i))) where s_j are the factors of s; factors(s∘t)
    // concatenates. This is exactly the innermost-first rewrite's result.
    if w.is_application_term() {
        let size = w.size();
        if size > cap {
            return Err(TermError::SizeCapExceeded { size, cap });
        }
        return Ok(SigmaDecomposition { factors: vec![w.clone()] });
    }
    type Entry = (Vec<Term>, u64);
    let overflow = std::cell::Cell::new(false);
    let nest = |prefix: &[Term], inner: &Term| -> Term {
        let mut acc = inner.clone();
        for f in prefix.iter().rev() {
            acc = Term::apply(f, &acc);
        }
        acc
    };
    let result: Entry = fold(
        w,
        |g| (vec![Term::leaf(g)], 1u64),
        |node, l: &Entry, r: &Entry| {
            if overflow.get() {
                return (Vec::new(), u64::MAX);
            }
            match node {
                TermNode::Compose(..) => {
                    let mut fs = l.0.clone();
                    fs.extend(r.0.iter().cloned());
                    (fs, l.1.saturating_add(r.1))
                }
                TermNode::Apply(..) => {
                    let prefix_size: u64 = l.1;
                    let total = r.1.saturating_add(prefix_size.saturating_mul(r.0.len() as u64));
                    if total > cap {
                        overflow.set(true);
                        return (Vec::new(), u64::MAX);
                    }
                    let fs = r.0.iter().map(|bi| nest(&l.0, bi)).collect();
                    (fs, total)
                }
                TermNode::Leaf(_) => unreachable!(),
            }
        },
    );
    if overflow.get() {
        return Err(TermError::SizeCapExceeded { size: u64::MAX, cap });
    }
    Ok(SigmaDecomposition { factors: result.0 })
}

/// All application-only terms over `generator` with between 1 and `max_size`
/// leaves, in (size, structure) order. Catalan growth: keep `max_size` small.
pub fn enumerate_application_terms(generator: Generator, max_size: usize) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(), vec![Term::leaf(generator)]];
    for n in 2..=max_size {
        let mut level = Vec::new();
        for i in 1..n {
            for l in &by_size[i] {
                for r in &by_size[n - i] {
                    level.push(Term::apply(l, r));
                }
            }
        }
        by_size.push(level);
    }
    by_size.into_iter().skip(1).flatten().collect()
}

/// A random application-only term with exactly `size` leaves (uniform splits,
/// not uniform over shapes — fine for fuzzing).
pub fn random_application_term(rng: &mut impl rand::Rng, generator: Generator, size: u32) -> Term {
    if size <= 1 {
        return Term::leaf(generator);
    }
    let left = rng.gen_range(1..size);
    let l = random_application_term(rng, generator, left);
    let r = random_application_term(rng, generator, size - left);
    Term::apply(&l, &r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn juxtaposition_is_left_associative() {
        assert_eq!(t("xxx"), t("(xx)x"));
        assert_ne!(t("xxx"), t("x(xx)"));
        assert_eq!(t("x*x*x"), t("xxx"));
    }

    #[test]
    fn compose_binds_loosest_and_associates_right() {
        assert_eq!(t("x o x x"), Term::compose(&t("x"), &t("xx")));
        assert_eq!(t("x o x o x"), Term::compose(&t("x"), &Term::compose(&t("x"), &t("x"))));
        assert_eq!(t("x∘x"), t("x o x"));
    }

    #[test]
    fn generator_names_roundtrip() {
        assert_eq!(t("y"), Term::leaf(1));
        assert_eq!(t("x1"), Term::leaf(1));
        assert_eq!(t("x12x3"), Term::apply(&Term::leaf(12), &Term::leaf(3)));
        assert_eq!(render_term(&Term::leaf(1), RenderStyle::Compact), "y");
        assert_eq!(render_term(&Term::leaf(7), RenderStyle::Compact), "x7");
        // "xx3" must tokenize as x, x3 — juxtaposition never glues into digits
        assert_eq!(t("xx3"), Term::apply(&Term::leaf(0), &Term::leaf(3)));
    }

    #[test]
    fn render_compact_roundtrips() {
        for s in ["x", "xx", "x(xx)", "(xx)(xx)", "xx∘x", "x∘(x∘x)", "(x∘x)x", "xy(zx3)"] {
            let term = t(s);
            let rendered = render_term(&term, RenderStyle::Compact);
            assert_eq!(parse_term(&rendered).unwrap(), term, "compact roundtrip of {s}");
            let full = render_term(&term, RenderStyle::FullParens);
            assert_eq!(parse_term(&full).unwrap(), term, "full-parens roundtrip of {s}");
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(parse_term("x)").unwrap_err().position, 1);
        assert!(parse_term("").is_err());
        assert!(parse_term("x o").is_err());
        assert!(parse_term("q").is_err());
        assert!(parse_term("x99999999999999999999").is_err());
    }

    #[test]
    fn deep_input_is_rejected_not_crashed() {
        let mut s = String::new();
        for _ in 0..MAX_PARSE_DEPTH + 10 {
            s.push('(');
        }
        s.push('x');
        for _ in 0..MAX_PARSE_DEPTH + 10 {
            s.push(')');
        }
        assert!(parse_term(&s).is_err());
        // a long flat application chain is fine and must not blow the stack
        let flat = "x".repeat(50_000);
        let term = parse_term(&flat).unwrap();
        assert_eq!(term.size(), 50_000);
        let other = parse_term(&flat).unwrap();
        assert_eq!(term, other);
        drop(term);
        drop(other);
    }

    #[test]
    fn iterate_shares_structure() {
        let w = t("x");
        let w2 = iterate(&w, 2, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(w2, t("(xx)(xx)"));
        assert_eq!(render_term(&w2, RenderStyle::Compact), "xx(xx)");
        let big = iterate(&w, 40, u64::MAX).unwrap();
        assert_eq!(big.size(), 1u64 << 40);
        assert!(iterate(&w, 40, DEFAULT_SIZE_CAP).is_err());
    }

    #[test]
    fn iterate_pair_matches_recursion() {
        let cap = DEFAULT_SIZE_CAP;
        assert_eq!(iterate_pair(0, cap).unwrap(), t("y"));
        assert_eq!(iterate_pair(1, cap).unwrap(), t("x"));
        assert_eq!(iterate_pair(2, cap).unwrap(), t("xy"));
        assert_eq!(iterate_pair(3, cap).unwrap(), t("xyx"));
        assert_eq!(iterate_pair(4, cap).unwrap(), t("xyx(xy)"));
        for n in 2..10 {
            let a = iterate_pair(n, cap).unwrap();
            let b = iterate_pair(n - 1, cap).unwrap();
            let c = iterate_pair(n - 2, cap).unwrap();
            assert_eq!(a, Term::apply(&b, &c));
        }
    }

    #[test]
    fn sigma_decomposition_examples() {
        let d = sigma_decompose(&t("x∘(x∘x)"), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(d.factors, vec![t("x"), t("x"), t("x")]);
        assert_eq!(d.composition_length(), 3);

        let d = sigma_decompose(&t("(x∘x)x"), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(d.factors, vec![t("x(xx)")]);

        let d = sigma_decompose(&t("x(x∘x)"), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(d.factors, vec![t("xx"), t("xx")]);

        let d = sigma_decompose(&t("xx∘x"), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(d.factors, vec![t("xx"), t("x")]);

        let a_term = t("x(xx)");
        let d = sigma_decompose(&a_term, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(d.factors, vec![a_term]);
    }

    #[test]
    fn composition_length_shortcut_agrees() {
        for s in ["x", "xx", "x∘x", "(x∘x)x", "x(x∘x)", "(x∘x)∘(x∘(x∘x))", "xx∘x"] {
            let term = t(s);
            let d = sigma_decompose(&term, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(composition_length(&term), d.composition_length() as u64, "{s}");
        }
    }

    #[test]
    fn subterm_navigation() {
        let term = t("x(xx)");
        assert_eq!(term.subterm(&[Branch::Right, Branch::Left]), Some(&t("x")));
        assert_eq!(term.subterm(&[Branch::Left, Branch::Left]), None);
        let swapped = term.with_subterm(&[Branch::Right], t("y")).unwrap();
        assert_eq!(swapped, t("xy"));
    }

    #[test]
    fn enumeration_counts_are_catalan() {
        let counts: Vec<usize> = (1..=7)
            .map(|n| {
                enumerate_application_terms(0, n)
                    .into_iter()
                    .filter(|t| t.size() == n as u64)
                    .count()
            })
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132]);
    }
}
