//! Braid words and their partial action on sequences of terms.
//!
//! The infinite braid group is generated by `σ1, σ2, …`; the shift
//! endomorphism sends `σi` to `σi+1`. The bracket operation
//! `a[b] = a · s(b) · σ1 · s(a)⁻¹` is left distributive on the group, and
//! encoding application terms by `α(x) = ε`, `α(bc) = α(b)[α(c)]` embeds
//! the one-generator free algebra into the closure of the empty word under
//! the bracket. Words act partially on sequences of terms from the right:
//! `σi` multiplies entry `i` onto entry `i+1` and keeps a copy, so the
//! encoding of `b` carries the constant sequence `⟨x, x, …⟩` to
//! `⟨b, x, x, …⟩`; inverse letters undo that by left division, which is
//! where the action becomes partial.
//!
//! Words are kept freely reduced. Equality of words is not braid-group
//! equality — all group-level claims are made through the action, where the
//! rewriting engine supplies the equality oracle on entries.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::rewrite::{Engine, OrderRelation, PrenormalOutcome, RewriteConfig, RewriteError};
use crate::table::TableStore;
use crate::term::{render_term, RenderStyle, Term};

/// One braid generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BraidLetter {
    /// Generator index, starting at 1.
    pub index: u32,
    pub inverse: bool,
}

impl BraidLetter {
    pub fn positive(index: u32) -> BraidLetter {
        BraidLetter { index, inverse: false }
    }

    pub fn negative(index: u32) -> BraidLetter {
        BraidLetter { index, inverse: true }
    }

    pub fn inverted(self) -> BraidLetter {
        BraidLetter { index: self.index, inverse: !self.inverse }
    }

    fn cancels(self, other: BraidLetter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }
}

impl fmt::Display for BraidLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.inverse { 'S' } else { 's' }, self.index)
    }
}

/// A freely reduced braid word. Constructors reduce, so no value of this
/// type carries an adjacent inverse pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BraidWord {
    letters: Vec<BraidLetter>,
}

/// Cancel adjacent inverse pairs until none remain.
pub fn free_reduce(letters: &[BraidLetter]) -> BraidWord {
    let mut reduced: Vec<BraidLetter> = Vec::with_capacity(letters.len());
    for &letter in letters {
        if reduced.last().is_some_and(|&top| top.cancels(letter)) {
            reduced.pop();
        } else {
            reduced.push(letter);
        }
    }
    BraidWord { letters: reduced }
}

impl BraidWord {
    pub fn empty() -> BraidWord {
        BraidWord::default()
    }

    /// The word `σi`.
    pub fn generator(index: u32) -> BraidWord {
        BraidWord { letters: vec![BraidLetter::positive(index)] }
    }

    pub fn from_letters(letters: &[BraidLetter]) -> BraidWord {
        free_reduce(letters)
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation, reduced across the seam.
    pub fn concat(&self, other: &BraidWord) -> BraidWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        free_reduce(&letters)
    }

    /// The group inverse: letters reversed and inverted. Reduction is
    /// preserved, no re-scan needed.
    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// The shift endomorphism `σi → σi+1`.
    pub fn shift(&self) -> BraidWord {
        BraidWord {
            letters: self
                .letters
                .iter()
                .map(|l| BraidLetter { index: l.index + 1, inverse: l.inverse })
                .collect(),
        }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "ε");
        }
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

/// Where in the input a parse failed, by whitespace-separated token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraidParseError {
    #[error("token {position}: expected s<i> or S<i>, found {token:?}")]
    BadToken { position: usize, token: String },
    #[error("token {position}: braid generator indices start at 1")]
    ZeroIndex { position: usize },
}

/// Parse a braid word: letters `s<i>` (for `σi`) and `S<i>` (for `σi⁻¹`)
/// separated by whitespace, e.g. `"s2 s1"`. The empty string, `"e"`, and
/// `"ε"` all denote the empty word. The result is freely reduced.
pub fn parse_braid_word(input: &str) -> Result<BraidWord, BraidParseError> {
    let mut letters = Vec::new();
    for (position, token) in input.split_whitespace().enumerate() {
        if token == "e" || token == "ε" {
            continue;
        }
        let bad = || BraidParseError::BadToken { position, token: token.to_string() };
        let mut chars = token.chars();
        let inverse = match chars.next() {
            Some('s') => false,
            Some('S') => true,
            _ => return Err(bad()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let index: u32 = digits.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(BraidParseError::ZeroIndex { position });
        }
        letters.push(BraidLetter { index, inverse });
    }
    Ok(free_reduce(&letters))
}

/// The bracket `a[b] = a · s(b) · σ1 · s(a)⁻¹`, freely reduced.
pub fn bracket(a: &BraidWord, b: &BraidWord) -> BraidWord {
    a.concat(&b.shift()).concat(&BraidWord::generator(1)).concat(&a.shift().inverse())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraidError {
    #[error("the braid encoding is defined on application terms only")]
    ComposeNode,
    #[error("the braid encoding requires a single-generator term")]
    MultipleGenerators,
    #[error("closure enumeration capped: {shapes} term shapes exceed {cap}")]
    ClosureCap { shapes: usize, cap: usize },
}

/// Encode an application term as a braid word: the generator maps to the
/// empty word and `α(bc) = α(b)[α(c)]`.
pub fn alpha_of(term: &Term) -> Result<BraidWord, BraidError> {
    if term.generators().len() > 1 {
        return Err(BraidError::MultipleGenerators);
    }
    // memoized on subterms: deep left spines revisit the same encodings
    fn go(term: &Term, memo: &mut BTreeMap<Term, BraidWord>) -> Result<BraidWord, BraidError> {
        if let Some(word) = memo.get(term) {
            return Ok(word.clone());
        }
        let word = if term.leaf_value().is_some() {
            BraidWord::empty()
        } else if let Some((l, r)) = term.as_apply() {
            bracket(&go(l, memo)?, &go(r, memo)?)
        } else {
            return Err(BraidError::ComposeNode);
        };
        memo.insert(term.clone(), word.clone());
        Ok(word)
    }
    go(term, &mut BTreeMap::new())
}

/// A sequence of terms, implicitly extended by the generator `x` beyond the
/// stored prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSequence {
    entries: Vec<Term>,
}

impl TermSequence {
    /// The constant sequence `⟨x, x, …⟩`.
    pub fn all_x() -> TermSequence {
        TermSequence { entries: Vec::new() }
    }

    pub fn new(entries: Vec<Term>) -> TermSequence {
        TermSequence { entries }
    }

    /// The stored prefix; positions beyond it hold `x`.
    pub fn entries(&self) -> &[Term] {
        &self.entries
    }

    /// The entry at 1-based `position`.
    pub fn entry(&self, position: usize) -> Term {
        assert!(position >= 1, "sequence positions start at 1");
        self.entries.get(position - 1).cloned().unwrap_or_else(|| Term::leaf(0))
    }

    /// Drop stored trailing `x` entries (they remain implicitly).
    pub fn trimmed(&self) -> TermSequence {
        let mut entries = self.entries.clone();
        while entries.last() == Some(&Term::leaf(0)) {
            entries.pop();
        }
        TermSequence { entries }
    }

    fn ensure_len(&mut self, n: usize) {
        while self.entries.len() < n {
            self.entries.push(Term::leaf(0));
        }
    }
}

impl fmt::Display for TermSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, t) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", render_term(t, RenderStyle::Compact))?;
        }
        if self.entries.is_empty() {
            write!(f, "x, x, …")?;
        } else {
            write!(f, ", x, …")?;
        }
        write!(f, "⟩")
    }
}

/// Result of acting on a sequence.
#[derive(Debug, Clone)]
pub enum ActOutcome {
    Acted(TermSequence),
    /// An inverse letter asked for a left quotient that does not exist:
    /// `letter` is the 0-based position in the word, `index` its generator.
    Undefined { letter: usize, index: u32 },
    Exhausted { fuel_spent: u64 },
}

/// Act on `seq` by `word`, leftmost letter first. A positive `σi` replaces
/// the entries `(a, b)` at positions `(i, i+1)` by `(a·b, a)`; an inverse
/// `σi⁻¹` replaces them by `(b, c)` where `b·c ≡ a`, the quotient `c` found
/// by prenormal decomposition — left cancellation makes it unique, and its
/// absence (a decomposition by `b` with more than one entry, or `b` not
/// strictly below `a`) makes the action undefined.
pub fn act(
    store: &TableStore,
    word: &BraidWord,
    seq: &TermSequence,
    cfg: &RewriteConfig,
) -> Result<ActOutcome, RewriteError> {
    let engine = Engine::new(store, cfg.clone());
    let mut current = seq.clone();
    for (at, letter) in word.letters().iter().enumerate() {
        let i = letter.index as usize;
        current.ensure_len(i + 1);
        let a = current.entries[i - 1].clone();
        let b = current.entries[i].clone();
        if !letter.inverse {
            current.entries[i - 1] = Term::apply(&a, &b);
            current.entries[i] = a;
            continue;
        }
        let undefined = ActOutcome::Undefined { letter: at, index: letter.index };
        match engine.relation(&b, &a) {
            None => return Ok(ActOutcome::Exhausted { fuel_spent: engine.fuel_used() }),
            Some(OrderRelation::Less) => {}
            // a = b·c forces b strictly below a
            Some(_) => return Ok(undefined),
        }
        match engine.prenormal(&b, &a)? {
            PrenormalOutcome::Exhausted { fuel_spent } => {
                return Ok(ActOutcome::Exhausted { fuel_spent });
            }
            PrenormalOutcome::Decomposed(dec) => {
                // a single-entry tail is exactly a quotient; longer tails
                // rule one out, since b·c is itself a one-entry sequence
                // and the decomposition by a fixed divisor is unique
                if dec.tail.len() == 1 {
                    current.entries[i - 1] = b;
                    current.entries[i] = dec.tail[0].clone();
                } else {
                    return Ok(undefined);
                }
            }
        }
    }
    Ok(ActOutcome::Acted(current))
}

/// Ceiling on the number of term shapes `closure_sample` will encode.
const CLOSURE_SHAPE_CAP: usize = 20_000;

/// The bracket-closure of a word, sampled by encoding every application-term
/// shape up to `max_size` leaves with `a` in place of the generator:
/// `x ↦ a`, `bc ↦ word(b)[word(c)]`. Returns `(shape, word)` pairs with
/// exact duplicate words removed (first shape kept).
pub fn closure_sample(
    a: &BraidWord,
    max_size: usize,
) -> Result<Vec<(Term, BraidWord)>, BraidError> {
    let shapes = crate::term::enumerate_application_terms(0, max_size);
    if shapes.len() > CLOSURE_SHAPE_CAP {
        return Err(BraidError::ClosureCap { shapes: shapes.len(), cap: CLOSURE_SHAPE_CAP });
    }
    let mut words: BTreeMap<Term, BraidWord> = BTreeMap::new();
    fn word_for(
        shape: &Term,
        base: &BraidWord,
        memo: &mut BTreeMap<Term, BraidWord>,
    ) -> BraidWord {
        if let Some(word) = memo.get(shape) {
            return word.clone();
        }
        let word = match shape.as_apply() {
            None => base.clone(),
            Some((l, r)) => bracket(&word_for(l, base, memo), &word_for(r, base, memo)),
        };
        memo.insert(shape.clone(), word.clone());
        word
    }
    let mut seen: Vec<BraidWord> = Vec::new();
    let mut out = Vec::new();
    for shape in shapes {
        let word = word_for(&shape, a, &mut words);
        if seen.contains(&word) {
            continue;
        }
        seen.push(word.clone());
        out.push((shape, word));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{decide_equiv, Equivalence};
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn w(s: &str) -> BraidWord {
        parse_braid_word(s).unwrap()
    }

    fn store() -> TableStore {
        TableStore::in_memory()
    }

    fn cfg() -> RewriteConfig {
        RewriteConfig::default()
    }

    fn acted(word: &str, entries: &[&str]) -> ActOutcome {
        let s = store();
        let seq = TermSequence::new(entries.iter().map(|e| t(e)).collect());
        act(&s, &w(word), &seq, &cfg()).unwrap()
    }

    fn assert_entries(outcome: &ActOutcome, expected: &[&str]) {
        match outcome {
            ActOutcome::Acted(seq) => {
                let got: Vec<Term> = seq.entries().to_vec();
                let want: Vec<Term> = expected.iter().map(|e| t(e)).collect();
                assert_eq!(got, want);
            }
            other => panic!("expected a result sequence, got {other:?}"),
        }
    }

    #[test]
    fn free_reduction_examples() {
        let s1 = BraidLetter::positive(1);
        let s1i = BraidLetter::negative(1);
        let s2 = BraidLetter::positive(2);
        let s2i = BraidLetter::negative(2);
        assert_eq!(free_reduce(&[s1, s1i]), BraidWord::empty());
        assert_eq!(free_reduce(&[s1, s2, s2i, s1]), w("s1 s1"));
        assert_eq!(free_reduce(&[]), BraidWord::empty());
        // cancellations cascade through the seam
        assert_eq!(free_reduce(&[s1, s2, s2i, s1i]), BraidWord::empty());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(w("s1").shift(), w("s2"));
        assert_eq!(w("s1 S3").shift(), w("s2 S4"));
        assert_eq!(BraidWord::empty().shift(), BraidWord::empty());
    }

    #[test]
    fn inverse_reverses_and_flips() {
        assert_eq!(w("s2 s1").inverse(), w("S1 S2"));
        assert_eq!(w("s1 S3").inverse(), w("s3 S1"));
        let word = w("s1 s2 S1");
        assert_eq!(word.concat(&word.inverse()), BraidWord::empty());
    }

    #[test]
    fn bracket_examples() {
        let e = BraidWord::empty();
        let s1 = w("s1");
        assert_eq!(bracket(&e, &e), s1);
        assert_eq!(bracket(&s1, &e), w("s1 s1 S2"));
        assert_eq!(bracket(&e, &s1), w("s2 s1"));
    }

    #[test]
    fn encoding_examples() {
        assert_eq!(alpha_of(&t("x")).unwrap(), BraidWord::empty());
        assert_eq!(alpha_of(&t("xx")).unwrap(), w("s1"));
        assert_eq!(alpha_of(&t("x(xx)")).unwrap(), w("s2 s1"));
        assert_eq!(alpha_of(&t("(xx)x")).unwrap(), w("s1 s1 S2"));
    }

    #[test]
    fn encoding_rejects_composition_and_mixed_generators() {
        assert_eq!(alpha_of(&t("x∘x")), Err(BraidError::ComposeNode));
        assert_eq!(alpha_of(&t("xy")), Err(BraidError::MultipleGenerators));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["s1", "s2 s1", "s1 s1 S2", "S4 s10"] {
            let word = w(text);
            assert_eq!(word.to_string(), text);
            assert_eq!(parse_braid_word(&word.to_string()).unwrap(), word);
        }
        assert_eq!(w(""), BraidWord::empty());
        assert_eq!(w("e"), BraidWord::empty());
        assert_eq!(w("ε"), BraidWord::empty());
        assert_eq!(BraidWord::empty().to_string(), "ε");
        // parsing reduces
        assert_eq!(w("s1 S1"), BraidWord::empty());
    }

    #[test]
    fn parse_errors_carry_the_offending_token() {
        assert_eq!(
            parse_braid_word("s1 t2"),
            Err(BraidParseError::BadToken { position: 1, token: "t2".into() })
        );
        assert_eq!(
            parse_braid_word("s"),
            Err(BraidParseError::BadToken { position: 0, token: "s".into() })
        );
        assert_eq!(
            parse_braid_word("sx1"),
            Err(BraidParseError::BadToken { position: 0, token: "sx1".into() })
        );
        assert_eq!(parse_braid_word("s1 s0"), Err(BraidParseError::ZeroIndex { position: 1 }));
    }

    #[test]
    fn action_worked_examples() {
        // σ2 first (leftmost acts first), then σ1
        assert_entries(&acted("s2 s1", &["x", "x", "x"]), &["x(xx)", "x", "x"]);
        assert_entries(&acted("S1", &["xx", "x"]), &["x", "x"]);
        match acted("S1", &["x", "xx"]) {
            ActOutcome::Undefined { letter: 0, index: 1 } => {}
            other => panic!("expected undefined, got {other:?}"),
        }
    }

    #[test]
    fn action_pads_the_implicit_tail() {
        // σ3 reads positions 3 and 4 of ⟨xx⟩ = ⟨xx, x, x, x, …⟩
        assert_entries(&acted("s3", &["xx"]), &["xx", "x", "xx", "x"]);
        let trimmed = match acted("s1", &["x"]) {
            ActOutcome::Acted(seq) => seq,
            other => panic!("{other:?}"),
        };
        assert_eq!(trimmed.entries(), &[t("xx"), t("x")]);
        assert_eq!(trimmed.trimmed().entries(), &[t("xx")]);
        assert_eq!(trimmed.entry(5), t("x"));
    }

    #[test]
    fn quotients_with_longer_decompositions_are_undefined() {
        // (xx)x ≡ x·x·x has no single quotient by x: the x-decomposition
        // carries two tail entries
        match acted("S1", &["(xx)x", "x"]) {
            ActOutcome::Undefined { letter: 0, index: 1 } => {}
            other => panic!("expected undefined, got {other:?}"),
        }
    }

    #[test]
    fn encodings_act_as_their_terms() {
        let s = store();
        for term in ["x", "xx", "x(xx)", "(xx)x", "(xx)(xx)", "x(x(xx))", "((xx)x)x"] {
            let b = t(term);
            let word = alpha_of(&b).unwrap();
            let out = act(&s, &word, &TermSequence::all_x(), &cfg()).unwrap();
            let seq = match out {
                ActOutcome::Acted(seq) => seq,
                other => panic!("act(α({term})) failed: {other:?}"),
            };
            match decide_equiv(&s, &seq.entry(1), &b, &cfg()).unwrap() {
                Equivalence::Equivalent(_) => {}
                other => panic!("α({term}) produced {}: {other:?}", seq.entry(1)),
            }
            for (i, entry) in seq.entries().iter().enumerate().skip(1) {
                match decide_equiv(&s, entry, &t("x"), &cfg()).unwrap() {
                    Equivalence::Equivalent(_) => {}
                    other => panic!("α({term}) entry {}: {other:?}", i + 1),
                }
            }
        }
    }

    #[test]
    fn action_undoes_through_the_inverse_word() {
        let s = store();
        let start = TermSequence::new(vec![t("xx"), t("x(xx)"), t("x")]);
        for word in ["s1", "s2 s1", "s1 s2", "s1 s1"] {
            let word = w(word);
            let forward = match act(&s, &word, &start, &cfg()).unwrap() {
                ActOutcome::Acted(seq) => seq,
                other => panic!("{other:?}"),
            };
            let back = match act(&s, &word.inverse(), &forward, &cfg()).unwrap() {
                ActOutcome::Acted(seq) => seq,
                other => panic!("inverse act undefined: {other:?}"),
            };
            let n = start.entries().len().max(back.entries().len());
            for i in 1..=n {
                match decide_equiv(&s, &back.entry(i), &start.entry(i), &cfg()).unwrap() {
                    Equivalence::Equivalent(_) => {}
                    other => panic!("entry {i} after round trip: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn closure_samples() {
        let e = BraidWord::empty();
        let one: Vec<BraidWord> =
            closure_sample(&e, 1).unwrap().into_iter().map(|(_, word)| word).collect();
        assert_eq!(one, vec![BraidWord::empty()]);

        let two: Vec<BraidWord> =
            closure_sample(&e, 2).unwrap().into_iter().map(|(_, word)| word).collect();
        assert_eq!(two, vec![BraidWord::empty(), w("s1")]);

        let three: Vec<BraidWord> =
            closure_sample(&e, 3).unwrap().into_iter().map(|(_, word)| word).collect();
        assert!(three.contains(&w("s2 s1")));
        assert!(three.contains(&w("s1 s1 S2")));

        // seeded closures encode through the seed word
        let seeded = closure_sample(&w("s1"), 2).unwrap();
        assert_eq!(seeded[1].1, bracket(&w("s1"), &w("s1")));
    }
}
