//! Finite and syntactic combinatorics of the left-distributive law:
//! finite tables on `{0, …, 2^k − 1}`, the word and order problems for the
//! free one-generator algebras of `·` and `(· , ∘)`, critical-point index
//! comparison through table residues, and the braid-word encoding of terms.
//!
//! Layout:
//! - [`term`]: syntax trees, parsing/printing, iterates, Σ-decomposition.
//! - [`table`]: the finite tables — construction, algebra, verification,
//!   binary serialization, and a shared store with an optional disk cache.
//! - [`rewrite`]: equivalence and order decision by rewriting search with
//!   table-residue separation; prenormal sequences and division trees.
//! - [`crit`]: critical-point indices (`γ`/`κ` bookkeeping) from residues.
//! - [`braid`]: braid words, the shift and bracket, term encodings, and the
//!   partial action on term sequences.
//!
//! Every search is fuel-bounded and reports exhaustion as an ordinary result
//! value; nothing panics on hard inputs.

pub mod crit;
pub mod rewrite;
pub mod table;
pub mod term;

pub use crit::{
    compare_crit, crit_index, f_count, kappa_index, min_k_nonzero, CritError, CritIndex,
    CritOutcome, DEFAULT_MAX_K,
};
pub use rewrite::{
    apply_step, check_equivalence_certificate, check_order_certificate, compare, decide_equiv,
    division_tree, expand_once, lex_compare_xdivision, prenormal_decompose, remultiply,
    CompareOutcome, DivisionOutcome, DivisionTree, Engine, Equivalence, EquivalenceCertificate,
    FuelSpent, LastOp, OrderCertificate, OrderRelation, OrderVerdict, PrenormalOutcome,
    PrenormalSequence, RewriteConfig, RewriteError, RewriteStep, RuleKind,
};
pub use table::{
    project, CodecError, LaverTable, LawKind, LawReport, LawViolation, TableError, TableStore,
    VerifyMode,
};
pub use term::{
    composition_length, enumerate_application_terms, iterate, iterate_pair, parse_term,
    render_term, sigma_decompose, Branch, Generator, ParseError, RenderStyle, SigmaDecomposition,
    Term, TermError, TermNode, TermPath, DEFAULT_SIZE_CAP,
};
