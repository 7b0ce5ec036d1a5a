//! Critical-point indices computed from the finite tables.
//!
//! Every single-generator term evaluates, at each level `k`, to a residue
//! `i < 2^k` under the canonical assignment `x → 1`. Once that residue is
//! nonzero it stays nonzero (and keeps its 2-adic valuation) at every higher
//! level, and the valuation `ν₂(i)` identifies which member of the critical
//! sequence the term's interpretation moves first: the `ℓ`-th critical point
//! `γ_ℓ`, where `2^ℓ` is the largest power of two dividing `i`.
//!
//! The procedures here scan levels `1, 2, …` up to a caller-supplied bound
//! and report the first nonzero residue. Exhausting the bound is an ordinary
//! result, not an error: how far one must scan is known to grow faster than
//! any primitive recursive function in the size of the input, so a bounded
//! scan is all a terminating program can promise.
//!
//! On top of [`crit_index`] sit the classical derived quantities:
//!
//! * [`kappa_index`]`(n)` — the index of `κ_n`, the critical point of the
//!   `n`-fold application `x(x(⋯(xx)))`.
//! * [`f_count`]`(n)` — how many critical points of the generated algebra lie
//!   strictly between `κ_n` and `κ_{n+1}`.
//! * [`min_k_nonzero`]`(i)` — the least level at which row 1 of the table
//!   maps `i` to a nonzero value.

use std::cmp::Ordering;

use thiserror::Error;

use crate::table::{TableError, TableStore};
use crate::term::Term;

/// Default level bound for the scans. Level 16 keeps the largest table at
/// 65 536 rows — comfortably in memory — while already far exceeding what the
/// small inputs in the test suite need.
pub const DEFAULT_MAX_K: u8 = 16;

#[derive(Debug, Error)]
pub enum CritError {
    /// Critical-point comparison is defined for terms over one generator;
    /// with several generators the canonical assignment `x → 1` loses the
    /// intended meaning.
    #[error("term uses {found} distinct generators; critical-point procedures need exactly one")]
    MultipleGenerators { found: usize },
    /// Row 1 sends 0 to 0 at every level, so a minimum-level scan for the
    /// index 0 could never answer.
    #[error("minimum-level search requires a nonzero index")]
    ZeroIndex,
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Where a term's residue first became nonzero, and what that reveals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CritIndex {
    /// `ℓ` such that the term's interpretation has critical point `γ_ℓ`:
    /// the exponent of the largest power of two dividing `residue`.
    pub gamma_index: u32,
    /// The first level whose residue is nonzero. Always exceeds
    /// `gamma_index`, since the residue is a nonzero value below `2^k`.
    pub witness_level: u8,
    /// The (nonzero) residue at `witness_level`.
    pub residue: u32,
}

/// Result of a bounded level scan: either an answer, or a record that every
/// level up to the bound was tried without one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritOutcome<T> {
    Determined(T),
    Exhausted { max_k: u8 },
}

impl<T> CritOutcome<T> {
    pub fn determined(self) -> Option<T> {
        match self {
            CritOutcome::Determined(value) => Some(value),
            CritOutcome::Exhausted { .. } => None,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, CritOutcome::Exhausted { .. })
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> CritOutcome<U> {
        match self {
            CritOutcome::Determined(value) => CritOutcome::Determined(f(value)),
            CritOutcome::Exhausted { max_k } => CritOutcome::Exhausted { max_k },
        }
    }
}

fn ensure_single_generator(w: &Term) -> Result<(), CritError> {
    if w.single_generator().is_some() {
        Ok(())
    } else {
        Err(CritError::MultipleGenerators { found: w.generators().len() })
    }
}

/// Scan levels `1, …, max_k` for the first nonzero residue of `w` (under
/// `x → 1`) and read off the critical-point index.
pub fn crit_index(
    store: &TableStore,
    w: &Term,
    max_k: u8,
) -> Result<CritOutcome<CritIndex>, CritError> {
    ensure_single_generator(w)?;
    for k in 1..=max_k {
        let table = store.get(k)?;
        let residue = table.residue(w)?;
        if residue != 0 {
            return Ok(CritOutcome::Determined(CritIndex {
                gamma_index: residue.trailing_zeros(),
                witness_level: k,
                residue,
            }));
        }
    }
    Ok(CritOutcome::Exhausted { max_k })
}

/// Compare the critical points of two single-generator terms by their
/// `gamma_index` values; exhausted if either scan is.
pub fn compare_crit(
    store: &TableStore,
    u: &Term,
    w: &Term,
    max_k: u8,
) -> Result<CritOutcome<Ordering>, CritError> {
    let left = crit_index(store, u, max_k)?;
    let right = crit_index(store, w, max_k)?;
    match (left, right) {
        (CritOutcome::Determined(a), CritOutcome::Determined(b)) => {
            Ok(CritOutcome::Determined(a.gamma_index.cmp(&b.gamma_index)))
        }
        _ => Ok(CritOutcome::Exhausted { max_k }),
    }
}

/// The index of `κ_n`: the critical point of the right-nested application
/// `T_n`, where `T_0 = x` and `T_{m+1} = x·T_m`.
pub fn kappa_index(store: &TableStore, n: u32, max_k: u8) -> Result<CritOutcome<u32>, CritError> {
    let x = Term::leaf(0);
    let mut t = x.clone();
    for _ in 0..n {
        t = Term::apply(&x, &t);
    }
    Ok(crit_index(store, &t, max_k)?.map(|ci| ci.gamma_index))
}

/// How many critical points lie strictly between `κ_n` and `κ_{n+1}`:
/// `kappa_index(n+1) − kappa_index(n) − 1`. Exhausted if either κ-scan is —
/// in particular for `n = 3` at any feasible bound, where the answer is not
/// known to this day.
pub fn f_count(store: &TableStore, n: u32, max_k: u8) -> Result<CritOutcome<u32>, CritError> {
    let low = kappa_index(store, n, max_k)?;
    let high = kappa_index(store, n + 1, max_k)?;
    match (low, high) {
        (CritOutcome::Determined(low), CritOutcome::Determined(high)) => {
            Ok(CritOutcome::Determined(high - low - 1))
        }
        _ => Ok(CritOutcome::Exhausted { max_k }),
    }
}

/// The least level `k ≤ max_k` with `1 ∗_k (i mod 2^k) ≠ 0`. Such a level
/// exists for every `i ≥ 1`, but its growth in `i` outpaces any fixed bound.
pub fn min_k_nonzero(store: &TableStore, i: u64, max_k: u8) -> Result<CritOutcome<u8>, CritError> {
    if i == 0 {
        return Err(CritError::ZeroIndex);
    }
    for k in 1..=max_k {
        let table = store.get(k)?;
        let reduced = (i % (1u64 << k)) as u32;
        if table.apply_idx(1, reduced)? != 0 {
            return Ok(CritOutcome::Determined(k));
        }
    }
    Ok(CritOutcome::Exhausted { max_k })
}
