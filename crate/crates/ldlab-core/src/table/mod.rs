//! The finite left-distributive tables on `{0, …, 2^k − 1}`.
//!
//! Level `k` is defined by the recursion
//!
//! ```text
//! m ∗ 0 = 0,    m ∗ 1 = m + 1  (mod 2^k),    m ∗ i = (m ∗ (i−1)) ∗ (m ∗ 1)
//! ```
//!
//! Every row is periodic: `p_m` is the least `n ≥ 1` with `m ∗ n = 0`, it is
//! a power of two, and the row repeats with period `p_m`. Only one period per
//! row is stored. Row 0 is implicit (`0 ∗ n = n`).
//!
//! The derived composition `m ∘ n = (m ∗ ((n+1) mod 2^k)) + 2^k − 1 (mod 2^k)`
//! is the unique `c` with `c ∗ 1 = m ∗ (n ∗ 1)`; together with `∗` it
//! satisfies the same laws as application and composition of maps, which
//! [`LaverTable::verify_laws`] checks rather than assumes.

mod codec;
mod store;

pub use codec::CodecError;
pub use store::TableStore;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::term::{fold, Generator, Term, TermNode};

/// Largest level accepted by [`LaverTable::build`].
pub const MAX_LEVEL: u8 = 24;

/// Largest level for which [`VerifyMode::Exhaustive`] is accepted.
pub const MAX_EXHAUSTIVE_LEVEL: u8 = 6;

/// Default ceiling on stored cells per table (level 16 needs ~1.7 million).
pub const DEFAULT_CELL_LIMIT: u64 = 1 << 27;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("level {level} out of range (valid: 1..={max})")]
    InvalidLevel { level: u8, max: u8 },
    #[error("building level {level} exceeds the cell limit of {limit}")]
    MemoryCap { level: u8, limit: u64 },
    #[error("index {index} out of range at level {level} (must be < 2^{level})")]
    IndexOutOfRange { index: u32, level: u8 },
    #[error("generator {generator} has no assigned value")]
    UnassignedGenerator { generator: Generator },
    #[error("exhaustive verification is limited to levels <= {max}, got {level}")]
    ExhaustiveTooLarge { level: u8, max: u8 },
    #[error("projection requires to_level <= from_level, got {from} -> {to}")]
    LevelOrder { from: u8, to: u8 },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// One finite table, immutable once built; cheap to share behind an `Arc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaverTable {
    k: u8,
    n: u32,
    /// `offsets[m]` is the start of row `m` in `data`, for `1 ≤ m < n`;
    /// `offsets[0]` is unused and `offsets[n]` is `data.len()`.
    offsets: Vec<u32>,
    data: Vec<u32>,
}

impl LaverTable {
    /// Build level `k` with the default cell limit.
    pub fn build(k: u8) -> Result<LaverTable, TableError> {
        Self::build_with_limit(k, DEFAULT_CELL_LIMIT)
    }

    /// Build level `k`, failing once more than `max_cells` cells would be
    /// stored. Rows are filled in descending `m`: every intermediate value is
    /// 0 or greater than `m`, so each lookup hits an already-complete row.
    pub fn build_with_limit(k: u8, max_cells: u64) -> Result<LaverTable, TableError> {
        if k == 0 || k > MAX_LEVEL {
            return Err(TableError::InvalidLevel { level: k, max: MAX_LEVEL });
        }
        let n: u32 = 1 << k;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
        let mut cells: u64 = 0;
        for m in (1..n).rev() {
            let first = (m + 1) % n;
            let mut vals = vec![first];
            let mut cur = first;
            while cur != 0 {
                assert!(cur > m, "dependency on an unbuilt row");
                let row = &rows[cur as usize];
                let p = row.len() as u32;
                let next = row[(((first % p) + p - 1) % p) as usize];
                vals.push(next);
                cur = next;
            }
            debug_assert!(vals.len().is_power_of_two() && vals.len() as u32 <= n);
            cells += vals.len() as u64;
            if cells > max_cells.min(u32::MAX as u64) {
                return Err(TableError::MemoryCap { level: k, limit: max_cells });
            }
            rows[m as usize] = vals;
        }
        let mut offsets = Vec::with_capacity(n as usize + 1);
        let mut data = Vec::with_capacity(cells as usize);
        offsets.push(0);
        for row in rows.iter().take(n as usize) {
            data.extend_from_slice(row);
            offsets.push(data.len() as u32);
        }
        Ok(LaverTable { k, n, offsets, data })
    }

    /// Reassemble from raw rows (used by the codec); validates shape cheaply.
    pub(crate) fn from_rows(k: u8, rows: Vec<Vec<u32>>) -> Result<LaverTable, TableError> {
        if k == 0 || k > MAX_LEVEL {
            return Err(TableError::InvalidLevel { level: k, max: MAX_LEVEL });
        }
        let n: u32 = 1 << k;
        if rows.len() as u32 != n - 1 {
            return Err(CodecError::corrupt(format!(
                "expected {} rows, found {}",
                n - 1,
                rows.len()
            ))
            .into());
        }
        let mut offsets = vec![0u32, 0u32];
        let mut data = Vec::new();
        for (idx, row) in rows.into_iter().enumerate() {
            let m = idx as u32 + 1;
            let p = row.len() as u32;
            if !(p >= 1 && p.is_power_of_two() && p <= n) {
                return Err(CodecError::corrupt(format!("row {m} has invalid period {p}")).into());
            }
            for (i, &v) in row.iter().enumerate() {
                let last = i as u32 == p - 1;
                let ok = v < n && (v == 0) == last && (v == 0 || v > m);
                if !ok {
                    return Err(CodecError::corrupt(format!(
                        "row {m} entry {} has invalid value {v}",
                        i + 1
                    ))
                    .into());
                }
            }
            data.extend_from_slice(&row);
            offsets.push(data.len() as u32);
        }
        Ok(LaverTable { k, n, offsets, data })
    }

    pub fn level(&self) -> u8 {
        self.k
    }

    /// Number of elements, `2^k`.
    pub fn order(&self) -> u32 {
        self.n
    }

    /// Total stored cells over all compressed rows.
    pub fn stored_cells(&self) -> usize {
        self.data.len()
    }

    /// The stored period of row `m` (`1 ≤ m < 2^k`), i.e. `m∗1 … m∗p_m`.
    pub fn row_values(&self, m: u32) -> Result<&[u32], TableError> {
        if m == 0 || m >= self.n {
            return Err(TableError::IndexOutOfRange { index: m, level: self.k });
        }
        Ok(&self.data[self.offsets[m as usize] as usize..self.offsets[m as usize + 1] as usize])
    }

    /// Row period `p_m`; `p_0 = 2^k`.
    pub fn row_period(&self, m: u32) -> Result<u32, TableError> {
        if m >= self.n {
            return Err(TableError::IndexOutOfRange { index: m, level: self.k });
        }
        if m == 0 {
            return Ok(self.n);
        }
        Ok(self.offsets[m as usize + 1] - self.offsets[m as usize])
    }

    /// `m ∗ i` for arbitrary `i` (reduced modulo the row period, which agrees
    /// with reduction mod `2^k`). Callers validating ranges use
    /// [`apply_idx`](Self::apply_idx).
    fn star(&self, m: u32, i: u32) -> u32 {
        if m == 0 {
            return i % self.n;
        }
        let start = self.offsets[m as usize] as usize;
        let p = self.offsets[m as usize + 1] - self.offsets[m as usize];
        self.data[start + (((i % p) + p - 1) % p) as usize]
    }

    /// `m ∘ i`: the unique `c` with `c ∗ 1 = m ∗ (i ∗ 1)`.
    fn circ(&self, m: u32, i: u32) -> u32 {
        (self.star(m, (i + 1) % self.n) + self.n - 1) % self.n
    }

    fn check_index(&self, i: u32) -> Result<(), TableError> {
        if i < self.n {
            Ok(())
        } else {
            Err(TableError::IndexOutOfRange { index: i, level: self.k })
        }
    }

    /// `m ∗_k i`.
    pub fn apply_idx(&self, m: u32, i: u32) -> Result<u32, TableError> {
        self.check_index(m)?;
        self.check_index(i)?;
        Ok(self.star(m, i))
    }

    /// `m ∘_k i`.
    pub fn compose_idx(&self, m: u32, i: u32) -> Result<u32, TableError> {
        self.check_index(m)?;
        self.check_index(i)?;
        Ok(self.circ(m, i))
    }

    /// Bottom-up evaluation of a term, `·` via `∗_k` and `∘` via `∘_k`.
    pub fn eval_term(
        &self,
        w: &Term,
        assignment: &BTreeMap<Generator, u32>,
    ) -> Result<u32, TableError> {
        for g in w.generators() {
            match assignment.get(&g) {
                None => return Err(TableError::UnassignedGenerator { generator: g }),
                Some(&v) => self.check_index(v)?,
            }
        }
        Ok(fold(w, |g| assignment[&g], |node, &a, &b| match node {
            TermNode::Apply(..) => self.star(a, b),
            TermNode::Compose(..) => self.circ(a, b),
            TermNode::Leaf(_) => unreachable!(),
        }))
    }

    /// Evaluate a single-generator term with the canonical assignment `x → 1`:
    /// the residue used by the critical-point procedures.
    pub fn residue(&self, w: &Term) -> Result<u32, TableError> {
        let mut assignment = BTreeMap::new();
        for g in w.generators() {
            assignment.insert(g, 1);
        }
        self.eval_term(w, &assignment)
    }

    /// Check the left-distributive law for `∗` and the four composition laws
    /// for `(∗, ∘)` over all triples (exhaustive, levels ≤ 6) or a seeded
    /// sample. Violations are reported, not asserted.
    pub fn verify_laws(&self, mode: VerifyMode) -> Result<LawReport, TableError> {
        let mut report = LawReport { checked_triples: 0, violations: Vec::new() };
        let check = |s: &Self, a: u32, b: u32, c: u32, report: &mut LawReport| {
            let pairs = [
                (LawKind::LeftDistrib, s.star(a, s.star(b, c)), s.star(s.star(a, b), s.star(a, c))),
                (LawKind::ComposeAssoc, s.circ(a, s.circ(b, c)), s.circ(s.circ(a, b), c)),
                (LawKind::ComposeApply, s.star(s.circ(a, b), c), s.star(a, s.star(b, c))),
                (LawKind::ApplyCompose, s.star(a, s.circ(b, c)), s.circ(s.star(a, b), s.star(a, c))),
                (LawKind::ComposeShuffle, s.circ(a, b), s.circ(s.star(a, b), a)),
            ];
            for (law, lhs, rhs) in pairs {
                if lhs != rhs && report.violations.len() < 32 {
                    report.violations.push(LawViolation { law, a, b, c, lhs, rhs });
                }
            }
            report.checked_triples += 1;
        };
        match mode {
            VerifyMode::Exhaustive => {
                if self.k > MAX_EXHAUSTIVE_LEVEL {
                    return Err(TableError::ExhaustiveTooLarge {
                        level: self.k,
                        max: MAX_EXHAUSTIVE_LEVEL,
                    });
                }
                for a in 0..self.n {
                    for b in 0..self.n {
                        for c in 0..self.n {
                            check(self, a, b, c, &mut report);
                        }
                    }
                }
            }
            VerifyMode::Sample { count, seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let a = rng.gen_range(0..self.n);
                    let b = rng.gen_range(0..self.n);
                    let c = rng.gen_range(0..self.n);
                    check(self, a, b, c, &mut report);
                }
            }
        }
        Ok(report)
    }

    /// Serialize to the binary table format (see [`codec`]).
    pub fn save(&self, path: &Path) -> Result<(), TableError> {
        codec::save_table(self, path)
    }

    /// Load a table saved by [`save`](Self::save), validating magic bytes,
    /// version, CRC, and row shape.
    pub fn load(path: &Path) -> Result<LaverTable, TableError> {
        codec::load_table(path)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<LaverTable, TableError> {
        codec::decode(bytes)
    }

    /// CSV with header `m,n,value` over all `m, n < 2^k`; meant for small `k`.
    pub fn export_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "m,n,value")?;
        for m in 0..self.n {
            for i in 0..self.n {
                writeln!(out, "{m},{i},{}", self.star(m, i))?;
            }
        }
        Ok(())
    }
}

/// How [`LaverTable::verify_laws`] selects triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sample { count: u64, seed: u64 },
}

/// The laws checked by [`LaverTable::verify_laws`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// `a ∗ (b ∗ c) = (a ∗ b) ∗ (a ∗ c)`
    LeftDistrib,
    /// `a ∘ (b ∘ c) = (a ∘ b) ∘ c`
    ComposeAssoc,
    /// `(a ∘ b) ∗ c = a ∗ (b ∗ c)`
    ComposeApply,
    /// `a ∗ (b ∘ c) = (a ∗ b) ∘ (a ∗ c)`
    ApplyCompose,
    /// `a ∘ b = (a ∗ b) ∘ a`
    ComposeShuffle,
}

impl LawKind {
    pub fn name(&self) -> &'static str {
        match self {
            LawKind::LeftDistrib => "left-distributive",
            LawKind::ComposeAssoc => "compose-associativity",
            LawKind::ComposeApply => "compose-apply",
            LawKind::ApplyCompose => "apply-compose",
            LawKind::ComposeShuffle => "compose-shuffle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawViolation {
    pub law: LawKind,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub lhs: u32,
    pub rhs: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub checked_triples: u64,
    /// Capped at 32 entries; empty means every checked triple passed.
    pub violations: Vec<LawViolation>,
}

impl LawReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Projection between levels: `i mod 2^to_k`. A homomorphism for both `∗`
/// and `∘` (verified by the test suite, exhaustively for small levels).
pub fn project(i: u32, from_k: u8, to_k: u8) -> Result<u32, TableError> {
    if to_k > from_k || to_k == 0 {
        return Err(TableError::LevelOrder { from: from_k, to: to_k });
    }
    if from_k > MAX_LEVEL {
        return Err(TableError::InvalidLevel { level: from_k, max: MAX_LEVEL });
    }
    if from_k < 32 && i >= (1u32 << from_k) {
        return Err(TableError::IndexOutOfRange { index: i, level: from_k });
    }
    Ok(i % (1u32 << to_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn table(k: u8) -> LaverTable {
        LaverTable::build(k).unwrap()
    }

    fn rows_of(t: &LaverTable) -> Vec<Vec<u32>> {
        (1..t.order()).map(|m| t.row_values(m).unwrap().to_vec()).collect()
    }

    #[test]
    fn small_levels_match_hand_computation() {
        assert_eq!(rows_of(&table(1)), vec![vec![0]]);
        assert_eq!(rows_of(&table(2)), vec![vec![2, 0], vec![3, 0], vec![0]]);
        assert_eq!(
            rows_of(&table(3)),
            vec![
                vec![2, 4, 6, 0],
                vec![3, 4, 7, 0],
                vec![4, 0],
                vec![5, 6, 7, 0],
                vec![6, 0],
                vec![7, 0],
                vec![0],
            ]
        );
        assert_eq!(table(4).row_values(1).unwrap(), &[2, 12, 14, 0]);
        assert_eq!(table(5).row_values(1).unwrap(), &[2, 12, 14, 16, 18, 28, 30, 0]);
    }

    #[test]
    fn apply_idx_examples() {
        let a3 = table(3);
        assert_eq!(a3.apply_idx(1, 3).unwrap(), 6);
        assert_eq!(a3.apply_idx(0, 5).unwrap(), 5);
        assert_eq!(a3.apply_idx(7, 4).unwrap(), 0);
        assert_eq!(a3.apply_idx(5, 0).unwrap(), 0);
        assert!(a3.apply_idx(8, 0).is_err());
        assert!(a3.apply_idx(0, 8).is_err());
    }

    #[test]
    fn compose_idx_examples() {
        let a2 = table(2);
        assert_eq!(a2.compose_idx(1, 1).unwrap(), 3);
        for i in 0..4 {
            assert_eq!(a2.compose_idx(0, i).unwrap(), i);
        }
        assert_eq!(a2.compose_idx(2, 3).unwrap(), 3);
        // defining property: (m ∘ i) ∗ 1 = m ∗ (i ∗ 1)
        let a4 = table(4);
        for m in 0..16 {
            for i in 0..16 {
                let c = a4.compose_idx(m, i).unwrap();
                assert_eq!(
                    a4.star(c, 1),
                    a4.star(m, a4.star(i, 1)),
                    "compose defect at ({m},{i})"
                );
            }
        }
    }

    #[test]
    fn row_periods() {
        let a3 = table(3);
        assert_eq!(a3.row_period(1).unwrap(), 4);
        assert_eq!(a3.row_period(7).unwrap(), 1);
        assert_eq!(a3.row_period(6).unwrap(), 2);
        assert_eq!(a3.row_period(0).unwrap(), 8);
    }

    #[test]
    fn every_value_is_zero_or_above_row_index() {
        for k in 1..=8 {
            let t = table(k);
            for m in 1..t.order() {
                for (i, &v) in t.row_values(m).unwrap().iter().enumerate() {
                    assert!(v == 0 || v > m, "k={k} m={m} col={} value {v}", i + 1);
                }
            }
        }
    }

    #[test]
    fn eval_term_examples() {
        let a3 = table(3);
        let x_to_1 = BTreeMap::from([(0, 1)]);
        assert_eq!(a3.eval_term(&parse_term("x(xx)").unwrap(), &x_to_1).unwrap(), 4);
        let a2 = table(2);
        assert_eq!(a2.eval_term(&parse_term("((xx)x)(xx)").unwrap(), &x_to_1).unwrap(), 0);
        let xy = BTreeMap::from([(0, 1), (1, 2)]);
        assert_eq!(a3.eval_term(&parse_term("(xy)x").unwrap(), &xy).unwrap(), 5);
        assert!(a3.eval_term(&parse_term("xy").unwrap(), &x_to_1).is_err());
        assert_eq!(a3.residue(&parse_term("x(xx)").unwrap()).unwrap(), 4);
    }

    #[test]
    fn verify_laws_exhaustive_small() {
        for k in 1..=4 {
            let report = table(k).verify_laws(VerifyMode::Exhaustive).unwrap();
            assert!(report.is_clean(), "level {k}: {:?}", report.violations);
            assert_eq!(report.checked_triples, 1 << (3 * k));
        }
        assert!(table(7).verify_laws(VerifyMode::Exhaustive).is_err());
    }

    #[test]
    fn verify_laws_sampled() {
        let report =
            table(10).verify_laws(VerifyMode::Sample { count: 10_000, seed: 1 }).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.checked_triples, 10_000);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(5, 3, 2).unwrap(), 1);
        assert_eq!(project(6, 3, 1).unwrap(), 0);
        assert!(project(1, 2, 3).is_err());
        let a3 = table(3);
        let a2 = table(2);
        assert_eq!(project(a3.apply_idx(1, 3).unwrap(), 3, 2).unwrap(), 2);
        assert_eq!(a2.apply_idx(1, 3).unwrap(), 2);
    }

    #[test]
    fn build_rejects_out_of_range_levels() {
        assert!(matches!(LaverTable::build(0), Err(TableError::InvalidLevel { .. })));
        assert!(matches!(LaverTable::build(25), Err(TableError::InvalidLevel { .. })));
        assert!(matches!(
            LaverTable::build_with_limit(8, 10),
            Err(TableError::MemoryCap { .. })
        ));
    }

    #[test]
    fn csv_export_shape() {
        let mut buf = Vec::new();
        table(2).export_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m,n,value");
        assert_eq!(lines.len(), 1 + 16);
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[6], "1,1,2");
    }
}
