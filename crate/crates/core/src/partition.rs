//! Family sets and the conditions that make them quantum deletion codes.
//!
//! A family set is an ordered list of disjoint cells of equal-length words;
//! cell `m` carries message index `m`. Three conditions are checked here:
//!
//! * ratio (C1): `|X^(m)_{I,b}| / |X^(m)|` is the same for every cell,
//!   which defines `lambda_{I,b}`;
//! * external distance (C2): deleted words of distinct cells never coincide;
//! * internal distance (C3): within a cell, deleting a 0 and deleting a 1
//!   never produce the same word.
//!
//! Ratios are exact. Homogeneous partitions (equal cell sizes and identical
//! run-support multisets, over a single-deletion code) satisfy all three.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;

use crate::codes::{is_single_deletion_code, ClassicalCode, DeletionCodeCheck};
use crate::delsets::{cell_decomposition, CellDecomposition, DeletionCellIndex, WordSet};
use crate::error::{invalid, Error, Result};
use crate::seqcore::{deletion_surface, levenshtein, run_support_multiset, runs, Bit, BitString};

/// Ordered list of disjoint, non-empty cells of length-`n` words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySet {
    n: usize,
    cells: Vec<WordSet>,
}

impl FamilySet {
    pub fn new(n: usize, cells: Vec<WordSet>) -> Result<Self> {
        if cells.is_empty() {
            return Err(invalid("a family set needs at least one cell"));
        }
        let mut owner: HashMap<&BitString, usize> = HashMap::new();
        for (m, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(invalid(format!("cell {m} is empty")));
            }
            for w in cell {
                if w.len() != n {
                    return Err(invalid(format!(
                        "cell {m}: word {w} has length {}, expected {n}",
                        w.len()
                    )));
                }
                if let Some(prev) = owner.insert(w, m) {
                    return Err(invalid(format!("word {w} appears in cells {prev} and {m}")));
                }
            }
        }
        Ok(Self { n, cells })
    }

    /// Builds a family set from string literals, inferring the length.
    pub fn from_literals(cells: &[&[&str]]) -> Result<Self> {
        let cells: Vec<WordSet> = cells
            .iter()
            .map(|c| c.iter().map(|w| w.parse()).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let n = cells
            .iter()
            .flat_map(|c| c.iter())
            .map(BitString::len)
            .next()
            .ok_or_else(|| invalid("a family set needs at least one word"))?;
        Self::new(n, cells)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells `M`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> &[WordSet] {
        &self.cells
    }

    pub fn cell(&self, m: usize) -> &WordSet {
        &self.cells[m]
    }

    pub fn words(&self) -> impl Iterator<Item = &BitString> {
        self.cells.iter().flatten()
    }

    pub fn total_words(&self) -> usize {
        self.cells.iter().map(BTreeSet::len).sum()
    }

    /// The union of the cells as a classical code.
    pub fn union_code(&self) -> ClassicalCode {
        ClassicalCode::new(self.n, self.words().cloned().collect()).expect("uniform length")
    }
}

/// `[decomposition for b = 0, decomposition for b = 1]` of every cell.
pub fn decompose_family(fam: &FamilySet) -> Vec<[CellDecomposition; 2]> {
    fam.cells()
        .par_iter()
        .map(|c| {
            [
                cell_decomposition(c, Bit::Zero).expect("uniform length"),
                cell_decomposition(c, Bit::One).expect("uniform length"),
            ]
        })
        .collect()
}

/// Whether the cells of `fam` are disjoint and cover exactly `code`.
pub fn is_partition_of(fam: &FamilySet, code: &ClassicalCode) -> bool {
    fam.n() == code.n() && fam.total_words() == code.len() && fam.words().all(|w| code.contains(w))
}

/// A concrete violation of one of the three conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `|X^(a)| |X^(b)_{I,b}| != |X^(b)| |X^(a)_{I,b}|`.
    RatioMismatch {
        index: DeletionCellIndex,
        first: usize,
        other: usize,
        first_count: usize,
        first_size: usize,
        other_count: usize,
        other_size: usize,
    },
    /// `word` lies in `Delta_{i1,b1}(X^(m1))` and `Delta_{i2,b2}(X^(m2))`.
    ExternalCollision {
        word: BitString,
        first: (usize, usize, Bit),
        second: (usize, usize, Bit),
    },
    /// `word` lies in `Delta_{i0,0}(X^(m))` and `Delta_{i1,1}(X^(m))`.
    InternalCollision {
        cell: usize,
        word: BitString,
        zero_position: usize,
        one_position: usize,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::RatioMismatch {
                index,
                first,
                other,
                first_count,
                first_size,
                other_count,
                other_size,
            } => write!(
                f,
                "X{index}: cell {first} has {first_count}/{first_size}, cell {other} has {other_count}/{other_size}"
            ),
            Witness::ExternalCollision {
                word,
                first: (m1, i1, b1),
                second: (m2, i2, b2),
            } => write!(
                f,
                "{word} in Delta_({i1},{b1}) of cell {m1} and Delta_({i2},{b2}) of cell {m2}"
            ),
            Witness::InternalCollision {
                cell,
                word,
                zero_position,
                one_position,
            } => write!(
                f,
                "{word} in Delta_({zero_position},0) and Delta_({one_position},1) of cell {cell}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionResult {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl ConditionResult {
    fn pass() -> Self {
        Self {
            holds: true,
            witness: None,
        }
    }

    fn fail(w: Witness) -> Self {
        Self {
            holds: false,
            witness: Some(w),
        }
    }
}

/// Exact ratios `lambda_{I,b}` for every reachable label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTable {
    n: usize,
    entries: BTreeMap<DeletionCellIndex, Ratio<u64>>,
}

impl LambdaTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `lambda_{I,b}`; zero for unreachable labels.
    pub fn get(&self, index: &DeletionCellIndex) -> Ratio<u64> {
        self.entries.get(index).copied().unwrap_or_else(Ratio::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DeletionCellIndex, &Ratio<u64>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `sum_b sum_{I containing i} lambda_{I,b}`.
    pub fn position_sum(&self, i: usize) -> Ratio<u64> {
        self.entries
            .iter()
            .filter(|(k, _)| k.positions.contains(i))
            .fold(Ratio::zero(), |acc, (_, v)| acc + v)
    }
}

impl fmt::Display for LambdaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "lambda{k}\t{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioCheck {
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Present exactly when the ratio condition holds.
    pub lambda: Option<LambdaTable>,
}

fn ratio_check(fam: &FamilySet, decomps: &[[CellDecomposition; 2]]) -> RatioCheck {
    let mut labels: BTreeSet<DeletionCellIndex> = BTreeSet::new();
    for d in decomps.iter().flatten() {
        labels.extend(d.indices());
    }
    let size = |m: usize| fam.cell(m).len();
    let count =
        |m: usize, k: &DeletionCellIndex| decomps[m][k.bit as usize].cell_size(&k.positions);
    for k in &labels {
        let (c0, s0) = (count(0, k), size(0));
        for m in 1..fam.len() {
            let (cm, sm) = (count(m, k), size(m));
            if s0 * cm != sm * c0 {
                return RatioCheck {
                    holds: false,
                    witness: Some(Witness::RatioMismatch {
                        index: k.clone(),
                        first: 0,
                        other: m,
                        first_count: c0,
                        first_size: s0,
                        other_count: cm,
                        other_size: sm,
                    }),
                    lambda: None,
                };
            }
        }
    }
    let entries = labels
        .into_iter()
        .map(|k| {
            let v = Ratio::new(count(0, &k) as u64, size(0) as u64);
            (k, v)
        })
        .collect();
    RatioCheck {
        holds: true,
        witness: None,
        lambda: Some(LambdaTable {
            n: fam.n(),
            entries,
        }),
    }
}

/// The ratio condition, with the `lambda` table when it holds.
pub fn check_c1(fam: &FamilySet) -> RatioCheck {
    ratio_check(fam, &decompose_family(fam))
}

/// The external distance condition, checked as disjointness of the sets of
/// deleted words of distinct cells.
pub fn check_c2(fam: &FamilySet) -> ConditionResult {
    let mut first: HashMap<BitString, (usize, usize, Bit)> = HashMap::new();
    for (m, cell) in fam.cells().iter().enumerate() {
        for x in cell {
            for (k, b) in x.iter().enumerate() {
                let y = x.delete_at(k + 1).expect("in range");
                match first.get(&y) {
                    Some(&prev) if prev.0 != m => {
                        return ConditionResult::fail(Witness::ExternalCollision {
                            word: y,
                            first: prev,
                            second: (m, k + 1, b),
                        })
                    }
                    Some(_) => {}
                    None => {
                        first.insert(y, (m, k + 1, b));
                    }
                }
            }
        }
    }
    ConditionResult::pass()
}

/// The internal distance condition.
pub fn check_c3(fam: &FamilySet) -> ConditionResult {
    for (m, cell) in fam.cells().iter().enumerate() {
        let mut zeros: HashMap<BitString, usize> = HashMap::new();
        let mut ones: Vec<(BitString, usize)> = Vec::new();
        for x in cell {
            for (k, b) in x.iter().enumerate() {
                let y = x.delete_at(k + 1).expect("in range");
                match b {
                    Bit::Zero => {
                        zeros.entry(y).or_insert(k + 1);
                    }
                    Bit::One => ones.push((y, k + 1)),
                }
            }
        }
        for (y, i1) in ones {
            if let Some(&i0) = zeros.get(&y) {
                return ConditionResult::fail(Witness::InternalCollision {
                    cell: m,
                    word: y,
                    zero_position: i0,
                    one_position: i1,
                });
            }
        }
    }
    ConditionResult::pass()
}

/// All three conditions and, when the ratio condition holds, `lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub c1: ConditionResult,
    pub c2: ConditionResult,
    pub c3: ConditionResult,
    pub lambda: Option<LambdaTable>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.c1.holds && self.c2.holds && self.c3.holds
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("C1-ratio", &self.c1),
            ("C2-external-distance", &self.c2),
            ("C3-internal-distance", &self.c3),
        ];
        for (name, r) in rows {
            let verdict = if r.holds { "PASS" } else { "FAIL" };
            match &r.witness {
                Some(w) => writeln!(f, "{name}\t{verdict}\t{w}")?,
                None => writeln!(f, "{name}\t{verdict}\t-")?,
            }
        }
        if let Some(l) = &self.lambda {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub fn check_conditions(fam: &FamilySet) -> ConditionReport {
    let rc = check_c1(fam);
    ConditionReport {
        c1: ConditionResult {
            holds: rc.holds,
            witness: rc.witness,
        },
        c2: check_c2(fam),
        c3: check_c3(fam),
        lambda: rc.lambda,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrsCheck {
    pub stable: bool,
    /// `(m1, m2, b)` whose `b`-run-support multisets differ.
    pub witness: Option<(usize, usize, Bit)>,
}

/// Whether every cell has the same 0- and 1-run-support multisets.
pub fn is_brs_stable(fam: &FamilySet) -> BrsCheck {
    for b in Bit::ALL {
        let reference = run_support_multiset(fam.cell(0), b).expect("uniform length");
        for m in 1..fam.len() {
            if run_support_multiset(fam.cell(m), b).expect("uniform length") != reference {
                return BrsCheck {
                    stable: false,
                    witness: Some((0, m, b)),
                };
            }
        }
    }
    BrsCheck {
        stable: true,
        witness: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneityReport {
    pub partition: bool,
    pub equal_sizes: bool,
    pub brs: BrsCheck,
    /// Whether the partitioned code is itself a single-deletion code, which
    /// is what makes homogeneity sufficient for the three conditions.
    pub code: DeletionCodeCheck,
}

impl HomogeneityReport {
    pub fn homogeneous(&self) -> bool {
        self.partition && self.equal_sizes && self.brs.stable
    }

    pub fn reason(&self) -> String {
        if !self.partition {
            "cells do not partition the code".into()
        } else if !self.equal_sizes {
            "cell sizes differ".into()
        } else if let Some((a, b, bit)) = self.brs.witness {
            format!("{bit}-run supports of cells {a} and {b} differ")
        } else {
            "homogeneous".into()
        }
    }
}

pub fn is_homogeneous(fam: &FamilySet, code: &ClassicalCode) -> Result<HomogeneityReport> {
    let size = fam.cell(0).len();
    Ok(HomogeneityReport {
        partition: is_partition_of(fam, code),
        equal_sizes: fam.cells().iter().all(|c| c.len() == size),
        brs: is_brs_stable(fam),
        code: is_single_deletion_code(code)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicationCheck {
    pub name: &'static str,
    pub hypothesis: bool,
    pub conclusion: bool,
}

impl ImplicationCheck {
    pub fn holds(&self) -> bool {
        !self.hypothesis || self.conclusion
    }
}

/// Evaluates the sufficient conditions for C1, C2 and C3 and their
/// conclusions on one family set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficiencyReport {
    pub checks: Vec<ImplicationCheck>,
    pub conditions: ConditionReport,
}

impl SufficiencyReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(ImplicationCheck::holds)
    }

    pub fn counterexample(&self) -> Option<&ImplicationCheck> {
        self.checks.iter().find(|c| !c.holds())
    }
}

/// Cross-cell pairs above which the distance hypothesis is evaluated through
/// deletion surfaces instead of pairwise distances.
const PAIRWISE_DISTANCE_LIMIT: usize = 4_000_000;

fn cross_cells_far_apart(fam: &FamilySet) -> bool {
    let total = fam.total_words();
    if total * total / 2 <= PAIRWISE_DISTANCE_LIMIT {
        let tagged: Vec<(usize, &BitString)> = fam
            .cells()
            .iter()
            .enumerate()
            .flat_map(|(m, c)| c.iter().map(move |w| (m, w)))
            .collect();
        return (0..tagged.len()).into_par_iter().all(|a| {
            tagged[a + 1..]
                .iter()
                .filter(|(m, _)| *m != tagged[a].0)
                .all(|(_, w)| levenshtein(tagged[a].1, w) >= 4)
        });
    }
    // Equal-length words are at distance >= 4 iff their surfaces are disjoint.
    let mut owner: HashMap<BitString, usize> = HashMap::new();
    for (m, c) in fam.cells().iter().enumerate() {
        for w in c {
            for y in deletion_surface(w).expect("non-empty word") {
                if let Some(prev) = owner.insert(y, m) {
                    if prev != m {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn check_sufficiency_theorems(fam: &FamilySet) -> SufficiencyReport {
    let conditions = check_conditions(fam);
    let cells_are_codes = fam.cells().iter().all(|c| {
        let code = ClassicalCode::new(fam.n(), c.clone()).expect("uniform length");
        is_single_deletion_code(&code)
            .expect("non-empty words")
            .holds
    });
    let size = fam.cell(0).len();
    let equal_sizes = fam.cells().iter().all(|c| c.len() == size);
    let brs = is_brs_stable(fam).stable;
    let union = fam.union_code();
    let union_is_code = is_single_deletion_code(&union)
        .expect("non-empty words")
        .holds;
    let checks = vec![
        ImplicationCheck {
            name: "cells are single-deletion codes => C3",
            hypothesis: cells_are_codes,
            conclusion: conditions.c3.holds,
        },
        ImplicationCheck {
            name: "cross-cell distance >= 4 => C2",
            hypothesis: cross_cells_far_apart(fam),
            conclusion: conditions.c2.holds,
        },
        ImplicationCheck {
            name: "BRS stable, equal sizes, cells are codes => C1",
            hypothesis: brs && equal_sizes && cells_are_codes,
            conclusion: conditions.c1.holds,
        },
        ImplicationCheck {
            name: "homogeneous partition of a single-deletion code => C1, C2, C3",
            hypothesis: brs && equal_sizes && union_is_code,
            conclusion: conditions.all_hold(),
        },
    ];
    SufficiencyReport { checks, conditions }
}

/// Largest code accepted by [`search_homogeneous`].
pub const MAX_SEARCH_WORDS: usize = 12;

/// Enumerates every partition of `code` into `M` cells of equal size `s`
/// (`s >= 2`, `2 <= M <= max_cells`) that is BRS stable.
///
/// Each cell of such a partition must carry exactly `1/M` of the code's total
/// run-support multiset, so a cell is abandoned as soon as one of its
/// interval counts exceeds that share. Results come ordered by cell size,
/// then lexicographically by cells.
pub fn search_homogeneous(code: &ClassicalCode, max_cells: usize) -> Result<Vec<FamilySet>> {
    let total = code.len();
    if total > MAX_SEARCH_WORDS {
        return Err(Error::SizeGuard(format!(
            "search is limited to {MAX_SEARCH_WORDS} codewords, code has {total}"
        )));
    }
    let words: Vec<&BitString> = code.words().iter().collect();
    let mut keys: BTreeMap<(Bit, usize, usize), usize> = BTreeMap::new();
    let signatures: Vec<Vec<(usize, u32)>> = words
        .iter()
        .map(|w| {
            let mut sig: BTreeMap<usize, u32> = BTreeMap::new();
            for r in runs(w) {
                let next = keys.len();
                let id = *keys.entry((r.bit, r.start, r.end)).or_insert(next);
                *sig.entry(id).or_default() += 1;
            }
            sig.into_iter().collect()
        })
        .collect();
    let mut totals = vec![0u32; keys.len()];
    for sig in &signatures {
        for &(id, c) in sig {
            totals[id] += c;
        }
    }

    let mut found = Vec::new();
    for size in 2..=total {
        let cells = total / size;
        if !total.is_multiple_of(size) || cells < 2 || cells > max_cells {
            continue;
        }
        if totals.iter().any(|t| t % cells as u32 != 0) {
            continue;
        }
        let target: Vec<u32> = totals.iter().map(|t| t / cells as u32).collect();
        let mut search = EqualBlockSearch {
            size,
            target: &target,
            signatures: &signatures,
            blocks: Vec::new(),
            out: Vec::new(),
        };
        search.fill((1u32 << total) - 1);
        for blocks in search.out {
            let cells = blocks
                .iter()
                .map(|b| b.iter().map(|&k| words[k].clone()).collect())
                .collect();
            found.push(FamilySet::new(code.n(), cells)?);
        }
    }
    Ok(found)
}

struct EqualBlockSearch<'a> {
    size: usize,
    target: &'a [u32],
    signatures: &'a [Vec<(usize, u32)>],
    blocks: Vec<Vec<usize>>,
    out: Vec<Vec<Vec<usize>>>,
}

impl EqualBlockSearch<'_> {
    fn fill(&mut self, remaining: u32) {
        if remaining == 0 {
            self.out.push(self.blocks.clone());
            return;
        }
        // The smallest unused word always opens the next block.
        let first = remaining.trailing_zeros() as usize;
        let mut counts = vec![0u32; self.target.len()];
        self.add(&mut counts, first);
        let mut block = vec![first];
        self.extend_block(remaining & !(1 << first), first, &mut block, &mut counts);
    }

    fn add(&self, counts: &mut [u32], word: usize) -> bool {
        let mut ok = true;
        for &(id, c) in &self.signatures[word] {
            counts[id] += c;
            ok &= counts[id] <= self.target[id];
        }
        ok
    }

    fn remove(&self, counts: &mut [u32], word: usize) {
        for &(id, c) in &self.signatures[word] {
            counts[id] -= c;
        }
    }

    fn extend_block(
        &mut self,
        remaining: u32,
        last: usize,
        block: &mut Vec<usize>,
        counts: &mut Vec<u32>,
    ) {
        if block.len() == self.size {
            if counts.as_slice() == self.target {
                self.blocks.push(block.clone());
                self.fill(remaining);
                self.blocks.pop();
            }
            return;
        }
        let mut candidates = remaining & !((2u32 << last) - 1);
        while candidates != 0 {
            let k = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            if self.add(counts, k) {
                block.push(k);
                self.extend_block(remaining & !(1 << k), k, block, counts);
                block.pop();
            }
            self.remove(counts, k);
        }
    }
}
