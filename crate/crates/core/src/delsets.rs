//! Positional deletion sets and the cells they induce.
//!
//! For a set `X` of length-`n` words, `delta(X, i, b)` collects the words
//! obtained by deleting position `i` from members that carry `b` there. A
//! deleted word `y` determines the set `I(y)` of all positions whose
//! deletion (of a `b`) produces it; grouping deleted words by `I(y)` gives
//! the cells `X_{I,b}`. The decomposition is discovered from the deleted
//! words themselves, so the work is `O(n |X|)` and the `2^n` candidate
//! position sets are never enumerated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::seqcore::{common_length, Bit, BitString};

pub type WordSet = BTreeSet<BitString>;

/// A non-empty set of 1-based positions, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PositionSet(Vec<usize>);

impl PositionSet {
    pub fn new<I: IntoIterator<Item = usize>>(positions: I) -> Result<Self> {
        let mut v: Vec<usize> = positions.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(invalid("position set must be non-empty"));
        }
        if v[0] == 0 {
            return Err(invalid("positions are 1-based"));
        }
        Ok(Self(v))
    }

    /// The full set `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn contains(&self, position: usize) -> bool {
        self.0.binary_search(&position).is_ok()
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> usize {
        *self.0.last().expect("non-empty")
    }
}

impl fmt::Display for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// The pair `(I, b)` labelling a cell `X_{I,b}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeletionCellIndex {
    pub positions: PositionSet,
    pub bit: Bit,
}

impl DeletionCellIndex {
    pub fn new(positions: PositionSet, bit: Bit) -> Self {
        Self { positions, bit }
    }
}

impl fmt::Display for DeletionCellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.positions, self.bit)
    }
}

/// The non-empty cells `X_{I,b}` of one word set for a fixed bit `b`.
#[derive(Clone, Debug)]
pub struct CellDecomposition {
    n: usize,
    bit: Bit,
    source_size: usize,
    cells: BTreeMap<PositionSet, WordSet>,
    index: HashMap<BitString, PositionSet>,
}

impl CellDecomposition {
    /// Length of the source words.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bit(&self) -> Bit {
        self.bit
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    /// Non-empty cells keyed by position set.
    pub fn cells(&self) -> &BTreeMap<PositionSet, WordSet> {
        &self.cells
    }

    /// The cell `X_{I,b}`; empty when it was never reached.
    pub fn cell(&self, positions: &PositionSet) -> Option<&WordSet> {
        self.cells.get(positions)
    }

    pub fn cell_size(&self, positions: &PositionSet) -> usize {
        self.cells.get(positions).map_or(0, BTreeSet::len)
    }

    /// `I(y)`, the position set of the cell holding the deleted word `y`.
    pub fn label_of(&self, y: &BitString) -> Option<&PositionSet> {
        self.index.get(y)
    }

    pub fn indices(&self) -> impl Iterator<Item = DeletionCellIndex> + '_ {
        self.cells
            .keys()
            .map(move |p| DeletionCellIndex::new(p.clone(), self.bit))
    }

    /// Every deleted word, i.e. the union of `delta(X, j, b)` over `j`.
    pub fn deleted_words(&self) -> impl Iterator<Item = &BitString> {
        self.index.keys()
    }
}

fn check_position(n: usize, i: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::PositionOutOfRange {
            position: i,
            len: n,
        });
    }
    Ok(())
}

/// The `(i,b)`-deletion set of `x`.
pub fn delta(x: &WordSet, i: usize, b: Bit) -> Result<WordSet> {
    let Some(n) = common_length(x)? else {
        return Ok(WordSet::new());
    };
    check_position(n, i)?;
    x.iter()
        .filter(|w| w.bit(i) == b)
        .map(|w| w.delete_at(i))
        .collect()
}

/// Groups every word of `delta(x, j, b)`, over all `j`, by its position set.
pub fn cell_decomposition(x: &WordSet, b: Bit) -> Result<CellDecomposition> {
    let n = common_length(x)?.unwrap_or(0);
    let mut index: HashMap<BitString, Vec<usize>> = HashMap::new();
    for w in x {
        for (k, bit) in w.iter().enumerate() {
            if bit == b {
                index.entry(w.delete_at(k + 1)?).or_default().push(k + 1);
            }
        }
    }
    let mut cells: BTreeMap<PositionSet, WordSet> = BTreeMap::new();
    let mut labels = HashMap::with_capacity(index.len());
    for (y, positions) in index {
        let set = PositionSet::new(positions)?;
        cells.entry(set.clone()).or_default().insert(y.clone());
        labels.insert(y, set);
    }
    Ok(CellDecomposition {
        n,
        bit: b,
        source_size: x.len(),
        cells,
        index: labels,
    })
}

/// `X_{I,b}` evaluated directly from its intersection/complement formula.
///
/// This never consults [`cell_decomposition`] and serves as its
/// cross-check.
pub fn cell(x: &WordSet, index: &DeletionCellIndex) -> Result<WordSet> {
    let Some(n) = common_length(x)? else {
        return Ok(WordSet::new());
    };
    if index.positions.largest() > n {
        return Err(Error::PositionOutOfRange {
            position: index.positions.largest(),
            len: n,
        });
    }
    let b = index.bit;
    let deltas: Vec<WordSet> = (1..=n).map(|i| delta(x, i, b)).collect::<Result<_>>()?;
    let mut members = index.positions.positions().iter();
    let first = members.next().expect("non-empty");
    let mut out = deltas[first - 1].clone();
    for &i in members {
        out.retain(|y| deltas[i - 1].contains(y));
    }
    for i in (1..=n).filter(|i| !index.positions.contains(*i)) {
        out.retain(|y| !deltas[i - 1].contains(y));
    }
    Ok(out)
}
