//! Bit-sequence primitives: packed bitstrings with 1-based positions, single
//! deletions and insertions, deletion surfaces, longest common subsequence,
//! insertion/deletion (Levenshtein) distance and run supports.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// A binary symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const ALL: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl TryFrom<u8> for Bit {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            _ => Err(invalid(format!("{v} is not a bit"))),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

const WORD: usize = 64;

/// A fixed-length binary word.
///
/// Positions are 1-based: position 1 is the leftmost symbol of the textual
/// form. Internally the symbols are packed most-significant-bit first into
/// 64-bit words, with unused trailing bits kept at zero, so that for words of
/// equal length the packed comparison coincides with lexicographic order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = Bit>>(bits: I) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Builds the `len`-bit big-endian expansion of `value`: position 1 holds
    /// the most significant bit, so increasing values enumerate `{0,1}^len`
    /// in lexicographic order.
    pub fn from_value(value: u64, len: usize) -> Result<Self> {
        if len > WORD {
            return Err(invalid(format!("length {len} exceeds 64 bits")));
        }
        if len < WORD && value >> len != 0 {
            return Err(invalid(format!("value {value} does not fit in {len} bits")));
        }
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = value << (WORD - len);
        }
        Ok(s)
    }

    /// Inverse of [`BitString::from_value`].
    pub fn to_value(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            l if l <= WORD => Some(self.words[0] >> (WORD - l)),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Symbol at 1-based `position`, or `None` when out of range.
    pub fn get(&self, position: usize) -> Option<Bit> {
        if position == 0 || position > self.len {
            return None;
        }
        Some(self.raw(position - 1))
    }

    /// Symbol at 1-based `position`.
    ///
    /// Panics when the position is out of range.
    pub fn bit(&self, position: usize) -> Bit {
        self.get(position)
            .unwrap_or_else(|| panic!("position {position} out of range for length {}", self.len))
    }

    #[inline]
    fn raw(&self, idx: usize) -> Bit {
        Bit::from(self.words[idx / WORD] >> (WORD - 1 - idx % WORD) & 1 == 1)
    }

    #[inline]
    fn set_raw(&mut self, idx: usize, b: Bit) {
        let mask = 1u64 << (WORD - 1 - idx % WORD);
        match b {
            Bit::One => self.words[idx / WORD] |= mask,
            Bit::Zero => self.words[idx / WORD] &= !mask,
        }
    }

    pub fn push(&mut self, b: Bit) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set_raw(self.len - 1, b);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Bit> + '_ {
        (0..self.len).map(move |i| self.raw(i))
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Removes the symbol at 1-based position `position`.
    pub fn delete_at(&self, position: usize) -> Result<BitString> {
        if position == 0 || position > self.len {
            return Err(Error::PositionOutOfRange {
                position,
                len: self.len,
            });
        }
        let idx = position - 1;
        let mut words = self.words.clone();
        let w = idx / WORD;
        let off = idx % WORD;
        // Bits above `off` in word `w` stay; bits below shift up by one.
        let keep = if off == 0 { 0 } else { !0u64 << (WORD - off) };
        let low = if off == WORD - 1 {
            0
        } else {
            (words[w] << (off + 1)) >> off
        };
        words[w] = (words[w] & keep) | low;
        for k in w + 1..words.len() {
            let carry = words[k] >> (WORD - 1);
            words[k - 1] |= carry;
            words[k] <<= 1;
        }
        let len = self.len - 1;
        words.truncate(len.div_ceil(WORD));
        Ok(BitString { len, words })
    }

    /// Inserts `b` after `gap` symbols, `0 <= gap <= len`.
    pub fn insert_at(&self, gap: usize, b: Bit) -> Result<BitString> {
        if gap > self.len {
            return Err(Error::PositionOutOfRange {
                position: gap,
                len: self.len,
            });
        }
        let mut out = BitString::zeros(self.len + 1);
        for (i, bit) in self.iter().enumerate() {
            let j = if i < gap { i } else { i + 1 };
            out.set_raw(j, bit);
        }
        out.set_raw(gap, b);
        Ok(out)
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.len == other.len {
            return self.words.cmp(&other.words);
        }
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(Bit::as_char).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::new();
        for (k, c) in s.chars().enumerate() {
            match c {
                '0' => out.push(Bit::Zero),
                '1' => out.push(Bit::One),
                _ => {
                    return Err(Error::Parse {
                        literal: s.to_string(),
                        reason: format!("character {c:?} at position {}", k + 1),
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Parses a bitstring literal, panicking on malformed input. Intended for
/// constants and tests.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("valid bitstring literal")
}

pub fn delete_at(x: &BitString, i: usize) -> Result<BitString> {
    x.delete_at(i)
}

pub fn insert_at(x: &BitString, gap: usize, b: Bit) -> Result<BitString> {
    x.insert_at(gap, b)
}

/// The single-deletion surface of `x`: every word reachable by one deletion.
pub fn deletion_surface(x: &BitString) -> Result<BTreeSet<BitString>> {
    if x.is_empty() {
        return Err(invalid("deletion surface of the empty word"));
    }
    // One representative per run suffices: deleting anywhere in a run gives
    // the same word.
    let mut out = BTreeSet::new();
    let mut prev = None;
    for (k, b) in x.iter().enumerate() {
        if prev != Some(b) {
            out.insert(x.delete_at(k + 1)?);
        }
        prev = Some(b);
    }
    Ok(out)
}

/// Length of a longest common subsequence.
pub fn lcs_length(x: &BitString, y: &BitString) -> usize {
    let ys: Vec<Bit> = y.iter().collect();
    let mut row = vec![0usize; ys.len() + 1];
    for a in x.iter() {
        let mut diag = 0;
        for (j, &b) in ys.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if a == b { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[ys.len()]
}

/// Insertion/deletion distance (no substitutions).
pub fn levenshtein(x: &BitString, y: &BitString) -> usize {
    x.len() + y.len() - 2 * lcs_length(x, y)
}

/// A maximal run of `bit` occupying positions `start..=end` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunSupport {
    pub start: usize,
    pub end: usize,
    pub bit: Bit,
}

impl RunSupport {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, position: usize) -> bool {
        (self.start..=self.end).contains(&position)
    }
}

impl fmt::Display for RunSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{{{}}}", self.start)
        } else {
            write!(f, "{{{}..{}}}", self.start, self.end)
        }
    }
}

/// All runs of `x`, in order of position.
pub fn runs(x: &BitString) -> Vec<RunSupport> {
    let mut out: Vec<RunSupport> = Vec::new();
    for (k, b) in x.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.bit == b => r.end = k + 1,
            _ => out.push(RunSupport {
                start: k + 1,
                end: k + 1,
                bit: b,
            }),
        }
    }
    out
}

/// The `b`-run supports of `x`.
pub fn run_supports(x: &BitString, b: Bit) -> Vec<RunSupport> {
    runs(x).into_iter().filter(|r| r.bit == b).collect()
}

/// Multiset of run-support intervals, keyed by `(start, end)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RunSupportMultiset {
    counts: BTreeMap<(usize, usize), usize>,
}

impl RunSupportMultiset {
    pub fn insert(&mut self, start: usize, end: usize) {
        *self.counts.entry((start, end)).or_default() += 1;
    }

    pub fn multiplicity(&self, start: usize, end: usize) -> usize {
        self.counts.get(&(start, end)).copied().unwrap_or(0)
    }

    /// Total number of entries, counting multiplicity.
    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn from_intervals<I: IntoIterator<Item = (usize, usize)>>(it: I) -> Self {
        let mut m = Self::default();
        for (s, e) in it {
            m.insert(s, e);
        }
        m
    }
}

impl fmt::Display for RunSupportMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .iter()
            .map(|((s, e), c)| {
                let iv = if s == e {
                    format!("{{{s}}}")
                } else {
                    format!("{{{s}..{e}}}")
                };
                if c > 1 {
                    format!("{iv}x{c}")
                } else {
                    iv
                }
            })
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Multiset union of `run_supports(x, b)` over `x` in `words`.
pub fn run_support_multiset<'a, I>(words: I, b: Bit) -> Result<RunSupportMultiset>
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut out = RunSupportMultiset::default();
    let mut len = None;
    for x in words {
        match len {
            None => len = Some(x.len()),
            Some(n) if n != x.len() => {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: x.len(),
                })
            }
            _ => {}
        }
        for r in run_supports(x, b) {
            out.insert(r.start, r.end);
        }
    }
    Ok(out)
}

/// Common length of all words, or `None` for an empty collection.
pub(crate) fn common_length<'a, I>(words: I) -> Result<Option<usize>>
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut len = None;
    for x in words {
        match len {
            None => len = Some(x.len()),
            Some(n) if n != x.len() => {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: x.len(),
                })
            }
            _ => {}
        }
    }
    Ok(len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(words: &[&str]) -> BTreeSet<BitString> {
        words.iter().map(|w| bs(w)).collect()
    }

    /// Brute-force LCS: longest subsequence of `x` (by mask) that is also a
    /// subsequence of `y`.
    fn lcs_brute(x: &str, y: &str) -> usize {
        let xs: Vec<char> = x.chars().collect();
        let is_subseq = |s: &[char], t: &str| {
            let mut it = t.chars();
            s.iter().all(|c| it.any(|d| d == *c))
        };
        (0u32..1 << xs.len())
            .filter_map(|mask| {
                let sub: Vec<char> = (0..xs.len())
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| xs[k])
                    .collect();
                is_subseq(&sub, y).then_some(sub.len())
            })
            .max()
            .unwrap_or(0)
    }

    /// Shortest insert/delete edit sequence by breadth-first search.
    fn indel_bfs(x: &BitString, y: &BitString) -> usize {
        use std::collections::{HashSet, VecDeque};
        let max_len = x.len().max(y.len());
        let mut seen = HashSet::from([x.clone()]);
        let mut queue = VecDeque::from([(x.clone(), 0usize)]);
        while let Some((w, d)) = queue.pop_front() {
            if &w == y {
                return d;
            }
            let mut next = Vec::new();
            for i in 1..=w.len() {
                next.push(w.delete_at(i).unwrap());
            }
            if w.len() < max_len {
                for g in 0..=w.len() {
                    for b in Bit::ALL {
                        next.push(w.insert_at(g, b).unwrap());
                    }
                }
            }
            for v in next {
                if seen.insert(v.clone()) {
                    queue.push_back((v, d + 1));
                }
            }
        }
        unreachable!("y is always reachable")
    }

    #[test]
    fn delete_examples() {
        assert_eq!(delete_at(&bs("111000"), 3).unwrap(), bs("11000"));
        assert_eq!(delete_at(&bs("0"), 1).unwrap(), bs(""));
        assert_eq!(delete_at(&bs("0101"), 2).unwrap(), bs("001"));
        assert!(matches!(
            delete_at(&bs("0101"), 5),
            Err(Error::PositionOutOfRange { .. })
        ));
        assert!(delete_at(&bs("0101"), 0).is_err());
    }

    #[test]
    fn insert_examples() {
        assert_eq!(insert_at(&bs("11000"), 2, Bit::One).unwrap(), bs("111000"));
        assert_eq!(insert_at(&bs(""), 0, Bit::Zero).unwrap(), bs("0"));
        assert_eq!(insert_at(&bs("001"), 1, Bit::One).unwrap(), bs("0101"));
        assert!(insert_at(&bs("001"), 4, Bit::One).is_err());
    }

    #[test]
    fn surface_examples() {
        assert_eq!(
            deletion_surface(&bs("111000")).unwrap(),
            set(&["11000", "11100"])
        );
        assert_eq!(deletion_surface(&bs("000000")).unwrap(), set(&["00000"]));
        assert_eq!(
            deletion_surface(&bs("0101")).unwrap(),
            set(&["101", "001", "011", "010"])
        );
        assert!(deletion_surface(&bs("")).is_err());
    }

    #[test]
    fn lcs_and_distance_examples() {
        assert_eq!(lcs_brute("0101", "1010"), 3);
        assert_eq!(lcs_length(&bs("0101"), &bs("1010")), 3);
        assert_eq!(lcs_length(&bs("0000"), &bs("0000")), 4);
        assert_eq!(lcs_length(&bs("1111"), &bs("0000")), 0);
        assert_eq!(levenshtein(&bs("0101"), &bs("1010")), 2);
        assert_eq!(levenshtein(&bs("0110"), &bs("0110")), 0);
        assert_eq!(levenshtein(&bs("0000"), &bs("1111")), 8);
        assert_eq!(levenshtein(&bs(""), &bs("101")), 3);
    }

    #[test]
    fn run_support_examples() {
        let iv = |x: &str, b| -> Vec<(usize, usize)> {
            run_supports(&bs(x), b)
                .iter()
                .map(|r| (r.start, r.end))
                .collect()
        };
        assert_eq!(iv("0101", Bit::Zero), vec![(1, 1), (3, 3)]);
        assert_eq!(iv("0001", Bit::Zero), vec![(1, 3)]);
        assert!(iv("1111", Bit::Zero).is_empty());
    }

    #[test]
    fn run_support_multiset_examples() {
        let x = set(&["0001", "0011", "0101", "0111"]);
        assert_eq!(
            run_support_multiset(&x, Bit::Zero).unwrap(),
            RunSupportMultiset::from_intervals([(1, 1), (1, 1), (3, 3), (1, 2), (1, 3)])
        );
        assert!(run_support_multiset(&BTreeSet::new(), Bit::Zero)
            .unwrap()
            .is_empty());
        let y = set(&["000101", "010111"]);
        assert_eq!(
            run_support_multiset(&y, Bit::One).unwrap(),
            RunSupportMultiset::from_intervals([(4, 4), (6, 6), (2, 2), (4, 6)])
        );
        let mixed = [bs("01"), bs("011")];
        assert!(matches!(
            run_support_multiset(&mixed, Bit::One),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn packing_across_word_boundary() {
        let text: String = (0..150)
            .map(|k| if k % 3 == 0 { '1' } else { '0' })
            .collect();
        let x = bs(&text);
        assert_eq!(x.to_string(), text);
        for i in [1, 63, 64, 65, 128, 129, 150] {
            let mut expect = text.clone();
            expect.remove(i - 1);
            assert_eq!(x.delete_at(i).unwrap().to_string(), expect, "i={i}");
        }
    }

    #[test]
    fn from_value_is_big_endian() {
        assert_eq!(BitString::from_value(0b0110, 4).unwrap(), bs("0110"));
        assert_eq!(bs("1001").to_value(), Some(9));
        assert!(BitString::from_value(16, 4).is_err());
    }

    fn bitstring(max_len: usize) -> impl Strategy<Value = BitString> {
        prop::collection::vec(any::<bool>(), 0..=max_len)
            .prop_map(|v| BitString::from_bits(v.into_iter().map(Bit::from)))
    }

    fn pair_equal_len(max_len: usize) -> impl Strategy<Value = (BitString, BitString)> {
        (1..=max_len).prop_flat_map(|n| {
            let one = prop::collection::vec(any::<bool>(), n)
                .prop_map(|v| BitString::from_bits(v.into_iter().map(Bit::from)));
            (one.clone(), one)
        })
    }

    proptest! {
        #[test]
        fn single_deletion_has_distance_one(x in bitstring(70), seed in any::<usize>()) {
            prop_assume!(!x.is_empty());
            let i = seed % x.len() + 1;
            prop_assert_eq!(levenshtein(&x, &x.delete_at(i).unwrap()), 1);
        }

        #[test]
        fn insert_undoes_delete(x in bitstring(140), seed in any::<usize>()) {
            prop_assume!(!x.is_empty());
            let i = seed % x.len() + 1;
            let back = x.delete_at(i).unwrap().insert_at(i - 1, x.bit(i)).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn equal_length_distance_is_even((x, y) in pair_equal_len(12)) {
            prop_assert_eq!(levenshtein(&x, &y) % 2, 0);
        }

        #[test]
        fn distance_matches_bfs(x in bitstring(5), y in bitstring(5)) {
            prop_assert_eq!(levenshtein(&x, &y), indel_bfs(&x, &y));
        }

        #[test]
        fn runs_partition_positions(x in bitstring(40)) {
            let mut covered = vec![0u32; x.len()];
            for b in Bit::ALL {
                for r in run_supports(&x, b) {
                    for p in r.start..=r.end {
                        prop_assert_eq!(x.bit(p), b);
                        covered[p - 1] += 1;
                    }
                }
            }
            prop_assert!(covered.iter().all(|&c| c == 1));
        }

        #[test]
        fn order_matches_text_order(x in bitstring(90), y in bitstring(90)) {
            prop_assert_eq!(x.cmp(&y), x.to_string().cmp(&y.to_string()));
        }
    }

    #[test]
    fn distance_two_iff_surfaces_meet_exhaustive() {
        for n in 1..=10usize {
            let words: Vec<BitString> = (0..1u64 << n)
                .map(|v| BitString::from_value(v, n).unwrap())
                .collect();
            let surfaces: Vec<BTreeSet<BitString>> =
                words.iter().map(|w| deletion_surface(w).unwrap()).collect();
            for a in 0..words.len() {
                for b in a..words.len() {
                    let close = levenshtein(&words[a], &words[b]) <= 2;
                    let meet = !surfaces[a].is_disjoint(&surfaces[b]);
                    assert_eq!(close, meet, "{} {}", words[a], words[b]);
                }
            }
        }
    }
}
