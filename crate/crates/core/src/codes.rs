//! Classical code constructions.
//!
//! Besides Varshamov-Tenengolts codes this module implements the
//! erasure-to-deletion lift: each symbol `a` of a `2^E`-ary word is written
//! as `1^t beta(a) 0^t`, with `beta` the big-endian `E`-bit expansion. Applied
//! to the single parity-check code over `Z_{2^E}` (with `t = 1`) the image is
//! a single-deletion code, and translating codewords by constant vectors
//! partitions it into `2^{E(N-2)}` cells of `2^E` words each.

use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::delsets::WordSet;
use crate::error::{invalid, Error, Result};
use crate::partition::FamilySet;
use crate::seqcore::{common_length, deletion_surface, levenshtein, Bit, BitString};

/// Largest word length accepted by constructions that enumerate `{0,1}^n`.
pub const MAX_ENUMERATION_BITS: usize = 26;

/// A set of equal-length binary words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalCode {
    n: usize,
    words: WordSet,
}

impl ClassicalCode {
    pub fn new(n: usize, words: WordSet) -> Result<Self> {
        if let Some(bad) = words.iter().find(|w| w.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self { n, words })
    }

    /// Builds a code from a non-empty word collection, inferring the length.
    pub fn from_words<I: IntoIterator<Item = BitString>>(words: I) -> Result<Self> {
        let words: WordSet = words.into_iter().collect();
        let n = common_length(&words)?
            .ok_or_else(|| invalid("cannot infer the length of an empty code"))?;
        Ok(Self { n, words })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &WordSet {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.words.contains(x)
    }

    /// `log2 |C| / n`.
    pub fn rate(&self) -> f64 {
        (self.words.len() as f64).log2() / self.n as f64
    }
}

fn all_words(n: usize) -> Result<impl Iterator<Item = BitString>> {
    if n > MAX_ENUMERATION_BITS {
        return Err(Error::SizeGuard(format!(
            "enumerating {{0,1}}^{n} exceeds the {MAX_ENUMERATION_BITS}-bit limit"
        )));
    }
    Ok((0..1u64 << n).map(move |v| BitString::from_value(v, n).expect("fits")))
}

/// `{x : sum_i i*x_i = a (mod n+1)}`.
pub fn vt_code(n: usize, a: i64) -> Result<ClassicalCode> {
    if n == 0 {
        return Err(invalid("VT code length must be positive"));
    }
    let modulus = n as i64 + 1;
    let target = a.rem_euclid(modulus);
    let words = all_words(n)?
        .filter(|x| {
            let s: i64 = x
                .iter()
                .enumerate()
                .filter(|(_, b)| *b == Bit::One)
                .map(|(k, _)| k as i64 + 1)
                .sum();
            s % modulus == target
        })
        .collect();
    ClassicalCode::new(n, words)
}

/// Result of a pairwise deletion-code check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeletionCodeCheck {
    pub holds: bool,
    /// Two codewords whose single-deletion surfaces meet.
    pub witness: Option<(BitString, BitString)>,
}

/// Whether the single-deletion surfaces of distinct codewords are disjoint.
pub fn is_single_deletion_code(code: &ClassicalCode) -> Result<DeletionCodeCheck> {
    if code.n() < 2 && code.len() > 1 {
        return Ok(DeletionCodeCheck {
            holds: false,
            witness: code
                .words()
                .iter()
                .next()
                .cloned()
                .zip(code.words().iter().nth(1).cloned()),
        });
    }
    let mut owner: HashMap<BitString, &BitString> = HashMap::new();
    for x in code.words() {
        if x.is_empty() {
            continue;
        }
        for y in deletion_surface(x)? {
            if let Some(prev) = owner.insert(y, x) {
                if prev != x {
                    return Ok(DeletionCodeCheck {
                        holds: false,
                        witness: Some((prev.clone(), x.clone())),
                    });
                }
            }
        }
    }
    Ok(DeletionCodeCheck {
        holds: true,
        witness: None,
    })
}

/// Minimum insertion/deletion distance over distinct codeword pairs.
pub fn min_levenshtein(code: &ClassicalCode) -> Result<usize> {
    if code.len() < 2 {
        return Err(invalid("minimum distance needs at least two codewords"));
    }
    let words: Vec<&BitString> = code.words().iter().collect();
    let best = (0..words.len())
        .into_par_iter()
        .filter_map(|i| {
            words[i + 1..]
                .iter()
                .map(|y| levenshtein(words[i], y))
                .min()
        })
        .min()
        .expect("at least one pair");
    Ok(best)
}

/// Parameters of the high-rate construction: `E` bits per symbol, `N`
/// symbols per codeword and deletion radius `t`.
///
/// `N` is arbitrary precision so that rate targets close to 1 can be
/// answered even when the resulting code is far too long to build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighRateParams {
    bits_per_symbol: u32,
    symbols: BigUint,
    radius: u32,
}

impl HighRateParams {
    /// Single-deletion parameters `(E, N, t = 1)`.
    pub fn new(bits_per_symbol: u32, symbols: u64) -> Result<Self> {
        Self::with_radius(bits_per_symbol, BigUint::from(symbols), 1)
    }

    pub fn with_radius(bits_per_symbol: u32, symbols: BigUint, radius: u32) -> Result<Self> {
        if bits_per_symbol == 0 {
            return Err(invalid("E must be positive"));
        }
        if radius == 0 {
            return Err(invalid("t must be positive"));
        }
        if symbols.is_zero() {
            return Err(invalid("N must be positive"));
        }
        let q = BigUint::one() << bits_per_symbol;
        if !(&symbols % &q).is_zero() {
            return Err(invalid(format!(
                "N = {symbols} is not a multiple of 2^E = {q}"
            )));
        }
        Ok(Self {
            bits_per_symbol,
            symbols,
            radius,
        })
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn symbols(&self) -> &BigUint {
        &self.symbols
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// `N` as a machine integer, for constructions that materialize words.
    pub fn symbols_usize(&self) -> Result<usize> {
        self.symbols
            .to_usize()
            .ok_or_else(|| Error::SizeGuard(format!("N = {} is too large", self.symbols)))
    }

    pub fn alphabet_size(&self) -> Result<u32> {
        if self.bits_per_symbol >= 32 {
            return Err(Error::SizeGuard(format!(
                "alphabet 2^{} is too large",
                self.bits_per_symbol
            )));
        }
        Ok(1 << self.bits_per_symbol)
    }

    /// Bits per lifted symbol, `E + 2t`.
    pub fn block_length(&self) -> usize {
        (self.bits_per_symbol + 2 * self.radius) as usize
    }

    /// `(E + 2t) N`.
    pub fn code_length(&self) -> BigUint {
        &self.symbols * BigUint::from(self.block_length())
    }

    /// `log2` of the quantum dimension, `E (N - 2)` (zero when `N < 2`).
    pub fn dimension_log2(&self) -> BigUint {
        let two = BigUint::from(2u32);
        if self.symbols < two {
            return BigUint::zero();
        }
        (&self.symbols - two) * BigUint::from(self.bits_per_symbol)
    }
}

/// Lifts a `2^E`-ary word to bits, symbol by symbol, as `1^t beta(a) 0^t`.
pub fn sandwich_map(symbols: &[u32], params: &HighRateParams) -> Result<BitString> {
    let n = params.symbols_usize()?;
    if symbols.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: symbols.len(),
        });
    }
    let q = params.alphabet_size()?;
    let e = params.bits_per_symbol();
    let t = params.radius();
    let mut out = BitString::new();
    for &a in symbols {
        if a >= q {
            return Err(invalid(format!("symbol {a} outside Z_{q}")));
        }
        (0..t).for_each(|_| out.push(Bit::One));
        for k in (0..e).rev() {
            out.push(Bit::from(a >> k & 1 == 1));
        }
        (0..t).for_each(|_| out.push(Bit::Zero));
    }
    Ok(out)
}

/// Upper limit on `log2 |S|` for enumeration.
pub const MAX_PARITY_CODE_LOG2: u64 = 22;

/// The additive single parity-check code over `Z_{2^E}` of length `N`, in
/// lexicographic order.
pub fn parity_code(params: &HighRateParams) -> Result<Vec<Vec<u32>>> {
    let n = params.symbols_usize()?;
    let q = params.alphabet_size()?;
    let log2_size = u64::from(params.bits_per_symbol()) * (n as u64 - 1);
    if log2_size > MAX_PARITY_CODE_LOG2 {
        return Err(Error::SizeGuard(format!(
            "parity code has 2^{log2_size} words (limit 2^{MAX_PARITY_CODE_LOG2})"
        )));
    }
    let mut out = Vec::with_capacity(1 << log2_size);
    let mut prefix = vec![0u32; n - 1];
    loop {
        let sum = prefix.iter().fold(0u32, |s, &a| (s + a) % q);
        let mut word = prefix.clone();
        word.push((q - sum) % q);
        out.push(word);
        // Mixed-radix increment, last free symbol fastest.
        let mut k = prefix.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            prefix[k] += 1;
            if prefix[k] < q {
                break;
            }
            prefix[k] = 0;
        }
    }
}

/// The binary image of the parity code under the sandwich map.
pub fn highrate_code(params: &HighRateParams) -> Result<ClassicalCode> {
    let words = parity_code(params)?
        .iter()
        .map(|a| sandwich_map(a, params))
        .collect::<Result<WordSet>>()?;
    let n = params.symbols_usize()? * params.block_length();
    ClassicalCode::new(n, words)
}

/// Partitions the lifted parity code into the translates
/// `{F(a + i*1) : i in Z_{2^E}}`.
///
/// Cells are listed in lexicographic order of their smallest member, which
/// fixes the message index of each cell.
pub fn build_highrate_partition(params: &HighRateParams) -> Result<FamilySet> {
    if params.radius() != 1 {
        return Err(Error::Construction(
            "the partition is defined for single deletions (t = 1) only".into(),
        ));
    }
    if params.dimension_log2().is_zero() {
        return Err(Error::Construction(format!(
            "dimension too small: E(N-2) = 0 for E = {}, N = {}",
            params.bits_per_symbol(),
            params.symbols()
        )));
    }
    let q = params.alphabet_size()?;
    let mut cells: Vec<BTreeSet<BitString>> = Vec::new();
    for a in parity_code(params)? {
        // Each translate class has exactly one member with a leading 0, and
        // it is the lexicographically smallest one.
        if a[0] != 0 {
            continue;
        }
        let cell = (0..q)
            .map(|i| {
                let shifted: Vec<u32> = a.iter().map(|&s| (s + i) % q).collect();
                sandwich_map(&shifted, params)
            })
            .collect::<Result<BTreeSet<_>>>()?;
        cells.push(cell);
    }
    cells.sort_by(|x, y| x.first().cmp(&y.first()));
    let n = params.symbols_usize()? * params.block_length();
    FamilySet::new(n, cells)
}

fn big_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Quantum code rate `E(N-2) / ((E+2t) N)`.
pub fn rate(params: &HighRateParams) -> BigRational {
    big_ratio(params.dimension_log2(), params.code_length())
}

/// Smallest-length single-deletion parameters whose rate exceeds `target`.
///
/// For fixed `E` the rate increases with `N` towards `E/(E+2)`, and the
/// shortest legal length grows with `E`, so the scan over `E` stops once
/// `(E+2) 2^E` exceeds the best length found.
pub fn find_params_for_rate(target: &BigRational) -> Result<HighRateParams> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if *target <= zero || *target >= one {
        return Err(invalid(format!("target rate {target} outside (0, 1)")));
    }
    let mut best: Option<(BigUint, HighRateParams)> = None;
    for e in 1u32.. {
        let block = BigUint::from(e + 2);
        let q = BigUint::one() << e;
        if let Some((len, _)) = &best {
            if &block * &q >= *len {
                break;
            }
        }
        let e_big = BigRational::from_integer(BigInt::from(e));
        let slack = &e_big - target * BigRational::from_integer(BigInt::from(e + 2));
        if slack <= zero {
            continue;
        }
        // Need N * slack > 2E.
        let bound = (BigRational::from_integer(BigInt::from(2 * e)) / slack).floor();
        let min_n = bound.to_integer().to_biguint().expect("non-negative") + 1u32;
        let n = (&min_n + &q - 1u32) / &q * &q;
        let params = HighRateParams::with_radius(e, n, 1)?;
        debug_assert!(rate(&params) > *target);
        let len = params.code_length();
        if best.as_ref().is_none_or(|(l, _)| len < *l) {
            best = Some((len, params));
        }
    }
    Ok(best.expect("loop exits only after a candidate is found").1)
}
