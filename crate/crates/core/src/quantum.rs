//! Exact sparse simulation of encoding, single-qubit deletion, and decoding.
//!
//! Pure states are finite maps from computational-basis words to complex
//! amplitudes. Mixed states are ensembles of pure states; every map applied
//! downstream of the deletion (diagonal projections, the recovery isometry,
//! discarding the zero register) is linear in the density operator, so
//! propagating ensemble members one by one reproduces the density-matrix
//! evolution without ever forming a `2^n x 2^n` matrix.
//!
//! The recovery unitary `U_{I,b}` is realized as coefficient extraction in
//! the orthonormal family `psi^(m)_{I,b}`: a branch state `sum_m a_m psi^(m)`
//! is mapped straight to the message `sum_m a_m |m>`, which is what `U_{I,b}`
//! followed by tracing out the zero register produces.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::delsets::{DeletionCellIndex, WordSet};
use crate::error::{invalid, Error, Result};
use crate::partition::{
    check_conditions, decompose_family, ConditionReport, FamilySet, LambdaTable,
};
use crate::seqcore::BitString;

/// Normalization and orthogonality tolerance.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Branch fidelity, EMPTY probability and recovery-residual tolerance.
pub const FIDELITY_TOLERANCE: f64 = 1e-9;
/// Amplitudes below this magnitude are dropped.
pub const PRUNE_TOLERANCE: f64 = 1e-15;
/// Outcomes at or below this probability are not reported.
pub const OUTCOME_CUTOFF: f64 = 1e-12;

/// A pure state as a sparse amplitude map over `qubits`-bit words.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    qubits: usize,
    amps: BTreeMap<BitString, Complex64>,
}

impl SparseState {
    /// The zero vector.
    pub fn zero(qubits: usize) -> Self {
        Self {
            qubits,
            amps: BTreeMap::new(),
        }
    }

    pub fn basis(x: BitString) -> Self {
        let qubits = x.len();
        Self {
            qubits,
            amps: BTreeMap::from([(x, Complex64::new(1.0, 0.0))]),
        }
    }

    /// Sums the given amplitudes; repeated words accumulate.
    pub fn from_amplitudes<I>(qubits: usize, amps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BitString, Complex64)>,
    {
        let mut s = Self::zero(qubits);
        for (x, a) in amps {
            if x.len() != qubits {
                return Err(Error::LengthMismatch {
                    expected: qubits,
                    found: x.len(),
                });
            }
            *s.amps.entry(x).or_default() += a;
        }
        s.prune();
        Ok(s)
    }

    /// `|m>` on `qubits` qubits, `m` written big-endian.
    pub fn message_basis(m: usize, qubits: usize) -> Result<Self> {
        Ok(Self::basis(BitString::from_value(m as u64, qubits)?))
    }

    /// Builds `sum_m coeffs[m] |m>` on `qubits` qubits.
    pub fn from_message_amplitudes(coeffs: &[Complex64], qubits: usize) -> Result<Self> {
        let amps = coeffs
            .iter()
            .enumerate()
            .map(|(m, &a)| Ok((BitString::from_value(m as u64, qubits)?, a)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_amplitudes(qubits, amps)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitude(&self, x: &BitString) -> Complex64 {
        self.amps.get(x).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &Complex64)> {
        self.amps.iter()
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= PRUNE_TOLERANCE {
            return Err(invalid("cannot normalize the zero vector"));
        }
        let mut s = self.clone();
        s.amps.values_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        let (small, large, conj_small) = if self.amps.len() <= other.amps.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .amps
            .iter()
            .filter_map(|(x, a)| large.amps.get(x).map(|b| (a, b)))
            .map(|(a, b)| {
                if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                }
            })
            .sum()
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
    }

    /// One `bitstring TAB re TAB im` line per stored amplitude.
    pub fn to_lines(&self) -> String {
        self.amps
            .iter()
            .map(|(x, a)| format!("{x}\t{:e}\t{:e}\n", a.re, a.im))
            .collect()
    }

    /// Parses the format written by [`SparseState::to_lines`].
    pub fn from_lines(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut qubits = None;
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [word, re, im] = fields[..] else {
                return Err(invalid(format!(
                    "line {}: expected 3 tab-separated fields",
                    k + 1
                )));
            };
            let x: BitString = word.parse()?;
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| invalid(format!("line {}: {e}", k + 1)))
            };
            qubits.get_or_insert(x.len());
            entries.push((x, Complex64::new(num(re)?, num(im)?)));
        }
        let qubits = qubits.ok_or_else(|| invalid("empty state"))?;
        Self::from_amplitudes(qubits, entries)
    }
}

/// A mixed state `sum_k w_k |phi_k><phi_k|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    qubits: usize,
    members: Vec<(f64, SparseState)>,
}

impl Ensemble {
    pub fn new(qubits: usize, members: Vec<(f64, SparseState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("an ensemble needs at least one member"));
        }
        let mut total = 0.0;
        for (w, s) in &members {
            if w.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(invalid(format!("ensemble weight {w} is not positive")));
            }
            if s.qubits() != qubits {
                return Err(Error::LengthMismatch {
                    expected: qubits,
                    found: s.qubits(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { qubits, members })
    }

    pub fn pure(state: SparseState) -> Self {
        Self {
            qubits: state.qubits(),
            members: vec![(1.0, state)],
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn members(&self) -> &[(f64, SparseState)] {
        &self.members
    }

    /// Entry `<x| rho |y>` of the density operator.
    pub fn density_entry(&self, x: &BitString, y: &BitString) -> Complex64 {
        self.members
            .iter()
            .map(|(w, s)| s.amplitude(x) * s.amplitude(y).conj() * *w)
            .sum()
    }
}

/// A measurement outcome label: a cell label `(I, b)` or the complement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeLabel {
    Cell(DeletionCellIndex),
    Empty,
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::Cell(k) => write!(f, "{k}"),
            OutcomeLabel::Empty => f.write_str("EMPTY"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub label: OutcomeLabel,
    pub probability: f64,
}

/// How the decoding measurement is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every outcome, with its probability and post-measurement state.
    Exhaustive,
    /// One outcome drawn with a generator seeded by the given value.
    Sampled(u64),
}

/// A validated family set with everything the decoder needs precomputed.
#[derive(Clone, Debug)]
pub struct CodeInstance {
    family: FamilySet,
    message_qubits: usize,
    conditions: ConditionReport,
    labels: Vec<DeletionCellIndex>,
    /// Deleted word -> (label index, cell index).
    lookup: HashMap<BitString, (usize, usize)>,
    /// `basis[label][m]` is `psi^(m)_{I,b}`.
    basis: Vec<Vec<SparseState>>,
}

fn ceil_log2(m: usize) -> usize {
    (usize::BITS - (m - 1).leading_zeros()) as usize
}

impl CodeInstance {
    /// Validates the three conditions and precomputes the measurement.
    pub fn new(family: FamilySet) -> Result<Self> {
        let conditions = check_conditions(&family);
        if !conditions.all_hold() {
            return Err(Error::InvalidCode(format!(
                "family set fails the conditions:\n{conditions}"
            )));
        }
        let m_count = family.len();
        if m_count < 2 {
            return Err(Error::InvalidCode(
                "the encoder needs at least two cells".into(),
            ));
        }
        let message_qubits = ceil_log2(m_count);
        if message_qubits > family.n() - 1 {
            return Err(Error::InvalidCode(format!(
                "{m_count} messages do not fit in {} qubits",
                family.n() - 1
            )));
        }

        let lambda = conditions.lambda.as_ref().expect("present when C1 holds");
        let labels: Vec<DeletionCellIndex> = lambda.iter().map(|(k, _)| k.clone()).collect();
        let label_id: HashMap<&DeletionCellIndex, usize> =
            labels.iter().enumerate().map(|(k, l)| (l, k)).collect();

        let mut cells: Vec<Vec<WordSet>> = vec![vec![WordSet::new(); m_count]; labels.len()];
        let mut lookup = HashMap::new();
        for (m, decomp) in decompose_family(&family).into_iter().enumerate() {
            for d in decomp {
                for (positions, words) in d.cells() {
                    let k = label_id[&DeletionCellIndex::new(positions.clone(), d.bit())];
                    for y in words {
                        lookup.insert(y.clone(), (k, m));
                    }
                    cells[k][m] = words.clone();
                }
            }
        }
        let basis = cells
            .into_iter()
            .map(|per_m| {
                per_m
                    .into_iter()
                    .map(|words| {
                        debug_assert!(
                            !words.is_empty(),
                            "ratio condition makes every cell reachable"
                        );
                        let amp = Complex64::new(1.0 / (words.len() as f64).sqrt(), 0.0);
                        let qubits = family.n() - 1;
                        SparseState::from_amplitudes(qubits, words.into_iter().map(|y| (y, amp)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            family,
            message_qubits,
            conditions,
            labels,
            lookup,
            basis,
        })
    }

    pub fn family(&self) -> &FamilySet {
        &self.family
    }

    /// Code length `n`.
    pub fn n(&self) -> usize {
        self.family.n()
    }

    /// Number of messages `M`.
    pub fn dimension(&self) -> usize {
        self.family.len()
    }

    /// `ceil(log2 M)`.
    pub fn message_qubits(&self) -> usize {
        self.message_qubits
    }

    pub fn conditions(&self) -> &ConditionReport {
        &self.conditions
    }

    pub fn lambda(&self) -> &LambdaTable {
        self.conditions.lambda.as_ref().expect("validated")
    }

    /// Labels `(I, b)` whose projector is non-zero.
    pub fn reachable_outcomes(&self) -> &[DeletionCellIndex] {
        &self.labels
    }

    /// `psi^(m)_{I,b}`, or `None` for an unreachable label.
    pub fn basis_state(&self, label: &DeletionCellIndex, m: usize) -> Option<&SparseState> {
        let k = self.labels.binary_search(label).ok()?;
        self.basis[k].get(m)
    }

    /// The cell label and message index a deleted word belongs to.
    pub fn locate(&self, y: &BitString) -> Option<(&DeletionCellIndex, usize)> {
        self.lookup.get(y).map(|&(k, m)| (&self.labels[k], m))
    }
}

/// Supports of the projectors `P_{I,b} = sum_m sum_{x in X^(m)_{I,b}} |x><x|`
/// for every label with a non-zero projector.
///
/// The projectors are diagonal in the computational basis, so each one is
/// fully described by its support; `P_EMPTY` is supported on the complement
/// of their union.
pub fn projector_supports(fam: &FamilySet) -> BTreeMap<DeletionCellIndex, WordSet> {
    let mut out: BTreeMap<DeletionCellIndex, WordSet> = BTreeMap::new();
    for decomp in decompose_family(fam) {
        for d in decomp {
            for (positions, words) in d.cells() {
                out.entry(DeletionCellIndex::new(positions.clone(), d.bit()))
                    .or_default()
                    .extend(words.iter().cloned());
            }
        }
    }
    out
}

/// `sum_m a_m / sqrt(|X^(m)|) sum_{x in X^(m)} |x>`.
pub fn encode(code: &CodeInstance, message: &SparseState) -> Result<SparseState> {
    if message.qubits() != code.message_qubits() {
        return Err(Error::LengthMismatch {
            expected: code.message_qubits(),
            found: message.qubits(),
        });
    }
    if !message.is_normalized() {
        return Err(invalid(format!(
            "message has squared norm {}",
            message.norm_sqr()
        )));
    }
    let mut amps = Vec::new();
    for (word, &a) in message.iter() {
        let m = word.to_value().expect("message register fits in 64 bits") as usize;
        if m >= code.dimension() {
            return Err(Error::Domain(format!(
                "message has amplitude on |{word}> = |{m}>, but only {} messages exist",
                code.dimension()
            )));
        }
        let cell = code.family().cell(m);
        let scale = a / (cell.len() as f64).sqrt();
        amps.extend(cell.iter().map(|x| (x.clone(), scale)));
    }
    SparseState::from_amplitudes(code.n(), amps)
}

/// Traces out qubit `i` (1-based): the branches with `x_i = 0` and `x_i = 1`
/// become the ensemble members, weighted by their squared norms.
pub fn delete_qubit(state: &SparseState, i: usize) -> Result<Ensemble> {
    let n = state.qubits();
    if i == 0 || i > n {
        return Err(Error::PositionOutOfRange {
            position: i,
            len: n,
        });
    }
    if !state.is_normalized() {
        return Err(invalid(format!(
            "state has squared norm {}",
            state.norm_sqr()
        )));
    }
    let mut parts = [Vec::new(), Vec::new()];
    for (x, &a) in state.iter() {
        parts[x.bit(i) as usize].push((x.delete_at(i)?, a));
    }
    let mut members = Vec::new();
    for part in parts {
        if part.is_empty() {
            continue;
        }
        let branch = SparseState::from_amplitudes(n - 1, part)?;
        let p = branch.norm_sqr();
        if p > 0.0 {
            members.push((p, branch.normalized()?));
        }
    }
    Ensemble::new(n - 1, members)
}

/// One outcome of the decoding measurement and the state it leaves.
#[derive(Clone, Debug)]
pub struct MeasuredBranch {
    pub outcome: MeasurementOutcome,
    pub state: Ensemble,
}

/// Full outcome distribution, in label order with `EMPTY` last. Outcomes of
/// zero probability are omitted.
fn outcome_distribution(code: &CodeInstance, mixed: &Ensemble) -> Result<Vec<MeasuredBranch>> {
    if mixed.qubits() + 1 != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n() - 1,
            found: mixed.qubits(),
        });
    }
    let empty = code.labels.len();
    let mut acc: BTreeMap<usize, (f64, Vec<(f64, SparseState)>)> = BTreeMap::new();
    for (w, phi) in mixed.members() {
        let mut parts: BTreeMap<usize, Vec<(BitString, Complex64)>> = BTreeMap::new();
        for (y, &a) in phi.iter() {
            let k = code.lookup.get(y).map_or(empty, |&(k, _)| k);
            parts.entry(k).or_default().push((y.clone(), a));
        }
        for (k, amps) in parts {
            let proj = SparseState::from_amplitudes(mixed.qubits(), amps)?;
            let p = proj.norm_sqr();
            if p > 0.0 {
                let e = acc.entry(k).or_default();
                e.0 += w * p;
                e.1.push((w * p, proj.normalized()?));
            }
        }
    }
    acc.into_iter()
        .map(|(k, (p, members))| {
            let label = if k == empty {
                OutcomeLabel::Empty
            } else {
                OutcomeLabel::Cell(code.labels[k].clone())
            };
            let members = members.into_iter().map(|(w, s)| (w / p, s)).collect();
            Ok(MeasuredBranch {
                outcome: MeasurementOutcome {
                    label,
                    probability: p,
                },
                state: Ensemble::renormalized(mixed.qubits(), members)?,
            })
        })
        .collect()
}

impl Ensemble {
    /// Like [`Ensemble::new`] but rescales the weights to sum to one.
    fn renormalized(qubits: usize, mut members: Vec<(f64, SparseState)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        members.iter_mut().for_each(|(w, _)| *w /= total);
        Self::new(qubits, members)
    }
}

fn sample_index(probabilities: impl Iterator<Item = f64>, seed: u64) -> usize {
    let probabilities: Vec<f64> = probabilities.collect();
    let total: f64 = probabilities.iter().sum();
    let u = ChaCha8Rng::seed_from_u64(seed).random::<f64>() * total;
    let mut cum = 0.0;
    for (k, p) in probabilities.iter().enumerate() {
        cum += p;
        if u < cum {
            return k;
        }
    }
    probabilities.len() - 1
}

/// Performs the decoding measurement on a state of `n - 1` qubits.
pub fn measure(code: &CodeInstance, mixed: &Ensemble, mode: Mode) -> Result<Vec<MeasuredBranch>> {
    let mut dist = outcome_distribution(code, mixed)?;
    match mode {
        Mode::Exhaustive => {
            dist.retain(|b| b.outcome.probability > OUTCOME_CUTOFF);
            Ok(dist)
        }
        Mode::Sampled(seed) => {
            let k = sample_index(dist.iter().map(|b| b.outcome.probability), seed);
            Ok(vec![dist.swap_remove(k)])
        }
    }
}

/// Maps a post-measurement branch with outcome `label` to the message
/// register by expanding each member in the `psi^(m)_{label}` basis.
pub fn decode_branch(
    code: &CodeInstance,
    label: &OutcomeLabel,
    branch: &Ensemble,
) -> Result<Ensemble> {
    let OutcomeLabel::Cell(index) = label else {
        return Err(invalid("the EMPTY outcome has no recovery operator"));
    };
    let k = code
        .labels
        .binary_search(index)
        .map_err(|_| invalid(format!("outcome {index} is not reachable")))?;
    if branch.qubits() + 1 != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n() - 1,
            found: branch.qubits(),
        });
    }
    let m_count = code.dimension();
    let mut members = Vec::with_capacity(branch.members().len());
    for (w, phi) in branch.members() {
        let mut coeffs = vec![Complex64::default(); m_count];
        for (y, &a) in phi.iter() {
            if let Some(&(k2, m)) = code.lookup.get(y) {
                if k2 == k {
                    coeffs[m] += code.basis[k][m].amplitude(y).conj() * a;
                }
            }
        }
        let captured: f64 = coeffs.iter().map(Complex64::norm_sqr).sum();
        let residual = (phi.norm_sqr() - captured).max(0.0);
        if residual >= FIDELITY_TOLERANCE {
            return Err(Error::OutsideRecoverySpan {
                outcome: label.to_string(),
                residual,
            });
        }
        let msg = SparseState::from_message_amplitudes(&coeffs, code.message_qubits())?;
        members.push((*w, msg.normalized()?));
    }
    Ensemble::renormalized(code.message_qubits(), members)
}

/// One decoded branch of an exhaustive decode.
#[derive(Clone, Debug)]
pub struct DecodedBranch {
    pub outcome: MeasurementOutcome,
    pub message: Ensemble,
}

/// All decoded branches together with the measurement statistics.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub branches: Vec<DecodedBranch>,
    pub empty_probability: f64,
    /// Sum of the probabilities of every outcome, `EMPTY` included.
    pub probability_sum: f64,
}

impl DecodeResult {
    /// The probability-weighted mixture of all decoded branches.
    pub fn mixture(&self) -> Result<Ensemble> {
        let qubits = self.branches[0].message.qubits();
        let members = self
            .branches
            .iter()
            .flat_map(|b| {
                b.message
                    .members()
                    .iter()
                    .map(move |(w, s)| (w * b.outcome.probability, s.clone()))
            })
            .collect();
        Ensemble::renormalized(qubits, members)
    }
}

/// Measures, then recovers every non-`EMPTY` branch.
///
/// Fails when the `EMPTY` outcome is observed with probability at least
/// [`FIDELITY_TOLERANCE`].
pub fn decode_branches(code: &CodeInstance, mixed: &Ensemble) -> Result<DecodeResult> {
    let dist = outcome_distribution(code, mixed)?;
    let probability_sum = dist.iter().map(|b| b.outcome.probability).sum();
    let empty_probability = dist
        .iter()
        .find(|b| b.outcome.label == OutcomeLabel::Empty)
        .map_or(0.0, |b| b.outcome.probability);
    if empty_probability >= FIDELITY_TOLERANCE {
        return Err(Error::DecodeFailure {
            probability: empty_probability,
        });
    }
    let branches = dist
        .into_iter()
        .filter(|b| {
            b.outcome.label != OutcomeLabel::Empty && b.outcome.probability > OUTCOME_CUTOFF
        })
        .map(|b| {
            let message = decode_branch(code, &b.outcome.label, &b.state)?;
            Ok(DecodedBranch {
                outcome: b.outcome,
                message,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecodeResult {
        branches,
        empty_probability,
        probability_sum,
    })
}

/// The decoder: measurement, recovery, and discarding the zero register.
pub fn decode(code: &CodeInstance, mixed: &Ensemble, mode: Mode) -> Result<Ensemble> {
    match mode {
        Mode::Exhaustive => decode_branches(code, mixed)?.mixture(),
        Mode::Sampled(_) => {
            let branch = measure(code, mixed, mode)?.remove(0);
            if branch.outcome.label == OutcomeLabel::Empty {
                return Err(Error::DecodeFailure {
                    probability: branch.outcome.probability,
                });
            }
            decode_branch(code, &branch.outcome.label, &branch.state)
        }
    }
}

/// `<psi| rho |psi>`.
pub fn fidelity(pure: &SparseState, mixed: &Ensemble) -> Result<f64> {
    if pure.qubits() != mixed.qubits() {
        return Err(Error::LengthMismatch {
            expected: pure.qubits(),
            found: mixed.qubits(),
        });
    }
    let f: f64 = mixed
        .members()
        .iter()
        .map(|(w, phi)| w * pure.inner(phi).norm_sqr())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// A seeded, splittable source of per-task generators.
#[derive(Clone, Copy, Debug)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self(root)
    }

    /// An independent generator for task `index` within `domain`.
    pub fn rng(&self, domain: u32, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(u64::from(domain) << 48 ^ index);
        rng
    }
}

/// Random message with independent complex Gaussian amplitudes on the first
/// `m_count` basis states, normalized.
pub fn random_message(m_count: usize, qubits: usize, rng: &mut impl Rng) -> Result<SparseState> {
    let coeffs: Vec<Complex64> = (0..m_count)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    SparseState::from_message_amplitudes(&coeffs, qubits)?.normalized()
}

/// The messages used by [`roundtrip_verify`]: every `|m>`, the uniform
/// superposition, then `trials` random messages.
pub fn trial_messages(code: &CodeInstance, trials: usize, seed: u64) -> Result<Vec<SparseState>> {
    let m_count = code.dimension();
    let q = code.message_qubits();
    let mut out = (0..m_count)
        .map(|m| SparseState::message_basis(m, q))
        .collect::<Result<Vec<_>>>()?;
    let uniform = vec![Complex64::new(1.0, 0.0); m_count];
    out.push(SparseState::from_message_amplitudes(&uniform, q)?.normalized()?);
    let tree = SeedTree::new(seed);
    for t in 0..trials {
        out.push(random_message(m_count, q, &mut tree.rng(0, t as u64))?);
    }
    Ok(out)
}

/// One decoded branch of one round trip.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripRow {
    pub position: usize,
    pub trial: usize,
    pub outcome: String,
    pub branch_probability: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug)]
pub struct RoundtripReport {
    pub rows: Vec<RoundtripRow>,
    pub min_fidelity: f64,
    pub max_empty_probability: f64,
    /// Largest `|sum of outcome probabilities - 1|`.
    pub max_probability_error: f64,
}

impl RoundtripReport {
    /// Every branch fidelity, EMPTY probability and probability sum is
    /// within tolerance.
    pub fn passed(&self) -> bool {
        self.min_fidelity >= 1.0 - FIDELITY_TOLERANCE
            && self.max_empty_probability < FIDELITY_TOLERANCE
            && self.max_probability_error <= FIDELITY_TOLERANCE
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("i\ttrial\toutcome_label\tbranch_probability\tfidelity\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{}\t{}\t{}\t{:.15}\t{:.15}\n",
                r.position, r.trial, r.outcome, r.branch_probability, r.fidelity
            ));
        }
        s
    }
}

/// Runs encode, delete, decode for every deletion position and message of
/// [`trial_messages`], in exhaustive mode.
pub fn roundtrip_verify(code: &CodeInstance, trials: usize, seed: u64) -> Result<RoundtripReport> {
    roundtrip_verify_with(code, trials, seed, Mode::Exhaustive)
}

/// As [`roundtrip_verify`]; in sampled mode one branch per round trip is
/// drawn from a generator derived from `seed` and the task index. Outcome
/// statistics are exact in both modes.
pub fn roundtrip_verify_with(
    code: &CodeInstance,
    trials: usize,
    seed: u64,
    mode: Mode,
) -> Result<RoundtripReport> {
    let messages = trial_messages(code, trials, seed)?;
    let encoded = messages
        .iter()
        .map(|m| encode(code, m))
        .collect::<Result<Vec<_>>>()?;
    let tree = SeedTree::new(seed);
    let per_position = (1..=code.n())
        .into_par_iter()
        .map(|i| {
            let mut rows = Vec::new();
            let mut empty: f64 = 0.0;
            let mut perr: f64 = 0.0;
            for (t, (msg, enc)) in messages.iter().zip(&encoded).enumerate() {
                let wrap = |e: Error| Error::Roundtrip {
                    position: i,
                    trial: t,
                    source: Box::new(e),
                };
                let mixed = delete_qubit(enc, i).map_err(wrap)?;
                let result = decode_branches(code, &mixed).map_err(wrap)?;
                empty = empty.max(result.empty_probability);
                perr = perr.max((result.probability_sum - 1.0).abs());
                let chosen: Vec<&DecodedBranch> = match mode {
                    Mode::Exhaustive => result.branches.iter().collect(),
                    Mode::Sampled(_) => {
                        let task = ((i - 1) * messages.len() + t) as u64;
                        let s = tree.rng(1, task).random::<u64>();
                        let k =
                            sample_index(result.branches.iter().map(|b| b.outcome.probability), s);
                        vec![&result.branches[k]]
                    }
                };
                for b in chosen {
                    rows.push(RoundtripRow {
                        position: i,
                        trial: t,
                        outcome: b.outcome.label.to_string(),
                        branch_probability: b.outcome.probability,
                        fidelity: fidelity(msg, &b.message).map_err(wrap)?,
                    });
                }
            }
            Ok((rows, empty, perr))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = RoundtripReport {
        rows: Vec::new(),
        min_fidelity: 1.0,
        max_empty_probability: 0.0,
        max_probability_error: 0.0,
    };
    for (rows, empty, perr) in per_position {
        report.max_empty_probability = report.max_empty_probability.max(empty);
        report.max_probability_error = report.max_probability_error.max(perr);
        for r in &rows {
            report.min_fidelity = report.min_fidelity.min(r.fidelity);
        }
        report.rows.extend(rows);
    }
    Ok(report)
}

/// Bits of `|m>`, for callers that print message registers.
pub fn message_label(m: usize, qubits: usize) -> String {
    BitString::from_value(m as u64, qubits)
        .map(|b| b.to_string())
        .unwrap_or_default()
}
