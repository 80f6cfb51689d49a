#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_rational::Ratio;
use qdel::codes::vt_code;
use qdel::delsets::{cell, cell_decomposition, delta, DeletionCellIndex, PositionSet, WordSet};
use qdel::partition::{check_c1, check_c2, check_c3, FamilySet};
use qdel::quantum::{projector_supports, Ensemble, SparseState};
use qdel::{Bit, BitString};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Matrix = Vec<Vec<Complex64>>;

/// A random family set with `2 <= n <= 8` and at most four cells. Cells are
/// drawn either from uniformly random words or from a VT code, so that the
/// conditional lemmas see both passing and failing families.
pub fn random_family(rng: &mut impl Rng) -> FamilySet {
    let n = rng.random_range(2..=8usize);
    let mut pool: Vec<BitString> = if rng.random_bool(0.5) {
        let a = rng.random_range(0..=n as i64);
        vt_code(n, a).unwrap().words().iter().cloned().collect()
    } else {
        (0..1u64 << n)
            .map(|v| BitString::from_value(v, n).unwrap())
            .collect()
    };
    pool.shuffle(rng);
    let cells = rng.random_range(1..=4usize);
    let mut out = Vec::new();
    let mut it = pool.into_iter();
    for _ in 0..cells {
        let size = rng.random_range(1..=3usize);
        let words: WordSet = it.by_ref().take(size).collect();
        if words.is_empty() {
            break;
        }
        out.push(words);
    }
    FamilySet::new(n, out).unwrap()
}

fn all_position_sets(n: usize) -> Vec<PositionSet> {
    (1u32..1 << n)
        .map(|mask| PositionSet::new((1..=n).filter(|i| mask >> (i - 1) & 1 == 1)).unwrap())
        .collect()
}

/// Quantified form of the external condition: deletions from different
/// cells never coincide, over every pair of positions and bits.
pub fn slow_c2(fam: &FamilySet) -> bool {
    let n = fam.n();
    for (m1, x1) in fam.cells().iter().enumerate() {
        for x2 in &fam.cells()[m1 + 1..] {
            for i1 in 1..=n {
                for i2 in 1..=n {
                    for b1 in Bit::ALL {
                        for b2 in Bit::ALL {
                            let d1 = delta(x1, i1, b1).unwrap();
                            let d2 = delta(x2, i2, b2).unwrap();
                            if !d1.is_disjoint(&d2) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Quantified form of the internal condition.
pub fn slow_c3(fam: &FamilySet) -> bool {
    let n = fam.n();
    fam.cells().iter().all(|x| {
        (1..=n).all(|i1| {
            (1..=n).all(|i2| {
                delta(x, i1, Bit::Zero)
                    .unwrap()
                    .is_disjoint(&delta(x, i2, Bit::One).unwrap())
            })
        })
    })
}

/// The ratio condition over every candidate `(I, b)`, via the direct cell
/// formula, together with the common ratios of non-empty labels.
pub fn slow_c1(fam: &FamilySet) -> (bool, BTreeMap<DeletionCellIndex, Ratio<u64>>) {
    let mut lambda = BTreeMap::new();
    let mut holds = true;
    for p in all_position_sets(fam.n()) {
        for b in Bit::ALL {
            let idx = DeletionCellIndex::new(p.clone(), b);
            let ratios: BTreeSet<Ratio<u64>> = fam
                .cells()
                .iter()
                .map(|x| Ratio::new(cell(x, &idx).unwrap().len() as u64, x.len() as u64))
                .collect();
            if ratios.len() != 1 {
                holds = false;
            }
            let r = *ratios.iter().next().unwrap();
            if r != Ratio::from_integer(0) {
                lambda.insert(idx, r);
            }
        }
    }
    (holds, lambda)
}

/// Dense `2^n` amplitude vector, index big-endian.
pub fn dense_vector(s: &SparseState) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); 1 << s.qubits()];
    for (x, a) in s.iter() {
        v[x.to_value().unwrap() as usize] = *a;
    }
    v
}

pub fn dense_density(e: &Ensemble) -> Matrix {
    let d = 1 << e.qubits();
    let mut rho = vec![vec![Complex64::default(); d]; d];
    for (w, s) in e.members() {
        let v = dense_vector(s);
        for r in 0..d {
            for c in 0..d {
                rho[r][c] += v[r] * v[c].conj() * *w;
            }
        }
    }
    rho
}

/// `Tr_i(|psi><psi|)` from the definition: sum over the value of qubit `i`
/// of the matching blocks of the outer product.
pub fn dense_partial_trace(psi: &[Complex64], n: usize, i: usize) -> Matrix {
    let d = 1 << (n - 1);
    let shift = n - i;
    let insert = |y: usize, b: usize| {
        let high = y >> shift;
        let low = y & ((1 << shift) - 1);
        (high << (shift + 1)) | (b << shift) | low
    };
    let mut out = vec![vec![Complex64::default(); d]; d];
    for r in 0..d {
        for c in 0..d {
            for b in 0..2 {
                out[r][c] += psi[insert(r, b)] * psi[insert(c, b)].conj();
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    (0..d)
        .map(|r| {
            (0..d)
                .map(|c| (0..d).map(|k| a[r][k] * b[k][c]).sum())
                .collect()
        })
        .collect()
}

fn adjoint(a: &Matrix) -> Matrix {
    let d = a.len();
    (0..d)
        .map(|r| (0..d).map(|c| a[c][r].conj()).collect())
        .collect()
}

fn diag_projector(d: usize, support: &WordSet) -> Matrix {
    let mut p = vec![vec![Complex64::default(); d]; d];
    for y in support {
        let k = y.to_value().unwrap() as usize;
        p[k][k] = Complex64::new(1.0, 0.0);
    }
    p
}

/// Dense projectors `P_{I,b} = sum_m sum_{x in X^(m)_{I,b}} |x><x|` built
/// from the direct cell formula over every candidate label, keeping the
/// non-zero ones.
pub fn dense_projectors(fam: &FamilySet) -> BTreeMap<DeletionCellIndex, Matrix> {
    let d = 1 << (fam.n() - 1);
    let mut out = BTreeMap::new();
    for p in all_position_sets(fam.n()) {
        for b in Bit::ALL {
            let idx = DeletionCellIndex::new(p.clone(), b);
            let mut m = vec![vec![Complex64::default(); d]; d];
            let mut any = false;
            for x in fam.cells() {
                for y in cell(x, &idx).unwrap() {
                    let k = y.to_value().unwrap() as usize;
                    m[k][k] += Complex64::new(1.0, 0.0);
                    any = true;
                }
            }
            if any {
                out.insert(idx, m);
            }
        }
    }
    out
}

/// Hypotheses met by one family, for reporting coverage.
#[derive(Default, Debug, Clone, Copy)]
pub struct Coverage {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub dense: bool,
}

/// Runs every structural lemma on `fam`; returns the violations found.
pub fn lemma_violations(fam: &FamilySet) -> (Vec<String>, Coverage) {
    let mut bad = Vec::new();
    let n = fam.n();
    let c1 = check_c1(fam);
    let c2 = check_c2(fam).holds;
    let c3 = check_c3(fam).holds;
    let cov = Coverage {
        c1: c1.holds,
        c2,
        c3,
        dense: n <= 5 && c2 && c3,
    };

    for (m, x) in fam.cells().iter().enumerate() {
        for b in Bit::ALL {
            let dec = cell_decomposition(x, b).unwrap();
            // Partition of each positional deletion set.
            for j in 1..=n {
                let dj = delta(x, j, b).unwrap();
                let parts: Vec<&WordSet> = dec
                    .cells()
                    .iter()
                    .filter(|(p, _)| p.contains(j))
                    .map(|(_, w)| w)
                    .collect();
                let union: WordSet = parts.iter().flat_map(|w| w.iter().cloned()).collect();
                if union != dj || parts.iter().map(|w| w.len()).sum::<usize>() != dj.len() {
                    bad.push(format!("cells do not partition delta_{j},{b} of cell {m}"));
                }
            }
            // Inclusion and exclusion, and agreement with the direct formula.
            for (p, words) in dec.cells() {
                let idx = DeletionCellIndex::new(p.clone(), b);
                if &cell(x, &idx).unwrap() != words {
                    bad.push(format!("cell {idx} of {m} disagrees with direct formula"));
                }
                for i in 1..=n {
                    let di = delta(x, i, b).unwrap();
                    let ok = if p.contains(i) {
                        words.is_subset(&di)
                    } else {
                        words.is_disjoint(&di)
                    };
                    if !ok {
                        bad.push(format!("inclusion fails for {idx}, i={i}, cell {m}"));
                    }
                }
            }
            // Uniqueness of the position set of each deleted word.
            for y in dec.deleted_words() {
                let positions: Vec<usize> = (1..=n)
                    .filter(|&i| delta(x, i, b).unwrap().contains(y))
                    .collect();
                let holders = dec.cells().values().filter(|w| w.contains(y)).count();
                if dec.label_of(y).map(|p| p.positions()) != Some(&positions[..]) || holders != 1 {
                    bad.push(format!("position set of {y} not unique in cell {m}"));
                }
            }
        }
    }

    if c2 != slow_c2(fam) {
        bad.push(format!("C2 disagrees with quantified oracle ({c2})"));
    }
    if c3 != slow_c3(fam) {
        bad.push(format!("C3 disagrees with quantified oracle ({c3})"));
    }
    let (slow1, slow_lambda) = slow_c1(fam);
    if c1.holds != slow1 {
        bad.push(format!("C1 disagrees with direct oracle ({})", c1.holds));
    }
    if let Some(l) = &c1.lambda {
        let table: BTreeMap<DeletionCellIndex, Ratio<u64>> =
            l.iter().map(|(k, v)| (k.clone(), *v)).collect();
        if table != slow_lambda {
            bad.push("lambda table disagrees with direct oracle".into());
        }
        for i in 1..=n {
            if l.position_sum(i) != Ratio::from_integer(1) {
                bad.push(format!("lambda does not sum to 1 at position {i}"));
            }
        }
    }

    let labelled: Vec<Vec<(DeletionCellIndex, WordSet)>> = fam
        .cells()
        .iter()
        .map(|x| {
            Bit::ALL
                .into_iter()
                .flat_map(|b| {
                    let dec = cell_decomposition(x, b).unwrap();
                    dec.cells()
                        .iter()
                        .map(|(p, w)| (DeletionCellIndex::new(p.clone(), b), w.clone()))
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    if c2 {
        for (m1, l1) in labelled.iter().enumerate() {
            for l2 in &labelled[m1 + 1..] {
                for (k1, w1) in l1 {
                    for (k2, w2) in l2 {
                        if !w1.is_disjoint(w2) {
                            bad.push(format!("C2 holds but {k1} and {k2} meet across cells"));
                        }
                    }
                }
            }
        }
    }
    if c3 {
        for (m, l) in labelled.iter().enumerate() {
            for (a, (k1, w1)) in l.iter().enumerate() {
                for (k2, w2) in &l[a + 1..] {
                    if !w1.is_disjoint(w2) {
                        bad.push(format!("C3 holds but {k1} and {k2} meet in cell {m}"));
                    }
                }
            }
        }
    }

    if c2 && c3 {
        let supports = projector_supports(fam);
        let all: Vec<&WordSet> = supports.values().collect();
        for (a, s1) in all.iter().enumerate() {
            for s2 in &all[a + 1..] {
                if !s1.is_disjoint(s2) {
                    bad.push("projector supports overlap".into());
                }
            }
        }
        for (k, s) in &supports {
            let union: WordSet = labelled
                .iter()
                .flat_map(|l| {
                    l.iter()
                        .filter(|(k2, _)| k2 == k)
                        .flat_map(|(_, w)| w.iter().cloned())
                })
                .collect();
            if &union != s {
                bad.push(format!("support of {k} is not the union of its cells"));
            }
        }
        if cov.dense {
            bad.extend(dense_projector_violations(fam, &supports));
        }
    }
    (bad, cov)
}

fn dense_projector_violations(
    fam: &FamilySet,
    supports: &BTreeMap<DeletionCellIndex, WordSet>,
) -> Vec<String> {
    const TOL: f64 = 1e-12;
    let mut bad = Vec::new();
    let d = 1 << (fam.n() - 1);
    let dense = dense_projectors(fam);
    if dense.keys().collect::<Vec<_>>() != supports.keys().collect::<Vec<_>>() {
        bad.push("reachable labels differ from dense oracle".into());
        return bad;
    }
    let mut sum = vec![vec![Complex64::default(); d]; d];
    let covered: WordSet = supports.values().flat_map(|s| s.iter().cloned()).collect();
    let complement: WordSet = (0..d as u64)
        .map(|v| BitString::from_value(v, fam.n() - 1).unwrap())
        .filter(|y| !covered.contains(y))
        .collect();
    let empty = diag_projector(d, &complement);
    for (k, p) in &dense {
        if max_abs_diff(p, &diag_projector(d, &supports[k])) > TOL {
            bad.push(format!("sparse projector {k} differs from dense oracle"));
        }
        if max_abs_diff(&matmul(p, p), p) > TOL {
            bad.push(format!("P^2 != P for {k}"));
        }
        if max_abs_diff(&adjoint(p), p) > TOL {
            bad.push(format!("P is not Hermitian for {k}"));
        }
        let zero = vec![vec![Complex64::default(); d]; d];
        for (k2, p2) in &dense {
            if k2 != k && max_abs_diff(&matmul(p, p2), &zero) > TOL {
                bad.push(format!("P{k} P{k2} != 0"));
            }
        }
        if max_abs_diff(&matmul(p, &empty), &zero) > TOL {
            bad.push(format!("P{k} P_EMPTY != 0"));
        }
        for r in 0..d {
            for c in 0..d {
                sum[r][c] += p[r][c];
            }
        }
    }
    let identity: Matrix = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for r in 0..d {
        for c in 0..d {
            sum[r][c] += empty[r][c];
        }
    }
    if max_abs_diff(&sum, &identity) > TOL {
        bad.push("projectors are not complete".into());
    }
    bad
}

/// Random normalized state on `n` qubits with independent Gaussian
/// amplitudes on a random support.
pub fn random_state(n: usize, rng: &mut impl Rng) -> SparseState {
    use rand_distr::StandardNormal;
    let mut amps = Vec::new();
    for v in 0..1u64 << n {
        if rng.random_bool(0.7) {
            let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            amps.push((BitString::from_value(v, n).unwrap(), a));
        }
    }
    let amps = if amps.is_empty() {
        vec![(BitString::zeros(n), Complex64::new(1.0, 0.0))]
    } else {
        amps
    };
    SparseState::from_amplitudes(n, amps)
        .unwrap()
        .normalized()
        .unwrap()
}

pub fn shortest_family() -> FamilySet {
    FamilySet::from_literals(&[
        &["0000", "1111"],
        &["0011", "0101", "0110", "1001", "1010", "1100"],
    ])
    .unwrap()
}
