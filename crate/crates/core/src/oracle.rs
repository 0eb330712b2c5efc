//! Brute-force references for auditing the decoders.
//!
//! Everything here works from raw check matrices and explicit enumeration,
//! without calling the lookup decoder, the stabilizer tables or the flip
//! cost machinery it is meant to check.

use serde::Serialize;
use thiserror::Error;

use crate::concat::{ConcatCode, ConcatError, PerfectSyndromes};
use crate::decoder::{decode_bidirectional, DecodeError, DecodeSession};
use crate::gf2::{BitMatrix, BitVector};
use crate::qhc::HammingCode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration budget exceeded after {0} candidates")]
    BudgetExceeded(u64),
    #[error("input length {got} does not match {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Concat(#[from] ConcatError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Limits for exhaustive searches. Running out is reported as
/// [`OracleError::BudgetExceeded`], never as a wrong answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_weight: usize,
    pub max_count: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_weight: 4,
            max_count: 1 << 24,
        }
    }
}

/// Minimum-weight `e` with `H e = s`, enumerating supports by increasing
/// weight and then lexicographically; the first hit wins.
pub fn exhaustive_mwe(
    h: &BitMatrix,
    s: &BitVector,
    budget: OracleBudget,
) -> Result<BitVector, OracleError> {
    if s.len() != h.rows() {
        return Err(OracleError::LengthMismatch {
            expected: h.rows(),
            got: s.len(),
        });
    }
    let n = h.cols();
    let cols: Vec<BitVector> = (0..n).map(|j| h.column(j)).collect();
    let mut count = 0u64;
    for w in 0..=budget.max_weight.min(n) {
        let mut idx: Vec<usize> = (0..w).collect();
        loop {
            count += 1;
            if count > budget.max_count {
                return Err(OracleError::BudgetExceeded(count - 1));
            }
            let mut acc = BitVector::zeros(h.rows());
            for &j in &idx {
                acc ^= &cols[j];
            }
            if &acc == s {
                return Ok(
                    BitVector::from_indices(n, idx.iter().copied()).expect("indices in range")
                );
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Err(OracleError::BudgetExceeded(count))
}

/// Advances a sorted index set to the next one in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let w = idx.len();
    for pos in (0..w).rev() {
        if idx[pos] < n - w + pos {
            idx[pos] += 1;
            for q in pos + 1..w {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `min_g |v + g|` over the group spanned by `basis`, with the attaining
/// element `v + g`. Elements are visited as bit masks over the basis; among
/// equal weights the smallest mask wins.
pub fn exhaustive_coset_min(
    basis: &[BitVector],
    v: &BitVector,
    budget: OracleBudget,
) -> Result<(usize, BitVector), OracleError> {
    if let Some(b) = basis.iter().find(|b| b.len() != v.len()) {
        return Err(OracleError::LengthMismatch {
            expected: v.len(),
            got: b.len(),
        });
    }
    let m = basis.len();
    if m >= 64 || (1u64 << m) > budget.max_count {
        return Err(OracleError::BudgetExceeded(0));
    }
    // Gray-code walk; ties are broken by the mask, not by visiting order.
    let mut cur = v.clone();
    let mut mask = 0u64;
    let mut best = (cur.weight(), 0u64, cur.clone());
    for step in 1..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        cur ^= &basis[bit];
        mask ^= 1 << bit;
        let w = cur.weight();
        if (w, mask) < (best.0, best.1) {
            best = (w, mask, cur.clone());
        }
    }
    Ok((best.0, best.2))
}

/// The row space of `H`, i.e. the X-stabilizer group of a CSS code with
/// `H_X = H`, as a basis.
pub fn stabilizer_basis(h: &BitMatrix) -> Vec<BitVector> {
    h.row_slice().to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepresentativeAudit {
    pub r: usize,
    pub triples: usize,
    /// `min |t + g|` over weight-3 logicals `t` and nonzero stabilizers `g`.
    pub min_shifted_weight: usize,
    /// True iff every weight-3 logical is the only weight-3 element of its coset.
    pub unique: bool,
}

/// Checks whether weight-3 logicals have unique weight-3 representatives.
pub fn representative_audit(code: &HammingCode) -> RepresentativeAudit {
    let h = code.check_matrix();
    let n = h.cols();
    let cols: Vec<BitVector> = (0..n).map(|j| h.column(j)).collect();
    let basis = stabilizer_basis(h);
    let mut group = vec![BitVector::zeros(n)];
    for b in &basis {
        let extra: Vec<BitVector> = group
            .iter()
            .map(|g| g.add(b).expect("same length"))
            .collect();
        group.extend(extra);
    }
    let mut triples = 0;
    let mut min_w = usize::MAX;
    let mut idx = vec![0, 1, 2];
    loop {
        let mut acc = cols[idx[0]].clone();
        acc ^= &cols[idx[1]];
        acc ^= &cols[idx[2]];
        if acc.is_zero() {
            triples += 1;
            let t = BitVector::from_indices(n, idx.iter().copied()).expect("in range");
            for g in group.iter().filter(|g| !g.is_zero()) {
                min_w = min_w.min(t.weight_of_sum(g));
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    RepresentativeAudit {
        r: code.r(),
        triples,
        min_shifted_weight: min_w,
        unique: min_w > 3,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitLogicalReport {
    pub e1_weight: usize,
    pub e2_weight: usize,
    pub level1_syndromes_equal: bool,
    pub level2_syndromes_equal: bool,
    pub sum_weight: usize,
    pub sum_is_logical: bool,
    pub sum_class_nonzero: bool,
    /// Weight of the bidirectional decoder's recovery for `E_1`.
    pub decoder_weight_e1: usize,
}

impl SplitLogicalReport {
    pub fn passed(&self) -> bool {
        self.e1_weight == 6
            && self.e2_weight == 6
            && self.level1_syndromes_equal
            && self.level2_syndromes_equal
            && self.sum_weight == 12
            && self.sum_is_logical
            && self.sum_class_nonzero
            && self.decoder_weight_e1 >= 6
    }
}

/// The two weight-6 halves of the weight-12 logical
/// `{(a, b) : a ∈ {2,3,4,5}, b ∈ {1,2,3}}` of a two-level code.
pub fn split_logical_halves(code: &ConcatCode) -> Result<(BitVector, BitVector), OracleError> {
    let e1 = code.error_from_addresses(&[
        vec![2, 1],
        vec![3, 1],
        vec![4, 1],
        vec![5, 1],
        vec![2, 2],
        vec![3, 2],
    ])?;
    let e2 = code.error_from_addresses(&[
        vec![4, 2],
        vec![5, 2],
        vec![2, 3],
        vec![3, 3],
        vec![4, 3],
        vec![5, 3],
    ])?;
    Ok((e1, e2))
}

/// Audits the split weight-12 logical on a two-level code.
pub fn verify_split_logical(code: &ConcatCode) -> Result<SplitLogicalReport, OracleError> {
    let (e1, e2) = split_logical_halves(code)?;
    let n1 = code.local(1).n();
    let h1 = code.local(1).check_matrix();
    let blocks = code.block_count(1);
    let level1_equal = (0..blocks).all(|b| {
        let s1 = h1.matvec(&e1.slice(b * n1, n1)).expect("block length");
        let s2 = h1.matvec(&e2.slice(b * n1, n1)).expect("block length");
        s1 == s2
    });
    // Level-2 syndromes are defined after a common level-1 recovery.
    let mut session = DecodeSession::new(code);
    let lookup = |e: &BitVector, b: usize| {
        let s = h1.matvec(&e.slice(b * n1, n1)).expect("block length");
        exhaustive_mwe(h1, &s, OracleBudget::default())
    };
    for b in 0..blocks {
        session.set_level1(b, lookup(&e1, b)?);
    }
    let level2_equal = level1_equal && {
        let s1 = PerfectSyndromes::new(code, &e1)?.extract_syndromes(2, 0, &session)?;
        let s2 = PerfectSyndromes::new(code, &e2)?.extract_syndromes(2, 0, &session)?;
        s1 == s2
    };
    let sum = e1.add(&e2).expect("same length");
    let class = code.level_error(&sum, 2);
    let decoded = decode_bidirectional(code, &PerfectSyndromes::new(code, &e1)?)?;
    Ok(SplitLogicalReport {
        e1_weight: e1.weight(),
        e2_weight: e2.weight(),
        level1_syndromes_equal: level1_equal,
        level2_syndromes_equal: level2_equal,
        sum_weight: sum.weight(),
        sum_is_logical: class.is_ok(),
        sum_class_nonzero: class.map(|c| !c.is_zero()).unwrap_or(false),
        decoder_weight_e1: decoded.recovery().weight(),
    })
}

/// The weight-10 error on a three-level Steane code that the bidirectional
/// decoder fails to correct.
pub fn steane_weight10_error(code: &ConcatCode) -> Result<BitVector, OracleError> {
    let mut addrs = Vec::new();
    for i in 1..=2 {
        for (j, k) in [(2, 1), (4, 2), (4, 3), (6, 2), (6, 3)] {
            addrs.push(vec![i, j, k]);
        }
    }
    Ok(code.error_from_addresses(&addrs)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlternativeRecovery {
    /// Physical weight spent inside each of the two damaged level-2 blocks.
    pub block_costs: [usize; 2],
    pub total_weight: usize,
    pub level1_syndromes_match: bool,
    pub corrects: bool,
}

/// Builds the low-weight recovery for [`steane_weight10_error`] that the greedy
/// cost estimate misses: in each damaged level-2 block the logical flip is
/// realized on level-1 qubits `{2, 4, 6}`, cancelling the existing level-1
/// recoveries. Level-1 pieces come from exhaustive coset minima.
pub fn steane_weight10_alternative(
    code: &ConcatCode,
) -> Result<(BitVector, AlternativeRecovery), OracleError> {
    let error = steane_weight10_error(code)?;
    let local = code.local(1);
    let h = local.check_matrix();
    let n = local.n();
    let basis = stabilizer_basis(h);
    let budget = OracleBudget::default();
    // {1, 2, 3} is a weight-3 logical of the Steane code.
    let logical = BitVector::from_indices(n, [0, 1, 2]).expect("in range");
    let mut recovery = BitVector::zeros(code.num_qubits());
    let mut costs = [0; 2];
    for (i, cost) in costs.iter_mut().enumerate() {
        for j in 0..n {
            let b = i * n + j;
            let s = h.matvec(&error.slice(b * n, n)).expect("block length");
            let mut piece = exhaustive_mwe(h, &s, budget)?;
            // Level-2 MWE flipped child 2; the rerouted flip is {2, 4, 6}.
            if j == 3 || j == 5 {
                piece ^= &logical;
                piece = exhaustive_coset_min(&basis, &piece, budget)?.1;
            }
            *cost += piece.weight();
            recovery.xor_at(b * n, &piece);
        }
    }
    let residual = error.add(&recovery).expect("same length");
    let level1_match = code.level_error(&residual, 1).is_ok();
    let corrects = matches!(code.level_error(&residual, code.levels()), Ok(le) if le.is_zero());
    Ok((
        recovery.clone(),
        AlternativeRecovery {
            block_costs: costs,
            total_weight: recovery.weight(),
            level1_syndromes_match: level1_match,
            corrects,
        },
    ))
}

/// Outcome of comparing a fast routine against its oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Agreement {
    pub checked: usize,
    pub mismatches: usize,
}

impl Agreement {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.mismatches == 0
    }
}

/// `lookup_decode` against [`exhaustive_mwe`] on all `2^r` syndromes.
pub fn lookup_agreement(code: &HammingCode) -> Result<Agreement, OracleError> {
    let r = code.r();
    let budget = OracleBudget {
        max_weight: 1,
        max_count: 1 << 20,
    };
    let mut mismatches = 0;
    for value in 0..(1usize << r) {
        let s = crate::qhc::Syndrome::from_value(r, value);
        if exhaustive_mwe(code.check_matrix(), s.bits(), budget)? != code.lookup_decode(&s) {
            mismatches += 1;
        }
    }
    Ok(Agreement {
        checked: 1 << r,
        mismatches,
    })
}

/// `coset_min` against [`exhaustive_coset_min`] on random `(base, δ)`;
/// both the weight and the attained element must agree.
pub fn coset_min_agreement(
    code: &HammingCode,
    samples: usize,
    seed: u64,
) -> Result<Agreement, OracleError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let basis = stabilizer_basis(code.check_matrix());
    let (n, k) = (code.n(), code.k());
    let mut mismatches = 0;
    for _ in 0..samples {
        let density = rng.random_range(0.0..0.6);
        let base =
            BitVector::from_bools(&(0..n).map(|_| rng.random_bool(density)).collect::<Vec<_>>());
        let delta =
            BitVector::from_bools(&(0..k).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
        let mut target = base.clone();
        for j in delta.iter_ones() {
            target ^= &code.logical_x()[j];
        }
        let (w, e) = exhaustive_coset_min(&basis, &target, OracleBudget::default())?;
        let (fw, fe) = code.coset_min(&base, &delta);
        let d = e.add(&fe).expect("same length");
        let same_coset =
            code.syndrome_value(&d) == 0 && matches!(code.logical_class(&d), Ok(c) if c.is_zero());
        if w != fw || fe.weight() != w || !same_coset {
            mismatches += 1;
        }
    }
    Ok(Agreement {
        checked: samples,
        mismatches,
    })
}
