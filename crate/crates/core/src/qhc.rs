//! A single quantum Hamming code `[[2^r − 1, 2^r − 2r − 1, 3]]`.
//!
//! Qubit `q` (1-based) carries the label `q`; column `q` of the parity-check
//! matrix is the `r`-bit binary representation of `q`, most significant bit in
//! the first row. The X and Z check matrices coincide. Internally every index
//! is 0-based: position `i` holds the qubit labelled `i + 1`.

use serde::Serialize;
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector};

/// Largest supported `r`; the stabilizer group is enumerated explicitly.
pub const MAX_R: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QhcError {
    #[error("quantum Hamming codes need 3 <= r <= {MAX_R}, got r = {0}")]
    InvalidR(usize),
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vector has nonzero syndrome {0}")]
    NonzeroSyndrome(usize),
}

/// Syndrome `(s_1, …, s_r)` of a local Hamming code.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Syndrome {
    bits: BitVector,
}

impl Syndrome {
    /// Syndrome whose binary reading `Σ s_j 2^{r−j}` equals `value`.
    pub fn from_value(r: usize, value: usize) -> Self {
        assert!(
            value < (1 << r),
            "syndrome value {value} does not fit in {r} bits"
        );
        // Bit j of the vector is bit r - 1 - j of the value.
        let reversed = (value as u128).reverse_bits() >> (128 - r);
        Self {
            bits: BitVector::from_u128(r, reversed),
        }
    }

    pub fn from_bits(bits: BitVector) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn r(&self) -> usize {
        self.bits.len()
    }

    /// The qubit label this syndrome points at (0 for the trivial syndrome).
    pub fn value(&self) -> usize {
        let r = self.bits.len();
        self.bits.iter_ones().map(|j| 1usize << (r - 1 - j)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }
}

#[derive(Debug)]
pub struct HammingCode {
    r: usize,
    n: usize,
    k: usize,
    h: BitMatrix,
    lx: Vec<BitVector>,
    lz: Vec<BitVector>,
    stabilizers: Vec<BitVector>,
    triples: Vec<[usize; 3]>,
    transfers: Vec<[usize; 3]>,
}

impl HammingCode {
    pub fn new(r: usize) -> Result<Self, QhcError> {
        if !(3..=MAX_R).contains(&r) {
            return Err(QhcError::InvalidR(r));
        }
        let n = (1usize << r) - 1;
        let k = n - 2 * r;

        let rows = (0..r)
            .map(|j| {
                let mut row = BitVector::zeros(n);
                for q in 0..n {
                    if ((q + 1) >> (r - 1 - j)) & 1 == 1 {
                        row.set(q, true);
                    }
                }
                row
            })
            .collect();
        let h = BitMatrix::from_rows(n, rows).expect("rows have length n");

        let (lx, lz) = symplectic_gram_schmidt(h.nullspace_basis());
        assert_eq!(lx.len(), k, "logical basis has the wrong size");

        let stabilizers = (0..=n)
            .map(|y| {
                let mut s = BitVector::zeros(n);
                for q in 0..n {
                    if ((q + 1) & y).count_ones() & 1 == 1 {
                        s.set(q, true);
                    }
                }
                s
            })
            .collect();

        let mut triples = Vec::with_capacity(n * (n - 1) / 6);
        for a in 1..=n {
            for b in (a + 1)..=n {
                let c = a ^ b;
                if c > b {
                    triples.push([a - 1, b - 1, c - 1]);
                }
            }
        }

        let mut transfers: Vec<[usize; 3]> = triples
            .iter()
            .flat_map(|&[x, y, z]| [[y, z, x], [x, z, y], [x, y, z]])
            .collect();
        transfers.sort_by_key(|&[a, b, c]| (c, a, b));

        Ok(Self {
            r,
            n,
            k,
            h,
            lx,
            lz,
            stabilizers,
            triples,
            transfers,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `r × n` check matrix (`H_X = H_Z`).
    pub fn check_matrix(&self) -> &BitMatrix {
        &self.h
    }

    /// Columns of `L_X`.
    pub fn logical_x(&self) -> &[BitVector] {
        &self.lx
    }

    /// Columns of `L_Z`.
    pub fn logical_z(&self) -> &[BitVector] {
        &self.lz
    }

    pub fn logical_x_matrix(&self) -> BitMatrix {
        BitMatrix::from_columns(self.n, &self.lx).expect("columns have length n")
    }

    pub fn logical_z_matrix(&self) -> BitMatrix {
        BitMatrix::from_columns(self.n, &self.lz).expect("columns have length n")
    }

    /// All `2^r` X-stabilizers. Element `y` is `Hᵀ s` where `s` is the
    /// `r`-bit reading of `y`; element 0 is the identity.
    pub fn x_stabilizers(&self) -> &[BitVector] {
        &self.stabilizers
    }

    /// Supports `[a, b, c]` (0-based, increasing) of the weight-3 logicals.
    pub fn weight3_triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    /// Every rotation `[a, b, c]` of every triple, meaning "move a flip from
    /// `c` onto `a` and `b`", with `a < b`, sorted by `(c, a, b)`.
    pub fn transfer_order(&self) -> &[[usize; 3]] {
        &self.transfers
    }

    fn check_len(&self, v: &BitVector) -> Result<(), QhcError> {
        if v.len() != self.n {
            return Err(QhcError::LengthMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// XOR of the labels of the set qubits, which is `H e` read as an integer.
    #[inline]
    pub fn syndrome_value(&self, e: &BitVector) -> usize {
        debug_assert_eq!(e.len(), self.n);
        e.iter_ones().fold(0, |acc, i| acc ^ (i + 1))
    }

    pub fn syndrome(&self, e: &BitVector) -> Result<Syndrome, QhcError> {
        self.check_len(e)?;
        Ok(Syndrome::from_value(self.r, self.syndrome_value(e)))
    }

    /// Minimum-weight error for a syndrome: empty, or the single qubit it names.
    pub fn lookup_decode(&self, s: &Syndrome) -> BitVector {
        debug_assert_eq!(s.r(), self.r);
        self.lookup_value(s.value())
    }

    #[inline]
    pub(crate) fn lookup_value(&self, value: usize) -> BitVector {
        let mut e = BitVector::zeros(self.n);
        if value != 0 {
            e.set(value - 1, true);
        }
        e
    }

    /// `L_X δ`.
    pub fn encode_logical(&self, delta: &BitVector) -> BitVector {
        debug_assert_eq!(delta.len(), self.k);
        let mut out = BitVector::zeros(self.n);
        for i in delta.iter_ones() {
            out ^= &self.lx[i];
        }
        out
    }

    /// Logical X class `L_Zᵀ v` of a vector with trivial syndrome.
    pub fn logical_class(&self, v: &BitVector) -> Result<BitVector, QhcError> {
        self.check_len(v)?;
        let s = self.syndrome_value(v);
        if s != 0 {
            return Err(QhcError::NonzeroSyndrome(s));
        }
        Ok(self.class_unchecked(v))
    }

    #[inline]
    pub(crate) fn class_unchecked(&self, v: &BitVector) -> BitVector {
        let mut c = BitVector::zeros(self.k);
        if v.is_zero() {
            return c;
        }
        for (i, z) in self.lz.iter().enumerate() {
            if z.dot(v) {
                c.set(i, true);
            }
        }
        c
    }

    /// `min_h |base + L_X δ + h|` over the X-stabilizers, with the first
    /// minimizer in enumeration order as the realization.
    pub fn coset_min(&self, base: &BitVector, delta: &BitVector) -> (usize, BitVector) {
        let mut target = base.clone();
        if !delta.is_zero() {
            target ^= &self.encode_logical(delta);
        }
        let (best, weight) = self.coset_argmin(&target);
        if best != 0 {
            target ^= &self.stabilizers[best];
        }
        (weight, target)
    }

    /// Weight only; same minimizer as [`coset_min`](Self::coset_min).
    pub fn coset_min_weight(&self, base: &BitVector, delta: &BitVector) -> usize {
        if delta.is_zero() {
            if base.is_zero() {
                return 0;
            }
            return self.coset_argmin(base).1;
        }
        let mut target = base.clone();
        target ^= &self.encode_logical(delta);
        self.coset_argmin(&target).1
    }

    fn coset_argmin(&self, target: &BitVector) -> (usize, usize) {
        let mut best = 0;
        let mut best_w = target.weight();
        // Nonzero stabilizers have weight 2^{r-1}, so |t + h| >= 2^{r-1} - |t|.
        if 2 * best_w <= self.stabilizers[1].weight() {
            return (0, best_w);
        }
        for (y, h) in self.stabilizers.iter().enumerate().skip(1) {
            let w = target.weight_of_sum(h);
            if w < best_w {
                best_w = w;
                best = y;
            }
        }
        (best, best_w)
    }

    pub fn describe(&self) -> CodeDescription {
        CodeDescription {
            r: self.r,
            n: self.n,
            k: self.k,
            h: self.h.row_slice().iter().map(BitVector::to_hex).collect(),
            lx: self.lx.iter().map(BitVector::to_hex).collect(),
            lz: self.lz.iter().map(BitVector::to_hex).collect(),
        }
    }
}

/// JSON-friendly view of a code. Every vector is hex encoded with bit `i`
/// (qubit `i + 1`) as the `2^i` place.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CodeDescription {
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub h: Vec<String>,
    pub lx: Vec<String>,
    pub lz: Vec<String>,
}

/// Pairs up vectors of `ker H` so that `L_Zᵀ L_X = I`.
///
/// Vectors with odd self-overlap become self-dual logicals (`x̄ = z̄`);
/// otherwise a vector is paired with the first partner it overlaps oddly and
/// the pair yields two logicals. The remaining pool is orthogonalized against
/// each new logical, and vectors left in the radical (the stabilizers) are
/// dropped.
fn symplectic_gram_schmidt(mut pool: Vec<BitVector>) -> (Vec<BitVector>, Vec<BitVector>) {
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    while !pool.is_empty() {
        let u = pool.remove(0);
        if u.dot(&u) {
            for w in pool.iter_mut() {
                if w.dot(&u) {
                    *w ^= &u;
                }
            }
            lx.push(u.clone());
            lz.push(u);
            continue;
        }
        let Some(j) = pool.iter().position(|w| w.dot(&u)) else {
            continue;
        };
        let v = pool.remove(j);
        if v.dot(&v) {
            // v is self-dual; take it first and revisit u afterwards.
            let mut u = u;
            if u.dot(&v) {
                u ^= &v;
            }
            for w in pool.iter_mut() {
                if w.dot(&v) {
                    *w ^= &v;
                }
            }
            pool.insert(0, u);
            lx.push(v.clone());
            lz.push(v);
            continue;
        }
        for w in pool.iter_mut() {
            let wu = w.dot(&u);
            let wv = w.dot(&v);
            if wv {
                *w ^= &u;
            }
            if wu {
                *w ^= &v;
            }
        }
        lx.push(u.clone());
        lz.push(v.clone());
        lx.push(v);
        lz.push(u);
    }
    (lx, lz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn support(v: &BitVector) -> Vec<usize> {
        v.iter_ones().map(|i| i + 1).collect()
    }

    fn qubits(n: usize, labels: &[usize]) -> BitVector {
        BitVector::from_indices(n, labels.iter().map(|q| q - 1)).unwrap()
    }

    #[test]
    fn rejects_small_r() {
        assert_eq!(HammingCode::new(2).unwrap_err(), QhcError::InvalidR(2));
        assert!(HammingCode::new(MAX_R + 1).is_err());
    }

    #[test]
    fn steane_check_matrix_matches_binary_labels() {
        let code = HammingCode::new(3).unwrap();
        let expect = ["0001111", "0110011", "1010101"];
        for (row, s) in code.check_matrix().row_slice().iter().zip(expect) {
            assert_eq!(row.to_string(), s);
        }
        assert_eq!((code.n(), code.k()), (7, 1));
    }

    #[test]
    fn parameters() {
        for (r, n, k, triples) in [(3, 7, 1, 7), (4, 15, 7, 35), (5, 31, 21, 155)] {
            let code = HammingCode::new(r).unwrap();
            assert_eq!((code.n(), code.k()), (n, k));
            assert_eq!(code.weight3_triples().len(), triples);
            assert_eq!(code.x_stabilizers().len(), n + 1);
            assert_eq!(code.transfer_order().len(), 3 * triples);
        }
    }

    #[test]
    fn structural_invariants() {
        for r in 3..=6 {
            let code = HammingCode::new(r).unwrap();
            let h = code.check_matrix();
            assert!(h.mul(&h.transpose()).unwrap().is_zero());
            let lx = code.logical_x_matrix();
            let lz = code.logical_z_matrix();
            assert!(h.mul(&lx).unwrap().is_zero());
            assert!(h.mul(&lz).unwrap().is_zero());
            assert_eq!(
                lz.transpose().mul(&lx).unwrap(),
                BitMatrix::identity(code.k())
            );
            for q in 0..code.n() {
                assert_eq!(Syndrome::from_bits(h.column(q)).value(), q + 1);
            }
        }
    }

    #[test]
    fn pinned_steane_logical() {
        let code = HammingCode::new(3).unwrap();
        assert_eq!(support(&code.logical_x()[0]), vec![1, 2, 3]);
        assert_eq!(support(&code.logical_z()[0]), vec![1, 2, 3]);
    }

    #[test]
    fn stabilizers_span_row_space_without_duplicates() {
        for r in 3..=5 {
            let code = HammingCode::new(r).unwrap();
            let stabs = code.x_stabilizers();
            assert!(stabs[0].is_zero());
            let mut seen = std::collections::HashSet::new();
            for s in stabs {
                assert!(seen.insert(s.clone()));
                assert!(code.check_matrix().matvec(s).unwrap().is_zero());
                assert!(code.class_unchecked(s).is_zero());
            }
            // Every row of H and every sum of two rows is present.
            let rows = code.check_matrix().row_slice();
            for a in rows {
                assert!(seen.contains(a));
                for b in rows {
                    assert!(seen.contains(&a.add(b).unwrap()));
                }
            }
        }
    }

    #[test]
    fn triples_cover_each_pair_once() {
        for r in 3..=5 {
            let code = HammingCode::new(r).unwrap();
            let n = code.n();
            let mut count = vec![vec![0; n]; n];
            for &[a, b, c] in code.weight3_triples() {
                assert!(a < b && b < c);
                assert_eq!((a + 1) ^ (b + 1) ^ (c + 1), 0);
                count[a][b] += 1;
                count[a][c] += 1;
                count[b][c] += 1;
            }
            for (a, row) in count.iter().enumerate() {
                for (b, &c) in row.iter().enumerate().skip(a + 1) {
                    assert_eq!(c, 1, "pair ({a},{b}) for r={r}");
                }
            }
        }
    }

    #[test]
    fn transfer_order_is_sorted_by_source() {
        let code = HammingCode::new(3).unwrap();
        let first: Vec<_> = code
            .transfer_order()
            .iter()
            .take(3)
            .map(|t| t.map(|q| q + 1))
            .collect();
        assert_eq!(first, vec![[2, 3, 1], [4, 5, 1], [6, 7, 1]]);
        for w in code.transfer_order().windows(2) {
            let key = |t: &[usize; 3]| (t[2], t[0], t[1]);
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn syndrome_examples() {
        let code = HammingCode::new(3).unwrap();
        let s = code.syndrome(&qubits(7, &[3])).unwrap();
        assert_eq!(s.bits().to_string(), "011");
        assert!(code.syndrome(&BitVector::zeros(7)).unwrap().is_zero());
        assert_eq!(code.syndrome(&qubits(7, &[1, 2])).unwrap().value(), 3);
        assert!(matches!(
            code.syndrome(&BitVector::zeros(8)),
            Err(QhcError::LengthMismatch {
                expected: 7,
                got: 8
            })
        ));
        let code4 = HammingCode::new(4).unwrap();
        for q in 1..=15 {
            assert_eq!(code4.syndrome(&qubits(15, &[q])).unwrap().value(), q);
        }
    }

    #[test]
    fn syndrome_matches_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = HammingCode::new(5).unwrap();
        for _ in 0..200 {
            let e =
                BitVector::from_bools(&(0..31).map(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
            let direct = code.check_matrix().matvec(&e).unwrap();
            assert_eq!(code.syndrome(&e).unwrap().bits(), &direct);
        }
    }

    #[test]
    fn lookup_examples() {
        let code = HammingCode::new(3).unwrap();
        let s = Syndrome::from_bits(BitVector::from_bools(&[false, true, true]));
        assert_eq!(support(&code.lookup_decode(&s)), vec![3]);
        assert!(code.lookup_decode(&Syndrome::from_value(3, 0)).is_zero());

        let code4 = HammingCode::new(4).unwrap();
        for v in 1..16 {
            let s = Syndrome::from_value(4, v);
            let e = code4.lookup_decode(&s);
            assert_eq!(e.weight(), 1);
            assert_eq!(code4.syndrome(&e).unwrap(), s);
            // the unique weight-1 error with this syndrome
            let matches: Vec<_> = (1..=15)
                .filter(|&q| code4.syndrome(&qubits(15, &[q])).unwrap() == s)
                .collect();
            assert_eq!(matches, support(&e));
        }
    }

    #[test]
    fn logical_class_examples() {
        let code = HammingCode::new(4).unwrap();
        for s in code.x_stabilizers() {
            assert!(code.logical_class(s).unwrap().is_zero());
        }
        for (j, x) in code.logical_x().iter().enumerate() {
            let c = code.logical_class(x).unwrap();
            assert_eq!(c.iter_ones().collect::<Vec<_>>(), vec![j]);
        }
        let steane = HammingCode::new(3).unwrap();
        assert!(!steane
            .logical_class(&qubits(7, &[3, 5, 6]))
            .unwrap()
            .is_zero());
        assert_eq!(
            steane.logical_class(&qubits(7, &[1])).unwrap_err(),
            QhcError::NonzeroSyndrome(1)
        );
    }

    #[test]
    fn logical_class_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let code = HammingCode::new(4).unwrap();
        let random_codeword = |rng: &mut ChaCha8Rng| {
            let mut v = BitVector::zeros(15);
            for b in code.logical_x().iter().chain(code.x_stabilizers()) {
                if rng.random_bool(0.5) {
                    v ^= b;
                }
            }
            v
        };
        for _ in 0..100 {
            let a = random_codeword(&mut rng);
            let b = random_codeword(&mut rng);
            let lhs = code.logical_class(&a.add(&b).unwrap()).unwrap();
            let rhs = code
                .logical_class(&a)
                .unwrap()
                .add(&code.logical_class(&b).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn coset_min_examples() {
        let steane = HammingCode::new(3).unwrap();
        assert_eq!(
            steane
                .coset_min(&BitVector::zeros(7), &BitVector::zeros(1))
                .0,
            0
        );
        let (w, real) = steane.coset_min(&BitVector::zeros(7), &BitVector::ones(1));
        assert_eq!(w, 3);
        assert_eq!(steane.logical_class(&real).unwrap(), BitVector::ones(1));

        let code = HammingCode::new(4).unwrap();
        let base = qubits(15, &[1]);
        let target = qubits(15, &[1, 2, 3]);
        let delta = code.logical_class(&target).unwrap();
        let (w, real) = code.coset_min(&base, &delta);
        assert_eq!(w, 2);
        assert_eq!(support(&real), vec![2, 3]);
        assert_eq!(code.coset_min_weight(&base, &delta), 2);
    }

    #[test]
    fn coset_min_postconditions_and_stabilizer_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for r in [3, 4, 5] {
            let code = HammingCode::new(r).unwrap();
            let n = code.n();
            for _ in 0..200 {
                let base = BitVector::from_bools(
                    &(0..n).map(|_| rng.random_bool(0.2)).collect::<Vec<_>>(),
                );
                let delta = BitVector::from_bools(
                    &(0..code.k())
                        .map(|_| rng.random_bool(0.5))
                        .collect::<Vec<_>>(),
                );
                let (w, real) = code.coset_min(&base, &delta);
                assert_eq!(real.weight(), w);
                assert_eq!(code.syndrome_value(&real), code.syndrome_value(&base));
                let mut diff = real.add(&base).unwrap();
                diff ^= &code.encode_logical(&delta);
                assert!(code.logical_class(&diff).unwrap().is_zero());
                let h = &code.x_stabilizers()[rng.random_range(0..=n)];
                assert_eq!(code.coset_min(&base.add(h).unwrap(), &delta).0, w);
                assert_eq!(code.coset_min_weight(&base, &delta), w);
            }
        }
    }

    #[test]
    fn weight3_representatives_unique_only_beyond_steane() {
        for r in [4, 5] {
            let code = HammingCode::new(r).unwrap();
            for &[a, b, c] in code.weight3_triples() {
                let l = BitVector::from_indices(code.n(), [a, b, c]).unwrap();
                for h in &code.x_stabilizers()[1..] {
                    assert!(l.weight_of_sum(h) > 3);
                }
            }
        }
        let steane = HammingCode::new(3).unwrap();
        let ambiguous = steane.weight3_triples().iter().any(|&[a, b, c]| {
            let l = BitVector::from_indices(7, [a, b, c]).unwrap();
            steane.x_stabilizers()[1..]
                .iter()
                .any(|h| l.weight_of_sum(h) == 3)
        });
        assert!(ambiguous);
    }

    #[test]
    fn description_uses_hex_rows() {
        let d = HammingCode::new(3).unwrap().describe();
        assert_eq!(d.h, vec!["78", "66", "55"]);
        assert_eq!(d.lx, vec!["07"]);
    }
}
