//! Bit-packed vectors and matrices over GF(2).
//!
//! Vectors keep up to 128 bits inline, which covers every local code block
//! and every column of a recovery tensor, so the inner loops of the decoders
//! never touch the allocator.

use std::fmt;
use std::ops::{BitAndAssign, BitOrAssign, BitXorAssign};

use smallvec::SmallVec;
use thiserror::Error;

const WORD_BITS: usize = 64;

type Words = SmallVec<[u64; 2]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: matrix has {cols} columns, vector has length {len}")]
    DimensionMismatch { cols: usize, len: usize },
    #[error("bit index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("invalid hex string {0:?}")]
    InvalidHex(String),
}

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A binary vector of fixed length.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in the
/// last word are always zero, so equality and hashing can compare words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Words,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: SmallVec::from_elem(0, word_count(len)),
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: SmallVec::from_elem(u64::MAX, word_count(len)),
        };
        v.clear_tail();
        v
    }

    /// Indicator vector of the given (0-based) positions. Repeated positions cancel.
    pub fn from_indices(
        len: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, Gf2Error> {
        let mut v = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Gf2Error::OutOfRange { index: i, len });
            }
            v.flip(i);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// The low `len` bits of `value`, bit `i` of the integer becoming entry `i`.
    pub fn from_u128(len: usize, value: u128) -> Self {
        let mut v = Self::zeros(len);
        for (j, w) in v.words.iter_mut().take(2).enumerate() {
            *w = (value >> (64 * j)) as u64;
        }
        v.clear_tail();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Componentwise XOR.
    pub fn add(&self, other: &Self) -> Result<Self, Gf2Error> {
        self.check_len(other)?;
        let mut out = self.clone();
        out ^= other;
        Ok(out)
    }

    /// Componentwise OR.
    pub fn or_mask(&self, other: &Self) -> Result<Self, Gf2Error> {
        self.check_len(other)?;
        let mut out = self.clone();
        out |= other;
        Ok(out)
    }

    /// Inner product over GF(2).
    #[inline]
    pub fn dot(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// `|self ⊕ other|` without materializing the sum.
    #[inline]
    pub fn weight_of_sum(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// `|self ∨ (a ⊕ b)|` without materializing anything.
    #[inline]
    pub fn weight_of_or_sum(&self, a: &Self, b: &Self) -> usize {
        debug_assert_eq!(self.len, a.len);
        debug_assert_eq!(self.len, b.len);
        self.words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .map(|((m, x), y)| (m | (x ^ y)).count_ones() as usize)
            .sum()
    }

    /// Positions of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    /// Copy of bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(
            start + len <= self.len,
            "slice {start}+{len} exceeds length {}",
            self.len
        );
        if len <= WORD_BITS && len > 0 {
            let (w0, shift) = (start / WORD_BITS, start % WORD_BITS);
            let mut w = self.words[w0] >> shift;
            if shift + len > WORD_BITS {
                w |= self.words[w0 + 1] << (WORD_BITS - shift);
            }
            if len < WORD_BITS {
                w &= (1u64 << len) - 1;
            }
            let mut words = Words::new();
            words.push(w);
            return Self { len, words };
        }
        let mut out = Self::zeros(len);
        if start.is_multiple_of(WORD_BITS) {
            let w0 = start / WORD_BITS;
            let n = out.words.len();
            out.words.copy_from_slice(&self.words[w0..w0 + n]);
            out.clear_tail();
        } else {
            let shift = start % WORD_BITS;
            let w0 = start / WORD_BITS;
            for (j, w) in out.words.iter_mut().enumerate() {
                let lo = self.words[w0 + j] >> shift;
                let hi = self
                    .words
                    .get(w0 + j + 1)
                    .map_or(0, |&x| x << (WORD_BITS - shift));
                *w = lo | hi;
            }
            out.clear_tail();
        }
        out
    }

    /// XOR `other` into bits `start..start + other.len()`.
    pub fn xor_at(&mut self, start: usize, other: &Self) {
        assert!(start + other.len <= self.len);
        for i in other.iter_ones() {
            self.flip(start + i);
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Low 128 bits as an integer.
    pub fn to_u128(&self) -> u128 {
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        lo | (hi << 64)
    }

    /// Hex rendering of the integer `Σ bit_i 2^i`, most significant digit first,
    /// zero-padded to `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < self.len && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self, Gf2Error> {
        let mut v = Self::zeros(len);
        for (d, c) in hex.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Gf2Error::InvalidHex(hex.to_string()))?;
            for b in 0..4 {
                if (nibble >> b) & 1 == 1 {
                    let i = d * 4 + b;
                    if i >= len {
                        return Err(Gf2Error::InvalidHex(hex.to_string()));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }

    fn check_len(&self, other: &Self) -> Result<(), Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl BitXorAssign<&BitVector> for BitVector {
    #[inline]
    fn bitxor_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitOrAssign<&BitVector> for BitVector {
    #[inline]
    fn bitor_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "length mismatch in or");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a |= b;
        }
    }
}

impl BitAndAssign<&BitVector> for BitVector {
    #[inline]
    fn bitand_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "length mismatch in and");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a &= b;
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}](", self.len)?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Dense row-major binary matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        for r in &rows {
            if r.len() != cols {
                return Err(Gf2Error::LengthMismatch {
                    left: cols,
                    right: r.len(),
                });
            }
        }
        Ok(Self { cols, rows })
    }

    /// Builds a `len × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(len: usize, columns: &[BitVector]) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != len {
                return Err(Gf2Error::LengthMismatch {
                    left: len,
                    right: c.len(),
                });
            }
            for i in c.iter_ones() {
                m.rows[i].set(j, true);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn row_slice(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut c = BitVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.get(j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    /// `M v` over GF(2).
    pub fn matvec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                cols: self.cols,
                len: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows() {
            return Err(Gf2Error::DimensionMismatch {
                cols: self.cols,
                len: other.rows(),
            });
        }
        let mut out = Self::zeros(self.rows.len(), other.cols);
        for (i, r) in self.rows.iter().enumerate() {
            for k in r.iter_ones() {
                out.rows[i] ^= &other.rows[k];
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    /// Reduced row echelon form and its pivot columns.
    ///
    /// Pivots are taken at the leftmost remaining column, using the topmost
    /// unreduced row that has a one there.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == rows.len() {
                break;
            }
            let Some(p) = (next..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(next, p);
            let pivot_row = rows[next].clone();
            for (i, r) in rows.iter_mut().enumerate() {
                if i != next && r.get(col) {
                    *r ^= &pivot_row;
                }
            }
            pivots.push(col);
            next += 1;
        }
        (
            BitMatrix {
                cols: self.cols,
                rows,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `ker M`, one vector per free column in increasing column order.
    pub fn nullspace_basis(&self) -> Vec<BitVector> {
        let (reduced, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::zeros(self.cols);
                v.set(f, true);
                for (row, &p) in pivots.iter().enumerate() {
                    if reduced.rows[row].get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}
