//! Concatenated quantum Hamming codes.
//!
//! Physical (level-0) qubits are addressed by tuples `(i_L, …, i_1)` with
//! 1-based components; the flat index is `Σ (i_ℓ − 1) N_{ℓ−1}`, so `i_1`
//! varies fastest and every level-`ℓ` block owns a contiguous range of
//! `N_ℓ` flat indices. Block `b` at level `ℓ` has children `b n_ℓ + i`
//! (`i = 0..n_ℓ`) at level `ℓ − 1`.
//!
//! Logical qubits of a level-`ℓ` block are `(j, λ)` with `j ∈ [k_ℓ]` and
//! `λ ∈ I_{ℓ−1}`, flattened as `j + k_ℓ λ`. The same convention is used by
//! class readouts, recovery tensors and flip deltas.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{DecodeSession, SyndromeSource};
use crate::gf2::BitVector;
use crate::qhc::{HammingCode, QhcError, Syndrome, MAX_R};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcatError {
    #[error("invalid profile {0:?}: {1}")]
    InvalidProfile(String, String),
    #[error(transparent)]
    Qhc(#[from] QhcError),
    #[error("address component {value} at level {level} is outside 1..={max}")]
    AddressOutOfRange {
        level: usize,
        value: usize,
        max: usize,
    },
    #[error("address has {got} components, code has {expected} levels")]
    AddressLength { expected: usize, got: usize },
    #[error("flat index {index} outside 0..{len}")]
    FlatOutOfRange { index: usize, len: usize },
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("level must lie in 1..={levels}, got {level}")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error(
        "residual is not a codeword of the level-{level} local code: block {block}, column {lambda} has syndrome {syndrome}"
    )]
    Inconsistent {
        level: usize,
        block: usize,
        lambda: usize,
        syndrome: usize,
    },
}

/// Block lengths `(n_1, …, n_L)`, bottom level first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Profile {
    blocks: Vec<usize>,
}

impl Profile {
    pub fn new(blocks: Vec<usize>) -> Result<Self, ConcatError> {
        let text = blocks
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("x");
        if blocks.is_empty() {
            return Err(ConcatError::InvalidProfile(text, "no levels".into()));
        }
        for &n in &blocks {
            if r_of(n).is_none() {
                return Err(ConcatError::InvalidProfile(
                    text,
                    format!("block length {n} is not 2^r - 1 with 3 <= r <= {MAX_R}"),
                ));
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn levels(&self) -> usize {
        self.blocks.len()
    }
}

fn r_of(n: usize) -> Option<usize> {
    let r = (n + 1).trailing_zeros() as usize;
    ((n + 1).is_power_of_two() && (3..=MAX_R).contains(&r)).then_some(r)
}

impl FromStr for Profile {
    type Err = ConcatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let blocks = s
            .split(['x', 'X'])
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConcatError::InvalidProfile(s.to_string(), e.to_string()))?;
        Profile::new(blocks)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

impl TryFrom<String> for Profile {
    type Error = ConcatError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}

#[derive(Debug)]
pub struct ConcatCode {
    profile: Profile,
    codes: Vec<Arc<HammingCode>>,
    /// `N_0 = 1, N_1, …, N_L`.
    qubits: Vec<usize>,
    /// `K_0 = 1, K_1, …, K_L`.
    logicals: Vec<usize>,
}

impl ConcatCode {
    pub fn new(profile: Profile) -> Result<Self, ConcatError> {
        let mut cache: HashMap<usize, Arc<HammingCode>> = HashMap::new();
        let mut codes = Vec::with_capacity(profile.levels());
        for &n in profile.blocks() {
            let r = r_of(n).expect("validated by Profile");
            let code = match cache.get(&r) {
                Some(c) => c.clone(),
                None => {
                    let c = Arc::new(HammingCode::new(r)?);
                    cache.insert(r, c.clone());
                    c
                }
            };
            codes.push(code);
        }
        let mut qubits = vec![1];
        let mut logicals = vec![1];
        for c in &codes {
            qubits.push(qubits.last().unwrap() * c.n());
            logicals.push(logicals.last().unwrap() * c.k());
        }
        Ok(Self {
            profile,
            codes,
            qubits,
            logicals,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn levels(&self) -> usize {
        self.codes.len()
    }

    /// Local code at level `level` (1-based).
    pub fn local(&self, level: usize) -> &HammingCode {
        &self.codes[level - 1]
    }

    pub fn local_arc(&self, level: usize) -> &Arc<HammingCode> {
        &self.codes[level - 1]
    }

    /// `N_ℓ`; `qubits_at(0) = 1`.
    pub fn qubits_at(&self, level: usize) -> usize {
        self.qubits[level]
    }

    /// `K_ℓ`; `logicals_at(0) = 1`.
    pub fn logicals_at(&self, level: usize) -> usize {
        self.logicals[level]
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits[self.levels()]
    }

    pub fn num_logicals(&self) -> usize {
        self.logicals[self.levels()]
    }

    /// `D_L = 3^L`.
    pub fn distance(&self) -> usize {
        3usize.pow(self.levels() as u32)
    }

    /// Number of level-`ℓ` blocks in the whole code.
    pub fn block_count(&self, level: usize) -> usize {
        self.num_qubits() / self.qubits[level]
    }

    /// `(i_L, …, i_1)` for a flat physical index.
    pub fn address(&self, flat: usize) -> Result<Vec<usize>, ConcatError> {
        if flat >= self.num_qubits() {
            return Err(ConcatError::FlatOutOfRange {
                index: flat,
                len: self.num_qubits(),
            });
        }
        Ok((1..=self.levels())
            .rev()
            .map(|l| (flat / self.qubits[l - 1]) % self.local(l).n() + 1)
            .collect())
    }

    /// Inverse of [`address`](Self::address).
    pub fn flat(&self, tuple: &[usize]) -> Result<usize, ConcatError> {
        let levels = self.levels();
        if tuple.len() != levels {
            return Err(ConcatError::AddressLength {
                expected: levels,
                got: tuple.len(),
            });
        }
        let mut flat = 0;
        for (pos, &v) in tuple.iter().enumerate() {
            let level = levels - pos;
            let max = self.local(level).n();
            if v == 0 || v > max {
                return Err(ConcatError::AddressOutOfRange {
                    level,
                    value: v,
                    max,
                });
            }
            flat += (v - 1) * self.qubits[level - 1];
        }
        Ok(flat)
    }

    /// Indicator of a set of addressed qubits. Repeated addresses cancel.
    pub fn error_from_addresses(&self, tuples: &[Vec<usize>]) -> Result<BitVector, ConcatError> {
        let mut e = BitVector::zeros(self.num_qubits());
        for t in tuples {
            e.flip(self.flat(t)?);
        }
        Ok(e)
    }

    fn check_level(&self, level: usize) -> Result<(), ConcatError> {
        if level == 0 || level > self.levels() {
            return Err(ConcatError::LevelOutOfRange {
                level,
                levels: self.levels(),
            });
        }
        Ok(())
    }

    /// Transposes per-child flip rows (`n_ℓ` vectors of `K_{ℓ−1}` bits) into
    /// the `K_{ℓ−1}` columns seen by the local codes `Q_λ`.
    pub(crate) fn columns_of(&self, level: usize, rows: &[BitVector]) -> Vec<BitVector> {
        let n = self.local(level).n();
        let mut cols = vec![BitVector::zeros(n); self.logicals[level - 1]];
        for (i, row) in rows.iter().enumerate() {
            for lam in row.iter_ones() {
                cols[lam].set(i, true);
            }
        }
        cols
    }

    /// Level-`ℓ` class of one block from its children's classes.
    pub(crate) fn lift_classes(
        &self,
        level: usize,
        block: usize,
        children: &[BitVector],
    ) -> Result<BitVector, ConcatError> {
        let code = self.local(level);
        let k = code.k();
        let mut class = BitVector::zeros(self.logicals[level]);
        if children.iter().all(BitVector::is_zero) {
            return Ok(class);
        }
        for (lam, col) in self.columns_of(level, children).iter().enumerate() {
            if col.is_zero() {
                continue;
            }
            let s = code.syndrome_value(col);
            if s != 0 {
                return Err(ConcatError::Inconsistent {
                    level,
                    block,
                    lambda: lam,
                    syndrome: s,
                });
            }
            for j in code.class_unchecked(col).iter_ones() {
                class.set(j + k * lam, true);
            }
        }
        Ok(class)
    }

    /// Class readout of `residual` at level `level`, one entry per level-`ℓ` block.
    pub fn level_error(
        &self,
        residual: &BitVector,
        level: usize,
    ) -> Result<LevelError, ConcatError> {
        self.check_level(level)?;
        if residual.len() != self.num_qubits() {
            return Err(ConcatError::LengthMismatch {
                expected: self.num_qubits(),
                got: residual.len(),
            });
        }
        let code1 = self.local(1);
        let n1 = code1.n();
        let mut classes = Vec::with_capacity(self.block_count(1));
        for b in 0..self.block_count(1) {
            let v = residual.slice(b * n1, n1);
            let s = code1.syndrome_value(&v);
            if s != 0 {
                return Err(ConcatError::Inconsistent {
                    level: 1,
                    block: b,
                    lambda: 0,
                    syndrome: s,
                });
            }
            classes.push(code1.class_unchecked(&v));
        }
        for l in 2..=level {
            let n = self.local(l).n();
            classes = classes
                .chunks(n)
                .enumerate()
                .map(|(b, children)| self.lift_classes(l, b, children))
                .collect::<Result<_, _>>()?;
        }
        Ok(LevelError { level, classes })
    }

    /// True iff the residual `true_error ⊕ recovery` acts nontrivially on some
    /// top-level logical qubit. A residual that is not even a codeword counts
    /// as a failure.
    pub fn is_failure(&self, true_error: &BitVector, session: &DecodeSession) -> bool {
        let mut residual = true_error.clone();
        residual ^= &session.recovery();
        match self.level_error(&residual, self.levels()) {
            Ok(le) => !le.is_zero(),
            Err(_) => true,
        }
    }

    /// A low-weight physical vector inside level-`ℓ` block `block` whose
    /// level-`ℓ` class is `delta` and whose lower-level syndromes all vanish.
    /// Each local logical is realized by its minimum-weight representative.
    pub fn realize_logical(&self, level: usize, block: usize, delta: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.num_qubits());
        self.realize_into(level, block, delta, &mut out);
        out
    }

    /// Physical realization of per-child flips `rows` (each `K_{ℓ−1}` bits)
    /// inside level-`ℓ` block `block`.
    pub fn realize_child_flips(&self, level: usize, block: usize, rows: &[BitVector]) -> BitVector {
        let mut out = BitVector::zeros(self.num_qubits());
        let n = self.local(level).n();
        for (i, row) in rows.iter().enumerate().take(n) {
            self.realize_into(level - 1, block * n + i, row, &mut out);
        }
        out
    }

    fn realize_into(&self, level: usize, block: usize, delta: &BitVector, out: &mut BitVector) {
        if delta.is_zero() || level == 0 {
            if level == 0 && delta.get(0) {
                out.flip(block);
            }
            return;
        }
        let code = self.local(level);
        let k = code.k();
        let n = code.n();
        let mut rows = vec![BitVector::zeros(self.logicals[level - 1]); n];
        for lam in 0..self.logicals[level - 1] {
            let d = delta.slice(k * lam, k);
            if d.is_zero() {
                continue;
            }
            let (_, col) = code.coset_min(&BitVector::zeros(n), &d);
            for i in col.iter_ones() {
                rows[i].set(lam, true);
            }
        }
        for (i, row) in rows.iter().enumerate() {
            self.realize_into(level - 1, block * n + i, row, out);
        }
    }
}

/// Class readout at one level: `classes[b]` holds the `K_ℓ` class bits of
/// level-`ℓ` block `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelError {
    level: usize,
    classes: Vec<BitVector>,
}

impl LevelError {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn block(&self, b: usize) -> &BitVector {
        &self.classes[b]
    }

    pub fn blocks(&self) -> &[BitVector] {
        &self.classes
    }

    pub fn is_zero(&self) -> bool {
        self.classes.iter().all(BitVector::is_zero)
    }

    /// All class bits concatenated block by block.
    pub fn flatten(&self) -> BitVector {
        let per = self.classes.first().map_or(0, BitVector::len);
        let mut out = BitVector::zeros(per * self.classes.len());
        for (b, c) in self.classes.iter().enumerate() {
            out.xor_at(b * per, c);
        }
        out
    }
}

/// Perfect syndrome measurement for a known error: the simulator side of a
/// code-capacity trial. Decoders only see the syndromes it returns.
///
/// Residual classes of finished subtrees are memoized per session pass, so
/// a full bottom-up decode reads every block once.
pub struct PerfectSyndromes<'a> {
    code: &'a ConcatCode,
    error: &'a BitVector,
    memo: RefCell<ClassMemo>,
}

#[derive(Default)]
struct ClassMemo {
    pass: u64,
    /// `classes[ℓ − 1][b]` for levels below the top.
    classes: Vec<Vec<Option<BitVector>>>,
}

impl<'a> PerfectSyndromes<'a> {
    pub fn new(code: &'a ConcatCode, error: &'a BitVector) -> Result<Self, ConcatError> {
        if error.len() != code.num_qubits() {
            return Err(ConcatError::LengthMismatch {
                expected: code.num_qubits(),
                got: error.len(),
            });
        }
        Ok(Self {
            code,
            error,
            memo: RefCell::default(),
        })
    }

    /// Class of `error ⊕ recovery` restricted to a level-`ℓ` block, where the
    /// recovery consists of every decision stored in `session` for the block's
    /// subtree (its own recovery tensor included).
    pub fn residual_class(
        &self,
        level: usize,
        block: usize,
        session: &DecodeSession,
    ) -> Result<BitVector, ConcatError> {
        let code1 = self.code.local(1);
        if level == 1 {
            let n1 = code1.n();
            let mut v = self.error.slice(block * n1, n1);
            v ^= session.level1_recovery(block);
            let s = code1.syndrome_value(&v);
            if s != 0 {
                return Err(ConcatError::Inconsistent {
                    level: 1,
                    block,
                    lambda: 0,
                    syndrome: s,
                });
            }
            return Ok(code1.class_unchecked(&v));
        }
        let children = self.child_classes(level, block, session)?;
        let n = self.code.local(level).n();
        let with_flips: Vec<BitVector> = children
            .into_iter()
            .enumerate()
            .map(|(i, mut c)| {
                c ^= session.assigned_flip(level - 1, block * n + i);
                c
            })
            .collect();
        self.code.lift_classes(level, block, &with_flips)
    }

    fn child_classes(
        &self,
        level: usize,
        block: usize,
        session: &DecodeSession,
    ) -> Result<Vec<BitVector>, ConcatError> {
        let n = self.code.local(level).n();
        (0..n)
            .map(|i| self.memo_class(level - 1, block * n + i, session))
            .collect()
    }

    fn memo_class(
        &self,
        level: usize,
        block: usize,
        session: &DecodeSession,
    ) -> Result<BitVector, ConcatError> {
        // Each level-1 class is read once per pass; storing it costs more than recomputing.
        if level == 1 {
            return self.residual_class(level, block, session);
        }
        let pass = session.pass().id();
        {
            let memo = self.memo.borrow();
            if memo.pass == pass {
                if let Some(c) = &memo.classes[level - 1][block] {
                    return Ok(c.clone());
                }
            }
        }
        let class = self.residual_class(level, block, session)?;
        let mut memo = self.memo.borrow_mut();
        if memo.pass != pass {
            memo.pass = pass;
            let code = self.code;
            memo.classes.resize_with(code.levels() - 1, Vec::new);
            for (l, v) in memo.classes.iter_mut().enumerate() {
                v.clear();
                v.resize(code.block_count(l + 1), None);
            }
        }
        memo.classes[level - 1][block] = Some(class.clone());
        Ok(class)
    }

    /// Level-`ℓ` syndromes of one block: for `ℓ = 1` a single syndrome of the
    /// physical error, otherwise one per `λ` computed from the children's
    /// residual classes after all recoveries below level `ℓ`.
    pub fn extract_syndromes(
        &self,
        level: usize,
        block: usize,
        session: &DecodeSession,
    ) -> Result<Vec<Syndrome>, ConcatError> {
        self.code.check_level(level)?;
        let code = self.code.local(level);
        if level == 1 {
            let n1 = code.n();
            let v = self.error.slice(block * n1, n1);
            return Ok(vec![Syndrome::from_value(
                code.r(),
                code.syndrome_value(&v),
            )]);
        }
        let children = self.child_classes(level, block, session)?;
        if children.iter().all(BitVector::is_zero) {
            return Ok(vec![
                Syndrome::from_value(code.r(), 0);
                self.code.logicals_at(level - 1)
            ]);
        }
        Ok(self
            .code
            .columns_of(level, &children)
            .iter()
            .map(|col| Syndrome::from_value(code.r(), code.syndrome_value(col)))
            .collect())
    }
}

impl SyndromeSource for PerfectSyndromes<'_> {
    fn syndromes(
        &self,
        level: usize,
        block: usize,
        session: &DecodeSession,
    ) -> Result<Vec<Syndrome>, ConcatError> {
        self.extract_syndromes(level, block, session)
    }
}
