use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::concat::ConcatCode;
use crate::gf2::BitVector;

static NEXT_PASS: AtomicU64 = AtomicU64::new(1);

/// Identifies one stretch of monotone decoding (between resets and
/// commits). Ignored by equality and hashing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pass(u64);

impl Pass {
    fn fresh() -> Self {
        Pass(NEXT_PASS.fetch_add(1, Ordering::Relaxed))
    }

    pub(crate) fn id(self) -> u64 {
        self.0
    }
}

impl PartialEq for Pass {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pass {}

impl Hash for Pass {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// Mutable decoder state for one code-capacity trial.
///
/// Holds the level-1 physical recoveries, the recovery tensor of every
/// higher block (stored as the rows assigned to its children), and a
/// version counter bumped on every mutation so that stale plans can be
/// rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodeSession {
    /// `(n_ℓ, K_ℓ)` for `ℓ = 1..=L`.
    shape: Vec<(usize, usize)>,
    level1: Vec<BitVector>,
    /// `rows[ℓ − 1][b]` is the flip assigned to level-`ℓ` block `b` by its
    /// parent, for `ℓ = 1..L`.
    rows: Vec<Vec<BitVector>>,
    version: u64,
    pass: Pass,
}

impl DecodeSession {
    pub fn new(code: &ConcatCode) -> Self {
        let levels = code.levels();
        let shape = (1..=levels)
            .map(|l| (code.local(l).n(), code.logicals_at(l)))
            .collect();
        let n1 = code.local(1).n();
        let level1 = vec![BitVector::zeros(n1); code.block_count(1)];
        let rows = (1..levels)
            .map(|l| vec![BitVector::zeros(code.logicals_at(l)); code.block_count(l)])
            .collect();
        Self {
            shape,
            level1,
            rows,
            version: 0,
            pass: Pass::fresh(),
        }
    }

    pub(crate) fn fits(&self, code: &ConcatCode) -> bool {
        self.shape.len() == code.levels()
            && self
                .shape
                .iter()
                .enumerate()
                .all(|(i, &(n, k))| n == code.local(i + 1).n() && k == code.logicals_at(i + 1))
    }

    /// Clears every decision; the version keeps counting up.
    pub fn reset(&mut self) {
        for v in &mut self.level1 {
            *v = BitVector::zeros(v.len());
        }
        for level in &mut self.rows {
            for v in level.iter_mut() {
                if !v.is_zero() {
                    *v = BitVector::zeros(v.len());
                }
            }
        }
        self.version += 1;
        self.pass = Pass::fresh();
    }

    /// Within one pass the decoder only writes a block's data before any
    /// syndrome source reads that block's residual class.
    pub(crate) fn pass(&self) -> Pass {
        self.pass
    }

    pub(crate) fn new_pass(&mut self) {
        self.pass = Pass::fresh();
    }

    pub fn levels(&self) -> usize {
        self.shape.len()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn bump(&mut self) {
        self.version += 1;
    }

    /// Physical recovery currently held by level-1 block `block`.
    pub fn level1_recovery(&self, block: usize) -> &BitVector {
        &self.level1[block]
    }

    pub(crate) fn set_level1(&mut self, block: usize, v: BitVector) {
        self.level1[block] = v;
    }

    /// Flip assigned to level-`ℓ` block `block` by its parent (`ℓ < L`).
    pub fn assigned_flip(&self, level: usize, block: usize) -> &BitVector {
        &self.rows[level - 1][block]
    }

    /// Rows of the recovery tensor of level-`ℓ` block `block` (`ℓ ≥ 2`).
    pub fn recovery_rows(&self, level: usize, block: usize) -> &[BitVector] {
        let n = self.shape[level - 1].0;
        &self.rows[level - 2][block * n..(block + 1) * n]
    }

    pub(crate) fn recovery_rows_mut(&mut self, level: usize, block: usize) -> &mut [BitVector] {
        let n = self.shape[level - 1].0;
        &mut self.rows[level - 2][block * n..(block + 1) * n]
    }

    /// Physical recovery: the concatenation of all level-1 recoveries.
    ///
    /// Decisions still pending in recovery tensors are not included; after a
    /// completed decode every tensor has been committed and is zero.
    pub fn recovery(&self) -> BitVector {
        let n1 = self.shape[0].0;
        let mut out = BitVector::zeros(n1 * self.level1.len());
        for (b, v) in self.level1.iter().enumerate() {
            if !v.is_zero() {
                out.xor_at(b * n1, v);
            }
        }
        out
    }

    /// True iff no recovery tensor holds an uncommitted decision.
    pub fn fully_committed(&self) -> bool {
        self.rows.iter().flatten().all(BitVector::is_zero)
    }
}
