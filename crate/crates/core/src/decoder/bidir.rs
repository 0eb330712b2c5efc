use std::collections::HashMap;

use super::trace::{DecodeObserver, NoObserver, TransferEvent};
use super::{decode, DecodeError, DecodeSession, DecoderKind, SyndromeSource};
use crate::concat::ConcatCode;
use crate::gf2::BitVector;
use crate::qhc::HammingCode;

/// Bidirectional decode: local decoding plus [`reassign`] on every block
/// above level 1, then a single commit of the root plan.
pub fn decode_bidirectional(
    code: &ConcatCode,
    source: &dyn SyndromeSource,
) -> Result<DecodeSession, DecodeError> {
    decode(DecoderKind::Bidir, code, source, &mut NoObserver)
}

pub(super) fn decode_block(
    code: &ConcatCode,
    source: &dyn SyndromeSource,
    session: &mut DecodeSession,
    level: usize,
    block: usize,
    bidir: bool,
    observer: &mut dyn DecodeObserver,
) -> Result<(), DecodeError> {
    let mut cache = CostCache::default();
    decode_rec(
        code, source, session, level, block, bidir, &mut cache, observer,
    )
}

#[allow(clippy::too_many_arguments)]
fn decode_rec(
    code: &ConcatCode,
    source: &dyn SyndromeSource,
    session: &mut DecodeSession,
    level: usize,
    block: usize,
    bidir: bool,
    cache: &mut CostCache,
    observer: &mut dyn DecodeObserver,
) -> Result<(), DecodeError> {
    let local = code.local(level);
    if level == 1 {
        let syndromes = source.syndromes(level, block, session)?;
        if syndromes.len() != 1 {
            return Err(DecodeError::SyndromeCount {
                level,
                expected: 1,
                got: syndromes.len(),
            });
        }
        let rec = local.lookup_decode(&syndromes[0]);
        observer.on_level1(block, &syndromes[0], &rec);
        session.set_level1(block, rec);
        session.bump();
        return Ok(());
    }
    let n = local.n();
    for i in 0..n {
        decode_rec(
            code,
            source,
            session,
            level - 1,
            block * n + i,
            bidir,
            cache,
            observer,
        )?;
    }
    let syndromes = source.syndromes(level, block, session)?;
    let width = code.logicals_at(level - 1);
    if syndromes.len() != width {
        return Err(DecodeError::SyndromeCount {
            level,
            expected: width,
            got: syndromes.len(),
        });
    }
    let rows = session.recovery_rows_mut(level, block);
    for (lam, s) in syndromes.iter().enumerate() {
        if !s.is_zero() {
            rows[s.value() - 1].flip(lam);
        }
    }
    session.bump();
    observer.on_mwe(
        level,
        block,
        &syndromes,
        session.recovery_rows(level, block),
    );
    if bidir {
        reassign_with(code, session, level, block, cache, observer);
        observer.on_reassigned(level, block, session.recovery_rows(level, block));
    }
    Ok(())
}

/// Memoized flip costs. Valid as long as no recovery below the queried
/// blocks changes, which holds for the whole bottom-up pass: a block's own
/// tensor is final before anyone asks for its cost.
#[derive(Default)]
struct CostCache {
    map: HashMap<(usize, usize, BitVector), usize>,
}

/// Greedy reassignment of the logical flips held by a level-`ℓ` block
/// (`ℓ ≥ 2`) along the weight-3 logicals of its local code.
pub fn reassign(
    code: &ConcatCode,
    session: &mut DecodeSession,
    level: usize,
    block: usize,
    observer: &mut dyn DecodeObserver,
) -> Result<(), DecodeError> {
    check_block(code, level, block)?;
    if level < 2 {
        return Err(DecodeError::NoSuchBlock { level, block });
    }
    reassign_with(
        code,
        session,
        level,
        block,
        &mut CostCache::default(),
        observer,
    );
    session.new_pass();
    Ok(())
}

fn reassign_with(
    code: &ConcatCode,
    session: &mut DecodeSession,
    level: usize,
    block: usize,
    cache: &mut CostCache,
    observer: &mut dyn DecodeObserver,
) {
    let local = code.local(level);
    let n = local.n();
    let mut rows = session.recovery_rows(level, block).to_vec();
    if rows.iter().all(BitVector::is_zero) {
        return;
    }
    let child = |i: usize| block * n + i;
    let zero = BitVector::zeros(code.logicals_at(level - 1));
    let sess: &DecodeSession = session;
    let mut w: Vec<usize> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| cached_cost(code, sess, level - 1, child(i), r, cache))
        .collect();
    let mut changed = false;
    'rescan: loop {
        for &[a, b, c] in local.transfer_order() {
            if rows[c].is_zero() {
                continue;
            }
            let t = rows[c].clone();
            let ra = rows[a].add(&t).expect("equal widths");
            let rb = rows[b].add(&t).expect("equal widths");
            let wa = cached_cost(code, sess, level - 1, child(a), &ra, cache);
            let wb = cached_cost(code, sess, level - 1, child(b), &rb, cache);
            let wc = cached_cost(code, sess, level - 1, child(c), &zero, cache);
            let accepted = wa + wb + wc < w[a] + w[b] + w[c];
            observer.on_transfer(&TransferEvent {
                level,
                block,
                triple: [a + 1, b + 1, c + 1],
                transfer: t,
                before: [w[a], w[b], w[c]],
                after: [wa, wb, wc],
                accepted,
            });
            if accepted {
                rows[a] = ra;
                rows[b] = rb;
                rows[c] = zero.clone();
                w[a] = wa;
                w[b] = wb;
                w[c] = wc;
                changed = true;
                continue 'rescan;
            }
        }
        break;
    }
    if changed {
        session
            .recovery_rows_mut(level, block)
            .clone_from_slice(&rows);
        session.bump();
    }
}

fn cached_cost(
    code: &ConcatCode,
    session: &DecodeSession,
    level: usize,
    block: usize,
    delta: &BitVector,
    cache: &mut CostCache,
) -> usize {
    let key = (level, block, delta.clone());
    if let Some(&c) = cache.map.get(&key) {
        return c;
    }
    let c = if level == 1 {
        code.local(1)
            .coset_min_weight(session.level1_recovery(block), delta)
    } else {
        let n = code.local(level).n();
        resolve(code, session, level, block, delta)
            .iter()
            .enumerate()
            .map(|(i, row)| cached_cost(code, session, level - 1, block * n + i, row, cache))
            .sum()
    };
    cache.map.insert(key, c);
    c
}

/// Result of [`flip_cost`]: the estimated cost and how to realize it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipPlan {
    level: usize,
    block: usize,
    version: u64,
    cost: usize,
    node: PlanNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    /// Level 1: the new physical recovery of the block.
    Leaf { realization: BitVector },
    /// Level ≥ 2: rows of `F_opt` and the plan for each child.
    Inner {
        f_opt: Vec<BitVector>,
        children: Vec<FlipPlan>,
    },
    /// No flip requested and the subtree's recoveries already realize its
    /// minimum: committing it changes nothing.
    Keep,
}

impl FlipPlan {
    pub fn cost(&self) -> usize {
        self.cost
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn node(&self) -> &PlanNode {
        &self.node
    }

    /// Rows of `F_opt`, i.e. the flip handed to each child (level ≥ 2).
    pub fn child_flips(&self) -> Option<&[BitVector]> {
        match &self.node {
            PlanNode::Inner { f_opt, .. } => Some(f_opt),
            PlanNode::Leaf { .. } | PlanNode::Keep => None,
        }
    }

    pub fn children(&self) -> &[FlipPlan] {
        match &self.node {
            PlanNode::Inner { children, .. } => children,
            PlanNode::Leaf { .. } | PlanNode::Keep => &[],
        }
    }
}

fn check_block(code: &ConcatCode, level: usize, block: usize) -> Result<(), DecodeError> {
    if level == 0 || level > code.levels() || block >= code.block_count(level) {
        return Err(DecodeError::NoSuchBlock { level, block });
    }
    Ok(())
}

/// Estimated physical weight of the recovery of a level-`ℓ` block after
/// applying the extra logical flip `delta` (`K_ℓ` bits, `j + k_ℓ λ`
/// flattening) on top of every decision already held for its subtree.
///
/// Level 1 is exact: the minimum over the coset of the current recovery
/// plus `L_X δ`. Above, each column of `F = L_X Δ + R` is shifted by a local
/// stabilizer chosen greedily to keep few children involved, with a full
/// search over the first column, and the children's costs are summed.
/// Does not modify the session.
pub fn flip_cost(
    code: &ConcatCode,
    session: &DecodeSession,
    level: usize,
    block: usize,
    delta: &BitVector,
) -> Result<FlipPlan, DecodeError> {
    check_block(code, level, block)?;
    if !session.fits(code) {
        return Err(DecodeError::SessionShape);
    }
    let expected = code.logicals_at(level);
    if delta.len() != expected {
        return Err(DecodeError::Shape {
            level,
            expected,
            got: delta.len(),
        });
    }
    Ok(plan(code, session, level, block, delta))
}

fn plan(
    code: &ConcatCode,
    session: &DecodeSession,
    level: usize,
    block: usize,
    delta: &BitVector,
) -> FlipPlan {
    let node = |cost, node| FlipPlan {
        level,
        block,
        version: session.version(),
        cost,
        node,
    };
    if level == 1 {
        let local = code.local(1);
        let current = session.level1_recovery(block);
        // Anything up to half a stabilizer's weight is already a coset minimum.
        if delta.is_zero() && 2 * current.weight() <= local.x_stabilizers()[1].weight() {
            return node(current.weight(), PlanNode::Keep);
        }
        let (cost, realization) = local.coset_min(current, delta);
        return node(cost, PlanNode::Leaf { realization });
    }
    let n = code.local(level).n();
    let idle = delta.is_zero()
        && session
            .recovery_rows(level, block)
            .iter()
            .all(BitVector::is_zero);
    if idle {
        // F = 0 keeps the identity in every column, so each child gets no flip.
        let zero = BitVector::zeros(code.logicals_at(level - 1));
        let mut cost = 0;
        let mut kept = 0;
        while kept < n {
            let child = plan(code, session, level - 1, block * n + kept, &zero);
            if child.node != PlanNode::Keep {
                break;
            }
            cost += child.cost;
            kept += 1;
        }
        if kept == n {
            return node(cost, PlanNode::Keep);
        }
        let children: Vec<FlipPlan> = (0..n)
            .map(|i| plan(code, session, level - 1, block * n + i, &zero))
            .collect();
        let cost = children.iter().map(|c| c.cost).sum();
        let f_opt = vec![zero; n];
        return node(cost, PlanNode::Inner { f_opt, children });
    }
    let f_opt = resolve(code, session, level, block, delta);
    let children: Vec<FlipPlan> = f_opt
        .iter()
        .enumerate()
        .map(|(i, row)| plan(code, session, level - 1, block * n + i, row))
        .collect();
    let cost = children.iter().map(|c| c.cost).sum();
    node(cost, PlanNode::Inner { f_opt, children })
}

/// Rows of `F_opt` for a level-`ℓ ≥ 2` block.
fn resolve(
    code: &ConcatCode,
    session: &DecodeSession,
    level: usize,
    block: usize,
    delta: &BitVector,
) -> Vec<BitVector> {
    let local = code.local(level);
    let k = local.k();
    let rows = session.recovery_rows(level, block);
    let r_cols = code.columns_of(level, rows);
    let mut cols = r_cols.clone();
    for (lam, col) in cols.iter_mut().enumerate() {
        let d = delta.slice(k * lam, k);
        if !d.is_zero() {
            *col ^= &local.encode_logical(&d);
        }
    }
    let choice = choose_stabilizers(local, &r_cols, &cols);
    let width = cols.len();
    let mut out = vec![BitVector::zeros(width); local.n()];
    for (lam, col) in cols.iter_mut().enumerate() {
        if choice[lam] != 0 {
            *col ^= &local.x_stabilizers()[choice[lam]];
        }
        for i in col.iter_ones() {
            out[i].set(lam, true);
        }
    }
    out
}

/// Stabilizer index chosen for each column of `f`; 0 is the identity.
fn choose_stabilizers(local: &HammingCode, r_cols: &[BitVector], f: &[BitVector]) -> Vec<usize> {
    let width = f.len();
    let mut choice = vec![0usize; width];
    if f.iter().all(BitVector::is_zero) {
        return choice;
    }
    let stabs = local.x_stabilizers();
    let mut alpha: Vec<usize> = (0..width).collect();
    alpha.sort_by_key(|&lam| std::cmp::Reverse(r_cols[lam].weight()));
    let first = alpha[0];
    // A column that is already zero keeps the identity: nothing can beat |m|.
    let rest: Vec<usize> = alpha[1..]
        .iter()
        .copied()
        .filter(|&lam| !f[lam].is_zero())
        .collect();

    let n = local.n();
    let mut all = BitVector::zeros(n);
    for col in f {
        all |= col;
    }
    let mut best_w = all.weight();
    let mut trial = vec![0usize; rest.len()];
    for (h1, s1) in stabs.iter().enumerate() {
        let mut m = f[first].add(s1).expect("column length");
        let mut aborted = false;
        for (slot, &lam) in rest.iter().enumerate() {
            let base = m.weight();
            let mut pick = 0;
            let mut pick_w = usize::MAX;
            for (y, h) in stabs.iter().enumerate() {
                let w = m.weight_of_or_sum(&f[lam], h);
                if w < pick_w {
                    pick_w = w;
                    pick = y;
                    if w == base {
                        break;
                    }
                }
            }
            trial[slot] = pick;
            let mut col = f[lam].clone();
            col ^= &stabs[pick];
            m |= &col;
            // |m| never shrinks, so this candidate can no longer win.
            if m.weight() >= best_w {
                aborted = true;
                break;
            }
        }
        if !aborted && m.weight() < best_w {
            best_w = m.weight();
            choice[first] = h1;
            for (slot, &lam) in rest.iter().enumerate() {
                choice[lam] = trial[slot];
            }
        }
    }
    choice
}

/// Applies a plan: level-1 recoveries are replaced by the planned
/// realizations and every recovery tensor the plan covers is cleared, so
/// the physical recovery alone now carries those decisions.
pub fn flip_commit(
    code: &ConcatCode,
    session: &mut DecodeSession,
    plan: &FlipPlan,
) -> Result<(), DecodeError> {
    check_block(code, plan.level, plan.block)?;
    if plan.version != session.version() {
        return Err(DecodeError::StalePlan {
            plan: plan.version,
            session: session.version(),
        });
    }
    commit_rec(session, plan);
    session.bump();
    session.new_pass();
    Ok(())
}

fn commit_rec(session: &mut DecodeSession, plan: &FlipPlan) {
    match &plan.node {
        PlanNode::Keep => {}
        PlanNode::Leaf { realization } => {
            if session.level1_recovery(plan.block) != realization {
                session.set_level1(plan.block, realization.clone());
            }
        }
        PlanNode::Inner { children, .. } => {
            for c in children {
                commit_rec(session, c);
            }
            for row in session.recovery_rows_mut(plan.level, plan.block) {
                if !row.is_zero() {
                    *row = BitVector::zeros(row.len());
                }
            }
        }
    }
}
