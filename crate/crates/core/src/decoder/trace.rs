use serde::Serialize;

use super::bidir::{FlipPlan, PlanNode};
use crate::gf2::BitVector;
use crate::qhc::Syndrome;

/// One evaluated transfer in `reassign`: move flip `transfer` from child `c`
/// onto children `a` and `b` of a level-`ℓ` block. Child labels are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferEvent {
    pub level: usize,
    pub block: usize,
    pub triple: [usize; 3],
    #[serde(serialize_with = "hex")]
    pub transfer: BitVector,
    pub before: [usize; 3],
    pub after: [usize; 3],
    pub accepted: bool,
}

fn hex<S: serde::Serializer>(v: &BitVector, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_hex())
}

/// Callbacks fired while decoding. All methods default to doing nothing.
pub trait DecodeObserver {
    fn on_level1(&mut self, _block: usize, _syndrome: &Syndrome, _recovery: &BitVector) {}
    fn on_mwe(
        &mut self,
        _level: usize,
        _block: usize,
        _syndromes: &[Syndrome],
        _rows: &[BitVector],
    ) {
    }
    fn on_transfer(&mut self, _event: &TransferEvent) {}
    fn on_reassigned(&mut self, _level: usize, _block: usize, _rows: &[BitVector]) {}
    fn on_plan(&mut self, _plan: &FlipPlan) {}
}

pub struct NoObserver;

impl DecodeObserver for NoObserver {}

/// A nonzero row of a recovery tensor: `child` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowRecord {
    pub child: usize,
    pub flip: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub block: usize,
    /// Nonzero syndrome values, as `(λ, value)`.
    pub syndromes: Vec<(usize, usize)>,
    pub mwe: Vec<RowRecord>,
    /// Rows after reassignment; absent for the local decoder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reassigned: Option<Vec<RowRecord>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level1Record {
    pub block: usize,
    pub syndrome: usize,
    pub recovery: Vec<usize>,
}

/// Per-block committed cost of the final plan, for blocks with nonzero cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanWeight {
    pub level: usize,
    pub block: usize,
    pub cost: usize,
}

/// Observer that records everything nontrivial, for JSON output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DecodeTrace {
    pub level1: Vec<Level1Record>,
    pub levels: Vec<LevelRecord>,
    pub transfers: Vec<TransferEvent>,
    pub plan: Vec<PlanWeight>,
    pub plan_cost: usize,
}

fn rows_record(rows: &[BitVector]) -> Vec<RowRecord> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| !r.is_zero())
        .map(|(i, r)| RowRecord {
            child: i + 1,
            flip: r.to_hex(),
        })
        .collect()
}

impl DecodeObserver for DecodeTrace {
    fn on_level1(&mut self, block: usize, syndrome: &Syndrome, recovery: &BitVector) {
        if syndrome.is_zero() {
            return;
        }
        self.level1.push(Level1Record {
            block,
            syndrome: syndrome.value(),
            recovery: recovery.iter_ones().map(|q| q + 1).collect(),
        });
    }

    fn on_mwe(&mut self, level: usize, block: usize, syndromes: &[Syndrome], rows: &[BitVector]) {
        let nonzero: Vec<(usize, usize)> = syndromes
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(l, s)| (l, s.value()))
            .collect();
        if nonzero.is_empty() {
            return;
        }
        self.levels.push(LevelRecord {
            level,
            block,
            syndromes: nonzero,
            mwe: rows_record(rows),
            reassigned: None,
        });
    }

    fn on_transfer(&mut self, event: &TransferEvent) {
        self.transfers.push(event.clone());
    }

    fn on_reassigned(&mut self, level: usize, block: usize, rows: &[BitVector]) {
        if let Some(rec) = self
            .levels
            .iter_mut()
            .rev()
            .find(|r| r.level == level && r.block == block)
        {
            rec.reassigned = Some(rows_record(rows));
        }
    }

    fn on_plan(&mut self, plan: &FlipPlan) {
        self.plan_cost = plan.cost();
        let mut stack = vec![plan];
        while let Some(p) = stack.pop() {
            if p.cost() == 0 {
                continue;
            }
            self.plan.push(PlanWeight {
                level: p.level(),
                block: p.block(),
                cost: p.cost(),
            });
            if let PlanNode::Inner { children, .. } = p.node() {
                stack.extend(children.iter().rev());
            }
        }
    }
}
