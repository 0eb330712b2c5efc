//! Hard-decision decoders for concatenated quantum Hamming codes.
//!
//! Both decoders share one recursive skeleton: level-1 blocks get the lookup
//! MWE of their syndrome, and every higher block gets, column by column, the
//! lookup MWE of the local code `Q_λ` acting on its children's logical
//! qubits. The resulting recovery tensor `R` of a level-`ℓ` block is stored
//! row-wise: row `i` is the logical flip assigned to child `i`. The
//! bidirectional decoder additionally runs [`reassign`] on every block
//! before its parent reads the block's syndromes.
//!
//! Decisions stay in the session as recovery tensors until the very end,
//! when the plan returned by [`flip_cost`] for the root with an empty flip is
//! committed to physical level-1 recoveries by [`flip_commit`].

mod bidir;
mod local;
mod session;
mod trace;

pub use bidir::{decode_bidirectional, flip_commit, flip_cost, reassign, FlipPlan, PlanNode};
pub use local::{decode_local, structured_failure_pattern};
pub use session::DecodeSession;
pub use trace::{DecodeObserver, DecodeTrace, LevelRecord, NoObserver, TransferEvent};

use thiserror::Error;

use crate::concat::{ConcatCode, ConcatError};
use crate::qhc::Syndrome;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("inconsistent syndrome source: {0}")]
    Syndrome(#[from] ConcatError),
    #[error(
        "syndrome source returned {got} syndromes for a level-{level} block, expected {expected}"
    )]
    SyndromeCount {
        level: usize,
        expected: usize,
        got: usize,
    },
    #[error(
        "flip of length {got} does not fit a level-{level} block with {expected} logical qubits"
    )]
    Shape {
        level: usize,
        expected: usize,
        got: usize,
    },
    #[error("block {block} does not exist at level {level}")]
    NoSuchBlock { level: usize, block: usize },
    #[error("plan was computed at session version {plan}, session is now at version {session}")]
    StalePlan { plan: u64, session: u64 },
    #[error("invalid failure pattern: {0}")]
    InvalidPattern(String),
    #[error("session does not match code shape")]
    SessionShape,
}

/// Where decoders get their syndromes from.
///
/// For `level = 1` the result holds the single syndrome of the block; for
/// higher levels it holds one syndrome per `λ ∈ I_{ℓ−1}`, as seen after all
/// recoveries stored in `session` below level `ℓ`.
pub trait SyndromeSource {
    fn syndromes(
        &self,
        level: usize,
        block: usize,
        session: &DecodeSession,
    ) -> Result<Vec<Syndrome>, ConcatError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Local,
    Bidir,
}

impl std::str::FromStr for DecoderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Self::Local),
            "bidir" | "bidirectional" => Ok(Self::Bidir),
            other => Err(format!(
                "unknown decoder {other:?} (expected local or bidir)"
            )),
        }
    }
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Local => "local",
            Self::Bidir => "bidir",
        })
    }
}

/// Runs the chosen decoder into a fresh session.
pub fn decode(
    kind: DecoderKind,
    code: &ConcatCode,
    source: &dyn SyndromeSource,
    observer: &mut dyn DecodeObserver,
) -> Result<DecodeSession, DecodeError> {
    let mut session = DecodeSession::new(code);
    decode_into(kind, code, source, &mut session, observer)?;
    Ok(session)
}

/// Like [`decode`] but reuses `session`, which is reset first.
pub fn decode_into(
    kind: DecoderKind,
    code: &ConcatCode,
    source: &dyn SyndromeSource,
    session: &mut DecodeSession,
    observer: &mut dyn DecodeObserver,
) -> Result<(), DecodeError> {
    decode_pass(kind, code, source, session, observer)?;
    let top = code.levels();
    let plan = flip_cost(
        code,
        session,
        top,
        0,
        &crate::gf2::BitVector::zeros(code.num_logicals()),
    )?;
    observer.on_plan(&plan);
    flip_commit(code, session, &plan)?;
    Ok(())
}

/// The bottom-up pass alone: resets `session`, then fills every recovery
/// tensor (reassigning if `kind` is bidirectional) without committing.
pub fn decode_pass(
    kind: DecoderKind,
    code: &ConcatCode,
    source: &dyn SyndromeSource,
    session: &mut DecodeSession,
    observer: &mut dyn DecodeObserver,
) -> Result<(), DecodeError> {
    if !session.fits(code) {
        return Err(DecodeError::SessionShape);
    }
    session.reset();
    bidir::decode_block(
        code,
        source,
        session,
        code.levels(),
        0,
        kind == DecoderKind::Bidir,
        observer,
    )
}
