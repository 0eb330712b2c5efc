//! Concatenated quantum Hamming codes with local and bidirectional
//! hard-decision decoders, plus the Monte Carlo and fitting tools used to
//! measure their logical error rates.

pub mod analysis;
pub mod concat;
pub mod decoder;
pub mod gf2;
pub mod oracle;
pub mod qhc;
pub mod sim;

pub use concat::{ConcatCode, ConcatError, LevelError, PerfectSyndromes, Profile};
pub use decoder::{
    decode, decode_bidirectional, decode_local, flip_commit, flip_cost, reassign,
    structured_failure_pattern, DecodeError, DecodeObserver, DecodeSession, DecodeTrace,
    DecoderKind, FlipPlan, NoObserver, SyndromeSource, TransferEvent,
};
pub use gf2::{BitMatrix, BitVector, Gf2Error};
pub use qhc::{HammingCode, QhcError, Syndrome};
