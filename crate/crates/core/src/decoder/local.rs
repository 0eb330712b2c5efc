use super::trace::NoObserver;
use super::{decode, DecodeError, DecodeSession, DecoderKind, SyndromeSource};
use crate::concat::ConcatCode;
use crate::gf2::BitVector;

/// Local hard-decision decode: lookup MWE at every level, no reassignment.
pub fn decode_local(
    code: &ConcatCode,
    source: &dyn SyndromeSource,
) -> Result<DecodeSession, DecodeError> {
    decode(DecoderKind::Local, code, source, &mut NoObserver)
}

/// Indicator of `{(i_L, …, i_1) : i_ℓ ∈ {a_ℓ, b_ℓ}}`, weight `2^L`.
///
/// `pairs[ℓ − 1] = (a_ℓ, b_ℓ)` with 1-based labels, bottom level first.
pub fn structured_failure_pattern(
    code: &ConcatCode,
    pairs: &[(usize, usize)],
) -> Result<BitVector, DecodeError> {
    let levels = code.levels();
    if pairs.len() != levels {
        return Err(DecodeError::InvalidPattern(format!(
            "{} pairs for a {levels}-level code",
            pairs.len()
        )));
    }
    for (l, &(a, b)) in pairs.iter().enumerate() {
        let n = code.local(l + 1).n();
        if a == b || a == 0 || b == 0 || a > n || b > n {
            return Err(DecodeError::InvalidPattern(format!(
                "level {} pair ({a}, {b}) must be two distinct labels in 1..={n}",
                l + 1
            )));
        }
    }
    let mut e = BitVector::zeros(code.num_qubits());
    for mask in 0..(1usize << levels) {
        let tuple: Vec<usize> = (0..levels)
            .rev()
            .map(|l| {
                if mask >> l & 1 == 0 {
                    pairs[l].0
                } else {
                    pairs[l].1
                }
            })
            .collect();
        e.set(code.flat(&tuple)?, true);
    }
    Ok(e)
}
