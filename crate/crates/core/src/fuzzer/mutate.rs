//! Havoc-style byte mutations.
//!
//! One call applies exactly one operator. The output is never more than
//! eight bytes longer than the input.

use rand::Rng;

/// Largest growth a single mutation may cause.
pub const MAX_GROWTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationOp {
    BitFlip,
    ByteReplace,
    ByteInsert,
    ByteDelete,
    IntReplace,
    Splice,
}

impl MutationOp {
    pub const ALL: [MutationOp; 6] = [
        MutationOp::BitFlip,
        MutationOp::ByteReplace,
        MutationOp::ByteInsert,
        MutationOp::ByteDelete,
        MutationOp::IntReplace,
        MutationOp::Splice,
    ];
}

/// Mutates `bytes` with one random operator. `partner` is the splice donor;
/// without one, splicing degrades to a byte replacement.
pub fn mutate<R: Rng + ?Sized>(bytes: &[u8], rng: &mut R, partner: Option<&[u8]>) -> Vec<u8> {
    if bytes.is_empty() {
        return vec![rng.random()];
    }
    let op = MutationOp::ALL[rng.random_range(0..MutationOp::ALL.len())];
    apply(op, bytes, rng, partner)
}

pub fn apply<R: Rng + ?Sized>(op: MutationOp, bytes: &[u8], rng: &mut R, partner: Option<&[u8]>) -> Vec<u8> {
    let mut out = bytes.to_vec();
    if out.is_empty() {
        out.push(rng.random());
        return out;
    }
    let len = out.len();
    match op {
        MutationOp::BitFlip => {
            let bit = rng.random_range(0..len * 8);
            out[bit / 8] ^= 1 << (bit % 8);
        }
        MutationOp::ByteReplace => {
            let at = rng.random_range(0..len);
            out[at] = rng.random();
        }
        MutationOp::ByteInsert => {
            let at = rng.random_range(0..=len);
            out.insert(at, rng.random());
        }
        MutationOp::ByteDelete => {
            out.remove(rng.random_range(0..len));
        }
        MutationOp::IntReplace => {
            let width = if rng.random_bool(0.5) { 2 } else { 4 };
            if len < width {
                let at = rng.random_range(0..len);
                out[at] = rng.random();
            } else {
                let at = rng.random_range(0..=len - width);
                let value: u32 = rng.random();
                let be = value.to_be_bytes();
                out[at..at + width].copy_from_slice(&be[4 - width..]);
            }
        }
        MutationOp::Splice => match partner.filter(|p| !p.is_empty()) {
            Some(donor) => {
                let cut = rng.random_range(0..=len);
                let from = rng.random_range(0..donor.len());
                out.truncate(cut);
                out.extend_from_slice(&donor[from..]);
                out.truncate(len + MAX_GROWTH);
            }
            None => {
                let at = rng.random_range(0..len);
                out[at] = rng.random();
            }
        },
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_for_fixed_seed() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            (0..50)
                .map(|_| mutate(b"seed", &mut rng, Some(b"donor bytes")))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_input_bootstraps_one_byte() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(mutate(&[], &mut rng, None).len(), 1);
    }

    #[test]
    fn growth_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let donor = vec![0xAAu8; 64];
        for _ in 0..10_000 {
            let out = mutate(&[1, 2, 3, 4], &mut rng, Some(&donor));
            assert!(out.len() <= 12, "{}", out.len());
        }
    }

    #[test]
    fn every_operator_changes_something_eventually() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for op in MutationOp::ALL {
            let changed = (0..100).any(|_| apply(op, b"abcdef", &mut rng, Some(b"xyz")) != b"abcdef");
            assert!(changed, "{op:?}");
        }
    }
}
