//! Deterministic random streams keyed by (domain, label, seed).
//!
//! Every stochastic draw in the engine comes from a stream addressed by a
//! domain tag, a text label, and the model seed. Streams are stateless from
//! the caller's point of view: the same key always yields the same sequence,
//! so lexicons, banks, and retrieval noise are reproducible across runs and
//! across snapshot round trips.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// 64-bit FNV-1a over length-prefixed byte parts.
fn fnv1a(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let eat = |bytes: &[u8], hash: &mut u64| {
        for &b in bytes {
            *hash ^= u64::from(b);
            *hash = hash.wrapping_mul(PRIME);
        }
    };
    for part in parts {
        eat(&(part.len() as u64).to_le_bytes(), &mut hash);
        eat(part, &mut hash);
    }
    hash
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A ChaCha stream for the given (domain, label, seed) key.
pub(crate) fn stream(domain: &str, label: &str, seed: u64) -> ChaCha12Rng {
    let hash = fnv1a(&[domain.as_bytes(), label.as_bytes(), &seed.to_le_bytes()]);
    let mut key = [0u8; 32];
    let mut state = hash;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
