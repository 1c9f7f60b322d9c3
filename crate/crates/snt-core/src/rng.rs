//! Counter-based per-shot random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent generator for `(seed, instance, shot)`. The same triple always
/// yields the same stream, whichever worker draws it.
pub fn shot_rng(seed: u64, instance: u64, shot: u64) -> ChaCha8Rng {
    let a = splitmix(seed);
    let b = splitmix(a ^ instance.rotate_left(21));
    let c = splitmix(b ^ shot.rotate_left(42));
    let d = splitmix(c ^ 0x5a5a_5a5a);
    let mut key = [0u8; 32];
    for (i, w) in [a, b, c, d].iter().enumerate() {
        key[i * 8..i * 8 + 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stream for purposes other than shots (instance sampling, bootstraps).
pub fn labelled_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let h = label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    shot_rng(seed, h, u64::MAX)
}

/// Sub-seed for an independent stage of a run.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    use rand::RngCore;
    labelled_rng(seed, label).next_u64()
}
