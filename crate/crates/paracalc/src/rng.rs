//! Counter-style random streams. Every lattice mode and every derived sample
//! index gets its own ChaCha stream, so draws never depend on visit order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th member of a family rooted at `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Stream dedicated to wavevector (k1, k2). Independent of the grid size,
/// so two grids sampled with one seed share their common low modes.
pub fn mode_stream(seed: u64, k1: i64, k2: i64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let stream = ((k1 as i32 as u32 as u64) << 32) | (k2 as i32 as u32 as u64);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = mode_stream(3, 1, -2).random();
        let b: u64 = mode_stream(3, 1, -2).random();
        let c: u64 = mode_stream(3, -2, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
