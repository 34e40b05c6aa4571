//! Per-run seed derivation: a stable FNV-1a hash over the run key,
//! finished with a splitmix64 scramble. Recorded in every RunRecord so a
//! single run can be replayed in isolation.

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn child_seed(
    master_seed: u64,
    experiment: &str,
    algorithm: &str,
    sweep_value: f64,
    run_index: u32,
) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
    };
    eat(&master_seed.to_le_bytes());
    eat(experiment.as_bytes());
    eat(&[0]);
    eat(algorithm.as_bytes());
    eat(&[0]);
    eat(&sweep_value.to_bits().to_le_bytes());
    eat(&run_index.to_le_bytes());
    drop(eat);
    splitmix64(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn distinct_keys_distinct_seeds() {
        let mut seen = HashSet::new();
        for run in 0..50 {
            for (alg, sv) in [("sparse_ebm", 0.1), ("sparse_ebm", 0.2), ("ebm", 0.1)] {
                assert!(seen.insert(child_seed(7, "isr_vs_beta", alg, sv, run)));
            }
        }
        assert_eq!(seen.len(), 150);
    }

    #[test]
    fn seed_depends_on_every_field() {
        let base = child_seed(1, "isr_vs_beta", "ebm", 0.1, 0);
        assert_ne!(base, child_seed(2, "isr_vs_beta", "ebm", 0.1, 0));
        assert_ne!(base, child_seed(1, "isr_vs_T", "ebm", 0.1, 0));
        assert_ne!(base, child_seed(1, "isr_vs_beta", "sparse_ebm", 0.1, 0));
        assert_ne!(base, child_seed(1, "isr_vs_beta", "ebm", 0.2, 0));
        assert_ne!(base, child_seed(1, "isr_vs_beta", "ebm", 0.1, 1));
    }

    #[test]
    fn seed_is_frozen_across_builds() {
        // regression pin: changing the derivation silently would break
        // replayability of every recorded artifact
        assert_eq!(
            child_seed(42, "isr_vs_beta", "sparse_ebm", 0.1, 0),
            10107008584200640826
        );
        assert_eq!(
            child_seed(0, "gini_vs_beta", "none", 0.5, 3),
            2507579082542305522
        );
    }
}
