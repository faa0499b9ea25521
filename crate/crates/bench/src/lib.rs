//! Benchmark fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uplink_core::{ExperimentConfig, Interferer, LinkEnvironment};

/// A synthetic uplink with `n` interferers of Nakagami parameter `m`.
pub fn environment(n: usize, reference_m: u32, m: u32, seed: u64) -> LinkEnvironment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interferers = (0..n)
        .map(|k| Interferer {
            mobile: k + 1,
            omega: 10f64.powf(rng.random_range(-3.0..-1.0)),
            m,
            p: 1.0,
        })
        .collect();
    LinkEnvironment::synthetic(1.0, reference_m, 10.0, interferers)
}

/// The default network scaled down to `base_stations` cells.
pub fn network(base_stations: usize) -> ExperimentConfig {
    ExperimentConfig {
        base_stations,
        r_net: 2.0 * (base_stations as f64 / 50.0).sqrt(),
        trials: 1,
        ..ExperimentConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let env = environment(100, 2, 1, 0);
        assert_eq!(env.interferers.len(), 100);
        uplink_core::outage_probability(&env, 1.0).unwrap();
        network(10).validate().unwrap();
    }
}
