//! Fixed benchmark instances shared by the criterion benches.

use ral_core::distkit::{equal_revenue, random_regular, uniform_grid};
use ral_core::robust_multi::SpaInstance;
use ral_core::DiscreteDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Equal-revenue grid over `[1, 100]` padded down to 0.5.
pub fn equal_revenue_instance(n: usize) -> DiscreteDistribution {
    equal_revenue(100.0, n)
        .and_then(|f| f.pad_below(0.5))
        .expect("valid parameters")
}

pub fn uniform_instance(n: usize) -> DiscreteDistribution {
    uniform_grid(0.0, 1.0, n).expect("valid parameters")
}

/// Random regular masses on `n` equally spaced points of `[0, 1]`.
pub fn random_regular_instance(n: usize, seed: u64) -> DiscreteDistribution {
    let support = uniform_instance(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_regular(support.values(), &mut rng).expect("valid support")
}

pub fn spa_instance(n: usize, m: usize, eps: f64) -> SpaInstance {
    SpaInstance::new(uniform_instance(n), m, eps, 1.0).expect("valid instance")
}
