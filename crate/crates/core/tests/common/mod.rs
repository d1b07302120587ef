#![allow(dead_code)]

use ral_core::distkit::{discretize, is_regular, power_grid, random_regular};
use ral_core::DiscreteDistribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Strictly increasing support of `n` points; starts at 0 when `from_zero`.
pub fn random_support(rng: &mut ChaCha8Rng, n: usize, from_zero: bool) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut x: f64 = if from_zero { 0.0 } else { rng.gen_range(0.2..2.0) };
    for _ in 0..n {
        v.push(x);
        x += rng.gen_range(0.1..1.5);
    }
    v
}

pub fn random_regular_dist(rng: &mut ChaCha8Rng, n: usize, from_zero: bool) -> DiscreteDistribution {
    let v = random_support(rng, n, from_zero);
    random_regular(&v, rng).unwrap()
}

/// Arbitrary masses (Dirichlet-like) on a random support.
pub fn random_dist(rng: &mut ChaCha8Rng, n: usize, from_zero: bool) -> DiscreteDistribution {
    let v = random_support(rng, n, from_zero);
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-6f64..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::new(v, raw.iter().map(|x| x / total).collect()).unwrap()
}

/// Random distribution on `n` equally spaced points of `[0, h]`.
pub fn random_grid_dist(rng: &mut ChaCha8Rng, n: usize, h: f64) -> DiscreteDistribution {
    let v: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                h
            } else {
                h * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::new(v, raw.iter().map(|x| x / total).collect()).unwrap()
}

/// Discretised regular family (power law or truncated exponential) on an
/// equally spaced grid of `n` points; redrawn until the grid is regular.
pub fn random_regular_grid(rng: &mut ChaCha8Rng, n: usize) -> DiscreteDistribution {
    loop {
        let lo = rng.gen_range(0.0..1.0);
        let hi = lo + rng.gen_range(1.0..5.0);
        let f = if rng.gen_bool(0.5) {
            power_grid(rng.gen_range(1.0..3.0), lo, hi, n).unwrap()
        } else {
            let rate = rng.gen_range(0.2..2.0);
            discretize(|v| 1.0 - (-(v - lo) * rate).exp(), lo, hi, n).unwrap()
        };
        if is_regular(&f) {
            return f;
        }
    }
}
