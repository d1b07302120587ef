mod common;

use ral_core::distkit::{apply_transfer, emd, uniform_grid};
use ral_core::oracles::{monte_carlo_spa, random_downward_transfer};
use ral_core::robust_multi::{
    robust_reserve_fptas, spa_reserve_revenue, spa_revenue, worst_case_spa, worst_case_spa_with_reserve,
    FptasGrids, SpaInstance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_grid_dist;

#[test]
fn reserve_revenue_matches_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut outside = 0;
    for k in 0..20 {
        let m = [2, 3, 5][k % 3];
        let h = rng.gen_range(0.5..3.0);
        let n = rng.gen_range(3..30);
        let f = random_grid_dist(&mut rng, n, h);
        let r = rng.gen_range(0.0..h);
        let exact = spa_reserve_revenue(&f, m, r).unwrap();
        let (mean, se) = monte_carlo_spa(&f, m, r, 200_000, k as u64).unwrap();
        if (exact - mean).abs() > 3.0 * se {
            outside += 1;
        }
    }
    // 3 SE misses about 0.3% of the time; allow one.
    assert!(outside <= 1, "{outside} of 20 outside 3 standard errors");
}

#[test]
fn simulation_on_uniform() {
    let u = uniform_grid(0.0, 1.0, 1000).unwrap();
    let (mean, se) = monte_carlo_spa(&u, 2, 0.0, 1_000_000, 9).unwrap();
    assert!((mean - 1.0 / 3.0).abs() <= 3.0 * se + 1e-3);
    assert!((spa_revenue(&u, 2).unwrap() - mean).abs() <= 3.0 * se);
    let with_reserve = spa_reserve_revenue(&u, 2, 0.5).unwrap();
    assert!((with_reserve - 5.0 / 12.0).abs() < 2e-3);
}

#[test]
fn reserve_worst_case_beats_random_perturbations() {
    let prior = uniform_grid(0.0, 1.0, 101).unwrap();
    let inst = SpaInstance::new(prior.clone(), 3, 0.02, 1.0).unwrap();
    let grids = FptasGrids::from_accuracy(0.05, 3, 1.0).unwrap();
    let r = 0.3;
    let w = worst_case_spa_with_reserve(&inst, r, &grids).unwrap();
    assert!(emd(&prior, &w.distribution).unwrap() <= 0.02 + 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut lowest = f64::INFINITY;
    for i in 0..1000 {
        let plan = random_downward_transfer(&prior, 0.02, i % 2 == 0, &mut rng);
        let g = apply_transfer(&prior, &plan).unwrap();
        lowest = lowest.min(spa_reserve_revenue(&g, 3, r).unwrap());
    }
    assert!(w.revenue <= lowest + 1e-12, "{} vs {lowest}", w.revenue);

    // hand construction: plain flattening without touching the reserve
    let plain = worst_case_spa(&inst).unwrap();
    let hand = spa_reserve_revenue(&plain.distribution, 3, r).unwrap();
    assert!(w.revenue <= hand + 1e-12);
}

#[test]
fn plain_worst_case_beats_random_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for k in 0..10 {
        let m = [2, 3, 5][k % 3];
        let f = random_grid_dist(&mut rng, 40, 1.0);
        let eps = rng.gen_range(0.001..0.05);
        let inst = SpaInstance::new(f.clone(), m, eps, 1.0).unwrap();
        let w = worst_case_spa(&inst).unwrap();
        for i in 0..1000 {
            let plan = random_downward_transfer(&f, eps, i % 2 == 0, &mut rng);
            let g = apply_transfer(&f, &plan).unwrap();
            assert!(w.revenue <= spa_revenue(&g, m).unwrap() + 1e-12);
        }
    }
}

#[test]
fn robust_reserve_is_monotone_and_bounded() {
    let prior = uniform_grid(0.0, 1.0, 101).unwrap();
    for m in [2, 3] {
        let mut prev = f64::INFINITY;
        for eps in [0.0, 0.005, 0.01, 0.02, 0.05, 0.1] {
            let inst = SpaInstance::new(prior.clone(), m, eps, 1.0).unwrap();
            let sol = robust_reserve_fptas(&inst, 0.05).unwrap();
            assert!(sol.value <= prev + 1e-12);
            // the prior itself is in the ball
            let nominal = spa_reserve_revenue(&prior, m, sol.reserve).unwrap();
            assert!(sol.value <= nominal + 1e-12, "m={m} eps={eps}");
            prev = sol.value;
        }
    }
}

#[test]
fn robust_reserve_ignores_thread_count() {
    let prior = uniform_grid(0.0, 1.0, 101).unwrap();
    let inst = SpaInstance::new(prior, 3, 0.02, 1.0).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| robust_reserve_fptas(&inst, 0.05).unwrap());
    let many = robust_reserve_fptas(&inst, 0.05).unwrap();
    assert_eq!(single, many);
}
