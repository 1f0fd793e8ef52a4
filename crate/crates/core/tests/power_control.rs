mod common;

use common::{greedy_grid, greedy_psi, log_uniform, rel_close, two_link_rate, waterfill_grid};
use hetnet_core::power_control::{bdt_update, fm_update, greedy_update, waterfill};
use hetnet_core::BackhaulState;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn waterfill_beats_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let p_max = log_uniform(&mut rng, 0.1, 10.0);
        let (e1, e2) = (log_uniform(&mut rng, 1e-4, 10.0), log_uniform(&mut rng, 1e-4, 10.0));
        let (w1, w2) = (log_uniform(&mut rng, 1e5, 2e7), log_uniform(&mut rng, 1e5, 2e7));
        let (p1, p2) = waterfill(p_max, e1, e2, w1, w2).unwrap();
        let got = two_link_rate(p1, p2, e1, e2, w1, w2);
        let grid = waterfill_grid(p_max, e1, e2, w1, w2, 2001);
        assert!(got >= grid * (1.0 - 1e-6), "{got} < {grid}");
    }
}

#[test]
fn greedy_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points = 301;
    for _ in 0..60 {
        let p_max = 1.0;
        let e = [log_uniform(&mut rng, 1e-3, 1.0), log_uniform(&mut rng, 1e-3, 1.0)];
        let w = [[1e6, 5e6][rng.random_range(0..2)], [1e6, 5e6][rng.random_range(0..2)]];
        let v_plus = [
            if rng.random_bool(0.2) { 0.0 } else { log_uniform(&mut rng, 1e5, 5e7) },
            if rng.random_bool(0.2) { 0.0 } else { log_uniform(&mut rng, 1e5, 5e7) },
        ];
        let (p1, p2) = greedy_update(p_max, e[0], e[1], w[0], w[1], v_plus[0], v_plus[1]).unwrap();
        assert!(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= p_max * (1.0 + 1e-12));
        let psi = greedy_psi(p1, p2, e, w, v_plus);
        let (best, least) = greedy_grid(p_max, e, w, v_plus, points, 1e-6);
        assert!(psi >= best * (1.0 - 1e-6), "psi {psi} below grid {best}");
        // The grid can only locate the least-power optimum to within a step.
        assert!(p1 + p2 <= least + 2.0 * p_max / (points - 1) as f64, "{} > {least}", p1 + p2);
        if p1 + p2 > 1e-9 {
            let shrunk = greedy_psi(p1 * (1.0 - 1e-4), p2 * (1.0 - 1e-4), e, w, v_plus);
            assert!(shrunk < psi, "power could be reduced without loss");
        }
    }
}

#[test]
fn bdt_budget_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let p_max = 1.0;
        let p1: f64 = rng.random();
        let p2: f64 = rng.random::<f64>() * (1.0 - p1);
        let (e1, e2) = (log_uniform(&mut rng, 1e-4, 1.0), log_uniform(&mut rng, 1e-4, 1.0));
        let z = rng.random_range(0.05..0.99);
        for state in BackhaulState::ALL {
            let (a, b) = bdt_update(state, p1, p2, p_max, e1, e2, 1e6, 5e6, z).unwrap();
            assert!(a >= 0.0 && b >= 0.0 && a + b <= p_max + 1e-12);
            match state {
                BackhaulState::S1 | BackhaulState::S2 | BackhaulState::S3 | BackhaulState::S5 | BackhaulState::S6 => {
                    assert!(rel_close(a + b, p_max, 1e-12), "{state}: {}", a + b)
                }
                BackhaulState::S4 => assert_eq!((a, b), (p1, p2)),
                BackhaulState::S7 | BackhaulState::S8 | BackhaulState::S9 => assert!(a + b < p1 + p2),
            }
        }
    }
}

#[test]
fn fm_fixed_point_has_target_sinr() {
    // p <- beta (d + f p) has the fixed point p* = beta d / (1 - beta f),
    // where the SINR p*/e(p*) equals beta.
    let (d, f, beta) = (0.01, 0.2, 2.0);
    let mut p = 0.0;
    for _ in 0..200 {
        p = fm_update(d + f * p, beta, 1.0);
    }
    assert!(rel_close(p / (d + f * p), beta, 1e-12));
    assert_eq!(fm_update(10.0, beta, 1.0), 1.0);
}

proptest! {
    #[test]
    fn waterfill_spends_exact_budget(
        p_max in 0.01f64..10.0,
        e1 in 1e-6f64..100.0,
        e2 in 1e-6f64..100.0,
        w1 in 1e5f64..1e8,
        w2 in 1e5f64..1e8,
    ) {
        let (p1, p2) = waterfill(p_max, e1, e2, w1, w2).unwrap();
        prop_assert!(p1 >= 0.0 && p2 >= 0.0);
        prop_assert!((p1 + p2 - p_max).abs() <= 1e-12 * p_max);
    }

    #[test]
    fn greedy_is_feasible(
        e1 in 1e-6f64..10.0,
        e2 in 1e-6f64..10.0,
        v1 in -1e8f64..1e8,
        v2 in -1e8f64..1e8,
    ) {
        let (p1, p2) = greedy_update(1.0, e1, e2, 1e6, 5e6, v1.max(0.0), v2.max(0.0)).unwrap();
        prop_assert!(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= 1.0 + 1e-12);
    }
}
