// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fast-path vs brute-force equivalence on randomized inputs, including the
//! edge cases (n < m strata, negative values, tied scores).

use cpd_core::distance::{empirical_distance, estimate_single, DistanceParams};
use cpd_core::oracle::{brute_force_distance, brute_force_phi};
use cpd_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_sequence(rng: &mut ChaCha12Rng, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(1..=max_len);
    // Coarse value grid so cell ties and repeated patterns actually occur.
    let coarse = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            if coarse {
                rng.random_range(-4i32..=8) as f64 * 0.25
            } else {
                rng.random_range(-1.0..2.0)
            }
        })
        .collect()
}

#[test]
fn distance_matches_brute_force() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xd157a);
    for trial in 0..200 {
        let x1 = random_sequence(&mut rng, 200);
        let x2 = random_sequence(&mut rng, 200);
        let m_max = rng.random_range(1..=4);
        let l_max = rng.random_range(1..=4);
        let p = DistanceParams::new(m_max, l_max).unwrap();
        let fast = empirical_distance(&x1, &x2, &p).unwrap();
        let slow = brute_force_distance(&x1, &x2, m_max, l_max);
        assert!(
            (fast - slow).abs() <= 1e-12,
            "trial {trial}: fast {fast} vs brute force {slow}"
        );
    }
}

#[test]
fn distance_brute_force_short_series() {
    // n < m on one or both sides.
    let p = DistanceParams::new(4, 2).unwrap();
    for (x1, x2) in [
        (vec![0.3], vec![0.1, 0.9, 0.5, 0.2, 0.8]),
        (vec![0.3], vec![0.4]),
        (vec![-0.7, -0.7], vec![1.9]),
    ] {
        let fast = empirical_distance(&x1, &x2, &p).unwrap();
        let slow = brute_force_distance(&x1, &x2, 4, 2);
        assert!((fast - slow).abs() <= 1e-12);
    }
}

#[test]
fn phi_matches_brute_force() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x0f1);
    for trial in 0..100 {
        let n = rng.random_range(8..=300);
        // Half the trials get a step to make the argmax non-trivial, the
        // rest stay i.i.d.-like (frequent exact ties).
        let x: Vec<f64> = if trial % 2 == 0 {
            let cut = rng.random_range(1..n);
            (0..n)
                .map(|i| {
                    if i < cut {
                        rng.random_range(0.0..0.6)
                    } else {
                        rng.random_range(0.4..1.0)
                    }
                })
                .collect()
        } else {
            (0..n).map(|_| rng.random_range(-1.0..2.0)).collect()
        };
        let a = rng.random_range(1..=n);
        let b = rng.random_range(a..=n);
        let alpha = rng.random_range(0.05..0.5);
        let m_max = rng.random_range(1..=3);
        let l_max = rng.random_range(1..=3);
        let p = DistanceParams::new(m_max, l_max).unwrap();
        let fast = estimate_single(&x, a, b, alpha, &p);
        let slow = brute_force_phi(&x, a, b, alpha, &p);
        match (fast, slow) {
            (Ok(tf), Ok(ts)) => assert_eq!(tf, ts, "trial {trial}: n={n} a={a} b={b}"),
            (Err(Error::DegenerateWindow), Err(Error::DegenerateWindow)) => {}
            (f, s) => panic!("trial {trial}: fast {f:?} vs brute force {s:?}"),
        }
    }
}

#[test]
fn phi_matches_on_constant_input_tie() {
    let x = vec![1.25f64; 60];
    let p = DistanceParams::new(2, 2).unwrap();
    let fast = estimate_single(&x, 10, 50, 0.1, &p).unwrap();
    let slow = brute_force_phi(&x, 10, 50, 0.1, &p).unwrap();
    assert_eq!(fast, slow);
}

#[test]
fn phi_matches_when_alpha_clips_at_edges() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let x: Vec<f64> = (0..120).map(|_| rng.random_range(-1.0..2.0)).collect();
    let p = DistanceParams::new(2, 3).unwrap();
    for (a, b) in [(1, 30), (100, 120), (1, 120)] {
        let fast = estimate_single(&x, a, b, 0.45, &p).unwrap();
        let slow = brute_force_phi(&x, a, b, 0.45, &p).unwrap();
        assert_eq!(fast, slow, "window ({a}, {b})");
    }
}
