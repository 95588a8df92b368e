// SPDX-License-Identifier: MIT OR Apache-2.0

//! The acceptance gate: one criterion per section, one PASS/FAIL line per
//! criterion on stdout, a single panic at the end if anything failed.
//!
//! Monte Carlo criteria run with pinned seeds and depths; the expected
//! numbers for the end-to-end sweep were fixed by a pilot run recorded in
//! docs/pilot.md before this test gated on them.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cpd_core::changepoint::{estimate_changepoints, ChangePointTruth};
use cpd_core::datagen::{
    compose_sequence, derive_seed, random_changepoints, rotation_sample, RotationProcessSpec,
    DEFAULT_ALPHAS, DEFAULT_U1, DEFAULT_U2,
};
use cpd_core::distance::{empirical_distance, estimate_single, DistanceParams};
use cpd_core::frequency::build_frequency_table;
use cpd_core::oracle::{brute_force_distance, brute_force_phi};
use cpd_core::Error;

use cpd_cli::commands::{cmd_experiment, mean_total_error, ExperimentConfig};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Gate { failures: Vec::new() }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {detail}");
        if !pass {
            self.failures.push(name.to_string());
        }
    }

    fn report(&mut self, name: &str, detail: String) {
        println!("REPORT {name}: {detail}");
    }
}

fn random_sequence(rng: &mut ChaCha12Rng, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| rng.random_range(-1.0..2.0)).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn criterion_oracle_equivalence(gate: &mut Gate) {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x1 = random_sequence(&mut rng, 200);
        let x2 = random_sequence(&mut rng, 200);
        let m_max = rng.random_range(1..=4);
        let l_max = rng.random_range(1..=4);
        let p = DistanceParams::new(m_max, l_max).unwrap();
        let fast = empirical_distance(&x1, &x2, &p).unwrap();
        let slow = brute_force_distance(&x1, &x2, m_max, l_max);
        worst = worst.max((fast - slow).abs());
    }
    let mut phi_mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(8..=250);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let a = rng.random_range(1..=n);
        let b = rng.random_range(a..=n);
        let alpha = rng.random_range(0.05..0.5);
        let p = DistanceParams::new(rng.random_range(1..=3), rng.random_range(1..=3)).unwrap();
        let agree = match (estimate_single(&x, a, b, alpha, &p), brute_force_phi(&x, a, b, alpha, &p))
        {
            (Ok(tf), Ok(ts)) => tf == ts,
            (Err(Error::DegenerateWindow), Err(Error::DegenerateWindow)) => true,
            _ => false,
        };
        if !agree {
            phi_mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    gate.check(
        "oracle-equivalence",
        worst <= 1e-12 && phi_mismatches == 0 && elapsed.as_secs() < 60,
        format!(
            "200 distance pairs worst gap {worst:.2e}, {phi_mismatches} argmax mismatches, {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
}

fn criterion_metric_axioms(gate: &mut Gate) {
    let mut rng = ChaCha12Rng::seed_from_u64(102);
    let p = DistanceParams::new(3, 3).unwrap();
    let mut ok = true;
    for _ in 0..100 {
        let x1 = random_sequence(&mut rng, 80);
        let x2 = random_sequence(&mut rng, 80);
        let x3 = random_sequence(&mut rng, 80);
        let d12 = empirical_distance(&x1, &x2, &p).unwrap();
        let d13 = empirical_distance(&x1, &x3, &p).unwrap();
        let d23 = empirical_distance(&x2, &x3, &p).unwrap();
        ok &= d12 == empirical_distance(&x2, &x1, &p).unwrap();
        ok &= empirical_distance(&x1, &x1, &p).unwrap() == 0.0;
        ok &= d12 < 2.0 && d12 >= 0.0;
        ok &= d12 <= d13 + d23 + 1e-12;
        ok &= d13 <= d12 + d23 + 1e-12;
        ok &= d23 <= d12 + d13 + 1e-12;
    }
    gate.check(
        "metric-axioms",
        ok,
        "symmetry, identity, bound, triangle over 100 triples".into(),
    );
}

fn criterion_convexity(gate: &mut Gate) {
    // The inequality is checked in exact integer arithmetic: frequencies are
    // count/window ratios and the mixing weight is a small rational p/q, so
    // multiplying through by q and the three window counts leaves an
    // integer comparison with no rounding at all.
    let mut rng = ChaCha12Rng::seed_from_u64(103);
    let mut ok = true;
    for _ in 0..100 {
        let x = random_sequence(&mut rng, 60);
        let y = random_sequence(&mut rng, 60);
        let z = random_sequence(&mut rng, 60);
        let q: i64 = rng.random_range(2..=64);
        let p: i64 = rng.random_range(0..=q);
        for m in 1..=3u32 {
            for l in 1..=3u32 {
                let tx = build_frequency_table(&x, m, l).unwrap();
                let ty = build_frequency_table(&y, m, l).unwrap();
                let tz = build_frequency_table(&z, m, l).unwrap();
                let (wx, wy, wz) = (
                    tx.iter().map(|(_, c)| c).sum::<u64>() as i64,
                    ty.iter().map(|(_, c)| c).sum::<u64>() as i64,
                    tz.iter().map(|(_, c)| c).sum::<u64>() as i64,
                );
                if wx == 0 || wy == 0 || wz == 0 {
                    continue;
                }
                let mut keys: Vec<Vec<i64>> = Vec::new();
                for t in [&tx, &ty, &tz] {
                    keys.extend(t.iter().map(|(k, _)| k.to_vec()));
                }
                keys.sort();
                keys.dedup();
                let mut mixed: i64 = 0;
                let mut hull: i64 = 0;
                for k in &keys {
                    let (cx, cy, cz) =
                        (tx.count(k) as i64, ty.count(k) as i64, tz.count(k) as i64);
                    mixed += (cx * q * wy * wz - p * cy * wx * wz - (q - p) * cz * wx * wy).abs();
                    hull += p * (cx * wy - cy * wx).abs() * wz
                        + (q - p) * (cx * wz - cz * wx).abs() * wy;
                }
                ok &= mixed <= hull;
            }
        }
    }
    gate.check(
        "frequency-convexity",
        ok,
        "mixture variation bounded by the hull, 100 triples x 9 strata, integer-exact".into(),
    );
}

fn criterion_consistency_surrogate(gate: &mut Gate) {
    let started = Instant::now();
    let p = DistanceParams::new(6, 2).unwrap();
    // A rotation step far from the reference one; the reference pair from
    // the experiment protocol is too close to separate at this length.
    let far_alpha = 0.381_966_011_250_105;
    let mut same_small = Vec::new();
    let mut same_large = Vec::new();
    let mut diff_large = Vec::new();
    for s in 0..20u64 {
        let pa = RotationProcessSpec::new(DEFAULT_ALPHAS[0], DEFAULT_U1, DEFAULT_U2, derive_seed(1, s)).unwrap();
        let pb = RotationProcessSpec::new(DEFAULT_ALPHAS[0], DEFAULT_U1, DEFAULT_U2, derive_seed(2, s)).unwrap();
        let pc = RotationProcessSpec::new(far_alpha, DEFAULT_U1, DEFAULT_U2, derive_seed(3, s)).unwrap();
        let a1 = rotation_sample(&pa, 1024).unwrap();
        let b1 = rotation_sample(&pb, 1024).unwrap();
        same_small.push(empirical_distance(&a1, &b1, &p).unwrap());
        let a = rotation_sample(&pa, 16384).unwrap();
        let b = rotation_sample(&pb, 16384).unwrap();
        let c = rotation_sample(&pc, 16384).unwrap();
        same_large.push(empirical_distance(&a, &b, &p).unwrap());
        diff_large.push(empirical_distance(&a, &c, &p).unwrap());
    }
    let (ms_small, ms_large, md) = (median(same_small), median(same_large), median(diff_large));
    let elapsed = started.elapsed();
    gate.check(
        "consistency-surrogate",
        ms_large < ms_small && md >= 3.0 * ms_large && elapsed.as_secs() < 300,
        format!(
            "same-process median {ms_large:.4} (was {ms_small:.4} at n=1024), \
             different-step median {md:.4} = {:.1}x, {:.0}s",
            md / ms_large,
            elapsed.as_secs_f64()
        ),
    );
}

fn criterion_end_to_end(gate: &mut Gate) {
    let started = Instant::now();
    // Pinned pilot configuration; see docs/pilot.md for the registered run.
    let cfg = ExperimentConfig {
        ns: vec![2000, 5000, 10000],
        runs: 50,
        kappa: 3,
        lambda_min: 0.1,
        alphas: DEFAULT_ALPHAS.to_vec(),
        u1: DEFAULT_U1,
        u2: DEFAULT_U2,
        seed: 1,
        m_max: Some(10),
        l_max: Some(1),
        l_cap: 20,
        out: None,
    };
    const PILOT_THRESHOLD: f64 = 0.36;
    match cmd_experiment(&cfg) {
        Ok(rows) => {
            let (m2, c2) = mean_total_error(&rows, 2000);
            let (m5, c5) = mean_total_error(&rows, 5000);
            let (m10, c10) = mean_total_error(&rows, 10000);
            let elapsed = started.elapsed();
            gate.check(
                "end-to-end-experiment",
                c2 == 50
                    && c5 == 50
                    && c10 == 50
                    && m2 > m5
                    && m5 > m10
                    && m10 < PILOT_THRESHOLD
                    && elapsed.as_secs() < 1800,
                format!(
                    "mean total error {m2:.4} > {m5:.4} > {m10:.4} (threshold {PILOT_THRESHOLD}), {:.0}s",
                    elapsed.as_secs_f64()
                ),
            );
        }
        Err(e) => gate.check("end-to-end-experiment", false, format!("failed: {e}")),
    }
}

fn criterion_single_change_smoke(gate: &mut Gate) {
    let n = 5000usize;
    let truth = ChangePointTruth::new(vec![0.4]).unwrap();
    let p = DistanceParams::new(8, 3).unwrap();
    let mut hits = 0;
    for seed in 0..50u64 {
        // u1 = u2 collapses the mixture, leaving i.i.d. blocks with the
        // stated marginals on either side of the change.
        let specs = [
            RotationProcessSpec::new(DEFAULT_ALPHAS[0], (0.0, 0.5), (0.0, 0.5), 0).unwrap(),
            RotationProcessSpec::new(DEFAULT_ALPHAS[1], (0.5, 1.0), (0.5, 1.0), 0).unwrap(),
        ];
        let labeled = compose_sequence(n, &truth, &specs, derive_seed(0x5e7, seed)).unwrap();
        let report = estimate_changepoints(&labeled.series, 1, &p).unwrap();
        if (report.theta_hat[0] - 0.4).abs() < 0.02 {
            hits += 1;
        }
    }
    gate.check(
        "single-change-smoke",
        hits >= 45,
        format!("{hits}/50 runs within 0.02 of the true parameter"),
    );
}

fn criterion_degenerate_contracts(gate: &mut Gate) {
    let constant = vec![0.25f64; 500];
    let p = DistanceParams::new(3, 3).unwrap();
    let no_signal = matches!(estimate_changepoints(&constant, 1, &p), Err(Error::NoSignal));

    let short = vec![0.1f64, 0.9];
    let table = build_frequency_table(&short, 5, 1).unwrap();
    let zero_table = table.iter().count() == 0 && table.nu(&[0, 0, 0, 0, 0]) == 0.0;

    let infeasible = random_changepoints(9, 0.1, 0).is_err();
    let boundary_ok = random_changepoints(1, 0.5, 0)
        .map(|t| t.theta() == [0.5])
        .unwrap_or(false);

    gate.check(
        "degenerate-contracts",
        no_signal && zero_table && infeasible && boundary_ok,
        format!("no-signal {no_signal}, empty short-series table {zero_table}, infeasible config rejected {infeasible}, boundary case {boundary_ok}"),
    );
}

fn criterion_determinism(gate: &mut Gate) {
    let run = |threads: &str| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_cpd"))
            .env("RAYON_NUM_THREADS", threads)
            .args([
                "experiment", "--ns", "1000,2000", "--runs", "4", "--kappa", "2", "--lambda-min",
                "0.15", "--seed", "7", "--m-max", "6", "--l-max", "2",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let serial = run("1");
    let parallel = run("8");
    gate.check(
        "determinism",
        serial == parallel && !serial.is_empty(),
        format!("{} CSV bytes identical across thread counts", serial.len()),
    );
}

fn criterion_scaling(gate: &mut Gate) {
    let mut rng = ChaCha12Rng::seed_from_u64(104);
    let time_at = |n: usize, m_max: u32, rng: &mut ChaCha12Rng| {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let p = DistanceParams::new(m_max, 3).unwrap();
        let started = Instant::now();
        let d = empirical_distance(&x, &y, &p).unwrap();
        (started.elapsed().as_secs_f64(), d)
    };
    // Warm-up to stabilize the allocator, then best-of-three to shrug off
    // scheduling noise.
    let _ = time_at(1 << 14, 14, &mut rng);
    let best = |n: usize, m: u32, rng: &mut ChaCha12Rng| {
        (0..3).map(|_| time_at(n, m, rng).0).fold(f64::INFINITY, f64::min)
    };
    let t16 = best(1 << 16, 16, &mut rng);
    let t17 = best(1 << 17, 17, &mut rng);
    let ratio = t17 / t16;
    // Non-gating: reported, not asserted.
    gate.report(
        "scaling-benchmark",
        format!("n=2^16 {t16:.2}s, n=2^17 {t17:.2}s, ratio {ratio:.2} (target <= 2.7)"),
    );
}

#[test]
fn acceptance() {
    let mut gate = Gate::new();
    criterion_oracle_equivalence(&mut gate);
    criterion_metric_axioms(&mut gate);
    criterion_convexity(&mut gate);
    criterion_consistency_surrogate(&mut gate);
    criterion_end_to_end(&mut gate);
    criterion_single_change_smoke(&mut gate);
    criterion_degenerate_contracts(&mut gate);
    criterion_determinism(&mut gate);
    criterion_scaling(&mut gate);
    assert!(
        gate.failures.is_empty(),
        "acceptance criteria failed: {}",
        gate.failures.join(", ")
    );
}
