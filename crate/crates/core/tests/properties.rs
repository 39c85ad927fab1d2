//! Property tests for the invariants of each module.

use proptest::prelude::*;

use fpou::cache::{cache_read, cache_write};
use fpou::estimators::estimate;
use fpou::kernel::{build_table, QuadMeta, TableSpec};
use fpou::model::{compute_ts, reconstruct_noise, simulate_ou, ObservationPath};
use fpou::noise::{bernoulli_from_values, sample_eta, stream_seed, NoiseSpec};
use fpou::quadrature::{gauss_jacobi, gauss_legendre};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn small_table() -> impl Strategy<Value = (u64, f64, f64, f64)> {
    (3u64..12, 1.0f64..1.7, 0.52f64..0.98, 0.2f64..8.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_rule_shape_and_moments(order in 1usize..24, beta in -0.95f64..=0.0) {
        let rule = gauss_jacobi(order, beta).unwrap();
        let x = rule.nodes();
        prop_assert!(x.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(x.iter().all(|&v| v > 0.0 && v < 1.0));
        prop_assert!(rule.weights().iter().all(|&w| w > 0.0));
        let total: f64 = rule.weights().iter().sum();
        prop_assert!(rel(total, 1.0 / (beta + 1.0)) < 1e-12);
        // ∫₀¹ x^β x^j dx = 1/(β + j + 1) for every degree the rule is exact on
        for j in 0..2 * order {
            let got = rule.integrate(|t| t.powi(j as i32));
            prop_assert!(rel(got, 1.0 / (beta + j as f64 + 1.0)) < 1e-10, "degree {}", j);
        }
    }

    #[test]
    fn legendre_rule_moments(order in 1usize..30) {
        let rule = gauss_legendre(order).unwrap();
        prop_assert_eq!(rule.order(), order);
        for j in 0..2 * order {
            let got = rule.integrate(|t| t.powi(j as i32));
            prop_assert!(rel(got, 1.0 / (j as f64 + 1.0)) < 1e-12);
        }
    }

    #[test]
    fn table_entries_positive_and_consistent((m, alpha, h, lambda) in small_table()) {
        let t = build_table(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        prop_assert!(t.entries().iter().all(|&e| e > 0.0 && e.is_finite()));
        prop_assert!(rel(t.kappa(), (-lambda / t.n() as f64).exp()) < 1e-15);
        let one = build_table(m, alpha, h, 1.0, QuadMeta::default()).unwrap();
        for (a, b) in t.entries().iter().zip(one.entries()) {
            prop_assert!(rel(a * lambda.sqrt(), *b) < 1e-14);
        }
    }

    #[test]
    fn noise_values_and_bernoulli_round_trip(n in 1usize..400, lambda in 0.05f64..50.0, seed: u64) {
        let spec = NoiseSpec::new(n, lambda).unwrap();
        let eta = sample_eta(spec, seed);
        let again = sample_eta(spec, seed);
        prop_assert_eq!(eta.values(), again.values());
        let bits = bernoulli_from_values(eta.values(), spec.kappa).unwrap();
        for (b, v) in bits.iter().zip(eta.values()) {
            let back = if *b == 1 { spec.kappa } else { spec.kappa - 1.0 };
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn distinct_streams_for_distinct_indices(master: u64, a in 0u64..1_000_000, b in 0u64..1_000_000) {
        prop_assume!(a != b);
        prop_assert_ne!(stream_seed(master, a), stream_seed(master, b));
    }

    #[test]
    fn reconstruction_inverts_simulation((m, alpha, h, lambda) in small_table(), theta in -1.0f64..1.5, seed: u64) {
        let t = build_table(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        let eta = sample_eta(NoiseSpec::for_table(&t), seed);
        let x = simulate_ou(&t, theta, eta.values()).unwrap();
        prop_assert_eq!(x.values()[0], 0.0);
        prop_assert_eq!(x.values().len(), t.n() + 1);
        let back = reconstruct_noise(&t, &x, theta).unwrap();
        let scale = x.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in back.iter().zip(eta.values()) {
            prop_assert!((a - b).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn table_scaling_equivariance((m, alpha, h, lambda) in small_table(), c in 0.1f64..10.0, seed: u64) {
        let t = build_table(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        let eta = sample_eta(NoiseSpec::for_table(&t), seed);
        let x = simulate_ou(&t, 0.5, eta.values()).unwrap();
        let (Ok(a), Ok(b)) = (estimate(&x, &t), estimate(&x, &t.scaled(c))) else {
            return Ok(());
        };
        prop_assert!(rel(b.theta_ls, a.theta_ls) < 1e-9 || (b.theta_ls - a.theta_ls).abs() < 1e-12);
        // T and S are unchanged, F̃ scales by c: A* and the LSE numerator pick
        // up c⁻², the extra likelihood term c⁻¹, so the gap grows by c
        let (da, db) = (a.theta_ml - a.theta_ls, b.theta_ml - b.theta_ls);
        prop_assert!((db - c * da).abs() <= 1e-9 * (c * da).abs().max(1e-12));
    }

    #[test]
    fn path_scaling_leaves_lse_unchanged((m, alpha, h, lambda) in small_table(), c in 0.1f64..10.0, seed: u64) {
        let t = build_table(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        let eta = sample_eta(NoiseSpec::for_table(&t), seed);
        let x = simulate_ou(&t, 0.5, eta.values()).unwrap();
        let scaled = ObservationPath::ingest(x.values().iter().map(|v| c * v).collect(), m).unwrap();
        let (Ok(a), Ok(b)) = (estimate(&x, &t), estimate(&scaled, &t)) else {
            return Ok(());
        };
        prop_assert!((b.theta_ls - a.theta_ls).abs() <= 1e-9 * a.theta_ls.abs().max(1.0));
    }

    #[test]
    fn mle_below_lse_when_weighted_sum_positive((m, alpha, h, lambda) in small_table(), theta in -1.0f64..1.5, seed: u64) {
        let t = build_table(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        let eta = sample_eta(NoiseSpec::for_table(&t), seed);
        let x = simulate_ou(&t, theta, eta.values()).unwrap();
        if let Ok(r) = estimate(&x, &t) {
            prop_assert_eq!(r.bracket, r.a_star * r.kappa * (1.0 - r.kappa));
            if r.weighted_sum > 0.0 {
                prop_assert!(r.theta_ml < r.theta_ls);
            } else if r.weighted_sum < 0.0 {
                prop_assert!(r.theta_ml > r.theta_ls);
            }
        }
    }

    #[test]
    fn shifted_start_is_removed_on_ingest(shift in -100.0f64..100.0, seed: u64) {
        let t = build_table(6, 1.5, 0.7, 1.0, QuadMeta::default()).unwrap();
        let eta = sample_eta(NoiseSpec::for_table(&t), seed);
        let x = simulate_ou(&t, 0.3, eta.values()).unwrap();
        let moved = ObservationPath::ingest(x.values().iter().map(|v| v + shift).collect(), 6).unwrap();
        for (a, b) in moved.values().iter().zip(x.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * shift.abs().max(1.0));
        }
        let ts = compute_ts(&t, &moved).unwrap();
        prop_assert_eq!(ts.u.len(), t.n());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cache_round_trip_and_corruption((m, alpha, h, lambda) in small_table(), flip in 0usize..1000) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        let spec = TableSpec::new(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        let t = build_table(m, alpha, h, lambda, QuadMeta::default()).unwrap();
        let sum = cache_write(&t, &path).unwrap();
        prop_assert_eq!(sum, t.checksum());
        prop_assert_eq!(cache_read(&path, &spec).unwrap(), t.clone());

        let mut bytes = std::fs::read(&path).unwrap();
        let at = 48 + flip % (bytes.len() - 48 - 8);
        bytes[at] ^= 0x10;
        std::fs::write(&path, &bytes).unwrap();
        prop_assert!(cache_read(&path, &spec).is_err());
    }
}
