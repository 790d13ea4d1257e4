//! Monte-Carlo cross-checks of the analytic estimators. The oracles draw bit
//! positions straight from the generator and never touch the filter code.

use replayguard::bloom::{fp_exact, p_zero, BloomFilter};
use replayguard::hashfns::HashFn;
use replayguard::montecarlo::random_packet;
use replayguard::replay::bloom_check;
use replayguard::rng::XorShift64Star;
use replayguard::simnet::{run, EventKind};
use replayguard::wire::decode_ae;
use replayguard::{DetectorConfig, Packet, ReplayVerdict, Scheme, SimConfig};

#[test]
fn fp_exact_matches_random_bit_model() {
    let (m, k, p) = (64u64, 2usize, 10usize);
    let trials = 1_000_000;
    let mut rng = XorShift64Star::new(2024);
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut bits = 0u64;
        for _ in 0..k * p {
            bits |= 1 << rng.range_inclusive(0, m - 1);
        }
        let all_set = (0..k).all(|_| bits >> rng.range_inclusive(0, m - 1) & 1 == 1);
        hits += u64::from(all_set);
    }
    let empirical = hits as f64 / trials as f64;
    let exact = fp_exact(64, 2, 10);
    assert!((exact - 0.073).abs() < 1e-3);
    // Binomial standard error is about 2.6e-4.
    assert!(
        (empirical - exact).abs() < 1.5e-3,
        "empirical {empirical} exact {exact}"
    );
    assert!((p_zero(64, 2, 10) - 0.7298).abs() < 1e-4);
}

#[test]
fn bloom_check_false_positive_rate_tracks_fp_exact() {
    // k = 3 keeps every family member distinct; from k = 4 on, PJW and ELF
    // land on the same bit.
    let (m, k, load) = (2048u32, 3u8, 200u64);
    let mut rng = XorShift64Star::new(77);
    let mut f = BloomFilter::new(m, k).unwrap();
    for _ in 0..load {
        f.query_insert(&random_packet(&mut rng));
    }
    let trials = 100_000u64;
    let mut flagged = 0u64;
    for _ in 0..trials {
        let p: Packet = decode_ae(&random_packet(&mut rng)).unwrap().into();
        let mut probe = f.clone();
        if bloom_check(&mut probe, &p, 1.0).unwrap() == ReplayVerdict::Replayed {
            flagged += 1;
        }
    }
    let empirical = flagged as f64 / trials as f64;
    let exact = fp_exact(m, k, load);
    assert!(
        (empirical / exact - 1.0).abs() < 0.15,
        "empirical {empirical} exact {exact}"
    );
}

#[test]
fn counter_scheme_has_no_errors_when_reorder_fits_window() {
    for seed in 0..20 {
        let mut cfg = SimConfig {
            n_nodes: 3,
            sends_per_node: 200,
            p_loss: 0.1,
            reorder_d: 8,
            p_capture: 0.3,
            replay_delay: (0, 400),
            seed,
            detector: DetectorConfig::new(Scheme::Counter),
            ..SimConfig::default()
        };
        cfg.detector.window = 8;
        let out = run(&cfg).unwrap();
        // Exact duplicate-set bookkeeping over (src, ctr).
        let mut seen = std::collections::HashSet::new();
        for e in out.trace.iter().filter(|e| e.kind == EventKind::Deliver) {
            let dup = !seen.insert((e.src, e.packet.ctr().unwrap()));
            assert_eq!(dup, e.ground_truth.unwrap());
            assert_eq!(e.verdict.unwrap().is_replayed(), dup);
        }
        assert_eq!(out.metrics.false_positives, 0);
        assert_eq!(out.metrics.false_negatives, 0);
    }
}

#[test]
fn pjw_and_elf_coincide_so_k4_behaves_like_three_hashes() {
    let mut rng = XorShift64Star::new(5);
    for _ in 0..1000 {
        let tag = random_packet(&mut rng);
        assert_eq!(HashFn::Pjw.hash(&tag), HashFn::Elf.hash(&tag));
    }
    let (m, load) = (2048u32, 150u64);
    let mut f = BloomFilter::new(m, 4).unwrap();
    for _ in 0..load {
        f.query_insert(&random_packet(&mut rng));
    }
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|_| f.contains(&random_packet(&mut rng)))
        .count() as f64;
    // Three independent positions: fill with 3 bits per insert, probe 3 bits.
    let three = (1.0 - p_zero(m, 3, load)).powi(3);
    assert!((hits / trials as f64 / three - 1.0).abs() < 0.15);
}
