//! Empirical false-positive measurement for the multi-hash filter.
//!
//! For each hash count `k`, the filter is sized so that `inserted` random
//! packets leave half its bits set, then probed with packets that were never
//! inserted. At that load the predicted rate is `2^-k`.

use std::collections::HashSet;

use crate::bloom::{fp_approx, fp_exact, half_fill_bits, BloomFilter};
use crate::error::Result;
use crate::exec::Exec;
use crate::rng::XorShift64Star;
use crate::wire::{PacketAE, MAX_PAYLOAD};

#[derive(Debug, Clone, PartialEq)]
pub struct FpTrialConfig {
    pub ks: Vec<u8>,
    pub inserted: u64,
    pub probes: u64,
    pub seed: u64,
}

impl Default for FpTrialConfig {
    fn default() -> Self {
        FpTrialConfig {
            ks: (1..=8).collect(),
            inserted: 2000,
            probes: 200_000,
            seed: 19,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpRow {
    pub k: u8,
    pub filter_bits: u32,
    pub inserted: u64,
    pub probes: u64,
    pub hits: u64,
    pub fill: f64,
    pub fp_empirical: f64,
    /// `2^-k`.
    pub fp_predicted: f64,
    pub fp_exact: f64,
}

/// Encoded AE packet with random header fields and payload.
pub fn random_packet(rng: &mut XorShift64Star) -> Vec<u8> {
    let len = rng.range_inclusive(0, MAX_PAYLOAD as u64) as usize;
    let mut body = vec![0u8; len + 8];
    rng.fill_bytes(&mut body);
    let p = PacketAE::new(
        u16::from_be_bytes([body[0], body[1]]),
        body[2],
        u16::from_be_bytes([body[3], body[4]]),
        u16::from_be_bytes([body[5], body[6]]),
        body[8..].to_vec(),
        [
            body[7],
            body[0] ^ body[3],
            body[1] ^ body[4],
            body[2] ^ body[5],
        ],
    )
    .expect("payload within limit");
    p.encode().expect("valid packet")
}

pub fn measure_k(k: u8, inserted: u64, probes: u64, seed: u64) -> Result<FpRow> {
    let m = half_fill_bits(k, inserted);
    let mut filter = BloomFilter::new(m, k)?;
    let mut rng = XorShift64Star::new(seed ^ (u64::from(k) << 32));
    let mut members = HashSet::new();
    for _ in 0..inserted {
        let tag = random_packet(&mut rng);
        filter.query_insert(&tag);
        members.insert(tag);
    }
    let mut hits = 0;
    let mut done = 0;
    while done < probes {
        let tag = random_packet(&mut rng);
        if members.contains(&tag) {
            continue;
        }
        done += 1;
        hits += u64::from(filter.contains(&tag));
    }
    Ok(FpRow {
        k,
        filter_bits: m,
        inserted,
        probes,
        hits,
        fill: filter.fill_ratio(),
        fp_empirical: hits as f64 / probes as f64,
        fp_predicted: fp_approx(k),
        fp_exact: fp_exact(m, k, inserted),
    })
}

/// One row per `k`, in the order given.
pub fn fp_trials(exec: Exec, cfg: &FpTrialConfig) -> Result<Vec<FpRow>> {
    exec.map(cfg.ks.clone(), |k| {
        measure_k(k, cfg.inserted, cfg.probes, cfg.seed)
    })
    .into_iter()
    .collect()
}
