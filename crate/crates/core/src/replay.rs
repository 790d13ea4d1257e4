//! The four replay detectors and their storage accounting.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bloom::{self, BloomFilter};
use crate::error::{Error, Result};
use crate::hashfns::{sha1, DIGEST_LEN};
use crate::wire::{replay_tag, NodeId, Packet};

/// Largest counter window; half the 16-bit counter space.
pub const MAX_COUNTER_WINDOW: u32 = 1 << 15;
/// RAM budget used for neighbor/window caps, in bytes.
pub const DEFAULT_RAM_BUDGET: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Counter,
    HashWindow,
    BloomSingle,
    BloomMulti,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Counter,
        Scheme::HashWindow,
        Scheme::BloomSingle,
        Scheme::BloomMulti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Counter => "counter",
            Scheme::HashWindow => "hash_window",
            Scheme::BloomSingle => "bloom_single",
            Scheme::BloomMulti => "bloom_multi",
        }
    }

    pub fn is_bloom(self) -> bool {
        matches!(self, Scheme::BloomSingle | Scheme::BloomMulti)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::config("scheme", format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReplayVerdict {
    Fresh,
    Replayed,
}

impl ReplayVerdict {
    pub fn is_replayed(self) -> bool {
        self == ReplayVerdict::Replayed
    }

    pub fn name(self) -> &'static str {
        match self {
            ReplayVerdict::Fresh => "fresh",
            ReplayVerdict::Replayed => "replayed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub scheme: Scheme,
    /// Counter positions or digests kept per neighbor.
    pub window: u32,
    /// Bloom filter size in bits.
    pub filter_bits: u32,
    /// Hash count for `bloom_multi`; `bloom_single` always uses one.
    pub k: u8,
    /// Epoch-reset threshold on the predicted false-positive rate.
    /// Defaults to `2 * 2^-k`.
    pub fp_max: Option<f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            scheme: Scheme::Counter,
            window: 8,
            filter_bits: 512,
            k: 8,
            fp_max: None,
        }
    }
}

impl DetectorConfig {
    pub fn new(scheme: Scheme) -> Self {
        DetectorConfig {
            scheme,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::Counter => {
                if !(1..=MAX_COUNTER_WINDOW).contains(&self.window) {
                    return Err(Error::config(
                        "window",
                        format!(
                            "counter window must be in 1..={MAX_COUNTER_WINDOW}, got {}",
                            self.window
                        ),
                    ));
                }
            }
            Scheme::HashWindow => {
                if self.window == 0 {
                    return Err(Error::config("window", "window must be at least 1"));
                }
            }
            Scheme::BloomSingle | Scheme::BloomMulti => {
                if self.filter_bits == 0 {
                    return Err(Error::config(
                        "filter_bits",
                        "filter must have at least one bit",
                    ));
                }
                if self.scheme == Scheme::BloomMulti && !(1..=9).contains(&self.k) {
                    return Err(Error::config(
                        "k",
                        format!("hash count must be in 1..=9, got {}", self.k),
                    ));
                }
                if let Some(fp) = self.fp_max {
                    if !(fp > 0.0 && fp <= 1.0) {
                        return Err(Error::config(
                            "fp_max",
                            format!("must be in (0, 1], got {fp}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Hashes actually applied per packet.
    pub fn effective_k(&self) -> u8 {
        match self.scheme {
            Scheme::BloomSingle => 1,
            _ => self.k,
        }
    }

    pub fn effective_fp_max(&self) -> f64 {
        self.fp_max
            .unwrap_or_else(|| bloom::default_fp_max(self.effective_k()))
    }

    /// `2^-k` for the Bloom schemes; the window schemes have no false
    /// positives to predict.
    pub fn fp_predicted(&self) -> f64 {
        if self.scheme.is_bloom() {
            bloom::fp_approx(self.effective_k())
        } else {
            0.0
        }
    }
}

/// Sliding window over one neighbor's counters: the highest counter `H` plus a
/// presence bit for each counter in `(H - W, H]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterWindow {
    window: u32,
    highest: Option<u16>,
    // Ring bitmap; counter c lives at bit c % window.
    bits: Vec<u64>,
}

impl CounterWindow {
    pub fn new(window: u32) -> Self {
        assert!(window >= 1);
        CounterWindow {
            window,
            highest: None,
            bits: vec![0; (window as usize).div_ceil(64)],
        }
    }

    pub fn highest(&self) -> Option<u16> {
        self.highest
    }

    fn slot(&self, ctr: u32) -> (usize, u64) {
        let pos = ctr % self.window;
        ((pos / 64) as usize, 1 << (pos % 64))
    }

    fn marked(&self, ctr: u32) -> bool {
        let (w, mask) = self.slot(ctr);
        self.bits[w] & mask != 0
    }

    fn mark(&mut self, ctr: u32) {
        let (w, mask) = self.slot(ctr);
        self.bits[w] |= mask;
    }

    fn clear(&mut self, ctr: u32) {
        let (w, mask) = self.slot(ctr);
        self.bits[w] &= !mask;
    }

    fn restart(&mut self, ctr: u16) {
        self.bits.iter_mut().for_each(|w| *w = 0);
        self.highest = Some(ctr);
        self.mark(u32::from(ctr));
    }

    pub fn check(&mut self, ctr: u16) -> ReplayVerdict {
        let Some(h) = self.highest else {
            self.restart(ctr);
            return ReplayVerdict::Fresh;
        };
        // Counter wrapped after 65536 sends: start over.
        if h == u16::MAX && ctr == 0 {
            self.restart(0);
            return ReplayVerdict::Fresh;
        }
        let (h, c) = (u32::from(h), u32::from(ctr));
        if c > h {
            if c - h >= self.window {
                self.bits.iter_mut().for_each(|w| *w = 0);
            } else {
                for skipped in h + 1..c {
                    self.clear(skipped);
                }
            }
            self.clear(c);
            self.mark(c);
            self.highest = Some(ctr);
            ReplayVerdict::Fresh
        } else if c + self.window > h {
            if self.marked(c) {
                ReplayVerdict::Replayed
            } else {
                self.mark(c);
                ReplayVerdict::Fresh
            }
        } else {
            // Too old to tell apart from a replay.
            ReplayVerdict::Replayed
        }
    }
}

/// Per-neighbor counter windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterState {
    window: u32,
    peers: BTreeMap<NodeId, CounterWindow>,
}

impl CounterState {
    pub fn new(window: u32) -> Self {
        CounterState {
            window,
            peers: BTreeMap::new(),
        }
    }

    pub fn neighbors(&self) -> usize {
        self.peers.len()
    }

    pub fn peer(&self, src: NodeId) -> Option<&CounterWindow> {
        self.peers.get(&src)
    }

    pub fn check(&mut self, src: NodeId, ctr: u16) -> ReplayVerdict {
        let window = self.window;
        self.peers
            .entry(src)
            .or_insert_with(|| CounterWindow::new(window))
            .check(ctr)
    }
}

pub fn counter_check(s: &mut CounterState, src: NodeId, ctr: u16) -> ReplayVerdict {
    s.check(src, ctr)
}

/// Per-neighbor FIFO of the most recent accepted SHA-1 digests. Packets
/// without a source address share one ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashWindowState {
    window: usize,
    rings: BTreeMap<Option<NodeId>, VecDeque<[u8; DIGEST_LEN]>>,
}

impl HashWindowState {
    pub fn new(window: u32) -> Self {
        HashWindowState {
            window: window as usize,
            rings: BTreeMap::new(),
        }
    }

    pub fn neighbors(&self) -> usize {
        self.rings.len()
    }

    pub fn check(&mut self, p: &Packet) -> Result<ReplayVerdict> {
        let tag = replay_tag(p, Scheme::HashWindow)?;
        let digest = sha1(tag.as_bytes());
        let ring = self.rings.entry(p.src()).or_default();
        if ring.contains(&digest) {
            return Ok(ReplayVerdict::Replayed);
        }
        if ring.len() == self.window {
            ring.pop_front();
        }
        ring.push_back(digest);
        Ok(ReplayVerdict::Fresh)
    }
}

pub fn hash_check(s: &mut HashWindowState, p: &Packet) -> Result<ReplayVerdict> {
    s.check(p)
}

/// Judges `p` against a filter, clearing the filter first if its predicted
/// false-positive rate has passed `fp_max`. Single or multi-hash behavior
/// follows the filter's indexing.
pub fn bloom_check(f: &mut BloomFilter, p: &Packet, fp_max: f64) -> Result<ReplayVerdict> {
    f.reset_if_saturated(fp_max);
    let tag = replay_tag(p, Scheme::BloomMulti)?;
    Ok(if f.query_insert(tag.as_bytes()) {
        ReplayVerdict::Replayed
    } else {
        ReplayVerdict::Fresh
    })
}

/// One receiving node's detector.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Counter(CounterState),
    HashWindow(HashWindowState),
    Bloom { filter: BloomFilter, fp_max: f64 },
}

impl Detector {
    pub fn new(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(match cfg.scheme {
            Scheme::Counter => Detector::Counter(CounterState::new(cfg.window)),
            Scheme::HashWindow => Detector::HashWindow(HashWindowState::new(cfg.window)),
            Scheme::BloomSingle => Detector::Bloom {
                filter: BloomFilter::new_sha1(cfg.filter_bits)?,
                fp_max: cfg.effective_fp_max(),
            },
            Scheme::BloomMulti => Detector::Bloom {
                filter: BloomFilter::new(cfg.filter_bits, cfg.k)?,
                fp_max: cfg.effective_fp_max(),
            },
        })
    }

    pub fn check(&mut self, p: &Packet) -> Result<ReplayVerdict> {
        match self {
            Detector::Counter(s) => match p {
                Packet::Ae(ae) => Ok(s.check(ae.src, ae.ctr)),
                Packet::Auth(_) => Err(Error::UnsupportedFormat(
                    "the counter scheme needs the src/ctr fields of the AE format".into(),
                )),
            },
            Detector::HashWindow(s) => s.check(p),
            Detector::Bloom { filter, fp_max } => bloom_check(filter, p, *fp_max),
        }
    }

    pub fn epoch_resets(&self) -> u32 {
        match self {
            Detector::Bloom { filter, .. } => filter.epoch(),
            _ => 0,
        }
    }
}

/// Detector state size in bytes for one node with `neighbors` peers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateBytes {
    /// Counter windows as `H` plus a presence bitmap.
    pub bitmap: u64,
    /// Counter windows as one 2-byte slot per position.
    pub ledger: u64,
}

pub fn state_bytes(cfg: &DetectorConfig, neighbors: u64) -> StateBytes {
    let w = u64::from(cfg.window);
    match cfg.scheme {
        Scheme::Counter => StateBytes {
            bitmap: neighbors * (2 + w.div_ceil(8)),
            ledger: neighbors * 2 * w,
        },
        Scheme::HashWindow => {
            let b = neighbors * DIGEST_LEN as u64 * w;
            StateBytes {
                bitmap: b,
                ledger: b,
            }
        }
        Scheme::BloomSingle | Scheme::BloomMulti => {
            let b = bloom::state_bytes_for(cfg.filter_bits) as u64;
            StateBytes {
                bitmap: b,
                ledger: b,
            }
        }
    }
}

/// Total bytes spent network-wide when each of `n` nodes keeps a `b`-byte
/// counter for its peers.
pub fn network_storage_overhead(b: u64, n: u64) -> u64 {
    b * n * n.saturating_sub(1) / 2
}

/// Most neighbors whose ledger state fits in `budget` bytes. `None` when the
/// state does not depend on the neighbor count and fits.
pub fn max_neighbors(cfg: &DetectorConfig, budget: u64) -> Option<u64> {
    let per = state_bytes(cfg, 1).ledger;
    if cfg.scheme.is_bloom() {
        return if per <= budget { None } else { Some(0) };
    }
    Some(budget / per)
}
