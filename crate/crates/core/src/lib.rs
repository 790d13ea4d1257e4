//! Link-layer replay detection for TinySec-style packets.
//!
//! Four detectors share one interface ([`replay::Detector`]): a per-neighbor
//! counter window, a per-neighbor window of SHA-1 digests, a single-hash Bloom
//! filter indexed by SHA-1, and a multi-hash Bloom filter indexed by a family
//! of 32-bit string hashes. [`simnet`] drives them with a seeded lossy,
//! reordering channel and a straight-replay adversary.

pub mod bloom;
pub mod error;
pub mod exec;
pub mod hashfns;
pub mod montecarlo;
pub mod replay;
pub mod rng;
pub mod simnet;
pub mod wire;

pub use bloom::BloomFilter;
pub use error::{Error, Result};
pub use exec::Exec;
pub use replay::{state_bytes, Detector, DetectorConfig, ReplayVerdict, Scheme, StateBytes};
pub use simnet::{RunMetrics, SimConfig, SimOutcome, TraceEvent};
pub use wire::{Packet, PacketAE, PacketAuth, ReplayTag};
