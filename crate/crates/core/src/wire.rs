//! TinySec packet layouts.
//!
//! Two formats share a 4-byte `dest | am | len` prefix and a trailing 4-byte
//! MAC. The authenticated-encryption format additionally carries the tail of
//! the IV, `src | ctr`, between the header and the payload:
//!
//! ```text
//! AE:    dest(2) am(1) len(1) src(2) ctr(2) data(0..=29) mac(4)
//! Auth:  dest(2) am(1) len(1)               data(0..=29) mac(4)
//! ```
//!
//! Multi-byte fields are big-endian. The MAC is carried as opaque bytes and is
//! never computed or verified here.

use crate::error::{Error, Result};
use crate::Scheme;

pub type NodeId = u16;

/// Largest payload either format can carry.
pub const MAX_PAYLOAD: usize = 29;
pub const MAC_LEN: usize = 4;
pub const AE_HEADER_LEN: usize = 8;
pub const AUTH_HEADER_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PacketAE {
    pub dest: NodeId,
    pub am: u8,
    /// Declared payload length; must equal `payload.len()`.
    pub len: u8,
    pub src: NodeId,
    pub ctr: u16,
    pub payload: Vec<u8>,
    pub mac: [u8; MAC_LEN],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PacketAuth {
    pub dest: NodeId,
    pub am: u8,
    pub len: u8,
    pub payload: Vec<u8>,
    pub mac: [u8; MAC_LEN],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Packet {
    Ae(PacketAE),
    Auth(PacketAuth),
}

/// The bytes a detector inspects for one packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReplayTag(pub Vec<u8>);

impl ReplayTag {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl AsRef<[u8]> for ReplayTag {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

fn check_payload(len: u8, payload: &[u8]) -> Result<()> {
    if payload.len() > MAX_PAYLOAD {
        return Err(Error::Format(format!(
            "payload is {} bytes, at most {MAX_PAYLOAD} allowed",
            payload.len()
        )));
    }
    if usize::from(len) != payload.len() {
        return Err(Error::Format(format!(
            "len field is {len} but payload is {} bytes",
            payload.len()
        )));
    }
    Ok(())
}

impl PacketAE {
    /// Builds a packet with `len` taken from the payload.
    pub fn new(
        dest: NodeId,
        am: u8,
        src: NodeId,
        ctr: u16,
        payload: Vec<u8>,
        mac: [u8; 4],
    ) -> Result<Self> {
        let len = u8::try_from(payload.len())
            .ok()
            .filter(|&l| usize::from(l) <= MAX_PAYLOAD)
            .ok_or_else(|| {
                Error::Format(format!(
                    "payload is {} bytes, at most {MAX_PAYLOAD} allowed",
                    payload.len()
                ))
            })?;
        Ok(PacketAE {
            dest,
            am,
            len,
            src,
            ctr,
            payload,
            mac,
        })
    }

    pub fn encoded_len(&self) -> usize {
        AE_HEADER_LEN + self.payload.len() + MAC_LEN
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        check_payload(self.len, &self.payload)?;
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.dest.to_be_bytes());
        out.push(self.am);
        out.push(self.len);
        out.extend_from_slice(&self.src.to_be_bytes());
        out.extend_from_slice(&self.ctr.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.mac);
        Ok(out)
    }

    pub fn decode(b: &[u8]) -> Result<Self> {
        let payload = framed_payload(b, AE_HEADER_LEN)?;
        Ok(PacketAE {
            dest: u16::from_be_bytes([b[0], b[1]]),
            am: b[2],
            len: b[3],
            src: u16::from_be_bytes([b[4], b[5]]),
            ctr: u16::from_be_bytes([b[6], b[7]]),
            payload: payload.to_vec(),
            mac: trailing_mac(b),
        })
    }
}

impl PacketAuth {
    pub fn new(dest: NodeId, am: u8, payload: Vec<u8>, mac: [u8; 4]) -> Result<Self> {
        if payload.len() > MAX_PAYLOAD {
            return Err(Error::Format(format!(
                "payload is {} bytes, at most {MAX_PAYLOAD} allowed",
                payload.len()
            )));
        }
        Ok(PacketAuth {
            dest,
            am,
            len: payload.len() as u8,
            payload,
            mac,
        })
    }

    pub fn encoded_len(&self) -> usize {
        AUTH_HEADER_LEN + self.payload.len() + MAC_LEN
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        check_payload(self.len, &self.payload)?;
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.dest.to_be_bytes());
        out.push(self.am);
        out.push(self.len);
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.mac);
        Ok(out)
    }

    pub fn decode(b: &[u8]) -> Result<Self> {
        let payload = framed_payload(b, AUTH_HEADER_LEN)?;
        Ok(PacketAuth {
            dest: u16::from_be_bytes([b[0], b[1]]),
            am: b[2],
            len: b[3],
            payload: payload.to_vec(),
            mac: trailing_mac(b),
        })
    }
}

// Validates total size against the len byte at offset 3 and returns the data
// slice.
fn framed_payload(b: &[u8], header: usize) -> Result<&[u8]> {
    let min = header + MAC_LEN;
    if b.len() < min {
        return Err(Error::Format(format!(
            "{} bytes is below the {min}-byte minimum",
            b.len()
        )));
    }
    let len = usize::from(b[3]);
    if len > MAX_PAYLOAD {
        return Err(Error::Format(format!(
            "len field {len} exceeds {MAX_PAYLOAD}"
        )));
    }
    if b.len() != min + len {
        return Err(Error::Format(format!(
            "len field {len} implies {} bytes, buffer has {}",
            min + len,
            b.len()
        )));
    }
    Ok(&b[header..header + len])
}

fn trailing_mac(b: &[u8]) -> [u8; MAC_LEN] {
    let mut mac = [0; MAC_LEN];
    mac.copy_from_slice(&b[b.len() - MAC_LEN..]);
    mac
}

pub fn encode_ae(p: &PacketAE) -> Result<Vec<u8>> {
    p.encode()
}

pub fn decode_ae(b: &[u8]) -> Result<PacketAE> {
    PacketAE::decode(b)
}

pub fn encode_auth(p: &PacketAuth) -> Result<Vec<u8>> {
    p.encode()
}

pub fn decode_auth(b: &[u8]) -> Result<PacketAuth> {
    PacketAuth::decode(b)
}

impl Packet {
    pub fn encode(&self) -> Result<Vec<u8>> {
        match self {
            Packet::Ae(p) => p.encode(),
            Packet::Auth(p) => p.encode(),
        }
    }

    pub fn dest(&self) -> NodeId {
        match self {
            Packet::Ae(p) => p.dest,
            Packet::Auth(p) => p.dest,
        }
    }

    /// Sender address, present only in the AE format.
    pub fn src(&self) -> Option<NodeId> {
        match self {
            Packet::Ae(p) => Some(p.src),
            Packet::Auth(_) => None,
        }
    }

    pub fn ctr(&self) -> Option<u16> {
        match self {
            Packet::Ae(p) => Some(p.ctr),
            Packet::Auth(_) => None,
        }
    }
}

impl From<PacketAE> for Packet {
    fn from(p: PacketAE) -> Self {
        Packet::Ae(p)
    }
}

impl From<PacketAuth> for Packet {
    fn from(p: PacketAuth) -> Self {
        Packet::Auth(p)
    }
}

/// Extracts the bytes `scheme` keys on: `src | ctr` for the counter scheme,
/// the whole serialized packet for every hashing scheme.
pub fn replay_tag(p: &Packet, scheme: Scheme) -> Result<ReplayTag> {
    match (scheme, p) {
        (Scheme::Counter, Packet::Ae(ae)) => {
            let mut tag = Vec::with_capacity(4);
            tag.extend_from_slice(&ae.src.to_be_bytes());
            tag.extend_from_slice(&ae.ctr.to_be_bytes());
            Ok(ReplayTag(tag))
        }
        (Scheme::Counter, Packet::Auth(_)) => Err(Error::UnsupportedFormat(
            "the counter scheme needs the src/ctr fields of the AE format".into(),
        )),
        (_, p) => p.encode().map(ReplayTag),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ae(src: u16, ctr: u16, payload: &[u8]) -> PacketAE {
        PacketAE::new(1, 4, src, ctr, payload.to_vec(), [0; 4]).unwrap()
    }

    #[test]
    fn encode_minimal_ae() {
        let p = ae(2, 0, &[]);
        let bytes = encode_ae(&p).unwrap();
        assert_eq!(
            bytes,
            [0x00, 0x01, 0x04, 0x00, 0x00, 0x02, 0x00, 0x00, 0, 0, 0, 0]
        );
        assert_eq!(decode_ae(&bytes).unwrap(), p);
    }

    #[test]
    fn full_payload_is_41_bytes() {
        let p = ae(2, 0, &[0xab; 29]);
        assert_eq!(encode_ae(&p).unwrap().len(), 41);
    }

    #[test]
    fn len_mismatch_rejected() {
        let mut p = ae(2, 0, &[1, 2, 3, 4]);
        p.len = 5;
        assert!(matches!(encode_ae(&p), Err(Error::Format(_))));
    }

    #[test]
    fn oversized_payload_rejected() {
        assert!(PacketAE::new(1, 4, 2, 0, vec![0; 30], [0; 4]).is_err());
        let mut p = ae(2, 0, &[]);
        p.payload = vec![0; 30];
        p.len = 30;
        assert!(encode_ae(&p).is_err());
    }

    #[test]
    fn decode_short_and_inconsistent_buffers() {
        assert!(decode_ae(&[0; 11]).is_err());
        let mut b = vec![0u8; 40];
        b[3] = 29;
        assert!(matches!(decode_ae(&b), Err(Error::Format(_))));
        b.push(0);
        assert!(decode_ae(&b).is_ok());
    }

    #[test]
    fn auth_layout() {
        let p = PacketAuth::new(0x0102, 7, vec![9, 8], [0xde, 0xad, 0xbe, 0xef]).unwrap();
        let b = encode_auth(&p).unwrap();
        assert_eq!(b, [0x01, 0x02, 7, 2, 9, 8, 0xde, 0xad, 0xbe, 0xef]);
        assert_eq!(decode_auth(&b).unwrap(), p);
        assert!(decode_auth(&[0; 7]).is_err());
    }

    #[test]
    fn counter_tag_is_src_then_ctr() {
        let tag = replay_tag(&ae(2, 7, b"xyz").into(), Scheme::Counter).unwrap();
        assert_eq!(tag.as_bytes(), [0, 2, 0, 7]);
    }

    #[test]
    fn hashing_tags_cover_the_whole_packet() {
        let p = ae(2, 7, b"xyz");
        for scheme in [Scheme::HashWindow, Scheme::BloomSingle, Scheme::BloomMulti] {
            let tag = replay_tag(&p.clone().into(), scheme).unwrap();
            assert_eq!(tag.0, encode_ae(&p).unwrap());
        }
    }

    #[test]
    fn counter_tag_on_auth_is_unsupported() {
        let p: Packet = PacketAuth::new(1, 4, vec![], [0; 4]).unwrap().into();
        assert!(matches!(
            replay_tag(&p, Scheme::Counter),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(replay_tag(&p, Scheme::BloomMulti).is_ok());
    }
}
