//! Wire codec: little-endian fixed layout.
//!
//! ```text
//! u8 version | u8 kind | u32 sender_id | u32 swarm_id | u64 timestamp_us
//! | u8 vector_count | vector_count × 3 × f64
//! ```

use glam::DVec3;
use thiserror::Error;

use super::{Message, MessageKind, MESSAGE_VERSION};

const HEADER_LEN: usize = 19;
const VECTOR_LEN: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MalformedFrame {
    #[error("frame truncated ({0} bytes)")]
    Truncated(usize),
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("unknown kind code {0}")]
    Kind(u8),
    #[error("vector count {0} exceeds 2")]
    VectorCount(u8),
    #[error("frame length {actual} does not match declared payload ({expected})")]
    Length { expected: usize, actual: usize },
}

pub fn encode_message(m: &Message) -> Vec<u8> {
    let vectors = m.vectors();
    let mut out = Vec::with_capacity(HEADER_LEN + VECTOR_LEN * vectors.len());
    out.push(m.version);
    out.push(m.kind as u8);
    out.extend_from_slice(&m.sender_id.to_le_bytes());
    out.extend_from_slice(&m.swarm_id.to_le_bytes());
    out.extend_from_slice(&m.timestamp_us.to_le_bytes());
    out.push(vectors.len() as u8);
    for v in vectors {
        out.extend_from_slice(&v.x.to_le_bytes());
        out.extend_from_slice(&v.y.to_le_bytes());
        out.extend_from_slice(&v.z.to_le_bytes());
    }
    out
}

pub fn decode_message(bytes: &[u8]) -> Result<Message, MalformedFrame> {
    if bytes.len() < HEADER_LEN {
        return Err(MalformedFrame::Truncated(bytes.len()));
    }
    let version = bytes[0];
    if version != MESSAGE_VERSION {
        return Err(MalformedFrame::Version(version));
    }
    let kind = MessageKind::from_code(bytes[1]).ok_or(MalformedFrame::Kind(bytes[1]))?;
    let sender_id = u32::from_le_bytes(bytes[2..6].try_into().unwrap());
    let swarm_id = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
    let timestamp_us = u64::from_le_bytes(bytes[10..18].try_into().unwrap());
    let count = bytes[18];
    if count > 2 {
        return Err(MalformedFrame::VectorCount(count));
    }
    let expected = HEADER_LEN + VECTOR_LEN * count as usize;
    if bytes.len() != expected {
        return Err(MalformedFrame::Length {
            expected,
            actual: bytes.len(),
        });
    }
    let mut vectors = Vec::with_capacity(count as usize);
    for i in 0..count as usize {
        let base = HEADER_LEN + VECTOR_LEN * i;
        let f = |o: usize| f64::from_le_bytes(bytes[base + o..base + o + 8].try_into().unwrap());
        vectors.push(DVec3::new(f(0), f(8), f(16)));
    }
    Ok(Message::new(kind, sender_id, swarm_id, timestamp_us, &vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn terminate_is_19_bytes() {
        let m = Message::terminate(0);
        assert_eq!(encode_message(&m).len(), 19);
        assert_eq!(m.encoded_len(), 19);
    }

    #[test]
    fn location_update_is_43_bytes() {
        let m = Message::location_update(3, 1, 42, DVec3::new(1.0, 2.0, 3.0));
        assert_eq!(encode_message(&m).len(), 43);
    }

    #[test]
    fn empty_frame_is_malformed() {
        assert_eq!(decode_message(&[]), Err(MalformedFrame::Truncated(0)));
    }

    #[test]
    fn wrong_version_is_malformed() {
        let mut bytes = encode_message(&Message::terminate(0));
        bytes[0] = 2;
        let err = decode_message(&bytes).unwrap_err();
        assert_eq!(err, MalformedFrame::Version(2));
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn bad_kind_is_malformed() {
        let mut bytes = encode_message(&Message::terminate(0));
        bytes[1] = 9;
        assert_eq!(decode_message(&bytes), Err(MalformedFrame::Kind(9)));
    }

    #[test]
    fn truncated_payload_is_malformed() {
        let m = Message::location_update(3, 1, 42, DVec3::ONE);
        let bytes = encode_message(&m);
        assert!(matches!(
            decode_message(&bytes[..30]),
            Err(MalformedFrame::Length { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_identity(
            kind_code in 0u8..4,
            sender in any::<u32>(),
            swarm in any::<u32>(),
            ts in any::<u64>(),
            n_vec in 0usize..=2,
            coords in prop::array::uniform6(-1e6f64..1e6),
        ) {
            let kind = MessageKind::from_code(kind_code).unwrap();
            let vectors: Vec<DVec3> = (0..n_vec)
                .map(|i| DVec3::new(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]))
                .collect();
            let m = Message::new(kind, sender, swarm, ts, &vectors);
            let decoded = decode_message(&encode_message(&m)).unwrap();
            prop_assert_eq!(m, decoded);
        }
    }
}
