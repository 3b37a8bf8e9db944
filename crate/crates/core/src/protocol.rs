//! Broadcast message format and delivery substrates.
//!
//! Every drone communicates exclusively by broadcast; receivers filter by
//! relevance (their anchor and children ids). Two [`Transport`]
//! implementations exist: a seeded in-memory bus whose delivery schedule is
//! fully deterministic, and UDP datagrams for multi-process or multi-host
//! runs.

mod bus;
mod codec;
mod udp;

use glam::DVec3;
use thiserror::Error;

pub use bus::{BusConfig, BusEndpoint, SharedBus};
pub use codec::{decode_message, encode_message, MalformedFrame};
pub use udp::UdpTransport;

pub const MESSAGE_VERSION: u8 = 1;
/// A frame must fit one datagram comfortably below typical MTU.
pub const MAX_FRAME_BYTES: usize = 512;
/// Sender id reserved for the orchestrator process.
pub const ORCHESTRATOR_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    AnchorBeacon = 0,
    LocationUpdate = 1,
    Correction = 2,
    Terminate = 3,
}

impl MessageKind {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::AnchorBeacon),
            1 => Some(Self::LocationUpdate),
            2 => Some(Self::Correction),
            3 => Some(Self::Terminate),
            _ => None,
        }
    }

    /// Stable lower-case name used in message log CSVs.
    pub fn name(&self) -> &'static str {
        match self {
            Self::AnchorBeacon => "anchor_beacon",
            Self::LocationUpdate => "location_update",
            Self::Correction => "correction",
            Self::Terminate => "terminate",
        }
    }
}

/// One broadcast datagram. Payload is zero to two 3D vectors whose meaning
/// depends on the kind:
///
/// * `AnchorBeacon` — the sender's position when it considers itself
///   localized, empty otherwise. Payload presence doubles as the localized
///   flag.
/// * `LocationUpdate` — the sender's position after a correction.
/// * `Correction` — applied delta and resulting position.
/// * `Terminate` — empty; sent by the orchestrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub version: u8,
    pub kind: MessageKind,
    pub sender_id: u32,
    pub swarm_id: u32,
    pub timestamp_us: u64,
    vec_count: u8,
    vectors: [DVec3; 2],
}

impl Message {
    pub fn new(
        kind: MessageKind,
        sender_id: u32,
        swarm_id: u32,
        timestamp_us: u64,
        payload: &[DVec3],
    ) -> Self {
        assert!(payload.len() <= 2, "message payload limited to two vectors");
        let mut vectors = [DVec3::ZERO; 2];
        vectors[..payload.len()].copy_from_slice(payload);
        Self {
            version: MESSAGE_VERSION,
            kind,
            sender_id,
            swarm_id,
            timestamp_us,
            vec_count: payload.len() as u8,
            vectors,
        }
    }

    pub fn beacon(sender_id: u32, swarm_id: u32, timestamp_us: u64, position: Option<DVec3>) -> Self {
        match position {
            Some(p) => Self::new(MessageKind::AnchorBeacon, sender_id, swarm_id, timestamp_us, &[p]),
            None => Self::new(MessageKind::AnchorBeacon, sender_id, swarm_id, timestamp_us, &[]),
        }
    }

    pub fn location_update(sender_id: u32, swarm_id: u32, timestamp_us: u64, position: DVec3) -> Self {
        Self::new(MessageKind::LocationUpdate, sender_id, swarm_id, timestamp_us, &[position])
    }

    pub fn terminate(timestamp_us: u64) -> Self {
        Self::new(MessageKind::Terminate, ORCHESTRATOR_ID, u32::MAX, timestamp_us, &[])
    }

    pub fn vectors(&self) -> &[DVec3] {
        &self.vectors[..self.vec_count as usize]
    }

    /// Encoded frame size: fixed 19-byte header plus 24 bytes per vector.
    pub fn encoded_len(&self) -> usize {
        19 + 24 * self.vec_count as usize
    }

    /// For beacons: whether the sender reported itself localized.
    pub fn beacon_localized(&self) -> bool {
        self.kind == MessageKind::AnchorBeacon && self.vec_count > 0
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("bind failed on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("drop probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("broadcast address must be provided explicitly")]
    MissingBroadcastAddr,
}

/// A broadcast delivery substrate owned by one logical drone.
///
/// `broadcast` publishes to every other endpoint; `drain` returns every
/// message received since the previous drain together with its arrival
/// timestamp (µs since experiment start). A sender never receives its own
/// broadcast.
pub trait Transport: Send {
    fn broadcast(&mut self, msg: &Message, now_us: u64) -> Result<(), TransportError>;
    fn drain(&mut self, now_us: u64) -> Vec<(Message, u64)>;
    /// Undecodable frames seen so far; they are dropped and counted, never
    /// fatal.
    fn malformed_frames(&self) -> u64 {
        0
    }
}
