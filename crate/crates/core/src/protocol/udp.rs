//! UDP datagram transport.
//!
//! One socket per drone. In the LAN deployment every host binds the shared
//! experiment port and datagrams go to the configured broadcast address; the
//! address must be given explicitly because an unscoped broadcast floods the
//! whole network segment. For several drones inside one process (wall-clock
//! mode on a single machine) each drone binds its own port and the sender
//! fans the datagram out to every peer port instead.

use std::net::{IpAddr, SocketAddr, UdpSocket};
use std::time::Instant;

use super::{decode_message, encode_message, Message, Transport, TransportError};

pub struct UdpTransport {
    socket: UdpSocket,
    destinations: Vec<SocketAddr>,
    self_id: u32,
    started: Instant,
    malformed: u64,
    send_errors: u64,
}

impl UdpTransport {
    /// Classic broadcast endpoint: binds `bind:port`, sends every message as
    /// one datagram to `broadcast:port`.
    pub fn broadcast_transport(
        bind: IpAddr,
        broadcast: IpAddr,
        port: u16,
        self_id: u32,
    ) -> Result<Self, TransportError> {
        Self::with_destinations(bind, port, vec![SocketAddr::new(broadcast, port)], self_id)
    }

    /// Fan-out endpoint for several drones sharing one host: binds
    /// `bind:port` and sends one datagram per peer address.
    pub fn fanout_transport(
        bind: IpAddr,
        port: u16,
        peers: Vec<SocketAddr>,
        self_id: u32,
    ) -> Result<Self, TransportError> {
        Self::with_destinations(bind, port, peers, self_id)
    }

    fn with_destinations(
        bind: IpAddr,
        port: u16,
        destinations: Vec<SocketAddr>,
        self_id: u32,
    ) -> Result<Self, TransportError> {
        if destinations.is_empty() {
            return Err(TransportError::MissingBroadcastAddr);
        }
        let addr = SocketAddr::new(bind, port);
        let socket = UdpSocket::bind(addr).map_err(|source| TransportError::Bind {
            addr: addr.to_string(),
            source,
        })?;
        socket
            .set_broadcast(true)
            .map_err(|source| TransportError::Bind {
                addr: addr.to_string(),
                source,
            })?;
        socket
            .set_nonblocking(true)
            .map_err(|source| TransportError::Bind {
                addr: addr.to_string(),
                source,
            })?;
        Ok(Self {
            socket,
            destinations,
            self_id,
            started: Instant::now(),
            malformed: 0,
            send_errors: 0,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.socket.local_addr().expect("bound socket has an address")
    }

    /// Send failures seen so far (non-fatal, the message is simply lost).
    pub fn send_errors(&self) -> u64 {
        self.send_errors
    }

    fn elapsed_us(&self) -> u64 {
        self.started.elapsed().as_micros() as u64
    }
}

impl Transport for UdpTransport {
    fn broadcast(&mut self, msg: &Message, _now_us: u64) -> Result<(), TransportError> {
        let frame = encode_message(msg);
        for dest in &self.destinations {
            if self.socket.send_to(&frame, dest).is_err() {
                self.send_errors += 1;
            }
        }
        Ok(())
    }

    fn drain(&mut self, _now_us: u64) -> Vec<(Message, u64)> {
        let mut out = Vec::new();
        let mut buf = [0u8; 1024];
        loop {
            match self.socket.recv_from(&mut buf) {
                Ok((n, _from)) => {
                    let arrival = self.elapsed_us();
                    match decode_message(&buf[..n]) {
                        Ok(msg) if msg.sender_id == self.self_id => {} // own broadcast
                        Ok(msg) => out.push((msg, arrival)),
                        Err(_) => self.malformed += 1,
                    }
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => break,
                Err(_) => break,
            }
        }
        out
    }

    fn malformed_frames(&self) -> u64 {
        self.malformed
    }
}
