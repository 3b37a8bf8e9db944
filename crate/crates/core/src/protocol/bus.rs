//! Seeded in-memory broadcast bus.
//!
//! Where UDP gives the scheduling nondeterminism of a real deployment, the
//! bus gives the opposite guarantee: for a fixed seed, latency draws, drop
//! decisions and delivery order are identical across runs. Delivery order is
//! the total order (arrival time, sender id, sequence number), which also
//! makes it FIFO per sender when latencies tie.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Message, Transport, TransportError};

#[derive(Debug, Clone, Copy)]
pub struct BusConfig {
    /// Inclusive latency range in microseconds.
    pub latency_us: (u64, u64),
    /// Per-receiver independent drop probability.
    pub drop_probability: f64,
    pub seed: u64,
}

impl Default for BusConfig {
    fn default() -> Self {
        Self {
            latency_us: (0, 0),
            drop_probability: 0.0,
            seed: 0,
        }
    }
}

#[derive(PartialEq)]
struct Delivery {
    arrival_us: u64,
    sender: u32,
    seq: u64,
    msg: Message,
}

impl Eq for Delivery {}

impl Ord for Delivery {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.arrival_us, self.sender, self.seq).cmp(&(other.arrival_us, other.sender, other.seq))
    }
}

impl PartialOrd for Delivery {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct BusInner {
    cfg: BusConfig,
    rng: ChaCha8Rng,
    seq: u64,
    /// Registered endpoint ids, kept sorted so per-receiver random draws
    /// happen in a fixed order.
    ids: Vec<u32>,
    queues: HashMap<u32, BinaryHeap<Reverse<Delivery>>>,
    dropped: u64,
}

/// Handle to the bus shared by all endpoints; cloning is cheap.
#[derive(Clone)]
pub struct SharedBus {
    inner: Arc<Mutex<BusInner>>,
}

impl SharedBus {
    pub fn new(cfg: BusConfig) -> Result<Self, TransportError> {
        if !(0.0..=1.0).contains(&cfg.drop_probability) {
            return Err(TransportError::InvalidProbability(cfg.drop_probability));
        }
        Ok(Self {
            inner: Arc::new(Mutex::new(BusInner {
                rng: ChaCha8Rng::seed_from_u64(cfg.seed),
                cfg,
                seq: 0,
                ids: Vec::new(),
                queues: HashMap::new(),
                dropped: 0,
            })),
        })
    }

    /// Registers a drone on the bus and returns its transport endpoint.
    pub fn endpoint(&self, id: u32) -> BusEndpoint {
        let mut inner = self.inner.lock().unwrap();
        if let Err(pos) = inner.ids.binary_search(&id) {
            inner.ids.insert(pos, id);
            inner.queues.insert(id, BinaryHeap::new());
        }
        BusEndpoint {
            bus: self.clone(),
            id,
        }
    }

    /// Messages discarded by the drop model so far.
    pub fn dropped(&self) -> u64 {
        self.inner.lock().unwrap().dropped
    }

    /// Delivers `msg` from the orchestrator with zero latency and no drops,
    /// bypassing the loss model. Used for the termination signal.
    pub fn inject_control(&self, msg: &Message, now_us: u64) {
        let mut inner = self.inner.lock().unwrap();
        inner.seq += 1;
        let seq = inner.seq;
        let ids = inner.ids.clone();
        for id in ids {
            inner.queues.get_mut(&id).unwrap().push(Reverse(Delivery {
                arrival_us: now_us,
                sender: msg.sender_id,
                seq,
                msg: *msg,
            }));
        }
    }

    pub fn max_latency_us(&self) -> u64 {
        self.inner.lock().unwrap().cfg.latency_us.1
    }
}

/// Per-drone transport handle onto a [`SharedBus`].
pub struct BusEndpoint {
    bus: SharedBus,
    id: u32,
}

impl BusEndpoint {
    pub fn id(&self) -> u32 {
        self.id
    }
}

impl Transport for BusEndpoint {
    fn broadcast(&mut self, msg: &Message, now_us: u64) -> Result<(), TransportError> {
        let mut inner = self.bus.inner.lock().unwrap();
        inner.seq += 1;
        let seq = inner.seq;
        let (lo, hi) = inner.cfg.latency_us;
        let p = inner.cfg.drop_probability;
        let ids = inner.ids.clone();
        for id in ids {
            if id == self.id {
                continue; // a sender never hears its own broadcast
            }
            let latency = if hi > lo {
                inner.rng.random_range(lo..=hi)
            } else {
                lo
            };
            let dropped = inner.rng.random::<f64>() < p;
            if dropped {
                inner.dropped += 1;
                continue;
            }
            inner.queues.get_mut(&id).unwrap().push(Reverse(Delivery {
                arrival_us: now_us + latency,
                sender: self.id,
                seq,
                msg: *msg,
            }));
        }
        Ok(())
    }

    fn drain(&mut self, now_us: u64) -> Vec<(Message, u64)> {
        let mut inner = self.bus.inner.lock().unwrap();
        let queue = inner.queues.get_mut(&self.id).expect("endpoint registered");
        let mut out = Vec::new();
        while let Some(Reverse(head)) = queue.peek() {
            if head.arrival_us > now_us {
                break;
            }
            let Reverse(d) = queue.pop().unwrap();
            out.push((d.msg, d.arrival_us));
        }
        out
    }
}
