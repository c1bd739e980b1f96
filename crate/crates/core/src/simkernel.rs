//! Deterministic discrete-event simulation kernel.
//!
//! Holds the event calendar (a priority queue ordered by `(time, seq)` so
//! that simultaneous events pop in insertion order), the simulation clock,
//! and the seeded random-number streams. One calendar plus one set of
//! streams is confined to a single replication; replications are
//! independent and may run in parallel.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::Add;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A point on the simulation clock, in unit time (one unit = one minute,
/// so a 24-hour run spans 1440 units).
///
/// Always finite and non-negative, which makes the ordering total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    /// Panics if `value` is negative, NaN, or infinite.
    pub fn new(value: f64) -> Self {
        assert!(
            value.is_finite() && value >= 0.0,
            "simulation time must be finite and non-negative, got {value}"
        );
        SimTime(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Eq for SimTime {}

impl Ord for SimTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for SimTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<f64> for SimTime {
    type Output = SimTime;

    fn add(self, delta: f64) -> SimTime {
        SimTime::new(self.0 + delta)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A popped calendar entry: timestamp, insertion sequence number, payload.
#[derive(Debug, Clone)]
pub struct EventRecord<P> {
    pub time: SimTime,
    pub seq: u64,
    pub payload: P,
}

/// Identifies an event inserted by [`EventCalendar::schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventHandle {
    pub time: SimTime,
    pub seq: u64,
}

struct Pending<P> {
    time: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Pending<P> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl<P> Eq for Pending<P> {}

impl<P> Ord for Pending<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

impl<P> PartialOrd for Pending<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The future event set. Pop order is lexicographic on `(time, seq)`:
/// earliest time first, FIFO among ties.
pub struct EventCalendar<P> {
    pending: BinaryHeap<Reverse<Pending<P>>>,
    now: SimTime,
    next_seq: u64,
}

impl<P> EventCalendar<P> {
    pub fn new() -> Self {
        EventCalendar {
            pending: BinaryHeap::new(),
            now: SimTime::ZERO,
            next_seq: 0,
        }
    }

    /// Current simulation time: the timestamp of the most recently popped
    /// event, or zero before the first pop.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Inserts an event. Panics if `time` lies in the past; that is always
    /// a programming error in the caller.
    pub fn schedule(&mut self, time: SimTime, payload: P) -> EventHandle {
        assert!(
            time >= self.now,
            "scheduled an event in the past: t={time} < now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.push(Reverse(Pending { time, seq, payload }));
        EventHandle { time, seq }
    }

    /// Removes and returns the next event, advancing the clock to its
    /// timestamp. An exhausted calendar returns `None` and leaves the
    /// clock unchanged.
    pub fn pop_next(&mut self) -> Option<EventRecord<P>> {
        let Reverse(entry) = self.pending.pop()?;
        self.now = entry.time;
        Some(EventRecord {
            time: entry.time,
            seq: entry.seq,
            payload: entry.payload,
        })
    }

    /// Timestamp of the next event without popping it.
    pub fn peek_next_time(&self) -> Option<SimTime> {
        self.pending.peek().map(|Reverse(entry)| entry.time)
    }
}

impl<P> Default for EventCalendar<P> {
    fn default() -> Self {
        Self::new()
    }
}

/// Error raised when constructing an invalid uniform distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum DistError {
    /// `low` exceeds `high`.
    Bounds {
        low: f64,
        high: f64,
    },
    /// Negative durations are meaningless for this model.
    Negative {
        low: f64,
    },
    NonFinite,
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistError::Bounds { low, high } => {
                write!(f, "uniform bounds out of order: low {low} > high {high}")
            }
            DistError::Negative { low } => {
                write!(f, "uniform low bound must be non-negative, got {low}")
            }
            DistError::NonFinite => write!(f, "uniform bounds must be finite"),
        }
    }
}

impl std::error::Error for DistError {}

/// Continuous uniform distribution over `[low, high)`. `low == high` is
/// allowed and degenerates to a point mass at `low`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformDist {
    low: f64,
    high: f64,
}

impl UniformDist {
    /// Validates bounds up front so sampling never has to.
    pub fn new(low: f64, high: f64) -> Result<Self, DistError> {
        if !low.is_finite() || !high.is_finite() {
            return Err(DistError::NonFinite);
        }
        if low < 0.0 {
            return Err(DistError::Negative { low });
        }
        if low > high {
            return Err(DistError::Bounds { low, high });
        }
        Ok(UniformDist { low, high })
    }

    pub fn low(self) -> f64 {
        self.low
    }

    pub fn high(self) -> f64 {
        self.high
    }

    pub fn mean(self) -> f64 {
        (self.low + self.high) / 2.0
    }

    /// Draws one value in `[low, high)`; a degenerate distribution returns
    /// `low` exactly.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.low == self.high {
            return self.low;
        }
        // The resample guards against the rare rounding case where
        // low + (high - low) * u lands exactly on high.
        loop {
            let v = self.low + (self.high - self.low) * rng.gen::<f64>();
            if v < self.high {
                return v;
            }
        }
    }
}

impl fmt::Display for UniformDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U({}, {})", self.low, self.high)
    }
}

/// Named random-number substreams, one per stochastic source in the model
/// (machine-1 print time, machine-2 print time, assembly time).
///
/// Each substream is a ChaCha8 generator keyed by
/// `(master seed, replication, source tag, label)`, so identical triples
/// reproduce identical sample sequences and distinct sources never share
/// a sequence. An empty label yields the common-random-number streams
/// shared across compared configurations.
pub struct RngStreams {
    print: [ChaCha8Rng; 2],
    assembly: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        Self::with_label(master_seed, replication, "")
    }

    pub fn with_label(master_seed: u64, replication: u64, label: &str) -> Self {
        RngStreams {
            print: [
                derive_stream(master_seed, replication, "pt1", label),
                derive_stream(master_seed, replication, "pt2", label),
            ],
            assembly: derive_stream(master_seed, replication, "at", label),
        }
    }

    /// Print-time stream for machine index 0 or 1.
    pub fn print_stream(&mut self, machine: usize) -> &mut ChaCha8Rng {
        &mut self.print[machine]
    }

    pub fn assembly_stream(&mut self) -> &mut ChaCha8Rng {
        &mut self.assembly
    }
}

fn derive_stream(master_seed: u64, replication: u64, source: &str, label: &str) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&replication.to_le_bytes());
    for (dst, src) in key[16..24].iter_mut().zip(source.bytes()) {
        *dst = src;
    }
    for (dst, src) in key[24..].iter_mut().zip(label.bytes()) {
        *dst = src;
    }
    ChaCha8Rng::from_seed(key)
}
