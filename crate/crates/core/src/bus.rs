//! Coordination bus: the mediator that fuses and routes every signal frame.
//!
//! Subsystems never talk to each other directly. Producers stage values into
//! an output buffer while a tick executes; the engine commits the buffer to
//! the latest-value store once all due subsystems have stepped, so consumers
//! observe producer outputs with a one-tick delay and a zero-order hold in
//! between. Each channel has exactly one producer, checked when routing is
//! finalized.

use std::collections::HashMap;

use thiserror::Error;

use crate::signal::{ChannelId, ChannelSpec, SignalFrame, SignalKind};

#[derive(Debug, Error, PartialEq)]
pub enum BusError {
    #[error("channel `{0}` declared twice")]
    DuplicateChannel(String),
    #[error("channel `{channel}`: staged {got} values, declared arity {want}")]
    ArityMismatch {
        channel: String,
        got: usize,
        want: usize,
    },
    #[error("channel `{channel}` staged by `{actual}` but produced by `{expected}`")]
    WrongProducer {
        channel: String,
        expected: String,
        actual: String,
    },
}

#[derive(Debug, Clone)]
struct Slot {
    values: Vec<f64>,
    /// `None` until the producer publishes for the first time.
    timestamp: Option<f64>,
}

/// Latest-value store plus routing table.
#[derive(Debug)]
pub struct CoordinationBus {
    specs: Vec<ChannelSpec>,
    by_name: HashMap<String, ChannelId>,
    latest: Vec<Slot>,
    /// Producing subsystem index per channel, filled in by the engine when
    /// routing is finalized.
    producer: Vec<Option<usize>>,
    /// Consumer subsystem indices per channel.
    consumers: Vec<Vec<usize>>,
}

impl CoordinationBus {
    pub fn new() -> Self {
        Self {
            specs: Vec::new(),
            by_name: HashMap::new(),
            latest: Vec::new(),
            producer: Vec::new(),
            consumers: Vec::new(),
        }
    }

    pub fn declare(&mut self, spec: ChannelSpec) -> Result<ChannelId, BusError> {
        if self.by_name.contains_key(&spec.name) {
            return Err(BusError::DuplicateChannel(spec.name));
        }
        let id = ChannelId(self.specs.len());
        self.by_name.insert(spec.name.clone(), id);
        self.latest.push(Slot {
            values: spec.initial.clone(),
            timestamp: None,
        });
        self.specs.push(spec);
        self.producer.push(None);
        self.consumers.push(Vec::new());
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<ChannelId> {
        self.by_name.get(name).copied()
    }

    pub fn spec(&self, id: ChannelId) -> &ChannelSpec {
        &self.specs[id.0]
    }

    pub fn channel_count(&self) -> usize {
        self.specs.len()
    }

    /// Latest fused view of one channel: the most recently committed values
    /// (zero-order hold) or the declared initial value if nothing has been
    /// published yet.
    pub fn fused(&self, id: ChannelId) -> (&[f64], Option<f64>) {
        let slot = &self.latest[id.0];
        (&slot.values, slot.timestamp)
    }

    /// Convenience scalar accessor for arity-1 channels.
    pub fn fused_scalar(&self, id: ChannelId) -> f64 {
        self.latest[id.0].values[0]
    }

    /// Fuse the frames destined to one subsystem: exactly one entry per
    /// declared input channel, each the latest published value (or the
    /// declared initial value when nothing has been published yet).
    pub fn fuse<'a>(
        &'a self,
        input_channels: &[ChannelId],
    ) -> Vec<(ChannelId, &'a [f64], Option<f64>)> {
        input_channels
            .iter()
            .map(|&id| {
                let (values, ts) = self.fused(id);
                (id, values, ts)
            })
            .collect()
    }

    /// Assemble the latest value of a channel as a full frame (test and
    /// recorder convenience; the hot path reads slices via `fused`).
    pub fn latest_frame(&self, id: ChannelId, producer_id: &str) -> SignalFrame {
        let spec = &self.specs[id.0];
        let slot = &self.latest[id.0];
        SignalFrame {
            source: producer_id.to_string(),
            channel: spec.name.clone(),
            kind: spec.kind,
            values: slot.values.clone(),
            timestamp: slot.timestamp.unwrap_or(0.0),
        }
    }

    pub(crate) fn set_producer(&mut self, id: ChannelId, subsystem: usize) {
        self.producer[id.0] = Some(subsystem);
    }

    pub(crate) fn producer_of(&self, id: ChannelId) -> Option<usize> {
        self.producer[id.0]
    }

    pub(crate) fn add_consumer(&mut self, id: ChannelId, subsystem: usize) {
        if !self.consumers[id.0].contains(&subsystem) {
            self.consumers[id.0].push(subsystem);
        }
    }

    pub fn consumers_of(&self, id: ChannelId) -> &[usize] {
        &self.consumers[id.0]
    }

    /// Commit staged outputs. Timestamps are monotone per channel because the
    /// engine clock only moves forward; debug builds assert it.
    pub(crate) fn commit(&mut self, staged: &mut OutputBuffer) {
        for &id in &staged.dirty {
            let slot = &mut self.latest[id.0];
            let st = &mut staged.slots[id.0];
            debug_assert!(slot.timestamp.is_none_or(|t| st.timestamp >= t));
            slot.values.copy_from_slice(&st.values);
            slot.timestamp = Some(st.timestamp);
            st.pending = false;
        }
        staged.dirty.clear();
    }
}

impl Default for CoordinationBus {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
struct StagedSlot {
    values: Vec<f64>,
    timestamp: f64,
    pending: bool,
}

/// Per-tick staging area for producer outputs. Pre-sized per channel so the
/// steady-state loop performs no allocation.
#[derive(Debug)]
pub struct OutputBuffer {
    slots: Vec<StagedSlot>,
    dirty: Vec<ChannelId>,
    names: Vec<String>,
    producer: Vec<Option<usize>>,
    /// Subsystem currently stepping; set by the engine before each step.
    current: usize,
    now: f64,
}

impl OutputBuffer {
    pub(crate) fn for_bus(bus: &CoordinationBus) -> Self {
        Self {
            slots: bus
                .specs
                .iter()
                .map(|s| StagedSlot {
                    values: vec![0.0; s.arity()],
                    timestamp: 0.0,
                    pending: false,
                })
                .collect(),
            dirty: Vec::with_capacity(bus.specs.len()),
            names: bus.specs.iter().map(|s| s.name.clone()).collect(),
            producer: bus.producer.clone(),
            current: usize::MAX,
            now: 0.0,
        }
    }

    pub(crate) fn begin_step(&mut self, subsystem: usize, now: f64) {
        self.current = subsystem;
        self.now = now;
    }

    /// Stage one frame's values for `channel`. The frame becomes visible to
    /// consumers when the engine commits at the end of the tick.
    pub fn stage(&mut self, channel: ChannelId, values: &[f64]) -> Result<(), BusError> {
        let slot = &mut self.slots[channel.0];
        if values.len() != slot.values.len() {
            return Err(BusError::ArityMismatch {
                channel: self.names[channel.0].clone(),
                got: values.len(),
                want: slot.values.len(),
            });
        }
        if let Some(expected) = self.producer[channel.0] {
            if expected != self.current {
                return Err(BusError::WrongProducer {
                    channel: self.names[channel.0].clone(),
                    expected: format!("#{expected}"),
                    actual: format!("#{}", self.current),
                });
            }
        }
        slot.values.copy_from_slice(values);
        slot.timestamp = self.now;
        if !slot.pending {
            slot.pending = true;
            self.dirty.push(channel);
        }
        Ok(())
    }
}

/// Read-only fused input view handed to a subsystem while it steps.
pub struct InputView<'a> {
    bus: &'a CoordinationBus,
    pub now: f64,
}

impl<'a> InputView<'a> {
    pub(crate) fn new(bus: &'a CoordinationBus, now: f64) -> Self {
        Self { bus, now }
    }

    /// Latest-value (zero-order hold) fusion of one input channel. Channels
    /// never yet produced resolve to their declared initial value.
    pub fn get(&self, id: ChannelId) -> &[f64] {
        self.bus.fused(id).0
    }

    pub fn scalar(&self, id: ChannelId) -> f64 {
        self.bus.fused_scalar(id)
    }

    pub fn timestamp(&self, id: ChannelId) -> Option<f64> {
        self.bus.fused(id).1
    }

    pub fn kind(&self, id: ChannelId) -> SignalKind {
        self.bus.spec(id).kind
    }
}
