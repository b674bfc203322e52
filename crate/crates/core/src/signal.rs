//! Signal frames and channel descriptions exchanged over the coordination bus.

use serde::{Deserialize, Serialize};

/// Classification of a bus channel. Physical values feed equations, cyber
/// values emulate sensor/controller traffic, and the remaining kinds carry
/// the hazard, damage, health, and repair flows between subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Physical,
    Cyber,
    Disturbance,
    Damage,
    Health,
    Repair,
}

/// Index of a declared channel on the bus. Stable for the lifetime of the
/// engine that declared it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId(pub(crate) usize);

impl ChannelId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Static description of one channel: name, kind, value arity with units,
/// and the value consumers observe before the producer's first step.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub name: String,
    pub kind: SignalKind,
    /// Unit label per value slot; length fixes the channel arity.
    pub units: Vec<&'static str>,
    /// Value resolved by `fuse` while no frame has been published yet.
    pub initial: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(
        name: impl Into<String>,
        kind: SignalKind,
        units: Vec<&'static str>,
        initial: Vec<f64>,
    ) -> Self {
        let spec = Self {
            name: name.into(),
            kind,
            units,
            initial,
        };
        assert_eq!(
            spec.units.len(),
            spec.initial.len(),
            "channel {}: initial value arity mismatch",
            spec.name
        );
        spec
    }

    pub fn arity(&self) -> usize {
        self.units.len()
    }
}

/// One timestamped value bundle as observed on the bus.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    /// Id of the producing subsystem.
    pub source: String,
    pub channel: String,
    pub kind: SignalKind,
    pub values: Vec<f64>,
    /// Clock time at which the producing subsystem last stepped.
    pub timestamp: f64,
}
