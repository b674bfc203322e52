//! Deterministic multi-rate simulation kernel.
//!
//! The engine advances a fixed base-step clock. At every tick, subsystems
//! whose period divides the tick step in registration order against the bus
//! state committed at the previous tick; their outputs are staged and
//! committed together once every due subsystem has stepped. This gives a
//! fixed, unambiguous execution order and a one-tick visibility delay
//! between producers and consumers.

use thiserror::Error;

use crate::bus::{BusError, CoordinationBus, InputView, OutputBuffer};
use crate::signal::{ChannelId, ChannelSpec};

/// Fixed-step clock. Internally integer ticks so `now` is always an exact
/// multiple of the base step and never drifts.
#[derive(Debug, Clone)]
pub struct SimClock {
    base_step: f64,
    end_tick: u64,
    tick: u64,
}

impl SimClock {
    pub fn new(base_step: f64, end_time: f64) -> Result<Self, RegistrationError> {
        if !base_step.is_finite() || base_step <= 0.0 {
            return Err(RegistrationError::InvalidBaseStep(base_step));
        }
        if !end_time.is_finite() || end_time < 0.0 {
            return Err(RegistrationError::InvalidEndTime(end_time));
        }
        let end_tick =
            ticks_of(end_time, base_step).ok_or(RegistrationError::EndTimeNotOnGrid {
                end_time,
                base_step,
            })?;
        Ok(Self {
            base_step,
            end_tick,
            tick: 0,
        })
    }

    pub fn now(&self) -> f64 {
        self.tick as f64 * self.base_step
    }

    pub fn base_step(&self) -> f64 {
        self.base_step
    }

    pub fn end_time(&self) -> f64 {
        self.end_tick as f64 * self.base_step
    }
}

/// Number of base ticks in `period`, if it is an integral multiple.
fn ticks_of(period: f64, base_step: f64) -> Option<u64> {
    let ratio = period / base_step;
    let ticks = ratio.round();
    if (ratio - ticks).abs() < 1e-9 && ticks >= 0.0 {
        Some(ticks as u64)
    } else {
        None
    }
}

/// Static registration record for one subsystem: identity, step period, and
/// the channels it consumes and produces.
#[derive(Debug, Clone)]
pub struct SubsystemDescriptor {
    pub id: String,
    pub step_period: f64,
    pub input_channels: Vec<ChannelId>,
    pub output_channels: Vec<ChannelId>,
}

#[derive(Debug, Error)]
pub enum RegistrationError {
    #[error("base step {0} must be positive and finite")]
    InvalidBaseStep(f64),
    #[error("end time {0} must be non-negative and finite")]
    InvalidEndTime(f64),
    #[error("end time {end_time} is not a multiple of base step {base_step}")]
    EndTimeNotOnGrid { end_time: f64, base_step: f64 },
    #[error("duplicate subsystem id `{0}`")]
    DuplicateId(String),
    #[error("subsystem `{id}`: step period {period} is not a positive multiple of base step {base_step}")]
    NonIntegralPeriod {
        id: String,
        period: f64,
        base_step: f64,
    },
    #[error("subsystem `{id}` declares the same channel twice")]
    DuplicateChannelUse { id: String },
    #[error("channel `{channel}` produced by both `{first}` and `{second}`")]
    MultipleProducers {
        channel: String,
        first: String,
        second: String,
    },
    #[error("input channel `{channel}` of `{consumer}` has no producer")]
    MissingProducer { channel: String, consumer: String },
    #[error(transparent)]
    Bus(#[from] BusError),
}

/// Error raised by a subsystem while stepping.
#[derive(Debug, Error)]
pub enum StepError {
    #[error("non-finite state: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error("{0}")]
    Model(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("subsystem `{id}` failed at t={time}s: {source}")]
    SubsystemStep {
        id: String,
        time: f64,
        source: StepError,
    },
    #[error("routing not finalized before run")]
    NotFinalized,
    #[error(transparent)]
    Registration(#[from] RegistrationError),
}

/// A simulation participant. Implementations hold their own state and read
/// inputs / stage outputs through the channel ids in their descriptor.
pub trait Subsystem {
    fn descriptor(&self) -> &SubsystemDescriptor;

    /// Advance internal dynamics by one period. `inputs` exposes the fused
    /// (latest-value) view of the bus as committed at the previous tick.
    fn step(&mut self, inputs: &InputView<'_>, out: &mut OutputBuffer) -> Result<(), StepError>;
}

struct Registered {
    subsystem: Box<dyn Subsystem>,
    period_ticks: u64,
}

/// Simulation engine: clock, subsystem registry, and the coordination bus.
pub struct Engine {
    clock: SimClock,
    bus: CoordinationBus,
    subsystems: Vec<Registered>,
    finalized: bool,
}

impl Engine {
    pub fn new(clock: SimClock) -> Self {
        Self {
            clock,
            bus: CoordinationBus::new(),
            subsystems: Vec::new(),
            finalized: false,
        }
    }

    pub fn bus(&self) -> &CoordinationBus {
        &self.bus
    }

    pub fn clock(&self) -> &SimClock {
        &self.clock
    }

    pub fn declare_channel(&mut self, spec: ChannelSpec) -> Result<ChannelId, RegistrationError> {
        Ok(self.bus.declare(spec)?)
    }

    /// Register a subsystem. Subsystems step in registration order, which is
    /// therefore the deterministic execution order within a tick.
    pub fn register(&mut self, subsystem: Box<dyn Subsystem>) -> Result<usize, RegistrationError> {
        let desc = subsystem.descriptor().clone();
        if self
            .subsystems
            .iter()
            .any(|r| r.subsystem.descriptor().id == desc.id)
        {
            return Err(RegistrationError::DuplicateId(desc.id));
        }
        let period_ticks = ticks_of(desc.step_period, self.clock.base_step)
            .filter(|&t| t > 0)
            .ok_or_else(|| RegistrationError::NonIntegralPeriod {
                id: desc.id.clone(),
                period: desc.step_period,
                base_step: self.clock.base_step,
            })?;
        let mut seen = desc.input_channels.clone();
        seen.extend(&desc.output_channels);
        seen.sort_unstable();
        let before = seen.len();
        seen.dedup();
        if seen.len() != before {
            return Err(RegistrationError::DuplicateChannelUse { id: desc.id });
        }
        let index = self.subsystems.len();
        self.subsystems.push(Registered {
            subsystem,
            period_ticks,
        });
        self.finalized = false;
        Ok(index)
    }

    /// Build the routing table and check it is total: every channel has at
    /// most one producer and every declared input has exactly one.
    pub fn finalize(&mut self) -> Result<(), RegistrationError> {
        for index in 0..self.subsystems.len() {
            let desc = self.subsystems[index].subsystem.descriptor().clone();
            for &ch in &desc.output_channels {
                if let Some(existing) = self.bus.producer_of(ch) {
                    if existing != index {
                        return Err(RegistrationError::MultipleProducers {
                            channel: self.bus.spec(ch).name.clone(),
                            first: self.subsystems[existing].subsystem.descriptor().id.clone(),
                            second: desc.id.clone(),
                        });
                    }
                }
                self.bus.set_producer(ch, index);
            }
        }
        for index in 0..self.subsystems.len() {
            let desc = self.subsystems[index].subsystem.descriptor().clone();
            for &ch in &desc.input_channels {
                if self.bus.producer_of(ch).is_none() {
                    return Err(RegistrationError::MissingProducer {
                        channel: self.bus.spec(ch).name.clone(),
                        consumer: desc.id,
                    });
                }
                self.bus.add_consumer(ch, index);
            }
        }
        self.finalized = true;
        Ok(())
    }

    /// Run from t=0 to the clock's end time. `observe` is called after the
    /// commit of every tick (including tick 0) with the tick index, the time,
    /// and the bus; recorders hang off this hook.
    pub fn run(
        &mut self,
        mut observe: impl FnMut(u64, f64, &CoordinationBus),
    ) -> Result<(), RunError> {
        if !self.finalized {
            return Err(RunError::NotFinalized);
        }
        let mut staged = OutputBuffer::for_bus(&self.bus);
        for tick in 0..=self.clock.end_tick {
            self.clock.tick = tick;
            let now = self.clock.now();
            for (index, reg) in self.subsystems.iter_mut().enumerate() {
                if tick % reg.period_ticks != 0 {
                    continue;
                }
                staged.begin_step(index, now);
                let view = InputView::new(&self.bus, now);
                reg.subsystem.step(&view, &mut staged).map_err(|source| {
                    RunError::SubsystemStep {
                        id: reg.subsystem.descriptor().id.clone(),
                        time: now,
                        source,
                    }
                })?;
            }
            self.bus.commit(&mut staged);
            observe(tick, now, &self.bus);
        }
        Ok(())
    }
}

/// Full time series produced by one scenario run plus the schema it follows.
/// Rows are appended by the recorder at the configured output period.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<crate::scenario::TimeSeriesRecord>,
    pub seed: u64,
    pub end_time: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SignalKind;

    struct Counter {
        desc: SubsystemDescriptor,
        out: ChannelId,
        count: f64,
    }

    impl Subsystem for Counter {
        fn descriptor(&self) -> &SubsystemDescriptor {
            &self.desc
        }
        fn step(
            &mut self,
            _inputs: &InputView<'_>,
            out: &mut OutputBuffer,
        ) -> Result<(), StepError> {
            self.count += 1.0;
            out.stage(self.out, &[self.count])?;
            Ok(())
        }
    }

    struct Echo {
        desc: SubsystemDescriptor,
        input: ChannelId,
        out: ChannelId,
    }

    impl Subsystem for Echo {
        fn descriptor(&self) -> &SubsystemDescriptor {
            &self.desc
        }
        fn step(
            &mut self,
            inputs: &InputView<'_>,
            out: &mut OutputBuffer,
        ) -> Result<(), StepError> {
            let v = inputs.scalar(self.input);
            out.stage(self.out, &[v])?;
            Ok(())
        }
    }

    fn scalar_spec(name: &str, init: f64) -> ChannelSpec {
        ChannelSpec::new(name, SignalKind::Physical, vec!["-"], vec![init])
    }

    fn counter(id: &str, period: f64, out: ChannelId) -> Box<Counter> {
        Box::new(Counter {
            desc: SubsystemDescriptor {
                id: id.into(),
                step_period: period,
                input_channels: vec![],
                output_channels: vec![out],
            },
            out,
            count: 0.0,
        })
    }

    #[test]
    fn accepts_integral_period() {
        let mut engine = Engine::new(SimClock::new(0.1, 1.0).unwrap());
        let ch = engine.declare_channel(scalar_spec("c", 0.0)).unwrap();
        assert!(engine.register(counter("ie", 1.0, ch)).is_ok());
    }

    #[test]
    fn rejects_duplicate_id() {
        let mut engine = Engine::new(SimClock::new(0.1, 1.0).unwrap());
        let a = engine.declare_channel(scalar_spec("a", 0.0)).unwrap();
        let b = engine.declare_channel(scalar_spec("b", 0.0)).unwrap();
        engine.register(counter("ECLSS", 1.0, a)).unwrap();
        let err = engine.register(counter("ECLSS", 1.0, b));
        assert!(matches!(err, Err(RegistrationError::DuplicateId(id)) if id == "ECLSS"));
    }

    #[test]
    fn rejects_non_integral_period() {
        let mut engine = Engine::new(SimClock::new(0.1, 1.0).unwrap());
        let ch = engine.declare_channel(scalar_spec("c", 0.0)).unwrap();
        let err = engine.register(counter("x", 0.25, ch));
        assert!(matches!(
            err,
            Err(RegistrationError::NonIntegralPeriod { .. })
        ));
    }

    #[test]
    fn missing_producer_reported_at_finalize() {
        let mut engine = Engine::new(SimClock::new(0.1, 1.0).unwrap());
        let a = engine.declare_channel(scalar_spec("a", 0.0)).unwrap();
        let orphan = engine.declare_channel(scalar_spec("orphan", 0.0)).unwrap();
        let echo = Box::new(Echo {
            desc: SubsystemDescriptor {
                id: "echo".into(),
                step_period: 1.0,
                input_channels: vec![orphan],
                output_channels: vec![a],
            },
            input: orphan,
            out: a,
        });
        engine.register(echo).unwrap();
        let err = engine.finalize();
        assert!(matches!(
            err,
            Err(RegistrationError::MissingProducer { channel, .. }) if channel == "orphan"
        ));
    }

    #[test]
    fn single_producer_enforced() {
        let mut engine = Engine::new(SimClock::new(0.1, 1.0).unwrap());
        let ch = engine.declare_channel(scalar_spec("shared", 0.0)).unwrap();
        engine.register(counter("p1", 1.0, ch)).unwrap();
        engine.register(counter("p2", 1.0, ch)).unwrap();
        assert!(matches!(
            engine.finalize(),
            Err(RegistrationError::MultipleProducers { .. })
        ));
    }

    #[test]
    fn schedule_step_count() {
        // A subsystem with period p steps exactly floor(end/p) + 1 times.
        let mut engine = Engine::new(SimClock::new(0.1, 10.0).unwrap());
        let a = engine.declare_channel(scalar_spec("a", 0.0)).unwrap();
        let b = engine.declare_channel(scalar_spec("b", 0.0)).unwrap();
        engine.register(counter("fast", 0.5, a)).unwrap();
        engine.register(counter("slow", 3.0, b)).unwrap();
        engine.finalize().unwrap();
        engine.run(|_, _, _| {}).unwrap();
        assert_eq!(engine.bus.fused(a).0, &[21.0]); // floor(10/0.5)+1
        assert_eq!(engine.bus.fused(b).0, &[4.0]); // floor(10/3)+1
    }

    #[test]
    fn one_tick_visibility_delay_and_hold() {
        let mut engine = Engine::new(SimClock::new(1.0, 3.0).unwrap());
        let src = engine.declare_channel(scalar_spec("src", 0.0)).unwrap();
        let echoed = engine.declare_channel(scalar_spec("echo", -1.0)).unwrap();
        engine.register(counter("producer", 1.0, src)).unwrap();
        engine
            .register(Box::new(Echo {
                desc: SubsystemDescriptor {
                    id: "consumer".into(),
                    step_period: 1.0,
                    input_channels: vec![src],
                    output_channels: vec![echoed],
                },
                input: src,
                out: echoed,
            }))
            .unwrap();
        engine.finalize().unwrap();
        let mut seen = Vec::new();
        engine
            .run(|_, now, bus| seen.push((now, bus.fused(src).0[0], bus.fused(echoed).0[0])))
            .unwrap();
        // At tick t the consumer echoes the producer value committed at t-1.
        assert_eq!(
            seen,
            vec![
                (0.0, 1.0, 0.0),
                (1.0, 2.0, 1.0),
                (2.0, 3.0, 2.0),
                (3.0, 4.0, 3.0),
            ]
        );
    }

    #[test]
    fn zero_horizon_runs_single_tick() {
        let mut engine = Engine::new(SimClock::new(0.1, 0.0).unwrap());
        let ch = engine.declare_channel(scalar_spec("c", 0.0)).unwrap();
        engine.register(counter("only", 1.0, ch)).unwrap();
        engine.finalize().unwrap();
        let mut ticks = 0;
        engine.run(|_, _, _| ticks += 1).unwrap();
        assert_eq!(ticks, 1);
        assert_eq!(engine.clock.now(), 0.0);
    }

    #[test]
    fn step_error_carries_id_and_time() {
        struct Failing {
            desc: SubsystemDescriptor,
        }
        impl Subsystem for Failing {
            fn descriptor(&self) -> &SubsystemDescriptor {
                &self.desc
            }
            fn step(
                &mut self,
                inputs: &InputView<'_>,
                _out: &mut OutputBuffer,
            ) -> Result<(), StepError> {
                if inputs.now >= 2.0 {
                    Err(StepError::NonFinite("temperature".into()))
                } else {
                    Ok(())
                }
            }
        }
        let mut engine = Engine::new(SimClock::new(1.0, 5.0).unwrap());
        engine
            .register(Box::new(Failing {
                desc: SubsystemDescriptor {
                    id: "ie".into(),
                    step_period: 1.0,
                    input_channels: vec![],
                    output_channels: vec![],
                },
            }))
            .unwrap();
        engine.finalize().unwrap();
        let err = engine.run(|_, _, _| {}).unwrap_err();
        match err {
            RunError::SubsystemStep { id, time, .. } => {
                assert_eq!(id, "ie");
                assert_eq!(time, 2.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
